"""Multiresolution texture descriptors built from pyramid LBP histograms.

The descriptor of an image is the bin-wise sum of the 256-bin LBP
histograms of its three Gaussian pyramid levels. Counts are kept raw
(integers); normalization happens only inside the distance, where each
vector is scaled to unit L1 mass before taking the Euclidean distance.
Keeping raw counts makes descriptors exact, mergeable and cheap to store.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import EmptyDescriptor
from .image_io import GrayImage
from .lbp import lbp_histogram
from .pyramid import build_pyramid

BINS = 256


def accumulate_histograms(a, b) -> np.ndarray:
    """Bin-wise sum of two 256-bin histograms."""
    va = np.asarray(a, dtype=np.int64)
    vb = np.asarray(b, dtype=np.int64)
    if va.shape != (BINS,) or vb.shape != (BINS,):
        raise ValueError(f"histograms must have {BINS} bins, got {va.shape} and {vb.shape}")
    return va + vb


def compute_descriptor(img: GrayImage) -> np.ndarray:
    """256-bin descriptor of an image: summed LBP histograms of all levels.

    Returns an int64 vector. Raises ImageTooSmall (from the pyramid) when
    the image cannot support three levels.
    """
    total = np.zeros(BINS, dtype=np.int64)
    for level in build_pyramid(img):
        total = accumulate_histograms(total, lbp_histogram(level))
    return total


def _normalize(vec: np.ndarray, which: str) -> np.ndarray:
    mass = int(vec.sum())
    if mass <= 0:
        raise EmptyDescriptor(f"{which} descriptor has zero total count")
    return vec.astype(np.float64) / mass


def descriptor_distance(a, b) -> float:
    """Euclidean distance between two descriptors after L1 normalization.

    Accepts any 256-long integer sequences. Raises EmptyDescriptor when
    either vector sums to zero, OutOfRange-free otherwise: identical
    vectors give exactly 0.0.
    """
    va = np.asarray(a, dtype=np.int64)
    vb = np.asarray(b, dtype=np.int64)
    if va.shape != (BINS,) or vb.shape != (BINS,):
        raise ValueError(f"descriptors must have {BINS} bins, got {va.shape} and {vb.shape}")
    if np.array_equal(va, vb):
        # Same counts normalize to the same point; skip the float round trip.
        _normalize(va, "first")
        return 0.0
    na = _normalize(va, "first")
    nb = _normalize(vb, "second")
    return float(math.sqrt(np.sum((na - nb) ** 2)))
