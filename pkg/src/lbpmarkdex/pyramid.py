"""Three-level Gaussian pyramid for grayscale images.

Level 0 is the input. Each further level halves both dimensions (ceil
division) by smoothing with the separable binomial kernel
(1, 4, 6, 4, 1) / 16 and keeping every second sample. Rows and columns
beyond the image are handled by replicating the nearest edge pixel. The
two 1-D passes are fused into one 5x5 integer convolution with weight sum
256 and a single final round-half-up, so results carry no intermediate
rounding bias.
"""

from __future__ import annotations

import numpy as np

from .errors import ImageTooSmall
from .image_io import GrayImage

_KERNEL_1D = np.array([1, 4, 6, 4, 1], dtype=np.int64)
LEVELS = 3


def reduce_once(img: GrayImage) -> GrayImage:
    """Smooth with the binomial kernel and decimate by two along each axis.

    Output pixel (i, j) is centered on input pixel (2i, 2j); output shape
    is (ceil(h / 2), ceil(w / 2)).
    """
    if img.width < 2 or img.height < 2:
        raise ImageTooSmall(f"cannot halve a {img.width}x{img.height} image")
    p = img.pixels.astype(np.int64)
    padded = np.pad(p, 2, mode="edge")
    h, w = p.shape
    acc = np.zeros((h, w), dtype=np.int64)
    for ky in range(5):
        row_slice = padded[ky : ky + h]
        for kx in range(5):
            acc += _KERNEL_1D[ky] * _KERNEL_1D[kx] * row_slice[:, kx : kx + w]
    smoothed = (acc + 128) // 256
    return GrayImage(smoothed[::2, ::2].astype(np.uint8))


def build_pyramid(img: GrayImage) -> list[GrayImage]:
    """Return the three pyramid levels [original, half, quarter].

    Raises ImageTooSmall when the coarsest level would lose its interior
    pixels (either input side shorter than 9, making a level-2 side < 3).
    """
    if (img.width + 3) // 4 < 3 or (img.height + 3) // 4 < 3:
        raise ImageTooSmall(
            f"{img.width}x{img.height} is too small for a {LEVELS}-level pyramid; "
            "both sides must be at least 9"
        )
    levels = [img]
    for _ in range(LEVELS - 1):
        levels.append(reduce_once(levels[-1]))
    return levels
