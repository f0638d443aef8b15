"""Descriptor accumulation and normalized Euclidean distance."""

import math
from fractions import Fraction

import numpy as np
import pytest

from lbpmarkdex import (
    GrayImage,
    accumulate_histograms,
    build_pyramid,
    compute_descriptor,
    descriptor_distance,
    lbp_histogram,
)
from lbpmarkdex.errors import EmptyDescriptor, ImageTooSmall


def oracle_distance(a, b):
    """Exact-rational normalization, then high-precision Euclidean norm."""
    fa = [Fraction(int(v), int(sum(a))) for v in a]
    fb = [Fraction(int(v), int(sum(b))) for v in b]
    return math.sqrt(math.fsum(float((x - y) ** 2) for x, y in zip(fa, fb)))


class TestAccumulate:
    def test_binwise_addition(self):
        a = np.zeros(256, dtype=np.int64)
        b = np.zeros(256, dtype=np.int64)
        a[0], a[1] = 1, 2
        b[0], b[1] = 3, 4
        out = accumulate_histograms(a, b)
        assert out[0] == 4 and out[1] == 6 and out[2:].sum() == 0

    def test_zero_is_identity(self):
        rng = np.random.default_rng(31)
        h = rng.integers(0, 50, size=256)
        assert np.array_equal(accumulate_histograms(h, np.zeros(256, int)), h)

    def test_commutative(self):
        rng = np.random.default_rng(32)
        for _ in range(5):
            a = rng.integers(0, 100, size=256)
            b = rng.integers(0, 100, size=256)
            assert np.array_equal(
                accumulate_histograms(a, b), accumulate_histograms(b, a)
            )

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            accumulate_histograms(np.zeros(255, int), np.zeros(256, int))


class TestComputeDescriptor:
    def test_constant_12x12(self):
        desc = compute_descriptor(GrayImage(np.full((12, 12), 200)))
        assert desc[255] == 117
        assert desc.sum() == 117

    def test_mass_is_total_interior_count(self):
        rng = np.random.default_rng(33)
        img = GrayImage(rng.integers(0, 256, size=(25, 40)))
        levels = build_pyramid(img)
        expected = sum((lv.width - 2) * (lv.height - 2) for lv in levels)
        assert compute_descriptor(img).sum() == expected

    def test_equals_sum_of_level_histograms(self):
        rng = np.random.default_rng(34)
        img = GrayImage(rng.integers(0, 256, size=(32, 32)))
        per_level = sum(lbp_histogram(lv) for lv in build_pyramid(img))
        assert np.array_equal(compute_descriptor(img), per_level)

    def test_deterministic(self):
        rng = np.random.default_rng(35)
        img = GrayImage(rng.integers(0, 256, size=(16, 16)))
        assert np.array_equal(compute_descriptor(img), compute_descriptor(img))

    def test_too_small_propagates(self):
        with pytest.raises(ImageTooSmall):
            compute_descriptor(GrayImage(np.zeros((8, 8), dtype=np.uint8)))


class TestDistance:
    def test_self_distance_exactly_zero(self):
        rng = np.random.default_rng(36)
        img = GrayImage(rng.integers(0, 256, size=(20, 20)))
        desc = compute_descriptor(img)
        assert descriptor_distance(desc, desc) == 0.0

    def test_orthogonal_unit_masses(self):
        a = np.zeros(256, dtype=np.int64)
        b = np.zeros(256, dtype=np.int64)
        a[0] = 7
        b[1] = 3
        assert descriptor_distance(a, b) == pytest.approx(math.sqrt(2), rel=1e-15)

    def test_symmetry(self):
        rng = np.random.default_rng(37)
        a = rng.integers(0, 40, size=256)
        b = rng.integers(0, 40, size=256)
        assert descriptor_distance(a, b) == descriptor_distance(b, a)

    def test_scale_invariance_via_normalization(self):
        rng = np.random.default_rng(38)
        a = rng.integers(0, 40, size=256)
        b = rng.integers(0, 40, size=256)
        assert descriptor_distance(a * 5, b) == pytest.approx(
            descriptor_distance(a, b), rel=1e-12
        )

    def test_empty_descriptor_rejected(self):
        zero = np.zeros(256, dtype=np.int64)
        live = np.ones(256, dtype=np.int64)
        with pytest.raises(EmptyDescriptor):
            descriptor_distance(zero, live)
        with pytest.raises(EmptyDescriptor):
            descriptor_distance(live, zero)
        with pytest.raises(EmptyDescriptor):
            descriptor_distance(zero, zero)

    def test_matches_rational_oracle(self):
        rng = np.random.default_rng(39)
        for _ in range(30):
            a = rng.integers(0, 1000, size=256)
            b = rng.integers(0, 1000, size=256)
            expected = oracle_distance(a, b)
            assert descriptor_distance(a, b) == pytest.approx(expected, rel=1e-12)

    def test_triangle_inequality_spot_checks(self):
        rng = np.random.default_rng(40)
        for _ in range(20):
            a = rng.integers(1, 60, size=256)
            b = rng.integers(1, 60, size=256)
            c = rng.integers(1, 60, size=256)
            ab = descriptor_distance(a, b)
            bc = descriptor_distance(b, c)
            ac = descriptor_distance(a, c)
            assert ac <= ab + bc + 1e-12
