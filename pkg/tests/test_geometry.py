import math

import numpy as np
import pytest

from stabilcert.exceptions import InputError
from stabilcert.models import IndexSet
from stabilcert.utils.geometry import (
    cutoff_partition_norm,
    cutoff_psi0,
    lp_norm,
    psi_multiply,
    relative_separation,
    window_mask,
)

WINDOW = IndexSet.integer_window(-20, 20)


@pytest.mark.parametrize("points, expected", [
    (list(range(-5, 6)), 1),
    ([0.0, 0.25, 0.5], 3),
    ([0.0, 1.5, 3.0], 1),
    ([0.0, 0.5, 1.0], 2),
])
def test_relative_separation(points, expected):
    assert relative_separation(points, dim=1) == expected


def test_relative_separation_two_dimensional():
    points = [(0.0, 0.0), (0.3, 0.3), (0.9, 1.2), (5.0, 5.0)]
    assert relative_separation(points, dim=2) == 2


def test_relative_separation_rejects_non_finite():
    with pytest.raises(InputError):
        relative_separation([0.0, math.inf], dim=1)


@pytest.mark.parametrize("x, expected", [(0.0, 1.0), (1.0, 0.0), (0.75, 0.5), (-0.5, 1.0), (2.0, 0.0)])
def test_cutoff_psi0_values(x, expected):
    assert cutoff_psi0(x) == pytest.approx(expected, abs=1e-15)


def test_cutoff_psi0_product_form():
    assert cutoff_psi0([0.75, 0.625]) == pytest.approx(0.5 * 0.75)


def test_cutoff_psi0_sandwich_and_lipschitz(rng):
    grid = np.linspace(-1.5, 1.5, 301)
    for x in grid:
        value = cutoff_psi0(x)
        assert (1.0 if abs(x) <= 0.5 else 0.0) <= value <= (1.0 if abs(x) < 1 else 0.0)
    for _ in range(200):
        x, y = rng.uniform(-1.5, 1.5, size=2), rng.uniform(-1.5, 1.5, size=2)
        assert abs(cutoff_psi0(x) - cutoff_psi0(y)) <= 2 * 2 * np.max(np.abs(x - y)) + 1e-12


def test_window_mask_open_box():
    delta0 = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
    points = IndexSet.integer_window(-2, 2)
    np.testing.assert_array_equal(window_mask(points, delta0, 0, 1), delta0)
    delta1 = np.array([0.0, 0.0, 0.0, 1.0, 0.0])
    np.testing.assert_array_equal(window_mask(points, delta1, 0, 1), np.zeros(5))
    np.testing.assert_array_equal(window_mask(points, np.ones(5), 0, 2), [0, 1, 1, 1, 0])


def test_window_mask_is_idempotent(rng):
    c = rng.normal(size=len(WINDOW))
    once = window_mask(WINDOW, c, 4, 3)
    np.testing.assert_array_equal(window_mask(WINDOW, once, 4, 3), once)


def test_psi_multiply_examples(rng):
    c = rng.normal(size=len(WINDOW))
    out = psi_multiply(WINDOW, c, 5, 1)
    expected = np.zeros_like(c)
    expected[25] = c[25]
    np.testing.assert_allclose(out, expected)

    delta3 = np.zeros(len(WINDOW))
    delta3[23] = 1.0
    assert psi_multiply(WINDOW, delta3, 0, 4)[23] == pytest.approx(0.5)


def test_psi_multiply_needs_lattice_center():
    with pytest.raises(InputError):
        psi_multiply(WINDOW, np.ones(len(WINDOW)), 3, 4)


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_psi_multiply_dominated_by_window(rng, p):
    for _ in range(100):
        c = rng.normal(size=len(WINDOW))
        N = int(rng.integers(1, 8))
        n = N * int(rng.integers(-3, 4))
        assert lp_norm(psi_multiply(WINDOW, c, n, N), p) <= lp_norm(window_mask(WINDOW, c, n, N), p) + 1e-12


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_partition_inequalities(rng, p):
    for _ in range(100):
        c = rng.normal(size=len(WINDOW))
        N = int(rng.integers(1, 9))
        norm = lp_norm(c, p)
        narrow = cutoff_partition_norm(WINDOW, c, N, p)
        assert norm * (1 - 1e-12) <= narrow <= 2 ** (1 / p) * norm * (1 + 1e-12)
        wide = cutoff_partition_norm(WINDOW, c, N, p, widen=4)
        assert 4 ** (1 / p) * norm * (1 - 1e-12) <= wide <= (5 + 2 ** (1 - p)) ** (1 / p) * norm * (1 + 1e-12)


def test_partition_sup_norm(rng):
    for _ in range(100):
        c = rng.normal(size=len(WINDOW))
        N = int(rng.integers(1, 9))
        norm = lp_norm(c, math.inf)
        assert cutoff_partition_norm(WINDOW, c, N, math.inf) == pytest.approx(norm, rel=1e-12)
        assert cutoff_partition_norm(WINDOW, c, N, math.inf, widen=4) == pytest.approx(norm, rel=1e-12)
