import math
from fractions import Fraction

import numpy as np
import pytest

from stabilcert.exceptions import DomainError, InputError
from stabilcert.models import IndexSet, OperatorKind, OperatorSpec
from stabilcert.operators import (
    apply_operator,
    c_gamma_norm,
    c_norm,
    commutator_bound,
    commutator_cnorm,
    decay_tradeoff_bound,
    dense_matrix,
    diagonal_profile,
    entry_at,
    offset_bucket,
    truncate,
    truncation_tradeoff,
)
from stabilcert.utils.geometry import lp_norm, relative_separation


def random_lattice_spec(rng, kind=None, radius=3):
    kind = kind or rng.choice(["toeplitz", "twisted", "periodic"])
    offsets = rng.choice(np.arange(-radius, radius + 1), size=int(rng.integers(1, 2 * radius + 2)), replace=False)
    coeffs = {int(k): float(rng.normal()) for k in offsets}
    if kind == "toeplitz":
        return OperatorSpec.toeplitz(coeffs)
    if kind == "twisted":
        q = int(rng.integers(1, 6))
        return OperatorSpec.twisted(coeffs, Fraction(int(rng.integers(0, q)), q))
    return OperatorSpec.periodic_modulated(coeffs, rng.uniform(-2, 2, size=int(rng.integers(1, 4))).tolist())


def dense_example():
    return OperatorSpec.dense_window(
        IndexSet.integer_window(0, 5),
        IndexSet.integer_window(0, 4),
        [(0, 0, 2.0), (1, 0, -3.0), (5, 4, 4.0)],
    )


class TestEntries:
    def test_difference_entries(self, difference_spec):
        assert entry_at(difference_spec, 0, 1) == -1
        assert entry_at(difference_spec, 0, 0) == 1
        assert entry_at(difference_spec, 1, 0) == 0

    def test_identity_entries(self, identity_spec):
        assert entry_at(identity_spec, 3, 3) == 1
        assert entry_at(identity_spec, 3, 4) == 0

    def test_twisted_entries(self):
        spec = OperatorSpec.twisted({1: 1.0}, Fraction(1, 2))
        assert entry_at(spec, 1, 0) == 1
        assert entry_at(spec, 2, 1) == -1
        assert spec.is_real

    def test_twisted_quarter_turn_is_exact(self):
        spec = OperatorSpec.twisted({1: 1.0}, Fraction(1, 4))
        assert entry_at(spec, 2, 1) == -1j
        assert not spec.is_real

    def test_twisted_periodicity(self, rng):
        for _ in range(20):
            spec = random_lattice_spec(rng, kind="twisted")
            q = spec.period
            rows, cols = np.arange(-6, 7), np.arange(-4, 5)
            np.testing.assert_array_equal(dense_matrix(spec, rows + q, cols + q), dense_matrix(spec, rows, cols))

    def test_periodic_weights_follow_columns(self):
        spec = OperatorSpec.periodic_modulated({0: 1.0, 1: 2.0}, [1.0, 3.0])
        assert entry_at(spec, 1, 1) == 3.0
        assert entry_at(spec, 1, 0) == 2.0
        assert entry_at(spec, 2, 1) == 6.0

    def test_dense_lookup_outside_declared_sets(self):
        spec = dense_example()
        assert entry_at(spec, 1, 0) == -3.0
        assert entry_at(spec, 2, 3) == 0.0
        with pytest.raises(DomainError):
            entry_at(spec, 9, 0)

    def test_lattice_rejects_fractional_indices(self, identity_spec):
        with pytest.raises(DomainError):
            dense_matrix(identity_spec, [0.5], [0.0])


class TestNorms:
    def test_profiles(self, difference_spec):
        assert dict(diagonal_profile(difference_spec).values) == {0: 1.0, -1: 1.0}
        assert dict(diagonal_profile(dense_example()).values) == {0: 2.0, 1: 4.0}
        twisted = OperatorSpec.twisted({0: 2.0, 2: -0.5}, Fraction(2, 7))
        assert dict(diagonal_profile(twisted).values) == {0: 2.0, 2: 0.5}
        periodic = OperatorSpec.periodic_modulated({1: 2.0}, [0.5, -3.0])
        assert dict(diagonal_profile(periodic).values) == {1: 6.0}

    def test_c_norms(self, identity_spec, difference_spec, stable_spec):
        assert c_norm(identity_spec) == 1
        assert c_norm(difference_spec) == 2
        assert c_norm(stable_spec) == 5
        assert c_gamma_norm(identity_spec, 2.5) == 1
        assert c_gamma_norm(difference_spec, 1) == 3

    def test_c_gamma_tends_to_c_norm(self, rng):
        spec = random_lattice_spec(rng)
        assert c_gamma_norm(spec, 1e-12) == pytest.approx(c_norm(spec), rel=1e-9)

    def test_c_gamma_needs_positive_gamma(self, identity_spec):
        with pytest.raises(InputError):
            c_gamma_norm(identity_spec, 0)

    def test_profile_sums_to_c_norm(self, rng):
        for _ in range(50):
            spec = random_lattice_spec(rng)
            assert diagonal_profile(spec).total() == c_norm(spec)

    def test_non_integer_offsets_are_bucketed(self):
        np.testing.assert_array_equal(offset_bucket([0.5, -0.5, 0.49, 1.51, -1.5]), [0, -1, 0, 2, -2])
        spec = OperatorSpec.dense_window(
            IndexSet.from_points([0.0, 0.3]),
            IndexSet.from_points([0.0]),
            [(0, 0, 1.0), (1, 0, -2.0)],
        )
        assert dict(diagonal_profile(spec).values) == {0: 2.0}
        assert c_norm(spec) == 2.0


class TestTruncation:
    def test_examples(self, difference_spec, stable_spec):
        assert truncate(difference_spec, 1).nonzero_coeffs == {0: 1.0}
        assert c_norm(truncate(stable_spec, 0)) == 0
        assert truncate(stable_spec, 1.5).kind is OperatorKind.TOEPLITZ
        dense = truncate(dense_example(), 1)
        assert dense.entries == ((0, 0, 2.0),)

    def test_truncated_norm_is_monotone(self, rng):
        for _ in range(100):
            spec = random_lattice_spec(rng)
            norms = [c_norm(truncate(spec, s)) for s in np.linspace(0, 5, 21)]
            assert all(a <= b + 1e-15 for a, b in zip(norms, norms[1:]))
            assert norms[-1] <= c_norm(spec)
            assert c_norm(truncate(spec, spec.support_radius + 0.5)) == c_norm(spec)

    def test_tradeoff_examples(self, identity_spec, difference_spec):
        identity = truncation_tradeoff(identity_spec, 5)
        assert (identity.value, identity.argmin) == (0, 0)
        difference = truncation_tradeoff(difference_spec, 8)
        assert difference.value == pytest.approx(0.25)
        assert difference.argmin == 1

    def test_tradeoff_band_bound_and_decay(self, rng):
        for _ in range(50):
            spec = random_lattice_spec(rng, kind="toeplitz")
            k = spec.support_radius
            for N in (4, 8, 16, 32):
                value = truncation_tradeoff(spec, N).value
                assert value <= k / N * c_norm(spec) + 1e-12
                for gamma in (0.5, 1.0, 3.0):
                    assert value <= decay_tradeoff_bound(spec, gamma, N) + 1e-12

    def test_tradeoff_needs_positive_scale(self, identity_spec):
        with pytest.raises(InputError):
            truncation_tradeoff(identity_spec, 0)


class TestApplication:
    def test_difference_applied_to_delta(self, difference_spec):
        out = apply_operator(difference_spec, [0], np.array([1.0]), np.arange(-2, 3))
        np.testing.assert_array_equal(out, [0, -1, 1, 0, 0])

    def test_identity_leaves_vector(self, identity_spec, rng):
        c = rng.normal(size=7)
        np.testing.assert_array_equal(apply_operator(identity_spec, np.arange(7), c, np.arange(7)), c)

    @pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
    def test_boundedness(self, rng, p):
        cols = np.arange(-10, 11)
        rows = np.arange(-14, 15)
        for _ in range(100):
            spec = random_lattice_spec(rng)
            c = rng.normal(size=cols.size)
            image = apply_operator(spec, cols, c, rows)
            assert lp_norm(image, p) <= c_norm(spec) * lp_norm(c, p) * (1 + 1e-12)

    @pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
    def test_boundedness_on_separated_points(self, rng, p):
        row_points = IndexSet.from_points(sorted([float(j) for j in range(-6, 7)] + [j + 0.4 for j in range(-6, 7)]))
        col_points = IndexSet.from_points(sorted([float(j) for j in range(-4, 5)] + [j + 0.4 for j in range(-4, 5)]))
        R_rows, R_cols = relative_separation(row_points), relative_separation(col_points)
        assert (R_rows, R_cols) == (2, 2)
        rows, cols = row_points.coordinates(), col_points.coordinates()
        inv = 0.0 if math.isinf(p) else 1.0 / p
        for _ in range(50):
            entries = [
                (i, j, float(rng.normal()))
                for i in range(rows.size)
                for j in range(cols.size)
                if abs(rows[i] - cols[j]) <= 3 and rng.random() < 0.5
            ]
            spec = OperatorSpec.dense_window(row_points, col_points, entries)
            bound = R_rows ** inv * R_cols ** (1.0 - inv) * c_norm(spec)
            c = rng.normal(size=cols.size)
            image = apply_operator(spec, cols, c, rows)
            assert lp_norm(image, p) <= bound * lp_norm(c, p) * (1 + 1e-12)

    def test_separation_factor_is_attained(self):
        points = IndexSet.from_points([0.0, 0.4])
        spec = OperatorSpec.dense_window(points, points, [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)])
        assert c_norm(spec) == 1.0
        coords = points.coordinates()
        for p, c in [(1.0, [1.0, 0.0]), (2.0, [1.0, 1.0]), (math.inf, [1.0, 1.0])]:
            c = np.array(c)
            gain = lp_norm(apply_operator(spec, coords, c, coords), p) / lp_norm(c, p)
            assert gain == pytest.approx(2.0, rel=1e-14)

    def test_dominated_by_convolution(self, rng):
        cols = np.arange(-10, 11)
        rows = np.arange(-14, 15)
        for _ in range(100):
            spec = random_lattice_spec(rng)
            profile = diagonal_profile(spec).values
            c = rng.normal(size=cols.size)
            image = np.abs(apply_operator(spec, cols, c, rows))
            majorant = np.array([
                sum(profile.get(int(j - jp), 0.0) * abs(cj) for jp, cj in zip(cols, c)) for j in rows
            ])
            assert np.all(image <= majorant + 1e-12)


class TestCommutator:
    def test_examples(self, identity_spec, difference_spec):
        assert commutator_cnorm(identity_spec, 0, 3) == 0
        assert commutator_cnorm(difference_spec, 0, 4) == pytest.approx(0.5)

    def test_translation_invariant_for_toeplitz(self, stable_spec):
        assert commutator_cnorm(stable_spec, 12, 4) == pytest.approx(commutator_cnorm(stable_spec, 0, 4))

    def test_center_must_be_on_lattice(self, identity_spec):
        with pytest.raises(InputError):
            commutator_cnorm(identity_spec, 1, 4)

    def test_bounded_by_infimum(self, rng):
        for _ in range(100):
            spec = random_lattice_spec(rng)
            N = int(rng.integers(1, 7))
            n = N * int(rng.integers(-3, 4))
            assert commutator_cnorm(spec, n, N) <= commutator_bound(spec, N) + 1e-12
