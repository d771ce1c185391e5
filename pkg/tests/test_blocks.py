import math

import numpy as np
import pytest

from stabilcert.blocks import (
    block_matrix,
    brute_lower_bound,
    brute_report,
    certified_lower_bound,
    left_inverse_lower_bound,
    lower_bound_p,
    closed_block,
    difference_left_inverse,
)
from stabilcert.certifier import kappa_constant
from stabilcert.config import Config
from stabilcert.exceptions import InputError, PreconditionError, ResourceLimitError, UnsupportedMethodError
from stabilcert.models import BlockMatrix, BoundMethod, IndexSet, OperatorSpec
from stabilcert.utils.geometry import lp_norm

DIFFERENCE = {0: 1, -1: -1}

EXPONENTS = [1.0, 2.0, math.inf]


def gain(A, c, p):
    return lp_norm(A @ c, p) / lp_norm(c, p)


def power_iteration_min_eigenvalue(G, iterations=20000):
    """Smallest eigenvalue of a symmetric PSD matrix by power iteration on trace(G) I - G."""
    shift = float(np.trace(G))
    S = shift * np.eye(G.shape[0]) - G
    v = np.ones(G.shape[0]) / math.sqrt(G.shape[0])
    previous = math.inf
    for _ in range(iterations):
        w = S @ v
        v = w / np.linalg.norm(w)
        estimate = float(v @ S @ v)
        if abs(estimate - previous) < 1e-15 * shift:
            break
        previous = estimate
    return shift - estimate


class TestBlockMatrix:
    def test_difference_block(self, difference_spec):
        block = block_matrix(difference_spec, 0, 1)
        np.testing.assert_array_equal(block.rows, [-1, 0, 1])
        np.testing.assert_array_equal(block.cols, [0])
        np.testing.assert_array_equal(block.entries[:, 0], [-1, 1, 0])

    def test_identity_block(self, identity_spec):
        block = block_matrix(identity_spec, 0, 2)
        assert block.shape == (7, 3)
        np.testing.assert_array_equal(block.entries[2:5], np.eye(3))
        assert not block.entries[[0, 1, 5, 6]].any()

    def test_toeplitz_shift_invariance(self, stable_spec):
        base = block_matrix(stable_spec, 0, 4).entries
        for n in (-8, 4, 12):
            np.testing.assert_array_equal(block_matrix(stable_spec, n, 4).entries, base)

    def test_center_must_be_on_lattice(self, identity_spec):
        with pytest.raises(InputError):
            block_matrix(identity_spec, 3, 2)

    def test_dense_block_can_be_vacuous(self):
        spec = OperatorSpec.dense_window(IndexSet.from_points([0.0]), IndexSet.from_points([0.0]), [(0, 0, 1.0)])
        assert block_matrix(spec, 10, 2).is_vacuous
        assert not block_matrix(spec, 0, 2).is_vacuous


class TestExactBounds:
    @pytest.mark.parametrize("p", EXPONENTS)
    def test_identity_and_diagonal(self, p):
        assert lower_bound_p(BlockMatrix.from_array(np.eye(2)), p).lower_bound == pytest.approx(1.0, abs=1e-12)
        assert lower_bound_p(BlockMatrix.from_array(np.diag([3.0, 5.0])), p).lower_bound == pytest.approx(3.0, abs=1e-12)

    def test_methods_are_named(self):
        M = BlockMatrix.from_array(np.eye(2))
        assert lower_bound_p(M, 2).method is BoundMethod.SVD
        assert lower_bound_p(M, math.inf).method is BoundMethod.LP_INF
        assert lower_bound_p(M, 1).method is BoundMethod.LP_ONE

    @pytest.mark.parametrize("p", EXPONENTS)
    @pytest.mark.parametrize("N", [4, 8, 16])
    def test_difference_sandwich(self, p, N):
        bound = certified_lower_bound(closed_block(DIFFERENCE, N), p).lower_bound
        assert 1 / (N + 1) - 1e-9 <= bound <= kappa_constant(p, 1) * 2 / N + 1e-9

    @pytest.mark.parametrize("p", EXPONENTS)
    def test_soundness_and_witness(self, rng, p):
        for _ in range(10):
            A = rng.normal(size=(6, 4))
            report = lower_bound_p(BlockMatrix.from_array(A), p)
            samples = rng.normal(size=(1000, 4))
            assert all(report.lower_bound <= gain(A, c, p) + 1e-12 for c in samples)
            assert gain(A, report.witness, p) == pytest.approx(report.lower_bound, abs=1e-8)

    def test_svd_matches_power_iteration(self, rng):
        for _ in range(50):
            A = rng.normal(size=(6, 4))
            bound = lower_bound_p(BlockMatrix.from_array(A), 2).lower_bound
            assert bound ** 2 == pytest.approx(power_iteration_min_eigenvalue(A.T @ A), abs=1e-10)

    def test_complex_svd(self, rng):
        A = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
        bound = lower_bound_p(BlockMatrix.from_array(A), 2).lower_bound
        assert bound == pytest.approx(np.linalg.svd(A, compute_uv=False).min(), rel=1e-10)

    @pytest.mark.parametrize("p", EXPONENTS)
    def test_monotone_and_homogeneous(self, rng, p):
        for _ in range(10):
            A = rng.normal(size=(5, 4))
            base = lower_bound_p(BlockMatrix.from_array(A), p).lower_bound
            taller = lower_bound_p(BlockMatrix.from_array(np.vstack([A, rng.normal(size=(2, 4))])), p).lower_bound
            narrower = lower_bound_p(BlockMatrix.from_array(A[:, :3]), p).lower_bound
            scaled = lower_bound_p(BlockMatrix.from_array(-2.5 * A), p).lower_bound
            assert taller >= base - 1e-10
            assert narrower >= base - 1e-10
            assert scaled == pytest.approx(2.5 * base, rel=1e-9, abs=1e-12)

    def test_zero_rows_do_not_matter(self, stable_spec):
        block = block_matrix(stable_spec, 0, 3)
        trimmed = block.nonzero_rows()
        assert trimmed.shape[0] < block.shape[0]
        for p in EXPONENTS:
            assert lower_bound_p(block, p).lower_bound == pytest.approx(lower_bound_p(trimmed, p).lower_bound)


class TestErrors:
    def test_complex_needs_p2(self):
        M = BlockMatrix.from_array(np.array([[1.0 + 1j, 0.0], [0.0, 1.0]]))
        for p in (1, math.inf):
            with pytest.raises(UnsupportedMethodError):
                lower_bound_p(M, p)

    def test_other_exponents_unsupported(self):
        with pytest.raises(UnsupportedMethodError):
            lower_bound_p(BlockMatrix.from_array(np.eye(2)), 3)

    def test_vacuous_block(self):
        empty = BlockMatrix(rows=np.arange(2.0), cols=np.zeros(0), entries=np.zeros((2, 0)))
        with pytest.raises(PreconditionError):
            lower_bound_p(empty, 2)

    def test_p1_column_cap(self, monkeypatch):
        monkeypatch.setattr(Config, "P1_COLUMN_CAP", 3)
        with pytest.raises(ResourceLimitError, match="3"):
            lower_bound_p(BlockMatrix.from_array(np.eye(4)), 1)


class TestLeftInverse:
    @pytest.mark.parametrize("N", [2, 4, 8, 16, 32])
    def test_difference_left_inverse_is_exact(self, N):
        A = closed_block(DIFFERENCE, N).entries
        B = difference_left_inverse(N)
        assert A.dtype == np.int64
        np.testing.assert_array_equal(B @ A, np.eye(2 * N + 1, dtype=np.int64))
        assert np.abs(B).sum(axis=0).max() <= N + 1
        assert np.abs(B).sum(axis=1).max() <= N + 1

    @pytest.mark.parametrize("p", EXPONENTS)
    def test_row_subset_bound_is_sound(self, p):
        block = closed_block(DIFFERENCE, 4)
        sound = left_inverse_lower_bound(block, p).lower_bound
        assert 1 / 5 - 1e-12 <= sound <= lower_bound_p(block, p).lower_bound + 1e-12

    def test_large_l1_blocks_fall_back(self):
        block = closed_block(DIFFERENCE, 8)
        report = certified_lower_bound(block, 1)
        assert report.method is BoundMethod.LEFT_INVERSE
        assert report.lower_bound >= 1 / 9 - 1e-12


class TestBruteForce:
    def test_identity(self):
        assert brute_lower_bound(BlockMatrix.from_array(np.eye(2)), 2) == pytest.approx(1.0, abs=1e-6)

    def test_single_column(self):
        column = BlockMatrix.from_array(np.array([-1.0, 1.0, 0.0]))
        assert brute_lower_bound(column, 2) == pytest.approx(math.sqrt(2))

    @pytest.mark.parametrize("p", EXPONENTS)
    def test_agrees_with_exact_methods(self, rng, p):
        for _ in range(50):
            M = BlockMatrix.from_array(rng.normal(size=(6, 4)))
            exact = lower_bound_p(M, p).lower_bound
            brute = brute_lower_bound(M, p)
            assert brute >= exact - 1e-9
            assert brute == pytest.approx(exact, abs=1e-6)

    def test_report_carries_method_and_witness(self, rng):
        M = BlockMatrix.from_array(rng.normal(size=(5, 3)))
        report = brute_report(M, 2)
        assert report.method is BoundMethod.BRUTE
        assert report.to_dict()["method"] == "brute"
        assert np.abs(report.witness).max() == pytest.approx(1.0)
        assert gain(M.entries, report.witness, 2) == pytest.approx(report.lower_bound, rel=1e-12)
        assert brute_lower_bound(M, 2) == report.lower_bound


class TestLinearPrograms:
    def test_random_l1_blocks(self, rng):
        for _ in range(30):
            M = BlockMatrix.from_array(rng.normal(size=(11, 7)))
            report = lower_bound_p(M, 1)
            brute = brute_lower_bound(M, 1)
            assert brute >= report.lower_bound - 1e-9
            assert brute == pytest.approx(report.lower_bound, abs=1e-6)
            assert gain(M.entries, report.witness, 1) == pytest.approx(report.lower_bound, abs=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_band_toeplitz_blocks_at_inf(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(20):
            coeffs = {k: float(rng.normal()) for k in range(-2, 3)}
            M = block_matrix(OperatorSpec.toeplitz(coeffs), 0, 4)
            report = lower_bound_p(M, math.inf)
            assert np.abs(report.witness).max() == pytest.approx(1.0)
            assert gain(M.entries, report.witness, math.inf) == pytest.approx(report.lower_bound, abs=1e-9)
            assert brute_lower_bound(M, math.inf, samples=2000) >= report.lower_bound - 1e-9

    def test_inf_program_with_a_dominant_column(self):
        A = np.array([[1.0, 0.0], [0.0, 1e-3], [0.0, 0.0]])
        report = lower_bound_p(BlockMatrix.from_array(A), math.inf)
        assert report.lower_bound == pytest.approx(1e-3, abs=1e-14)
        assert gain(A, report.witness, math.inf) == pytest.approx(1e-3, abs=1e-14)
