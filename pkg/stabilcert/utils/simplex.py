"""Dense two-phase simplex with Bland's rule for the small programs of the block bounds."""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from stabilcert.config import Config

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class LPResult:
    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


class DenseSimplex:
    """minimize c^T x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.

    Both phases price with Bland's rule: lowest-index entering column, and the
    lowest basic index among rows attaining the minimum ratio. Inequality rows with
    b >= 0 start from their slack; only the other rows carry an artificial, so
    programs whose origin is feasible skip Phase I. The tableau is rebuilt from the
    original rows at regular intervals and whenever a phase ends suspiciously.
    """

    def __init__(
        self,
        pivot_tol: float = None,
        feasibility_tol: float = None,
        max_pivots: int = None,
        refactor_every: int = None,
    ):
        self.pivot_tol = Config.SIMPLEX_PIVOT_TOLERANCE if pivot_tol is None else pivot_tol
        self.feasibility_tol = Config.SIMPLEX_FEASIBILITY_TOLERANCE if feasibility_tol is None else feasibility_tol
        self.max_pivots = Config.SIMPLEX_MAX_PIVOTS if max_pivots is None else max_pivots
        self.refactor_every = Config.SIMPLEX_REFACTOR_INTERVAL if refactor_every is None else refactor_every
        self.tie_tol = Config.SIMPLEX_RATIO_TIE_ULPS * np.finfo(float).eps

    @staticmethod
    def _pivot(T: np.ndarray, row: int, col: int):
        T[row, :] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row, :])

    @staticmethod
    def _price(T: np.ndarray, basis: List[int], cost: np.ndarray):
        """Objective row: reduced costs, and -c_B^T x_B in the rhs column."""
        T[-1, :-1] = cost
        T[-1, -1] = 0.0
        if basis:
            T[-1, :] -= cost[basis] @ T[:len(basis), :]

    def _clean(self, T: np.ndarray, m: int):
        rhs = T[:m, -1]
        rhs[(rhs < 0.0) & (rhs > -self.feasibility_tol)] = 0.0

    def _refactor(self, T: np.ndarray, T0: np.ndarray, basis: List[int], cost: np.ndarray):
        m = len(basis)
        if m:
            try:
                T[:m, :] = np.linalg.solve(T0[:, basis], T0)
            except np.linalg.LinAlgError:
                logger.debug("Singular basis during refactorization; keeping the updated tableau")
                return
            self._clean(T, m)
        self._price(T, basis, cost)

    def _enter(self, z_row: np.ndarray, allowed: np.ndarray) -> int:
        candidates = np.flatnonzero((z_row[:-1] < -self.pivot_tol) & allowed)
        return int(candidates[0]) if candidates.size else -1

    def _leave(self, T: np.ndarray, col: int, basis: List[int]) -> int:
        column = T[:-1, col]
        rows = np.flatnonzero(column > self.pivot_tol)
        if rows.size == 0:
            return -1
        ratios = np.maximum(T[rows, -1], 0.0) / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + self.tie_tol * max(1.0, best)]
        return int(min(ties, key=lambda r: basis[r]))

    def _run(self, T: np.ndarray, T0: np.ndarray, basis: List[int], allowed: np.ndarray, cost: np.ndarray) -> str:
        m = len(basis)
        interval = max(self.refactor_every, 2 * m)
        for pivots in range(1, self.max_pivots + 1):
            col = self._enter(T[-1, :], allowed)
            if col == -1:
                return "optimal"
            row = self._leave(T, col, basis)
            if row == -1:
                return "unbounded"
            self._pivot(T, row, col)
            basis[row] = col
            self._clean(T, m)
            if pivots % interval == 0:
                self._refactor(T, T0, basis, cost)
        return "optimal" if self._enter(T[-1, :], allowed) == -1 else "iteration_limit"

    def _phase(self, T: np.ndarray, T0: np.ndarray, basis: List[int], allowed: np.ndarray, cost: np.ndarray) -> str:
        status = self._run(T, T0, basis, allowed, cost)
        if status == "unbounded":
            # confirm on a rebuilt tableau
            self._refactor(T, T0, basis, cost)
            status = self._run(T, T0, basis, allowed, cost)
        return status

    @staticmethod
    def _artificial_mass(T: np.ndarray, basis: List[int], art: int) -> float:
        return float(sum(max(T[r, -1], 0.0) for r, var in enumerate(basis) if var >= art))

    def solve(self, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None) -> LPResult:
        c = np.asarray(c, dtype=float)
        n = c.size
        A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
        b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
        A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
        b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)

        m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
        m = m_ub + m_eq
        art = n + m_ub
        rhs = np.concatenate([b_ub, b_eq])
        negative = rhs < 0
        needs_artificial = negative.copy()
        needs_artificial[m_ub:] = True
        art_rows = np.flatnonzero(needs_artificial)
        k = art_rows.size

        # columns: x (n) | slacks (m_ub) | artificials (k) | rhs
        T0 = np.zeros((m, art + k + 1))
        T0[:m_ub, :n] = A_ub
        T0[:m_ub, n:art] = np.eye(m_ub)
        T0[m_ub:, :n] = A_eq
        T0[:, -1] = rhs
        T0[negative] *= -1.0
        T0[art_rows, art + np.arange(k)] = 1.0
        basis = [n + r for r in range(m)]
        for i, r in enumerate(art_rows):
            basis[r] = art + i
        T = np.vstack([T0, np.zeros((1, T0.shape[1]))])
        tolerance = self.feasibility_tol * max(1.0, float(np.abs(rhs).max()) if m else 0.0)
        allowed = np.ones(T.shape[1] - 1, dtype=bool)

        if k:
            # Phase I: minimize the sum of artificials
            cost = np.zeros(T.shape[1] - 1)
            cost[art:] = 1.0
            self._price(T, basis, cost)
            status = self._phase(T, T0, basis, allowed, cost)
            residual = self._artificial_mass(T, basis, art)
            if status == "optimal" and residual > tolerance:
                logger.debug(f"Phase I left artificial mass {residual:.3g}; refactoring and resuming")
                self._refactor(T, T0, basis, cost)
                status = self._phase(T, T0, basis, allowed, cost)
                residual = self._artificial_mass(T, basis, art)
            if status != "optimal":
                logger.error(f"Phase I ended with status {status}")
                return LPResult(status=f"phase1_{status}")
            if residual > tolerance:
                return LPResult(status="infeasible")

            # Drive remaining artificials out of the basis where possible
            for r, var in enumerate(basis):
                if var >= art:
                    magnitudes = np.abs(T[r, :art])
                    j = int(np.argmax(magnitudes)) if art else -1
                    if j >= 0 and magnitudes[j] > self.pivot_tol:
                        self._pivot(T, r, j)
                        basis[r] = j
                        self._clean(T, m)
            allowed[art:] = False

        # Phase II: original objective, artificial columns barred from entering
        cost = np.zeros(T.shape[1] - 1)
        cost[:n] = c
        self._price(T, basis, cost)
        status = self._phase(T, T0, basis, allowed, cost)
        if status != "optimal":
            return LPResult(status=status)
        self._refactor(T, T0, basis, cost)

        x = np.zeros(T.shape[1] - 1)
        for r, var in enumerate(basis):
            x[var] = T[r, -1]
        solution = np.maximum(x[:n], 0.0)
        return LPResult(status="optimal", x=solution, objective=float(c @ solution))
