"""Dense two-phase revised simplex for linear programs with bounds.

Minimizes c^T z subject to A_eq z = b_eq, A_ub z <= b_ub and
elementwise bounds lower <= z <= upper, where bound entries may be
infinite.  The solver keeps an explicit dense basis inverse with
periodic refactorization, prices with Devex reference weights, takes
ratio-test steps with a two-pass tolerance window (the largest pivot
within the window wins, so noise-sized pivots never enter the basis),
and switches to Bland's anti-cycling rule after a long run of
degenerate steps so cycling cannot persist.  All remaining tie-breaking
is by smallest index, which makes runs deterministic.  An optimal
verdict is only reported for a point that is feasible within tolerance;
a run that ends infeasible is repeated once in a slower, maximally
careful mode before the solver gives up.

The assemblies produced in this package are dense and of moderate size
(a few thousand rows), so no sparse factorization is attempted.  Before
the simplex runs, rows touching a single variable are folded into that
variable's bounds and all-zero rows and columns are removed; nothing
else is presolved.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_FEAS_TOL = 1e-9

# Dual (pricing) tolerance, applied relative to 1 + |c_j| per column.
_DUAL_TOL = 1e-9
# Reduced costs below this multiple of the pricing noise estimate
# |y|^T |a_j| are indistinguishable from rounding and are not entered.
_NOISE_EPS = 1e-14
# Ratio-test denominators below this fraction of the largest entry of
# the transformed column are rounding noise and block no step.
_PIVOT_SCREEN = 1e-11
# How far a basic variable may pass its bound during the first ratio-test
# pass; the slack buys freedom to pick a large, stable pivot.
_FEAS_RELAX = 1e-9
# Consecutive degenerate steps before Bland's rule takes over.
_DEGENERATE_STREAK = 1000

_AT_LO, _AT_HI, _FREE, _BASIC = 0, 1, 2, 3


class LpStatus(str, enum.Enum):
    """Terminal state of a solve."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


def _as_float_array(value, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class LpProblem:
    """min c^T z  s.t.  A_eq z = b_eq,  A_ub z <= b_ub,  lower <= z <= upper.

    Attributes:
        c: Cost vector, shape (n,), finite.
        A_eq, b_eq: Equality block; None means no equalities.
        A_ub, b_ub: Inequality block; None means no inequalities.
        lower, upper: Bounds, shape (n,); entries may be -inf / +inf.
            None means unbounded on that side.
    """

    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = _as_float_array(self.c, "c", 1)
        if c.size == 0:
            raise ValueError("the problem needs at least one variable")
        if not np.all(np.isfinite(c)):
            raise ValueError("c must be finite")
        n = c.size

        def norm_block(A, b, name):
            if A is None and b is None:
                A = np.zeros((0, n))
                b = np.zeros(0)
            elif A is None or b is None:
                raise ValueError(f"A_{name} and b_{name} must be given together")
            else:
                A = np.atleast_2d(_as_float_array(A, f"A_{name}", 2))
                b = _as_float_array(b, f"b_{name}", 1)
            if A.shape != (b.size, n):
                raise ValueError(f"A_{name} must have shape ({b.size}, {n}), got {A.shape}")
            if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
                raise ValueError(f"A_{name} and b_{name} must be finite")
            return A, b

        A_eq, b_eq = norm_block(self.A_eq, self.b_eq, "eq")
        A_ub, b_ub = norm_block(self.A_ub, self.b_ub, "ub")
        lower = np.full(n, -np.inf) if self.lower is None else _as_float_array(self.lower, "lower", 1)
        upper = np.full(n, np.inf) if self.upper is None else _as_float_array(self.upper, "upper", 1)
        if lower.size != n or upper.size != n:
            raise ValueError(f"bounds must have length {n}")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("bounds must not contain NaN")
        if np.any(lower > upper):
            bad = int(np.argmax(lower > upper))
            raise ValueError(f"lower[{bad}] exceeds upper[{bad}]")
        for name, arr in (
            ("c", c), ("A_eq", A_eq), ("b_eq", b_eq), ("A_ub", A_ub),
            ("b_ub", b_ub), ("lower", lower), ("upper", upper),
        ):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def n_eq(self) -> int:
        return self.b_eq.size

    @property
    def n_ub(self) -> int:
        return self.b_ub.size


@dataclass(frozen=True)
class LpSolution:
    """Result of a solve.

    Attributes:
        status: Terminal state; fields below are only meaningful for
            the statuses noted.
        z: Primal point, shape (n,).  The optimum when status is
            "optimal", otherwise the last iterate.
        objective: c^T z (-inf when unbounded).
        iterations: Simplex steps over both phases.
        max_violation: Largest constraint or bound violation of z
            against the original problem data.
        duals_eq, duals_ub: Row multipliers d(objective)/d(b) at the
            optimum, None for non-optimal statuses.
        infeasible_rows: On "infeasible", rows whose phase-1 artificial
            stayed positive, as ("eq" | "ub", row_index) pairs; these
            localize (not exhaustively) where feasibility fails.
    """

    status: LpStatus
    z: np.ndarray
    objective: float
    iterations: int
    max_violation: float
    duals_eq: np.ndarray | None = None
    duals_ub: np.ndarray | None = None
    infeasible_rows: tuple[tuple[str, int], ...] = ()


def _max_violation(problem: LpProblem, z: np.ndarray) -> float:
    viol = 0.0
    if problem.n_eq:
        viol = max(viol, float(np.max(np.abs(problem.A_eq @ z - problem.b_eq))))
    if problem.n_ub:
        viol = max(viol, float(np.max(problem.A_ub @ z - problem.b_ub, initial=0.0)))
    viol = max(viol, float(np.max(problem.lower - z, initial=0.0)))
    viol = max(viol, float(np.max(z - problem.upper, initial=0.0)))
    return viol


class _BoundedSimplex:
    """Revised simplex over structural + slack columns with artificials.

    Artificial columns are +/- unit vectors and are never stored; column
    j >= N refers to the artificial of row j - N with sign art_sign.
    """

    def __init__(self, A, b, lo, hi, max_iter, refactor_every, slack_vars=None):
        self.A = A
        self.b = b
        self.Mr, self.N = A.shape
        self.max_iter = max_iter
        self.refactor_every = refactor_every
        self.iterations = 0
        self.pivots_since_refactor = 0
        self.degenerate_streak = 0
        self.bland = False
        self.force_bland = False
        # Devex reference weights, one per column (artificials included).
        self.devex = np.ones(self.N + A.shape[0])
        # Columns whose pricing attractiveness proved to be cancellation
        # noise; cleared whenever the basis (and hence the duals) changes.
        self.banned = np.zeros(self.N + A.shape[0], dtype=bool)

        # Nonbasic start: structurals and slacks at the point closest to
        # zero inside their bounds.  Rows whose slack can absorb the
        # residual start with the slack basic; every other row gets a
        # basic artificial.
        x0 = np.minimum(np.maximum(0.0, lo[: self.N]), hi[: self.N])
        resid = b - A @ x0
        self.art_sign = np.where(resid < 0.0, -1.0, 1.0)
        self.lo = np.concatenate([lo, np.zeros(self.Mr)])
        self.hi = np.concatenate([hi, np.full(self.Mr, np.inf)])
        self.x = np.concatenate([x0, np.zeros(self.Mr)])
        self.vstat = np.empty(self.N + self.Mr, dtype=np.int8)
        self.vstat[: self.N] = _FREE
        self.vstat[: self.N][x0 == lo[: self.N]] = _AT_LO
        at_hi = (x0 == hi[: self.N]) & (self.vstat[: self.N] != _AT_LO)
        self.vstat[: self.N][at_hi] = _AT_HI
        self.vstat[self.N :] = _BASIC
        self.basis = np.arange(self.N, self.N + self.Mr)
        diag = self.art_sign.copy()
        self.x_B = np.abs(resid)
        if slack_vars is not None:
            for i in range(self.Mr):
                j = slack_vars[i]
                if j >= 0 and resid[i] >= 0.0:
                    coef = A[i, j]
                    self.basis[i] = j
                    self.vstat[j] = _BASIC
                    diag[i] = 1.0 / coef
                    self.x_B[i] = resid[i] / coef
                    # Retire this row's artificial outright.
                    self.lo[self.N + i] = 0.0
                    self.hi[self.N + i] = 0.0
                    self.vstat[self.N + i] = _AT_LO
        self.B_inv = np.diag(diag).copy()

    def column(self, j: int) -> np.ndarray:
        if j < self.N:
            return self.A[:, j]
        col = np.zeros(self.Mr)
        col[j - self.N] = self.art_sign[j - self.N]
        return col

    def _basis_matrix(self) -> np.ndarray:
        B = np.empty((self.Mr, self.Mr))
        for i, j in enumerate(self.basis):
            B[:, i] = self.column(j)
        return B

    def _refresh(self):
        for _ in range(3):
            B = self._basis_matrix()
            try:
                self.B_inv = np.linalg.inv(B)
            except np.linalg.LinAlgError:
                self.B_inv = np.linalg.pinv(B)
            x_nb = self.x.copy()
            x_nb[self.basis] = 0.0
            resid = self.b - self.A @ x_nb[: self.N] - self.art_sign * x_nb[self.N :]
            self.x_B = self.B_inv @ resid
            # Residual health check: a near-singular basis produces a
            # self-consistent but wrong inverse, which only a comparison
            # against the original columns can expose.
            err = float(np.max(np.abs(B @ self.x_B - resid), initial=0.0))
            if err <= 1e-7 * (1.0 + float(np.max(np.abs(resid), initial=0.0))):
                break
            if not self._repair_basis():
                break
        self.pivots_since_refactor = 0

    def _repair_basis(self) -> bool:
        """Eject numerically dependent basic columns.

        Each dependent column is detected by a vanishing diagonal in the
        QR factorization of the basis matrix, moved out of the basis
        (free variables keep their value, bounded ones snap to the
        nearest bound), and replaced by the artificial of a row aligned
        with the lost direction.  Returns True when anything changed.
        """
        changed = False
        for _ in range(4):
            B = self._basis_matrix()
            Q, R = np.linalg.qr(B)
            diag = np.abs(np.diag(R))
            col_norm = np.maximum(np.sqrt(np.sum(R * R, axis=0)), 1.0)
            bad = np.flatnonzero(diag < 1e-10 * col_norm)
            if bad.size == 0:
                break
            changed = True
            seated = {int(j) - self.N for j in self.basis if j >= self.N}
            for i in bad:
                j = int(self.basis[i])
                value = float(self.x_B[i])
                if math.isinf(self.lo[j]) and math.isinf(self.hi[j]):
                    self.vstat[j] = _FREE
                    self.x[j] = value
                elif value - self.lo[j] <= self.hi[j] - value:
                    self.vstat[j] = _AT_LO
                    self.x[j] = self.lo[j]
                else:
                    self.vstat[j] = _AT_HI
                    self.x[j] = self.hi[j]
                # The i-th Q column spans the direction the kept columns
                # miss; seat the artificial of its strongest row.
                for r in np.argsort(-np.abs(Q[:, i])):
                    if int(r) not in seated:
                        break
                r = int(r)
                seated.add(r)
                self.basis[i] = self.N + r
                self.vstat[self.N + r] = _BASIC
        if changed:
            self.banned[:] = False
        return changed

    def _price(self, c_phase, tol_col, y):
        """Pick an entering column, or None when optimality holds."""
        rc = np.empty(self.N + self.Mr)
        rc[: self.N] = c_phase[: self.N] - y @ self.A
        rc[self.N :] = c_phase[self.N :] - y * self.art_sign
        movable = (self.hi - self.lo) > 0.0
        viol = np.zeros(self.N + self.Mr)
        sel = (self.vstat == _AT_LO) & movable & (rc < -tol_col)
        viol[sel] = -rc[sel]
        sel = (self.vstat == _AT_HI) & movable & (rc > tol_col)
        viol[sel] = rc[sel]
        sel = (self.vstat == _FREE) & (np.abs(rc) > tol_col)
        viol[sel] = np.abs(rc[sel])
        viol[self.banned] = 0.0

        abs_y = None
        candidates = np.flatnonzero(viol > 0.0)
        if self.bland:
            order = candidates  # ascending index: Bland's entering rule
        else:
            score = viol[candidates] ** 2 / self.devex[candidates]
            order = candidates[np.argsort(-score, kind="stable")]
        for q in order:
            if abs_y is None:
                abs_y = np.abs(y)
            noise = _NOISE_EPS * (1.0 + abs_y @ np.abs(self.column(q)))
            if viol[q] > noise:
                return int(q), rc[int(q)]
        return None

    def run_phase(self, c_phase) -> str:
        tol_col = _DUAL_TOL * (1.0 + np.abs(c_phase))
        self.devex[:] = 1.0
        self.banned[:] = False
        self.degenerate_streak = 0
        self.bland = self.force_bland
        while True:
            if self.iterations >= self.max_iter:
                return "iteration-limit"
            y = c_phase[self.basis] @ self.B_inv
            picked = self._price(c_phase, tol_col, y)
            if picked is None and self.pivots_since_refactor > 0:
                self._refresh()
                y = c_phase[self.basis] @ self.B_inv
                picked = self._price(c_phase, tol_col, y)
            if picked is None:
                return "optimal"
            q, rc_q = picked
            if self.vstat[q] == _AT_LO:
                direction = 1.0
            elif self.vstat[q] == _AT_HI:
                direction = -1.0
            else:
                direction = -math.copysign(1.0, rc_q)

            w = self.B_inv @ self.column(q)
            # Entries below the screen are rounding noise from the basis
            # solve; letting them block a step would put a noise-sized
            # pivot on the diagonal and wreck the factorization.
            screen = _PIVOT_SCREEN * max(1.0, float(np.max(np.abs(w), initial=0.0)))
            g = direction * w  # rate of decrease of basic values
            lo_B = self.lo[self.basis]
            hi_B = self.hi[self.basis]
            strict = np.full(self.Mr, np.inf)
            relaxed = np.full(self.Mr, np.inf)
            pos = g > screen
            room = self.x_B[pos] - lo_B[pos]
            strict[pos] = room / g[pos]
            relaxed[pos] = (room + _FEAS_RELAX * (1.0 + np.abs(lo_B[pos]))) / g[pos]
            neg = g < -screen
            room = hi_B[neg] - self.x_B[neg]
            strict[neg] = room / (-g[neg])
            relaxed[neg] = (room + _FEAS_RELAX * (1.0 + np.abs(hi_B[neg]))) / (-g[neg])
            step_basic = max(float(relaxed.min()) if self.Mr else math.inf, 0.0)
            own_limit = (self.hi[q] - self.x[q]) if direction > 0 else (self.x[q] - self.lo[q])
            if math.isinf(step_basic) and math.isinf(own_limit):
                if self.pivots_since_refactor > 0:
                    # Verify against a fresh factorization before giving up.
                    self._refresh()
                    continue
                # A ray must satisfy the constraints: check B w = a_q
                # against the original columns, which a corrupt inverse
                # cannot fake.
                a_q = self.column(q)
                ray_err = float(np.max(np.abs(self._basis_matrix() @ w - a_q)))
                if ray_err > 1e-6 * (1.0 + float(np.max(np.abs(a_q)))):
                    self._repair_basis()
                    self._refresh()
                    continue
                # The objective rate along the ray, counting only entries
                # of w above the ratio-test screen.  A sub-screen entry is
                # indistinguishable from rounding noise, and a noise-sized
                # entry times a large cost can fake an arbitrary rate, so
                # such entries must not establish unboundedness.
                solid = np.abs(w) > screen
                c_B = c_phase[self.basis]
                rate = float(c_phase[q] - c_B[solid] @ w[solid])
                noise = _NOISE_EPS * (
                    1.0
                    + abs(float(c_phase[q]))
                    + float(np.abs(c_B[solid]) @ np.abs(w[solid]))
                )
                if direction * rate >= -noise:
                    # A null direction, not a ray: the column only looked
                    # attractive through noise.  Drop it and pick again.
                    self.banned[q] = True
                    continue
                return "unbounded"

            if own_limit <= step_basic:
                # The entering variable reaches its opposite bound: no
                # basis change, just move it and update basic values.
                self.x[q] += direction * own_limit
                self.vstat[q] = _AT_HI if direction > 0 else _AT_LO
                self.x_B -= direction * own_limit * w
                step_taken = own_limit
            else:
                if self.bland:
                    # Exact smallest ratio, lowest index: the textbook rule.
                    tight = float(np.min(strict))
                    cand = np.flatnonzero(strict <= tight)
                    r_out = int(cand[np.argmin(self.basis[cand])])
                else:
                    # Second pass: among rows whose exact ratio fits inside
                    # the relaxed window, prefer the largest pivot.
                    cand = np.flatnonzero(strict <= step_basic)
                    r_out = int(cand[np.argmax(np.abs(w[cand]))])
                if abs(w[r_out]) < 1e-8 * max(1.0, float(np.max(np.abs(w)))):
                    if self.pivots_since_refactor > 0:
                        self._refresh()
                        continue
                    # Even at a fresh factorization every eligible pivot
                    # is negligible against the column: entering would
                    # make the basis numerically singular.  Keep the
                    # column out and pick another.
                    self.banned[q] = True
                    continue
                step = max(float(strict[r_out]), 0.0)
                leaving = int(self.basis[r_out])
                self.x_B -= direction * step * w
                if g[r_out] > 0:
                    self.vstat[leaving] = _AT_LO
                    self.x[leaving] = self.lo[leaving]
                else:
                    self.vstat[leaving] = _AT_HI
                    self.x[leaving] = self.hi[leaving]
                entering_value = self.x[q] + direction * step
                piv = w[r_out]
                # Devex update over the pivot row, before it is rescaled.
                ref = self.devex[q]
                alpha = np.empty(self.N + self.Mr)
                alpha[: self.N] = self.B_inv[r_out] @ self.A
                alpha[self.N :] = self.B_inv[r_out] * self.art_sign
                np.maximum(self.devex, (alpha / piv) ** 2 * ref, out=self.devex)
                self.devex[leaving] = max(ref / (piv * piv), 1.0)
                if self.devex.max() > 1e8:
                    self.devex[:] = 1.0
                self.B_inv[r_out] /= piv
                w_rest = w.copy()
                w_rest[r_out] = 0.0
                self.B_inv -= np.outer(w_rest, self.B_inv[r_out])
                self.basis[r_out] = q
                self.vstat[q] = _BASIC
                self.x_B[r_out] = entering_value
                self.pivots_since_refactor += 1
                self.banned[:] = False
                step_taken = step

            self.iterations += 1
            if step_taken <= 1e-11:
                self.degenerate_streak += 1
                if self.degenerate_streak >= _DEGENERATE_STREAK:
                    self.bland = True
            else:
                self.degenerate_streak = 0
                self.bland = self.force_bland
            if self.pivots_since_refactor >= self.refactor_every:
                self._refresh()

    def artificial_values(self) -> np.ndarray:
        vals = np.zeros(self.Mr)
        in_basis = self.basis >= self.N
        vals[self.basis[in_basis] - self.N] = self.x_B[in_basis]
        return vals

    def point(self) -> np.ndarray:
        full = self.x.copy()
        full[self.basis] = self.x_B
        return full[: self.N]

    def duals(self, c_phase) -> np.ndarray:
        return c_phase[self.basis] @ self.B_inv


def solve_lp(
    problem: LpProblem,
    tol_feas: float = DEFAULT_FEAS_TOL,
    max_iter: int = 100_000,
    refactor_every: int = 200,
) -> LpSolution:
    """Solve a bounded LP with the two-phase revised simplex.

    An optimal verdict is accepted only when the reported point satisfies
    every constraint to within the feasibility tolerance.  A run that ends
    optimal-but-infeasible (numerical drift on a badly scaled problem) is
    repeated once in a slower, maximally careful mode; if that run is also
    infeasible the solver raises :class:`ArithmeticError` rather than
    return a wrong answer.

    Args:
        problem: Problem data; see :class:`LpProblem`.
        tol_feas: Feasibility tolerance.  Phase 1 declares the problem
            infeasible when its optimum exceeds tol_feas * (1 + |b|_inf).
        max_iter: Simplex step budget across both phases.
        refactor_every: Pivots between basis-inverse refactorizations.

    Returns:
        An :class:`LpSolution`; see its field documentation.

    Raises:
        ArithmeticError: Both the fast and the careful run ended at a
            point violating the constraints by more than the tolerance.
    """
    n = problem.n
    lower = problem.lower.copy()
    upper = problem.upper.copy()

    # --- fold single-variable rows into the bounds ----------------------
    # A row touching one variable is a bound in disguise; folding it keeps
    # the basis small.  Duals of folded rows are reported as zero.
    conflicts: list[tuple[str, int]] = []
    eq_live = np.ones(problem.n_eq, dtype=bool)
    ub_live = np.ones(problem.n_ub, dtype=bool)
    if problem.n_eq:
        for i in np.flatnonzero(np.count_nonzero(problem.A_eq, axis=1) == 1):
            j = int(np.argmax(problem.A_eq[i] != 0.0))
            v = problem.b_eq[i] / problem.A_eq[i, j]
            pad = tol_feas * (1.0 + abs(v))
            if v < lower[j] - pad or v > upper[j] + pad:
                conflicts.append(("eq", int(i)))
            else:
                lower[j] = upper[j] = min(max(v, lower[j]), upper[j])
            eq_live[i] = False
    if problem.n_ub:
        for i in np.flatnonzero(np.count_nonzero(problem.A_ub, axis=1) == 1):
            j = int(np.argmax(problem.A_ub[i] != 0.0))
            a = problem.A_ub[i, j]
            v = problem.b_ub[i] / a
            if a > 0.0:
                upper[j] = min(upper[j], v)
            else:
                lower[j] = max(lower[j], v)
            if lower[j] > upper[j]:
                if lower[j] > upper[j] + tol_feas * (1.0 + abs(v)):
                    conflicts.append(("ub", int(i)))
                lower[j] = upper[j] = 0.5 * (lower[j] + upper[j])
            ub_live[i] = False
    if conflicts:
        z = np.minimum(np.maximum(0.0, problem.lower), problem.upper)
        return LpSolution(
            status=LpStatus.INFEASIBLE,
            z=z,
            objective=float(problem.c @ z),
            iterations=0,
            max_violation=_max_violation(problem, z),
            infeasible_rows=tuple(conflicts),
        )

    # --- remove all-zero rows, all-zero columns -------------------------
    eq_nonzero = np.any(problem.A_eq != 0.0, axis=1) if problem.n_eq else np.zeros(0, bool)
    ub_nonzero = np.any(problem.A_ub != 0.0, axis=1) if problem.n_ub else np.zeros(0, bool)
    bad_eq = [i for i in np.flatnonzero(~eq_nonzero) if abs(problem.b_eq[i]) > tol_feas]
    bad_ub = [i for i in np.flatnonzero(~ub_nonzero) if problem.b_ub[i] < -tol_feas]

    eq_keep = eq_nonzero & eq_live
    ub_keep = ub_nonzero & ub_live
    A_eq = problem.A_eq[eq_keep]
    b_eq = problem.b_eq[eq_keep]
    A_ub = problem.A_ub[ub_keep]
    b_ub = problem.b_ub[ub_keep]
    keep_eq = np.flatnonzero(eq_keep)
    keep_ub = np.flatnonzero(ub_keep)

    used = np.zeros(n, dtype=bool)
    if A_eq.size:
        used |= np.any(A_eq != 0.0, axis=0)
    if A_ub.size:
        used |= np.any(A_ub != 0.0, axis=0)
    keep_cols = np.flatnonzero(used)
    empty_cols = np.flatnonzero(~used)

    z = np.minimum(np.maximum(0.0, lower), upper)  # default point for empty columns
    unbounded_empty = False
    for j in empty_cols:
        cj = problem.c[j]
        if cj > 0.0:
            if math.isinf(lower[j]):
                unbounded_empty = True
            else:
                z[j] = lower[j]
        elif cj < 0.0:
            if math.isinf(upper[j]):
                unbounded_empty = True
            else:
                z[j] = upper[j]

    if bad_eq or bad_ub:
        rows = tuple(("eq", int(i)) for i in bad_eq) + tuple(("ub", int(i)) for i in bad_ub)
        return LpSolution(
            status=LpStatus.INFEASIBLE,
            z=z,
            objective=float(problem.c @ z),
            iterations=0,
            max_violation=_max_violation(problem, z),
            infeasible_rows=rows,
        )

    n_eq, n_ub = b_eq.size, b_ub.size
    Mr = n_eq + n_ub
    n_kept = keep_cols.size

    if Mr == 0:
        status = LpStatus.UNBOUNDED if unbounded_empty else LpStatus.OPTIMAL
        return LpSolution(
            status=status,
            z=z,
            objective=-math.inf if unbounded_empty else float(problem.c @ z),
            iterations=0,
            max_violation=_max_violation(problem, z),
            duals_eq=np.zeros(problem.n_eq) if status == LpStatus.OPTIMAL else None,
            duals_ub=np.zeros(problem.n_ub) if status == LpStatus.OPTIMAL else None,
        )

    # --- scale rows by powers of two (lossless) -------------------------
    A_rows = np.vstack([A_eq[:, keep_cols], A_ub[:, keep_cols]])
    b_rows = np.concatenate([b_eq, b_ub])
    row_max = np.max(np.abs(A_rows), axis=1)
    row_scale = np.ones(Mr)
    nz = row_max > 0.0
    row_scale[nz] = 2.0 ** (-np.round(np.log2(row_max[nz])))
    A_rows = A_rows * row_scale[:, None]
    b_rows = b_rows * row_scale

    # --- append slacks for the ub rows ----------------------------------
    N = n_kept + n_ub
    A = np.zeros((Mr, N))
    A[:, :n_kept] = A_rows
    A[n_eq:, n_kept:] = np.diag(row_scale[n_eq:])
    lo = np.concatenate([lower[keep_cols], np.zeros(n_ub)])
    hi = np.concatenate([upper[keep_cols], np.full(n_ub, np.inf)])

    slack_vars = np.full(Mr, -1, dtype=int)
    slack_vars[n_eq:] = n_kept + np.arange(n_ub)

    c1 = np.zeros(N + Mr)
    c1[N:] = 1.0
    c2 = np.zeros(N + Mr)
    c2[:n_kept] = problem.c[keep_cols]
    b_scale = 1.0 + float(np.max(np.abs(b_rows), initial=0.0))

    def run_phases(refactor_pivots: int, careful: bool) -> LpSolution:
        sx = _BoundedSimplex(A, b_rows, lo, hi, max_iter, refactor_pivots, slack_vars=slack_vars)
        sx.force_bland = careful

        def assemble(status, duals_scaled=None, objective=None, infeasible_rows=()):
            point = sx.point()
            z_out = z.copy()
            z_out[keep_cols] = point[:n_kept]
            duals_eq = duals_ub = None
            if duals_scaled is not None:
                y = duals_scaled * row_scale
                duals_eq = np.zeros(problem.n_eq)
                duals_eq[keep_eq] = y[:n_eq]
                duals_ub = np.zeros(problem.n_ub)
                duals_ub[keep_ub] = y[n_eq:]
            if objective is None:
                objective = float(problem.c @ z_out)
            return LpSolution(
                status=status,
                z=z_out,
                objective=objective,
                iterations=sx.iterations,
                max_violation=_max_violation(problem, z_out),
                duals_eq=duals_eq,
                duals_ub=duals_ub,
                infeasible_rows=tuple(infeasible_rows),
            )

        phase1 = sx.run_phase(c1)
        art = sx.artificial_values()
        phase1_obj = float(np.sum(art))
        if phase1 == "iteration-limit":
            return assemble(LpStatus.ITERATION_LIMIT)
        if phase1 == "unbounded" or phase1_obj > tol_feas * b_scale:
            rows = []
            for i in np.flatnonzero(art > tol_feas * (1.0 + np.abs(b_rows))):
                if i < n_eq:
                    rows.append(("eq", int(keep_eq[i])))
                else:
                    rows.append(("ub", int(keep_ub[i - n_eq])))
            return assemble(LpStatus.INFEASIBLE, infeasible_rows=rows)

        # Lock artificials at zero; any still basic stay pinned there.
        sx.lo[N:] = 0.0
        sx.hi[N:] = 0.0

        phase2 = sx.run_phase(c2)
        if phase2 == "iteration-limit":
            return assemble(LpStatus.ITERATION_LIMIT)
        if phase2 == "unbounded" or unbounded_empty:
            result = assemble(LpStatus.UNBOUNDED)
            return LpSolution(
                status=result.status,
                z=result.z,
                objective=-math.inf,
                iterations=result.iterations,
                max_violation=result.max_violation,
            )
        return assemble(LpStatus.OPTIMAL, duals_scaled=sx.duals(c2))

    result = run_phases(refactor_every, careful=False)
    feas_gate = tol_feas * (
        1.0
        + max(
            float(np.max(np.abs(problem.b_eq), initial=0.0)),
            float(np.max(np.abs(problem.b_ub), initial=0.0)),
        )
    )
    if result.status == LpStatus.OPTIMAL and result.max_violation > feas_gate:
        # The fast run drifted off the feasible set; repeat in the careful
        # mode (Bland's rule throughout, frequent refactorization).
        result = run_phases(25, careful=True)
        if result.status == LpStatus.OPTIMAL and result.max_violation > feas_gate:
            raise ArithmeticError(
                f"simplex ended at an infeasible point (violation "
                f"{result.max_violation:.3e}); the problem is too "
                f"ill-conditioned for this solver"
            )
    return result


def dump_lp(problem: LpProblem, path) -> None:
    """Write a problem to a plain-text, diff-friendly listing.

    The listing holds the objective, each constraint row with its
    nonzero coefficients, and the variable bounds, one item per line.
    """
    path = Path(path)
    lines = [f"LP n={problem.n} eq={problem.n_eq} ub={problem.n_ub}", "MINIMIZE"]
    for j in np.flatnonzero(problem.c):
        lines.append(f"  c[{j}] = {float(problem.c[j])!r}")
    for kind, A, b in (("EQ", problem.A_eq, problem.b_eq), ("UB", problem.A_ub, problem.b_ub)):
        for i in range(b.size):
            rel = "=" if kind == "EQ" else "<="
            lines.append(f"{kind} {i} {rel} {float(b[i])!r}")
            for j in np.flatnonzero(A[i]):
                lines.append(f"  a[{i},{j}] = {float(A[i, j])!r}")
    lines.append("BOUNDS")
    for j in range(problem.n):
        lines.append(f"  {j}: [{float(problem.lower[j])!r}, {float(problem.upper[j])!r}]")
    path.write_text("\n".join(lines) + "\n")
