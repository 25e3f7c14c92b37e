"""Exact-penalty LP formulation of minimum-time control from data.

The unknown trajectory over samples -K_i..N-1 is split into K
overlapping length-L segments, each constrained to be admissible for a
Hankel trajectory model.  Consecutive segments share K_i samples, the
first segment is pinned to the measured initialization window, and path
constraints apply to the fresh part of every segment.  For every
candidate arrival time t in [T0, T1] a nonnegative slack vector
eps_t measures how far the output window y(t-K_f+1..t) is from the
target set, so eps_t = 0 certifies that the target has been met on the
K_f samples ending at t.  Minimizing sum_t theta^(t-T0) * |eps_t|_1
with theta large enough makes the slacks vanish exactly from the
minimum time onward, and the arrival time is read off the solved
schedule as the first t with |eps_t|_1 below a small threshold.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from .hankel import HankelModel, ReducedModel
from .lpsolve import LpProblem, LpSolution, LpStatus, solve_lp
from .trajectories import Trajectory


class WeightSpreadWarning(UserWarning):
    """The penalty weights span so many orders that precision may suffer."""


class InfeasibleProblemError(RuntimeError):
    """The assembled LP has no feasible point.

    Attributes:
        families: Names of the constraint families that phase 1 could
            not satisfy, e.g. ("init", "match").
    """

    def __init__(self, message: str, families: tuple[str, ...] = ()):
        super().__init__(message)
        self.families = families


class SolveFailedError(RuntimeError):
    """The LP solve ended without an optimum (unbounded or out of budget)."""


def _frozen(arr, ndim) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if ndim == 2:
        arr = np.atleast_2d(arr)
    else:
        arr = arr.reshape(-1)
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PolyhedralTarget:
    """Target set {w : G w <= g, H w = h} for stacked output windows.

    Attributes:
        G, g: Inequality part, G of shape (q_g, p*K_f).
        H, h: Equality part, H of shape (q_h, p*K_f).
    """

    G: np.ndarray
    g: np.ndarray
    H: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        for mat, vec, name in (("G", "g", "inequality"), ("H", "h", "equality")):
            M = _frozen(getattr(self, mat), 2)
            v = _frozen(getattr(self, vec), 1)
            if M.shape[0] != v.size:
                raise ValueError(f"{mat} and {vec} disagree on the number of {name} rows")
            object.__setattr__(self, mat, M)
            object.__setattr__(self, vec, v)
        if self.q_g + self.q_h == 0:
            raise ValueError("the target needs at least one row")
        if self.q_g and self.q_h and self.G.shape[1] != self.H.shape[1]:
            raise ValueError("G and H must act on windows of the same size")

    @property
    def q_g(self) -> int:
        return self.g.size

    @property
    def q_h(self) -> int:
        return self.h.size

    @property
    def window_dim(self) -> int:
        return self.G.shape[1] if self.q_g else self.H.shape[1]


@dataclass(frozen=True)
class PathConstraint:
    """Per-sample constraint S_u u(t) + S_y y(t) <= s.

    A constraint with zero rows (q_s = 0) means unconstrained.
    """

    S_u: np.ndarray
    S_y: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        S_u = _frozen(self.S_u, 2)
        S_y = _frozen(self.S_y, 2)
        s = _frozen(self.s, 1)
        if not (S_u.shape[0] == S_y.shape[0] == s.size):
            raise ValueError("S_u, S_y and s disagree on the number of rows")
        object.__setattr__(self, "S_u", S_u)
        object.__setattr__(self, "S_y", S_y)
        object.__setattr__(self, "s", s)

    @property
    def q_s(self) -> int:
        return self.s.size


def point_target(y_f) -> PolyhedralTarget:
    """Target window pinned to exact values: H = I, h = stacked y_f."""
    h = np.asarray(y_f, dtype=float).reshape(-1)
    return PolyhedralTarget(
        G=np.zeros((0, h.size)), g=np.zeros(0), H=np.eye(h.size), h=h
    )


def input_box_path(m: int, p: int, bound: float) -> PathConstraint:
    """Per-sample input box |u(t)|_inf <= bound, outputs unconstrained."""
    if bound <= 0:
        raise ValueError(f"bound must be positive, got {bound}")
    return PathConstraint(
        S_u=np.vstack([np.eye(m), -np.eye(m)]),
        S_y=np.zeros((2 * m, p)),
        s=np.full(2 * m, float(bound)),
    )


@dataclass(frozen=True)
class MinTimeSpec:
    """Data for one minimum-time problem.

    Attributes:
        K_i: Initialization window length (must be at least the model
            lag so the window pins the unknown initial condition).
        K_f: Target window length.
        u_init: Measured inputs over samples -K_i..-1, stacked (m*K_i,).
        y_init: Measured outputs over the same window, stacked (p*K_i,).
        target: Set the stacked output window y(t-K_f+1..t) must reach.
        path: Per-sample constraint on (u(t), y(t)) for t >= 0.
        T0, T1: Candidate arrival times to scan, inclusive.
        theta: Penalty growth rate, > 1.
        L: Segment length; must exceed K_i and match the model.
        eps_tol: Arrival threshold on |eps_t|_1.
    """

    K_i: int
    K_f: int
    u_init: np.ndarray
    y_init: np.ndarray
    target: PolyhedralTarget
    path: PathConstraint
    T0: int
    T1: int
    theta: float = 2.0
    L: int = 0
    eps_tol: float = 1e-3

    def __post_init__(self):
        if self.K_i < 1 or self.K_f < 1:
            raise ValueError("K_i and K_f must be >= 1")
        object.__setattr__(self, "u_init", _frozen(self.u_init, 1))
        object.__setattr__(self, "y_init", _frozen(self.y_init, 1))
        if self.u_init.size % self.K_i or self.y_init.size % self.K_i:
            raise ValueError("u_init and y_init must hold K_i samples each")
        if not 0 <= self.T0 <= self.T1:
            raise ValueError("need 0 <= T0 <= T1")
        if self.T0 - self.K_f + 1 < -self.K_i:
            raise ValueError(
                f"target window ending at T0={self.T0} would reach before "
                f"sample -K_i={-self.K_i}; raise T0 or shrink K_f"
            )
        if self.theta <= 1.0:
            raise ValueError(f"theta must exceed 1, got {self.theta}")
        if self.L <= self.K_i:
            raise ValueError(f"L must exceed K_i, got L={self.L}, K_i={self.K_i}")
        if self.eps_tol <= 0:
            raise ValueError("eps_tol must be positive")
        if self.target.window_dim != self.p * self.K_f:
            raise ValueError(
                f"target acts on windows of size {self.target.window_dim}, "
                f"expected p*K_f = {self.p * self.K_f}"
            )
        if self.path.q_s and (self.path.S_u.shape[1] != self.m or self.path.S_y.shape[1] != self.p):
            raise ValueError("path constraint channel counts do not match the data")

    @property
    def m(self) -> int:
        return self.u_init.size // self.K_i

    @property
    def p(self) -> int:
        return self.y_init.size // self.K_i


@dataclass(frozen=True)
class SegmentLayout:
    """Variable layout of the assembled LP.

    Variables are ordered segment by segment as (u_k, y_k, zeta_k) with
    zeta present only in the raw (unreduced) form, followed by the slack
    vectors eps_t for t = T0..T1.  Samples are global indices in
    [-K_i, N-1]; each belongs canonically to one segment (negative times
    to the head of segment 0, others to the segment whose fresh part
    holds them).
    """

    m: int
    p: int
    L: int
    K_i: int
    K_f: int
    T0: int
    T1: int
    q_g: int
    q_h: int
    q_s: int
    K: int
    N: int
    raw_width: int

    @property
    def step(self) -> int:
        return self.L - self.K_i

    @property
    def seg_vars(self) -> int:
        return (self.m + self.p) * self.L + self.raw_width

    @property
    def eps_per_t(self) -> int:
        return self.q_g + self.q_h

    @property
    def n_eps(self) -> int:
        return (self.T1 - self.T0 + 1) * self.eps_per_t

    @property
    def n_vars(self) -> int:
        return self.K * self.seg_vars + self.n_eps

    def u_slice(self, k: int) -> slice:
        start = k * self.seg_vars
        return slice(start, start + self.m * self.L)

    def y_slice(self, k: int) -> slice:
        start = k * self.seg_vars + self.m * self.L
        return slice(start, start + self.p * self.L)

    def zeta_slice(self, k: int) -> slice:
        start = k * self.seg_vars + (self.m + self.p) * self.L
        return slice(start, start + self.raw_width)

    def eps_slice(self, t: int) -> slice:
        if not self.T0 <= t <= self.T1:
            raise ValueError(f"t must lie in [{self.T0}, {self.T1}], got {t}")
        start = self.K * self.seg_vars + (t - self.T0) * self.eps_per_t
        return slice(start, start + self.eps_per_t)

    def owner(self, t: int) -> tuple[int, int]:
        """Canonical (segment, offset) of global sample t."""
        if not -self.K_i <= t <= self.N - 1:
            raise ValueError(f"sample {t} outside [-{self.K_i}, {self.N - 1}]")
        if t < 0:
            return 0, t + self.K_i
        return t // self.step, self.K_i + t % self.step

    def u_var(self, t: int, channel: int) -> int:
        k, offset = self.owner(t)
        return self.u_slice(k).start + offset * self.m + channel

    def y_var(self, t: int, channel: int) -> int:
        k, offset = self.owner(t)
        return self.y_slice(k).start + offset * self.p + channel


def segment_layout(spec: MinTimeSpec, model_width: int = 0) -> SegmentLayout:
    """Compute segment count and variable layout for a problem.

    Args:
        model_width: Number of Hankel columns when assembling the raw
            form with explicit coefficient vectors; 0 for the reduced
            (row-relation) form.

    Returns:
        The layout, with K = ceil((T1 + K_f) / (L - K_i)) segments
        covering N = K * (L - K_i) >= T1 + K_f samples.
    """
    step = spec.L - spec.K_i
    K = -(-(spec.T1 + spec.K_f) // step)
    return SegmentLayout(
        m=spec.m,
        p=spec.p,
        L=spec.L,
        K_i=spec.K_i,
        K_f=spec.K_f,
        T0=spec.T0,
        T1=spec.T1,
        q_g=spec.target.q_g,
        q_h=spec.target.q_h,
        q_s=spec.path.q_s,
        K=K,
        N=K * step,
        raw_width=model_width,
    )


def exp_weights(theta: float, T0: int, T1: int, rescale: bool = False) -> np.ndarray:
    """Penalty weights theta^(t - T0) for t = T0..T1.

    With rescale=True every weight is divided by theta^((T1 - T0) / 2),
    which leaves the minimizer unchanged but centers the exponents
    around one; the reported objective scales accordingly.  A warning is
    issued when the weight spread exceeds 1e12, since slacks at the
    lightly weighted end then carry little numerical influence.
    """
    spread = theta ** (T1 - T0)
    if spread > 1e12:
        warnings.warn(
            f"penalty weights span a factor {spread:.2e}; slack resolution at "
            "early times may be limited (consider a tighter [T0, T1])",
            WeightSpreadWarning,
            stacklevel=2,
        )
    exponents = np.arange(T1 - T0 + 1, dtype=float)
    if rescale:
        exponents -= (T1 - T0) / 2.0
    return theta**exponents


class _Assembly(NamedTuple):
    problem: LpProblem
    layout: SegmentLayout
    eq_labels: list[tuple[str, int]]
    ub_labels: list[tuple[str, int]]


def _assemble(spec: MinTimeSpec, model, rescale_weights: bool = False) -> _Assembly:
    if isinstance(model, ReducedModel):
        reduced = model
        raw = None
    elif isinstance(model, HankelModel):
        reduced = None
        raw = model
    else:
        raise TypeError(f"model must be a HankelModel or ReducedModel, got {type(model)!r}")
    if model.L != spec.L:
        raise ValueError(f"model window length {model.L} does not match spec L {spec.L}")
    if model.m != spec.m or model.p != spec.p:
        raise ValueError("model channel counts do not match the problem data")

    layout = segment_layout(spec, model_width=raw.width if raw else 0)
    m, p, L, K = layout.m, layout.p, layout.L, layout.K
    n = layout.n_vars
    io = (m + p) * L

    # ----- equality rows -------------------------------------------------
    if reduced is not None:
        dyn_per_seg = io - reduced.r
    else:
        dyn_per_seg = io
    n_match = (K - 1) * spec.K_i * (m + p)
    n_init = spec.K_i * (m + p)
    n_eq = K * dyn_per_seg + n_match + n_init
    A_eq = np.zeros((n_eq, n))
    b_eq = np.zeros(n_eq)
    eq_labels: list[tuple[str, int]] = []
    row = 0

    for k in range(K):
        base = k * layout.seg_vars
        block = slice(row, row + dyn_per_seg)
        if reduced is not None:
            rows = row + np.arange(dyn_per_seg)
            cols_sel = base + np.asarray(reduced.row_selection, dtype=int)
            cols_comp = base + np.asarray(reduced.complement_rows, dtype=int)
            A_eq[rows, cols_comp] = 1.0
            if cols_sel.size:
                A_eq[np.ix_(rows, cols_sel)] -= reduced.gamma
        else:
            A_eq[block, base : base + io] = np.eye(io)
            A_eq[block, layout.zeta_slice(k)] = -raw.stacked()
        eq_labels += [("dynamics", k)] * dyn_per_seg
        row += dyn_per_seg

    for k in range(K - 1):
        for j in range(spec.K_i):
            for c in range(m):
                A_eq[row, layout.u_slice(k).start + (layout.step + j) * m + c] = 1.0
                A_eq[row, layout.u_slice(k + 1).start + j * m + c] = -1.0
                eq_labels.append(("match", k))
                row += 1
            for c in range(p):
                A_eq[row, layout.y_slice(k).start + (layout.step + j) * p + c] = 1.0
                A_eq[row, layout.y_slice(k + 1).start + j * p + c] = -1.0
                eq_labels.append(("match", k))
                row += 1

    for j in range(spec.K_i):
        for c in range(m):
            A_eq[row, layout.u_slice(0).start + j * m + c] = 1.0
            b_eq[row] = spec.u_init[j * m + c]
            eq_labels.append(("init", 0))
            row += 1
        for c in range(p):
            A_eq[row, layout.y_slice(0).start + j * p + c] = 1.0
            b_eq[row] = spec.y_init[j * p + c]
            eq_labels.append(("init", 0))
            row += 1
    assert row == n_eq

    # ----- inequality rows ------------------------------------------------
    q_s, q_g, q_h = layout.q_s, layout.q_g, layout.q_h
    n_path = q_s * layout.N
    n_term = (spec.T1 - spec.T0 + 1) * (q_g + 2 * q_h)
    A_ub = np.zeros((n_path + n_term, n))
    b_ub = np.zeros(n_path + n_term)
    ub_labels: list[tuple[str, int]] = []
    row = 0

    if q_s:
        for t in range(layout.N):
            k, offset = layout.owner(t)
            block = slice(row, row + q_s)
            u0 = layout.u_slice(k).start + offset * m
            y0 = layout.y_slice(k).start + offset * p
            A_ub[block, u0 : u0 + m] = spec.path.S_u
            A_ub[block, y0 : y0 + p] = spec.path.S_y
            b_ub[block] = spec.path.s
            ub_labels += [("path", t)] * q_s
            row += q_s

    weights = exp_weights(spec.theta, spec.T0, spec.T1, rescale=rescale_weights)
    c = np.zeros(n)
    for t in range(spec.T0, spec.T1 + 1):
        window_cols = np.array(
            [
                layout.y_var(t - spec.K_f + 1 + d, j)
                for d in range(spec.K_f)
                for j in range(p)
            ]
        )
        eps = layout.eps_slice(t)
        eps_g = slice(eps.start, eps.start + q_g)
        eps_h = slice(eps.start + q_g, eps.stop)
        if q_g:
            block = slice(row, row + q_g)
            A_ub[np.ix_(range(row, row + q_g), window_cols)] = spec.target.G
            A_ub[block, eps_g] = -np.eye(q_g)
            b_ub[block] = spec.target.g
            ub_labels += [("target_g", t)] * q_g
            row += q_g
        if q_h:
            block = slice(row, row + q_h)
            A_ub[np.ix_(range(row, row + q_h), window_cols)] = spec.target.H
            A_ub[block, eps_h] = -np.eye(q_h)
            b_ub[block] = spec.target.h
            ub_labels += [("target_h", t)] * q_h
            row += q_h
            block = slice(row, row + q_h)
            A_ub[np.ix_(range(row, row + q_h), window_cols)] = -spec.target.H
            A_ub[block, eps_h] = -np.eye(q_h)
            b_ub[block] = -spec.target.h
            ub_labels += [("target_h", t)] * q_h
            row += q_h
        c[eps] = weights[t - spec.T0]
    assert row == n_path + n_term

    lower = np.full(n, -np.inf)
    lower[layout.K * layout.seg_vars :] = 0.0
    upper = np.full(n, np.inf)
    problem = LpProblem(c=c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub, lower=lower, upper=upper)
    return _Assembly(problem, layout, eq_labels, ub_labels)


def assemble_lp(spec: MinTimeSpec, model, rescale_weights: bool = False) -> LpProblem:
    """Assemble the exact-penalty LP for a problem and a trajectory model.

    Args:
        model: Either a ReducedModel (row-relation constraints, the
            default route) or a HankelModel (explicit coefficient
            vectors zeta_k per segment; same optimum, larger LP).
        rescale_weights: See :func:`exp_weights`.
    """
    return _assemble(spec, model, rescale_weights).problem


@dataclass(frozen=True)
class SolverStats:
    """Bookkeeping from one solve."""

    status: str
    iterations: int
    runtime_s: float
    lp_rows: int
    lp_vars: int
    max_violation: float


@dataclass(frozen=True)
class MinTimeSolution:
    """A solved minimum-time problem.

    Attributes:
        trajectory: Stitched input-output trajectory over samples
            -K_i..N-1; the first K_i samples are the initialization
            window verbatim.
        eps_schedule: Slack vector per candidate time t = T0..T1.
        t_star: First t with |eps_t|_1 below the threshold, or None if
            the target is never settled inside [T0, T1].
        objective: Penalty objective value.
        solver_stats: See :class:`SolverStats`.
    """

    trajectory: Trajectory
    eps_schedule: dict[int, np.ndarray]
    t_star: int | None
    objective: float
    solver_stats: SolverStats


def extract_solution(
    spec: MinTimeSpec, layout: SegmentLayout, lp_solution: LpSolution
) -> MinTimeSolution:
    """Stitch an LP optimum into a trajectory and a slack schedule.

    Duplicated overlap samples agree by the matching constraints, so
    each sample is read from its canonical segment.  The first K_i
    samples are copied from the problem data rather than the solver
    point; they are pinned by equality rows, and copying keeps them
    exact instead of exact-to-solver-tolerance.
    """
    z = lp_solution.z
    m, p = layout.m, layout.p
    length = layout.K_i + layout.N
    u = np.empty((length, m))
    y = np.empty((length, p))
    for i, t in enumerate(range(-layout.K_i, layout.N)):
        for c in range(m):
            u[i, c] = z[layout.u_var(t, c)]
        for c in range(p):
            y[i, c] = z[layout.y_var(t, c)]
    u[: layout.K_i] = spec.u_init.reshape(layout.K_i, m)
    y[: layout.K_i] = spec.y_init.reshape(layout.K_i, p)

    eps_schedule: dict[int, np.ndarray] = {}
    t_star = None
    for t in range(layout.T0, layout.T1 + 1):
        eps = np.maximum(z[layout.eps_slice(t)], 0.0)
        eps_schedule[t] = eps
        if t_star is None and float(np.sum(eps)) < spec.eps_tol:
            t_star = t

    stats = SolverStats(
        status=lp_solution.status.value,
        iterations=lp_solution.iterations,
        runtime_s=0.0,
        lp_rows=0,
        lp_vars=z.size,
        max_violation=lp_solution.max_violation,
    )
    return MinTimeSolution(
        trajectory=Trajectory(inputs=u, outputs=y, start_index=-layout.K_i),
        eps_schedule=eps_schedule,
        t_star=t_star,
        objective=lp_solution.objective,
        solver_stats=stats,
    )


def solve_min_time(
    spec: MinTimeSpec,
    model,
    solver: Callable[[LpProblem], LpSolution] | None = None,
    rescale_weights: bool = False,
) -> MinTimeSolution:
    """Assemble and solve a minimum-time problem.

    Args:
        spec: Problem data.
        model: ReducedModel or HankelModel; see :func:`assemble_lp`.
        solver: LP solver to use; defaults to :func:`ddmintime.lpsolve.solve_lp`.

    Returns:
        The stitched solution with its slack schedule; t_star is None
        when no candidate time settles the target.

    Raises:
        InfeasibleProblemError: No trajectory satisfies the constraints;
            the message names the offending constraint families.
        SolveFailedError: The LP was unbounded or ran out of iterations.
    """
    assembly = _assemble(spec, model, rescale_weights)
    solve = solver if solver is not None else solve_lp
    started = time.perf_counter()
    lp_solution = solve(assembly.problem)
    runtime = time.perf_counter() - started

    if lp_solution.status == LpStatus.INFEASIBLE:
        families = []
        for kind, idx in lp_solution.infeasible_rows:
            labels = assembly.eq_labels if kind == "eq" else assembly.ub_labels
            families.append(labels[idx][0])
        families = tuple(sorted(set(families)))
        detail = f" (constraint families: {', '.join(families)})" if families else ""
        raise InfeasibleProblemError(
            f"no admissible trajectory satisfies the constraints{detail}", families
        )
    if lp_solution.status != LpStatus.OPTIMAL:
        raise SolveFailedError(f"LP solve ended with status {lp_solution.status.value}")

    solution = extract_solution(spec, assembly.layout, lp_solution)
    stats = replace(
        solution.solver_stats,
        runtime_s=runtime,
        lp_rows=assembly.problem.n_eq + assembly.problem.n_ub,
    )
    return replace(solution, solver_stats=stats)
