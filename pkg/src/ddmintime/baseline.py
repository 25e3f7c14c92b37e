"""Model-based minimum-time baseline used to validate the LP route.

With a known state-space model, bounded inputs and a target state, the
minimum arrival time can be found exactly: scan candidate times in
ascending order and test, per candidate t, whether some input sequence
inside the box steers x(0) to the target in t steps.  Each test is a
feasibility LP over the inputs only, with the states eliminated through
the controllability expansion

    x(t) = A^t x(0) + [A^(t-1) B, ..., A B, B] u.

The first feasible candidate is the minimum time; no binary variables
are needed because the scan is exhaustive.  A literal big-M variant
(states kept as variables, one arrival indicator fixed per candidate)
is included for cross-checking the eliminated form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lpsolve import LpProblem, LpSolution, LpStatus, solve_lp
from .statespace import StateSpaceModel, simulate
from .trajectories import Trajectory


class BaselineSolveError(RuntimeError):
    """A feasibility LP ended in an unexpected state (not optimal/infeasible)."""


@dataclass(frozen=True)
class BaselineSpec:
    """Minimum-time problem in state-space form.

    Attributes:
        model: Known system.
        x_init: State at sample 0.
        x_target: State to reach exactly.
        u_lower, u_upper: Per-channel input bounds, shape (m,).
        T0, T1: Candidate arrival times to scan, inclusive.
    """

    model: StateSpaceModel
    x_init: np.ndarray
    x_target: np.ndarray
    u_lower: np.ndarray
    u_upper: np.ndarray
    T0: int
    T1: int

    def __post_init__(self):
        n, m = self.model.n, self.model.m
        for name, size in (("x_init", n), ("x_target", n), ("u_lower", m), ("u_upper", m)):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if arr.size != size:
                raise ValueError(f"{name} must have {size} entries, got {arr.size}")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.u_lower > self.u_upper):
            raise ValueError("u_lower must not exceed u_upper")
        if not 0 <= self.T0 <= self.T1:
            raise ValueError("need 0 <= T0 <= T1")


def solve_min_time_exact(
    spec: BaselineSpec,
    solver: Callable[[LpProblem], LpSolution] | None = None,
    tol: float = 1e-9,
) -> tuple[int | None, Trajectory | None]:
    """Scan arrival times ascending and return the first reachable one.

    Args:
        solver: LP solver for the per-candidate feasibility problems;
            defaults to :func:`ddmintime.lpsolve.solve_lp`.
        tol: Tolerance for the t = 0 case |x_init - x_target|_inf.

    Returns:
        (t_star, trajectory) where the trajectory holds the witness
        inputs over samples 0..t_star (the final input is zero, padding
        the arrival sample) and the simulated outputs.  (None, None)
        if no candidate in [T0, T1] is reachable.

    Raises:
        BaselineSolveError: A feasibility LP failed numerically.
    """
    solve = solver if solver is not None else solve_lp
    model = spec.model
    m = model.m

    # Grow [A^(t-1) B, ..., B] and A^t incrementally while scanning.
    blocks: list[np.ndarray] = []
    for _ in range(spec.T0):
        blocks.insert(0, model.A @ blocks[0] if blocks else model.B)
    pow_t = np.linalg.matrix_power(model.A, spec.T0)

    for t in range(spec.T0, spec.T1 + 1):
        if t == 0:
            # Only reachable with an empty input sequence.
            if float(np.max(np.abs(spec.x_init - spec.x_target), initial=0.0)) <= tol:
                u = np.zeros((1, m))
                y, _ = simulate(model, spec.x_init, u)
                return 0, Trajectory(inputs=u, outputs=y, start_index=0)
        else:
            assert len(blocks) == t
            result = solve(
                LpProblem(
                    c=np.zeros(t * m),
                    A_eq=np.hstack(blocks),
                    b_eq=spec.x_target - pow_t @ spec.x_init,
                    lower=np.tile(spec.u_lower, t),
                    upper=np.tile(spec.u_upper, t),
                )
            )
            if result.status == LpStatus.OPTIMAL:
                u = result.z.reshape(t, m)
                u = np.vstack([u, np.zeros((1, m))])  # pad the arrival sample
                y, states = simulate(model, spec.x_init, u)
                return t, Trajectory(inputs=u, outputs=y, start_index=0)
            if result.status != LpStatus.INFEASIBLE:
                raise BaselineSolveError(
                    f"feasibility check at t={t} returned status {result.status.value}"
                )
        blocks.insert(0, model.A @ blocks[0] if blocks else model.B)
        pow_t = model.A @ pow_t

    return None, None


def solve_min_time_big_m(
    spec: BaselineSpec,
    W: float = 1e4,
    solver: Callable[[LpProblem], LpSolution] | None = None,
) -> int | None:
    """Minimum time via the literal big-M program, solved by enumeration.

    Keeps every state x(0..T1) and input u(0..T1-1) as variables and
    relaxes the arrival condition at time tau to |x(tau) - x_target|
    <= W unless the (one-hot) arrival indicator selects tau.  With the
    indicator fixed to each candidate in ascending order, the program
    is an LP; the first feasible candidate is the optimum, since the
    objective just picks the selected time.  Exists to cross-check
    :func:`solve_min_time_exact`; the eliminated form is much smaller.
    """
    solve = solver if solver is not None else solve_lp
    model = spec.model
    n, m, T1 = model.n, model.m, spec.T1
    n_x = (T1 + 1) * n
    n_vars = n_x + T1 * m

    def x_slice(t):
        return slice(t * n, (t + 1) * n)

    def u_slice(t):
        return slice(n_x + t * m, n_x + (t + 1) * m)

    # Dynamics x(t+1) = A x(t) + B u(t) and the pinned initial state.
    A_eq = np.zeros((T1 * n + n, n_vars))
    b_eq = np.zeros(T1 * n + n)
    for t in range(T1):
        rows = slice(t * n, (t + 1) * n)
        A_eq[rows, x_slice(t + 1)] = np.eye(n)
        A_eq[rows, x_slice(t)] = -model.A
        A_eq[rows, u_slice(t)] = -model.B
    A_eq[T1 * n :, x_slice(0)] = np.eye(n)
    b_eq[T1 * n :] = spec.x_init

    lower = np.full(n_vars, -np.inf)
    upper = np.full(n_vars, np.inf)
    for t in range(T1):
        lower[u_slice(t)] = spec.u_lower
        upper[u_slice(t)] = spec.u_upper

    # One relaxable row pair per candidate; fixing the indicator at a
    # candidate tightens that pair to the target value.
    taus = list(range(spec.T0, spec.T1 + 1))
    tau_pos = {tau: i for i, tau in enumerate(taus)}
    A_ub = np.zeros((2 * n * len(taus), n_vars))
    base_b = np.full(2 * n * len(taus), W)
    for i, tau in enumerate(taus):
        A_ub[slice(2 * n * i, 2 * n * i + n), x_slice(tau)] = np.eye(n)
        A_ub[slice(2 * n * i + n, 2 * n * (i + 1)), x_slice(tau)] = -np.eye(n)

    for cand in taus:
        i = tau_pos[cand]
        b_ub = base_b.copy()
        b_ub[slice(2 * n * i, 2 * n * i + n)] = spec.x_target
        b_ub[slice(2 * n * i + n, 2 * n * (i + 1))] = -spec.x_target
        result = solve(
            LpProblem(
                c=np.zeros(n_vars), A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub,
                lower=lower, upper=upper,
            )
        )
        if result.status == LpStatus.OPTIMAL:
            return cand
        if result.status != LpStatus.INFEASIBLE:
            raise BaselineSolveError(
                f"big-M feasibility check at tau={cand} returned status {result.status.value}"
            )
    return None
