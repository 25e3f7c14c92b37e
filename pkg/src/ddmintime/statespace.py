"""Discrete-time LTI state-space models and exact trajectory checks.

This module is the model-based side of the package: simulation, the
observability/forced-response machinery used to recover initial states
from short input-output windows, and the spacecraft relative-motion
example system.  The data-driven side (Hankel trajectory models) lives
in :mod:`ddmintime.hankel` and is validated against the functions here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .trajectories import DataTrajectory, Trajectory

# Singular values below DEFAULT_RANK_RTOL * sigma_max are treated as zero
# everywhere a numerical rank is needed.
DEFAULT_RANK_RTOL = 1e-8

# Sup-norm tolerance for deciding whether an input-output pair is
# consistent with a model.
DEFAULT_ADMISSIBILITY_TOL = 1e-6


class NotObservableError(ValueError):
    """The requested operation needs an observable model."""


class NotAdmissibleError(ValueError):
    """An input-output pair is inconsistent with the model."""


def numerical_rank(matrix: np.ndarray, rank_rtol: float = DEFAULT_RANK_RTOL) -> int:
    """Rank of a matrix with singular values below rank_rtol * sigma_max zeroed."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_rtol * s[0]))


def _as_matrix(value, shape: tuple[int, int], name: str) -> np.ndarray:
    arr = np.array(value, dtype=float)
    arr = np.atleast_2d(arr)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpaceModel:
    """A discrete-time LTI system x+ = Ax + Bu, y = Cx + Du.

    Attributes:
        A: State matrix, shape (n, n).
        B: Input matrix, shape (n, m).
        C: Output matrix, shape (p, n).
        D: Feedthrough matrix, shape (p, m).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        B = np.atleast_2d(np.array(self.B, dtype=float))
        if B.shape[0] != n:
            raise ValueError(f"B must have {n} rows, got shape {B.shape}")
        m = B.shape[1]
        C = np.atleast_2d(np.array(self.C, dtype=float))
        if C.shape[1] != n:
            raise ValueError(f"C must have {n} columns, got shape {C.shape}")
        p = C.shape[0]
        for name, arr in (("A", A), ("B", B), ("C", C)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "D", _as_matrix(self.D, (p, m), "D"))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]


def simulate(
    model: StateSpaceModel, x0: np.ndarray, inputs: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate the model forward from x0 under the given input sequence.

    Args:
        model: System to simulate.
        x0: Initial state, shape (n,).
        inputs: Input sequence, shape (T, m); a 1-D array is accepted
            when m = 1.

    Returns:
        Tuple (outputs, states) with shapes (T, p) and (T + 1, n); the
        last state row is the post-horizon state x(T).
    """
    x0 = np.asarray(x0, dtype=float).reshape(model.n)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs.reshape(-1, 1)
    if inputs.ndim != 2 or inputs.shape[1] != model.m:
        raise ValueError(f"inputs must have shape (T, {model.m}), got {inputs.shape}")
    T = inputs.shape[0]
    states = np.empty((T + 1, model.n))
    outputs = np.empty((T, model.p))
    states[0] = x0
    for t in range(T):
        outputs[t] = model.C @ states[t] + model.D @ inputs[t]
        states[t + 1] = model.A @ states[t] + model.B @ inputs[t]
    return outputs, states


def observability_matrix(model: StateSpaceModel, l: int) -> np.ndarray:
    """Stack C, CA, ..., CA^{l-1} into a (p*l, n) matrix."""
    if l < 1:
        raise ValueError(f"window length must be >= 1, got {l}")
    blocks = np.empty((l, model.p, model.n))
    blocks[0] = model.C
    for i in range(1, l):
        blocks[i] = blocks[i - 1] @ model.A
    return blocks.reshape(l * model.p, model.n)


def markov_toeplitz(model: StateSpaceModel, l: int) -> np.ndarray:
    """Block-Toeplitz map from stacked inputs to the forced output response.

    Block (i, j) is D on the diagonal and C A^{i-j-1} B below it, so the
    stacked output of a window of length l from initial state x is
    observability_matrix(model, l) @ x + markov_toeplitz(model, l) @ u.
    """
    if l < 1:
        raise ValueError(f"window length must be >= 1, got {l}")
    n, m, p = model.n, model.m, model.p
    markov = np.empty((l, p, m))
    markov[0] = model.D
    if l > 1:
        power = model.B  # A^{k} B, starting at k = 0
        markov[1] = model.C @ power
        for k in range(2, l):
            power = model.A @ power
            markov[k] = model.C @ power
    toeplitz = np.zeros((l * p, l * m))
    for i in range(l):
        for j in range(i + 1):
            toeplitz[i * p : (i + 1) * p, j * m : (j + 1) * m] = markov[i - j]
    return toeplitz


def lag(model: StateSpaceModel, rank_rtol: float = DEFAULT_RANK_RTOL) -> int:
    """Smallest l such that the order-l observability matrix has rank n.

    Raises:
        NotObservableError: If the model is not observable, i.e. even the
            order-n observability matrix is rank deficient.
    """
    if numerical_rank(observability_matrix(model, model.n), rank_rtol) < model.n:
        raise NotObservableError("model is not observable; the lag is undefined")
    for l in range(1, model.n + 1):
        if numerical_rank(observability_matrix(model, l), rank_rtol) == model.n:
            return l
    raise AssertionError("unreachable: rank n must be reached by l = n")


def initial_state_from_io(
    model: StateSpaceModel,
    window: Trajectory,
    tol: float = DEFAULT_ADMISSIBILITY_TOL,
    rank_rtol: float = DEFAULT_RANK_RTOL,
) -> np.ndarray:
    """Recover the state at the start of an input-output window.

    The window must be at least as long as the model lag, so the stacked
    output equation y = O_l x + C_l u determines x uniquely.

    Args:
        window: Input-output window of length l >= lag(model).
        tol: Sup-norm bound on the reconstruction residual.

    Returns:
        The state x at the first sample of the window, shape (n,).

    Raises:
        NotObservableError: If the model is not observable.
        NotAdmissibleError: If the window is inconsistent with the model,
            i.e. no state reproduces the outputs to within tol.
    """
    l = window.length
    if l < lag(model, rank_rtol):
        raise ValueError(f"window length {l} is below the model lag")
    if window.m != model.m or window.p != model.p:
        raise ValueError("window channel counts do not match the model")
    obs = observability_matrix(model, l)
    forced = markov_toeplitz(model, l) @ window.inputs.reshape(-1)
    free = window.outputs.reshape(-1) - forced
    x0 = np.linalg.pinv(obs, rcond=rank_rtol) @ free
    residual = obs @ x0 - free
    if np.max(np.abs(residual), initial=0.0) > tol:
        raise NotAdmissibleError(
            f"window is inconsistent with the model (residual {np.max(np.abs(residual)):.3e})"
        )
    return x0


def propagated_initial_state(
    model: StateSpaceModel,
    window: Trajectory,
    tol: float = DEFAULT_ADMISSIBILITY_TOL,
    rank_rtol: float = DEFAULT_RANK_RTOL,
) -> np.ndarray:
    """State reached immediately after an initialization window.

    For a window (u_i, y_i) of length K_i covering samples -K_i..-1, the
    state at sample 0 is

        x(0) = A^{K_i} O^+ (y_i - C u_i) + [A^{K_i-1} B, ..., A B, B] u_i

    with O and C the order-K_i observability and forced-response
    matrices.  Equivalent to recovering x(-K_i) and simulating forward.

    Raises:
        NotAdmissibleError: If the window is inconsistent with the model.
    """
    x_start = initial_state_from_io(model, window, tol=tol, rank_rtol=rank_rtol)
    K_i = window.length
    reach_blocks = np.empty((model.n, K_i * model.m))
    power = model.B  # A^k B for k = 0, placed rightmost
    reach_blocks[:, (K_i - 1) * model.m :] = power
    for k in range(1, K_i):
        power = model.A @ power
        reach_blocks[:, (K_i - 1 - k) * model.m : (K_i - k) * model.m] = power
    return np.linalg.matrix_power(model.A, K_i) @ x_start + reach_blocks @ window.inputs.reshape(-1)


def is_admissible(
    model: StateSpaceModel,
    pair: Trajectory,
    tol: float = DEFAULT_ADMISSIBILITY_TOL,
    rank_rtol: float = DEFAULT_RANK_RTOL,
) -> bool:
    """Check whether some initial state reproduces the pair's outputs.

    A pair (u, y) is admissible when there exists x with
    y = O_l x + C_l u, tested in the sup norm with tolerance tol.
    """
    if pair.m != model.m or pair.p != model.p:
        raise ValueError("pair channel counts do not match the model")
    obs = observability_matrix(model, pair.length)
    free = pair.outputs.reshape(-1) - markov_toeplitz(model, pair.length) @ pair.inputs.reshape(-1)
    x0, *_ = np.linalg.lstsq(obs, free, rcond=rank_rtol)
    return float(np.max(np.abs(obs @ x0 - free), initial=0.0)) <= tol


@dataclass(frozen=True)
class CwhParams:
    """Parameters of the in-orbit relative-motion example.

    Attributes:
        mu: Gravitational parameter of the central body, km^3/s^2.
        r_o: Circular orbit radius of the target, km.
        m_s: Chaser spacecraft mass, kg.
        T_max: Maximum thrust per axis, kN.
        dt: Sampling period for the Euler discretization, s.
    """

    mu: float = 398600.0
    r_o: float = 6928.0
    m_s: float = 50.0
    T_max: float = 2e-4
    dt: float = 10.0

    @property
    def omega(self) -> float:
        """Mean motion of the reference orbit, rad/s."""
        return math.sqrt(self.mu / self.r_o**3)


def cwh_model(params: CwhParams = CwhParams()) -> StateSpaceModel:
    """Euler-discretized linearized relative motion about a circular orbit.

    State is (x, y, z, vx, vy, vz) in the rotating target frame, inputs
    are normalized thrusts in [-1, 1] per axis scaled by T_max / m_s,
    and outputs are the three positions.
    """
    w = params.omega
    A_c = np.zeros((6, 6))
    A_c[0:3, 3:6] = np.eye(3)
    A_c[3, 0] = 3.0 * w**2
    A_c[3, 4] = 2.0 * w
    A_c[4, 3] = -2.0 * w
    A_c[5, 2] = -(w**2)
    B_c = np.zeros((6, 3))
    B_c[3:6, :] = (params.T_max / params.m_s) * np.eye(3)
    A = np.eye(6) + params.dt * A_c
    B = params.dt * B_c
    C = np.zeros((3, 6))
    C[:, 0:3] = np.eye(3)
    D = np.zeros((3, 3))
    return StateSpaceModel(A=A, B=B, C=C, D=D)


def generate_excitation_data(
    model: StateSpaceModel,
    x0: np.ndarray | None,
    M: int,
    bound: float,
    seed: int,
) -> DataTrajectory:
    """Record an open-loop experiment under uniform random inputs.

    Inputs are drawn i.i.d. uniform on [-bound, bound]^m from
    numpy.random.default_rng(seed), so a given seed reproduces the same
    record on any platform.

    Args:
        x0: Initial state; None means the origin.
        M: Number of samples to record.
        bound: Input amplitude.
        seed: Seed for the generator.

    Returns:
        The recorded input-output data.
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if bound < 0:
        raise ValueError(f"bound must be >= 0, got {bound}")
    if x0 is None:
        x0 = np.zeros(model.n)
    rng = np.random.default_rng(seed)
    u = rng.uniform(-bound, bound, size=(M, model.m))
    y, _ = simulate(model, x0, u)
    return DataTrajectory(u=u, y=y)
