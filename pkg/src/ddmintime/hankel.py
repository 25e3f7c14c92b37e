"""Data-driven trajectory models built from Hankel matrices.

A single sufficiently exciting input-output record (u, y) parametrizes
every admissible length-L trajectory of the underlying system: the
columns of the stacked Hankel matrix col(H_L(u), H_L(y)) span exactly
the admissible pairs.  This module builds those models, tests
persistency of excitation, checks membership, and computes the
rank-based reduction that replaces the tall column-span constraint with
a small set of linear row relations.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .statespace import DEFAULT_ADMISSIBILITY_TOL, DEFAULT_RANK_RTOL, numerical_rank
from .trajectories import (  # noqa: F401  (re-exported: data IO lives with the data model)
    DataTrajectory,
    Trajectory,
    read_data_csv,
    write_data_csv,
)


def build_hankel(signal: np.ndarray, L: int) -> np.ndarray:
    """Block-Hankel matrix of window length L.

    Args:
        signal: Samples of a d-channel signal, shape (M, d); 1-D input
            is treated as d = 1.
        L: Window length, 1 <= L <= M.

    Returns:
        Matrix of shape (d*L, M - L + 1) whose column j stacks
        signal[j], ..., signal[j + L - 1].
    """
    signal = np.asarray(signal, dtype=float)
    if signal.ndim == 1:
        signal = signal.reshape(-1, 1)
    if signal.ndim != 2:
        raise ValueError(f"signal must be 1-D or 2-D, got shape {signal.shape}")
    M, d = signal.shape
    if not 1 <= L <= M:
        raise ValueError(f"window length must satisfy 1 <= L <= {M}, got {L}")
    width = M - L + 1
    H = np.empty((d * L, width))
    for i in range(L):
        H[i * d : (i + 1) * d, :] = signal[i : i + width].T
    return H


def is_persistently_exciting(
    u: np.ndarray, order: int, rank_rtol: float = DEFAULT_RANK_RTOL
) -> bool:
    """Whether the input record is persistently exciting of the given order.

    True iff the order-`order` Hankel matrix of u has full row rank m*order.
    """
    H = build_hankel(u, order)
    return numerical_rank(H, rank_rtol) == H.shape[0]


@dataclass(frozen=True)
class ReducedModel:
    """Row-relation form of a Hankel trajectory model.

    Writing the stacked matrix H = col(H_u, H_y) with rank r, the rows
    split into an independent set H_1 (the first r linearly independent
    rows in natural order) and the rest H_2 = gamma @ H_1.  A stacked
    length-L pair v = col(u, y) is admissible iff v_2 = gamma @ v_1,
    which replaces a width-of-the-data-record coefficient vector with
    (m+p)L - r equality rows.

    Attributes:
        row_selection: Indices of the independent rows, ascending.
        complement_rows: Indices of the remaining rows, ascending.
        gamma: Coefficients expressing complement rows in terms of
            selected rows, shape (len(complement_rows), r).
        r: Numerical rank of the stacked matrix.
        m: Input channels.
        p: Output channels.
        L: Window length.
    """

    row_selection: tuple[int, ...]
    complement_rows: tuple[int, ...]
    gamma: np.ndarray
    r: int
    m: int
    p: int
    L: int

    def __post_init__(self):
        gamma = np.atleast_2d(np.asarray(self.gamma, dtype=float))
        expected = (len(self.complement_rows), self.r)
        if gamma.shape != expected and gamma.size != 0:
            raise ValueError(f"gamma must have shape {expected}, got {gamma.shape}")
        gamma = gamma.reshape(expected) if gamma.size else np.zeros(expected)
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        if self.r != len(self.row_selection):
            raise ValueError("r must equal the number of selected rows")
        total = (self.m + self.p) * self.L
        if sorted(self.row_selection + self.complement_rows) != list(range(total)):
            raise ValueError("row_selection and complement_rows must partition the row set")


class HankelModel:
    """All admissible length-L trajectories of a system, from one record.

    Attributes:
        H_u: Input Hankel matrix, shape (m*L, M - L + 1).
        H_y: Output Hankel matrix, shape (p*L, M - L + 1).
        L: Window length.
        m: Input channels.
        p: Output channels.
        M: Length of the underlying record.
    """

    def __init__(self, H_u: np.ndarray, H_y: np.ndarray, L: int, m: int, p: int, M: int):
        if H_u.shape != (m * L, M - L + 1):
            raise ValueError(f"H_u must have shape {(m * L, M - L + 1)}, got {H_u.shape}")
        if H_y.shape != (p * L, M - L + 1):
            raise ValueError(f"H_y must have shape {(p * L, M - L + 1)}, got {H_y.shape}")
        self.H_u = H_u
        self.H_y = H_y
        self.L = L
        self.m = m
        self.p = p
        self.M = M
        self._lock = threading.Lock()
        self._stacked: np.ndarray | None = None
        self._stacked_pinv: np.ndarray | None = None
        self._reduced: dict[float, ReducedModel] = {}

    @property
    def width(self) -> int:
        """Number of Hankel columns, M - L + 1."""
        return self.M - self.L + 1

    def stacked(self) -> np.ndarray:
        """The stacked matrix col(H_u, H_y), shape ((m+p)*L, width)."""
        with self._lock:
            if self._stacked is None:
                self._stacked = np.vstack([self.H_u, self.H_y])
            return self._stacked

    def _pinv(self) -> np.ndarray:
        with self._lock:
            if self._stacked_pinv is None:
                stacked = self._stacked
                if stacked is None:
                    stacked = self._stacked = np.vstack([self.H_u, self.H_y])
                self._stacked_pinv = np.linalg.pinv(stacked, rcond=DEFAULT_RANK_RTOL)
            return self._stacked_pinv

    def reduce(self, rank_rtol: float = DEFAULT_RANK_RTOL) -> ReducedModel:
        """Compute (once) and cache the row-relation form of this model.

        Rows are scanned in natural order; a row joins the independent
        set when its component orthogonal to the rows already selected
        exceeds rank_rtol times its own norm.  The result is memoized
        per tolerance and safe to request from multiple threads.
        """
        with self._lock:
            cached = self._reduced.get(rank_rtol)
        if cached is not None:
            return cached
        reduced = _reduce_rows(self, rank_rtol)
        with self._lock:
            self._reduced.setdefault(rank_rtol, reduced)
            return self._reduced[rank_rtol]


def _reduce_rows(model: HankelModel, rank_rtol: float) -> ReducedModel:
    H = model.stacked()
    n_rows = H.shape[0]
    Q = np.empty((min(H.shape), H.shape[1]))
    selected: list[int] = []
    for idx in range(n_rows):
        v = H[idx].copy()
        norm0 = np.linalg.norm(v)
        if norm0 == 0.0:
            continue
        # Two rounds of Gram-Schmidt keep the residual trustworthy for
        # rows nearly inside the selected span.
        r = len(selected)
        for _ in range(2):
            if r:
                v -= Q[:r].T @ (Q[:r] @ v)
        residual = np.linalg.norm(v)
        if residual > rank_rtol * norm0:
            Q[r] = v / residual
            selected.append(idx)
    complement = [i for i in range(n_rows) if i not in set(selected)]
    H_1 = H[selected]
    if complement:
        H_2 = H[complement]
        gamma = np.linalg.lstsq(H_1.T, H_2.T, rcond=None)[0].T
    else:
        gamma = np.zeros((0, len(selected)))
    return ReducedModel(
        row_selection=tuple(selected),
        complement_rows=tuple(complement),
        gamma=gamma,
        r=len(selected),
        m=model.m,
        p=model.p,
        L=model.L,
    )


def build_data_model(data: DataTrajectory, L: int) -> HankelModel:
    """Build the length-L trajectory model of a recorded experiment."""
    if not 1 <= L <= data.M:
        raise ValueError(f"window length must satisfy 1 <= L <= {data.M}, got {L}")
    return HankelModel(
        H_u=build_hankel(data.u, L),
        H_y=build_hankel(data.y, L),
        L=L,
        m=data.m,
        p=data.p,
        M=data.M,
    )


def stack_pair(pair: Trajectory) -> np.ndarray:
    """Stack a trajectory into the col(u, y) vector the model acts on."""
    return np.concatenate([pair.inputs.reshape(-1), pair.outputs.reshape(-1)])


def admissible_by_data(
    model: HankelModel, pair: Trajectory, tol: float = DEFAULT_ADMISSIBILITY_TOL
) -> bool:
    """Whether a length-L pair lies in the column span of the model.

    Membership is tested by least squares: the pair is admissible iff
    the sup-norm residual of its best representation is at most tol.
    """
    if pair.length != model.L:
        raise ValueError(f"pair length {pair.length} does not match window length {model.L}")
    if pair.m != model.m or pair.p != model.p:
        raise ValueError("pair channel counts do not match the model")
    v = stack_pair(pair)
    zeta = model._pinv() @ v
    residual = model.stacked() @ zeta - v
    return float(np.max(np.abs(residual))) <= tol


def trajectory_from_coefficients(model: HankelModel, zeta: np.ndarray) -> Trajectory:
    """Materialize the trajectory col(u, y) = col(H_u, H_y) @ zeta."""
    zeta = np.asarray(zeta, dtype=float).reshape(-1)
    if zeta.size != model.width:
        raise ValueError(f"zeta must have length {model.width}, got {zeta.size}")
    u = (model.H_u @ zeta).reshape(model.L, model.m)
    y = (model.H_y @ zeta).reshape(model.L, model.p)
    return Trajectory(inputs=u, outputs=y, start_index=0)
