"""Input-output trajectory containers and their CSV serialization.

Both the recorded excitation data and solver outputs are plain sampled
input-output pairs, so they share one on-disk format::

    t,u_1,...,u_m,y_1,...,y_p

with one row per sample and ``t`` an integer sample index.  Data records
start at t = 0; solution trajectories start at a (possibly negative)
offset so that the prepended initialization window keeps its natural
indices.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def _as_signal(values, n_channels: int | None = None) -> np.ndarray:
    """Coerce to a read-only float array of shape (samples, channels)."""
    arr = np.array(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D (samples, channels) array, got shape {arr.shape}")
    if n_channels is not None and arr.shape[1] != n_channels:
        raise ValueError(f"expected {n_channels} channels, got {arr.shape[1]}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Trajectory:
    """A finite input-output trajectory with an explicit start index.

    Attributes:
        inputs: Array of shape (length, m).
        outputs: Array of shape (length, p).
        start_index: Sample index of the first row.  Solutions carry the
            initialization window, so this is typically negative.
    """

    inputs: np.ndarray
    outputs: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "inputs", _as_signal(self.inputs))
        object.__setattr__(self, "outputs", _as_signal(self.outputs))
        if self.inputs.shape[0] != self.outputs.shape[0]:
            raise ValueError(
                "inputs and outputs must have the same number of samples, got "
                f"{self.inputs.shape[0]} and {self.outputs.shape[0]}"
            )

    @property
    def length(self) -> int:
        return self.inputs.shape[0]

    @property
    def m(self) -> int:
        return self.inputs.shape[1]

    @property
    def p(self) -> int:
        return self.outputs.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.start_index, self.start_index + self.length)


@dataclass(frozen=True)
class DataTrajectory:
    """A recorded excitation experiment: inputs u and measured outputs y.

    Attributes:
        u: Array of shape (M, m).
        y: Array of shape (M, p).
    """

    u: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _as_signal(self.u))
        object.__setattr__(self, "y", _as_signal(self.y))
        if self.u.shape[0] != self.y.shape[0]:
            raise ValueError(
                "u and y must have the same number of samples, got "
                f"{self.u.shape[0]} and {self.y.shape[0]}"
            )
        if self.u.shape[0] == 0:
            raise ValueError("a data trajectory needs at least one sample")

    @property
    def M(self) -> int:
        return self.u.shape[0]

    @property
    def m(self) -> int:
        return self.u.shape[1]

    @property
    def p(self) -> int:
        return self.y.shape[1]


def _header(m: int, p: int) -> list[str]:
    return (
        ["t"]
        + [f"u_{i + 1}" for i in range(m)]
        + [f"y_{j + 1}" for j in range(p)]
    )


def _write_rows(path, times: np.ndarray, u: np.ndarray, y: np.ndarray) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_header(u.shape[1], y.shape[1]))
        for t, u_row, y_row in zip(times, u, y):
            writer.writerow([int(t)] + [repr(float(v)) for v in u_row] + [repr(float(v)) for v in y_row])


def _read_rows(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a trajectory CSV, returning (times, u, y).

    Raises:
        ValueError: If the header or any row is malformed.  The message
            includes the offending line number.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        m = sum(1 for h in header if h.startswith("u_"))
        p = sum(1 for h in header if h.startswith("y_"))
        if header != _header(m, p) or m == 0 or p == 0:
            raise ValueError(f"{path}: line 1: expected header t,u_1..u_m,y_1..y_p, got {','.join(header)}")
        times, u_rows, y_rows = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 1 + m + p:
                raise ValueError(f"{path}: line {lineno}: expected {1 + m + p} fields, got {len(row)}")
            try:
                times.append(int(row[0]))
                values = [float(v) for v in row[1:]]
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric field") from None
            u_rows.append(values[:m])
            y_rows.append(values[m:])
    if not times:
        raise ValueError(f"{path}: no data rows")
    t = np.array(times, dtype=int)
    if not np.array_equal(t, np.arange(t[0], t[0] + t.size)):
        raise ValueError(f"{path}: sample indices must be consecutive integers")
    return t, np.array(u_rows), np.array(y_rows)


def write_data_csv(data: DataTrajectory, path) -> None:
    """Write an excitation record to CSV with t = 0, 1, ..., M-1."""
    _write_rows(path, np.arange(data.M), data.u, data.y)


def read_data_csv(path) -> DataTrajectory:
    """Read an excitation record written by :func:`write_data_csv`."""
    t, u, y = _read_rows(path)
    if t[0] != 0:
        raise ValueError(f"{path}: data records must start at t=0, got t={t[0]}")
    return DataTrajectory(u=u, y=y)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write a trajectory to CSV, keeping its start index."""
    _write_rows(path, traj.times, traj.inputs, traj.outputs)


def read_trajectory_csv(path) -> Trajectory:
    """Read a trajectory written by :func:`write_trajectory_csv`."""
    t, u, y = _read_rows(path)
    return Trajectory(inputs=u, outputs=y, start_index=int(t[0]))
