"""Single-trajectory datasets: simulation, finite differences and CSV I/O."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    MalformedHeader,
    NonNumericCell,
    NonPositiveHorizon,
    NonPositiveStep,
    NonUniformGrid,
    TooFewSamples,
)
from .linalg import expm

InputSignal = Union[Literal["zero", "step"], np.ndarray]


def _block(M) -> Optional[np.ndarray]:
    if M is None:
        return None
    M = np.asarray(M, dtype=float)
    return np.zeros((0, 0)) if M.size == 0 else np.atleast_2d(M)


@dataclass(frozen=True)
class LtiModel:
    """``xdot = A x + B u``, ``z = C x + D u``.

    ``B``, ``C`` and ``D`` may be omitted; they default to zero blocks of
    consistent size (``m = 0`` / ``p = 0`` when nothing fixes the size).
    """

    A: np.ndarray
    B: Optional[np.ndarray] = None
    C: Optional[np.ndarray] = None
    D: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        n = A.shape[0]
        B, C, D = (_block(M) for M in (self.B, self.C, self.D))
        m = B.shape[1] if B is not None and B.size else (D.shape[1] if D is not None and D.size else 0)
        p = C.shape[0] if C is not None and C.size else (D.shape[0] if D is not None and D.size else 0)
        B = np.zeros((n, m)) if B is None or not B.size else B
        C = np.zeros((p, n)) if C is None or not C.size else C
        D = np.zeros((p, m)) if D is None or not D.size else D
        for name, M, shape in (("B", B, (n, m)), ("C", C, (p, n)), ("D", D, (p, m))):
            if M.shape != shape:
                raise DimensionMismatch(f"{name} has shape {M.shape}, expected {shape}")
        if not all(np.all(np.isfinite(M)) for M in (A, B, C, D)):
            raise DimensionMismatch("model matrices must be finite")
        for name, M in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, M)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def derivative(self, x, u=None) -> np.ndarray:
        """Exact ``A x + B u`` for samples stacked row-wise."""
        x = np.atleast_2d(x)
        xd = x @ self.A.T
        if u is not None and self.m:
            xd = xd + np.atleast_2d(u) @ self.B.T
        return xd


@dataclass
class Trajectory:
    """Uniformly sampled states ``x(0)..x(N+1)`` with optional inputs/outputs."""

    dt: float
    states: np.ndarray
    inputs: Optional[np.ndarray] = None
    outputs: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise NonPositiveStep(f"dt must be positive, got {self.dt}")
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        k = self.states.shape[0]
        for name in ("inputs", "outputs"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                v = v.reshape(k, -1) if v.ndim < 2 else v
                if v.shape[0] != k:
                    raise DimensionMismatch(f"{name} has {v.shape[0]} rows, states have {k}")
                setattr(self, name, v if v.shape[1] else None)
        if not np.all(np.isfinite(self.states)):
            raise DimensionMismatch("trajectory contains non-finite values")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def num_samples(self) -> int:
        return self.states.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.num_samples)

    @property
    def horizon(self) -> float:
        """``T = N dt``, the time of the last sample that gets a derivative."""
        return self.dt * (self.num_samples - 2)

    def truncate(self, T: float) -> "Trajectory":
        """Keep samples up to ``T + dt`` so that ``N = T / dt``."""
        N = int(round(T / self.dt))
        if N + 2 > self.num_samples:
            raise TooFewSamples(f"trajectory too short for T={T}")
        cut = slice(0, N + 2)
        return Trajectory(
            self.dt,
            self.states[cut],
            None if self.inputs is None else self.inputs[cut],
            None if self.outputs is None else self.outputs[cut],
        )


@dataclass
class DiffTrajectory:
    """Samples ``(x(i), xdot(i), u(i), z(i))`` for ``i = 0..N``."""

    dt: float
    states: np.ndarray
    derivatives: np.ndarray
    inputs: Optional[np.ndarray] = None
    outputs: Optional[np.ndarray] = None
    times: np.ndarray = field(default=None)

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        self.derivatives = np.atleast_2d(np.asarray(self.derivatives, dtype=float))
        if self.derivatives.shape != self.states.shape:
            raise DimensionMismatch("derivative rows must match state rows")
        if self.times is None:
            self.times = self.dt * np.arange(self.states.shape[0])

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def num_samples(self) -> int:
        return self.states.shape[0]

    def subset(self, indices) -> "DiffTrajectory":
        idx = np.asarray(indices, dtype=int)
        pick = lambda a: None if a is None else a[idx]  # noqa: E731
        return DiffTrajectory(
            self.dt,
            self.states[idx],
            self.derivatives[idx],
            pick(self.inputs),
            pick(self.outputs),
            self.times[idx],
        )

    def with_exact_derivatives(self, model: LtiModel) -> "DiffTrajectory":
        """Same samples with ``xdot`` replaced by ``A x + B u``."""
        if model.n != self.n:
            raise DimensionMismatch(f"model has n={model.n}, data has n={self.n}")
        xd = model.derivative(self.states, self.inputs)
        return DiffTrajectory(self.dt, self.states, xd, self.inputs, self.outputs, self.times)


def zoh_matrices(model: LtiModel, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact discretization from ``expm([[A dt, B dt], [0, 0]])``."""
    n, m = model.n, model.m
    M = np.zeros((n + m, n + m))
    M[:n, :n] = model.A * dt
    M[:n, n:] = model.B * dt
    E = expm(M)
    return E[:n, :n], E[:n, n:]


def _input_table(model: LtiModel, signal: InputSignal, k: int) -> Optional[np.ndarray]:
    if isinstance(signal, str):
        if signal == "zero":
            return None
        if signal == "step":
            if model.m == 0:
                raise DimensionMismatch("a step input needs B or D with at least one column")
            return np.ones((k, model.m))
        raise ValueError(f"unknown input kind {signal!r}")
    U = np.asarray(signal, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    if U.shape != (k, model.m):
        raise DimensionMismatch(f"input table is {U.shape}, expected ({k}, {model.m})")
    return U


def simulate(
    model: LtiModel,
    x0,
    input: InputSignal = "zero",
    T: float = 1.0,
    dt: float = 0.01,
    method: Literal["exact-zoh", "rk4"] = "exact-zoh",
) -> Trajectory:
    """Sample ``x(0)..x(N+1)`` with ``N = round(T / dt)``, input held over each step."""
    if not dt > 0:
        raise NonPositiveStep(f"dt must be positive, got {dt}")
    if not T >= dt * (1 - 1e-12):
        raise NonPositiveHorizon(f"horizon T={T} is shorter than dt={dt}")
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != model.n:
        raise DimensionMismatch(f"x0 has length {x0.size}, model has n={model.n}")
    N = int(round(T / dt))
    k = N + 2
    U = _input_table(model, input, k)
    u = np.zeros((k, model.m)) if U is None else U

    X = np.empty((k, model.n))
    X[0] = x0
    if method == "exact-zoh":
        Ad, Bd = zoh_matrices(model, dt)
        for i in range(k - 1):
            X[i + 1] = Ad @ X[i] + Bd @ u[i]
    elif method == "rk4":
        A, B = model.A, model.B
        for i in range(k - 1):
            bu = B @ u[i]
            f = lambda x: A @ x + bu  # noqa: E731
            k1 = f(X[i])
            k2 = f(X[i] + 0.5 * dt * k1)
            k3 = f(X[i] + 0.5 * dt * k2)
            k4 = f(X[i] + dt * k3)
            X[i + 1] = X[i] + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        raise ValueError(f"unknown method {method!r}")

    Z = None
    if model.p:
        Z = X @ model.C.T + u @ model.D.T
    return Trajectory(dt, X, U, Z)


def differentiate(traj: Trajectory, scheme: Literal["forward", "central"] = "forward") -> DiffTrajectory:
    """Finite-difference state derivatives.

    forward: ``(x(i+1) - x(i)) / dt`` for ``i = 0..N``.
    central: ``(x(i+1) - x(i-1)) / (2 dt)`` for ``i = 1..N``; sample 0 is dropped.
    """
    X, dt = traj.states, traj.dt
    k = X.shape[0]
    if scheme == "forward":
        if k < 2:
            raise TooFewSamples(f"forward differences need 2 samples, got {k}")
        idx = np.arange(k - 1)
        Xd = (X[1:] - X[:-1]) / dt
    elif scheme == "central":
        if k < 3:
            raise TooFewSamples(f"central differences need 3 samples, got {k}")
        idx = np.arange(1, k - 1)
        Xd = (X[2:] - X[:-2]) / (2 * dt)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    pick = lambda a: None if a is None else a[idx]  # noqa: E731
    return DiffTrajectory(dt, X[idx], Xd, pick(traj.inputs), pick(traj.outputs), dt * idx)


_HEADER = re.compile(r"^t((?:,x\d+)+)((?:,u\d+)*)((?:,z\d+)*)$")


def _check_numbering(cols: str, letter: str) -> int:
    names = [c for c in cols.split(",") if c]
    if names != [f"{letter}{i + 1}" for i in range(len(names))]:
        raise MalformedHeader(f"{letter}-columns must be numbered {letter}1..{letter}{len(names)}")
    return len(names)


def write_csv(traj: Trajectory, path) -> None:
    cols = ["t"] + [f"x{i + 1}" for i in range(traj.n)]
    blocks = [traj.times[:, None], traj.states]
    for letter, arr in (("u", traj.inputs), ("z", traj.outputs)):
        if arr is not None:
            cols += [f"{letter}{i + 1}" for i in range(arr.shape[1])]
            blocks.append(arr)
    data = np.hstack(blocks)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        w.writerows([[repr(float(v)) for v in row] for row in data])


def read_csv(path) -> Trajectory:
    text = Path(path).read_text(encoding="utf-8-sig")
    rows = [r for r in csv.reader(text.splitlines()) if r and any(c.strip() for c in r)]
    if not rows:
        raise TooFewSamples(f"{path}: no header and no samples")
    header = ",".join(c.strip() for c in rows[0])
    m = _HEADER.match(header)
    if not m:
        raise MalformedHeader(f"{path}: header {header!r} is not t,x1..xn[,u1..um][,z1..zp]")
    n = _check_numbering(m.group(1), "x")
    nu = _check_numbering(m.group(2), "u")
    nz = _check_numbering(m.group(3), "z")
    width = 1 + n + nu + nz

    body = rows[1:]
    if len(body) < 2:
        raise TooFewSamples(f"{path}: need at least 2 samples to infer dt, got {len(body)}")
    data = np.empty((len(body), width))
    for i, r in enumerate(body):
        if len(r) != width:
            raise MalformedHeader(f"{path}: row {i + 2} has {len(r)} cells, header has {width}")
        for j, cell in enumerate(r):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise NonNumericCell(i + 2, j + 1, cell) from None
    if not np.all(np.isfinite(data)):
        bad = np.argwhere(~np.isfinite(data))[0]
        raise NonNumericCell(int(bad[0]) + 2, int(bad[1]) + 1, str(data[tuple(bad)]))

    t = data[:, 0]
    dt = t[1] - t[0]
    if not dt > 0:
        raise NonUniformGrid(f"{path}: time must increase, first step is {dt}")
    steps = np.diff(t)
    bad = np.flatnonzero(np.abs(steps - dt) > 1e-9 * dt + 4 * np.finfo(float).eps * np.abs(t[1:]))
    if bad.size:
        raise NonUniformGrid(f"{path}: step at row {bad[0] + 3} is {steps[bad[0]]}, expected {dt}")
    return Trajectory(
        float(dt),
        data[:, 1:1 + n],
        data[:, 1 + n:1 + n + nu] if nu else None,
        data[:, 1 + n + nu:] if nz else None,
    )
