"""Model-based ground truth for the data-driven certificates.

Everything here needs the true ``(A, B, C, D)`` and is used only to judge
what was learned from data: Lyapunov equations by a Kronecker solve, output
energy by the observability gramian, gains by a frequency sweep.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import NotStable, Singular, SingularLyapunovOperator, TailNotConverged
from .linalg import check_symmetric, is_positive_definite, kron, lu_solve
from .trajectory import LtiModel, simulate, zoh_matrices

# SDP optimum for the output-peak example, known to 5 significant figures
PEAK_SDP_REFERENCE_BOUND = 3.2915
PEAK_SDP_REFERENCE_P = np.array([[0.092426, 0.001406], [0.001406, 0.015873]])


@dataclass
class OracleReport:
    quantity: str
    oracle: float
    learned: float

    @property
    def abs_deviation(self) -> float:
        return abs(self.learned - self.oracle)

    @property
    def rel_deviation(self) -> float:
        if self.oracle == 0:
            return 0.0 if self.abs_deviation == 0 else math.inf
        return self.abs_deviation / abs(self.oracle)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["abs_deviation"] = self.abs_deviation
        d["rel_deviation"] = self.rel_deviation if math.isfinite(self.rel_deviation) else None
        return d


def lyap_solve_model(A, Q) -> np.ndarray:
    """Solve ``P A + A' P = -Q`` through ``(I kron A' + A' kron I) vec(P) = -vec(Q)``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Q = check_symmetric(Q)
    n = A.shape[0]
    ident = np.eye(n)
    # row-major vec: vec(P A) = (I kron A') vec(P), vec(A' P) = (A' kron I) vec(P)
    op = kron(ident, A.T) + kron(A.T, ident)
    try:
        p = lu_solve(op, -Q.ravel())
    except Singular:
        raise SingularLyapunovOperator("A has eigenvalues with lambda_i + lambda_j = 0") from None
    P = p.reshape(n, n)
    return 0.5 * (P + P.T)


def is_hurwitz(A) -> bool:
    """Lyapunov test: ``A`` is Hurwitz iff ``PA + A'P = -I`` has a positive definite solution."""
    try:
        P = lyap_solve_model(A, np.eye(np.shape(A)[0]))
    except SingularLyapunovOperator:
        return False
    return is_positive_definite(P)


def observability_gramian(A, C) -> np.ndarray:
    """``W = int_0^inf e^{A't} C'C e^{At} dt`` from ``A'W + WA = -C'C``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if not is_hurwitz(A):
        raise NotStable("observability gramian needs a Hurwitz A")
    # W A + A' W = -C'C is the same operator as lyap_solve_model(A, .)
    return lyap_solve_model(A, C.T @ C)


def _frequency_response(model: LtiModel, w: float) -> np.ndarray:
    """``D + C (jwI - A)^{-1} B`` via the real block system for the resolvent."""
    n = model.n
    ident = np.eye(n)
    M = np.block([[-model.A, -w * ident], [w * ident, -model.A]])
    rhs = np.vstack([model.B, np.zeros_like(model.B)])
    X = lu_solve(M, rhs)
    return model.D + model.C @ (X[:n] + 1j * X[n:])


def _sigma_max(G: np.ndarray, iters: int = 500) -> float:
    if G.size == 0:
        return 0.0
    if G.shape == (1, 1):
        return float(abs(G[0, 0]))
    H = G.conj().T @ G
    v = np.ones(H.shape[0], dtype=complex) / math.sqrt(H.shape[0])
    lam = 0.0
    for _ in range(iters):
        w = H @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        new = float(np.real(v.conj() @ H @ v))
        if abs(new - lam) <= 1e-15 * max(new, 1.0):
            lam = new
            break
        lam = new
    return math.sqrt(max(lam, 0.0))


def hinf_norm(model: LtiModel, w_min: float = 1e-3, w_max: float = 1e3, grid: int = 2000) -> float:
    """Peak gain ``sup_w sigma_max(G(jw))`` by a log-spaced sweep plus golden-section refinement.

    Frequencies are in rad/s. DC is evaluated as well, so low-pass peaks at
    ``w = 0`` are not missed by the lower end of the grid.
    """
    if not is_hurwitz(model.A):
        raise NotStable("H-infinity norm needs a Hurwitz A")
    gain = lambda w: _sigma_max(_frequency_response(model, w))  # noqa: E731
    ws = np.logspace(math.log10(w_min), math.log10(w_max), grid)
    vals = np.array([gain(w) for w in ws])
    best = float(max(vals.max(), gain(0.0)))
    i = int(np.argmax(vals))
    lo = math.log10(ws[max(i - 1, 0)])
    hi = math.log10(ws[min(i + 1, grid - 1)])
    f = lambda s: -gain(10.0**s)  # noqa: E731
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(fc - fd) > 1e-6 * max(abs(fc), abs(fd), 1e-300) or (b - a) > 1e-9:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        if b - a < 1e-12:
            break
    return max(best, -fc, -fd)


def max_output_energy_sim(model: LtiModel, x0, T: float, dt: float) -> float:
    """``int_0^T z'z dt`` by the trapezoid rule on an exact-ZOH unforced trajectory.

    The tail beyond ``T`` is estimated from the decay rate of ``|x|^2`` over the
    last 10 % of samples; if it exceeds ``1e-6`` of the integral the horizon is
    judged too short.
    """
    if not is_hurwitz(model.A):
        raise NotStable("output energy needs a Hurwitz A")
    x0 = np.asarray(x0, dtype=float).ravel()
    if not np.any(x0):
        return 0.0
    traj = simulate(model, x0, "zero", T, dt)
    X = traj.states
    Z = X @ model.C.T
    zz = np.einsum("ij,ij->i", Z, Z)
    total = float(np.trapezoid(zz, dx=dt))
    s = np.einsum("ij,ij->i", X, X)
    k = len(s)
    j = max(int(0.9 * k), 0)
    span = (k - 1 - j) * dt
    if span <= 0 or s[-1] <= 0 or s[j] <= 0:
        return total
    rate = math.log(s[j] / s[-1]) / span
    if rate <= 0:
        raise TailNotConverged("state norm is not decaying over the last 10% of the horizon")
    c_norm = float(np.linalg.norm(model.C, 2)) if model.C.size else 0.0
    tail = c_norm**2 * s[-1] / rate
    if tail > 1e-6 * total:
        raise TailNotConverged(f"estimated tail {tail:.3e} exceeds 1e-6 of the integral {total:.3e}")
    return total


@dataclass
class EllipsoidReport:
    samples: int
    max_level: float
    max_output_norm: float
    violations: int
    # (num_samples, steps+1) array of x'Px along each trajectory, for plotting
    levels: Optional[np.ndarray] = None

    @property
    def invariant(self) -> bool:
        return self.violations == 0


def ellipsoid_invariance_check(
    model: LtiModel,
    P,
    samples: int = 100,
    T: float = 10.0,
    dt: float = 0.01,
    seed: int = 0,
    tol: float = 1e-6,
) -> EllipsoidReport:
    """Simulate from random points on ``x'Px = 1`` and report how far they travel.

    Violations count the trajectories whose level exceeds ``1 + tol`` at any
    sample; nothing is raised.
    """
    P = check_symmetric(P)
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((samples, model.n))
    scale = np.sqrt(np.einsum("ij,jk,ik->i", dirs, P, dirs))
    starts = dirs / scale[:, None]
    steps = int(round(T / dt))
    Ad, _ = zoh_matrices(model, dt)
    levels = np.empty((samples, steps + 1))
    zmax = 0.0
    X = starts.copy()
    for k in range(steps + 1):
        levels[:, k] = np.einsum("ij,jk,ik->i", X, P, X)
        if model.p:
            zmax = max(zmax, float(np.max(np.linalg.norm(X @ model.C.T, axis=1))))
        X = X @ Ad.T
    return EllipsoidReport(
        samples=samples,
        max_level=float(levels.max()),
        max_output_norm=zmax,
        violations=int(np.sum(levels.max(axis=1) > 1.0 + tol)),
        levels=levels,
    )
