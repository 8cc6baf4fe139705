"""Certificates learned from one trajectory by linear programming.

Every quadratic condition ``x' P y`` on a sample becomes a linear row in the
packed unknown ``p`` via ``oplus``. The rows are stacked into ``L1`` (value of
``V``) and ``L2`` (value of ``Vdot``) and combined with per-sample energy
vectors:

    l    = |x(i)|^2            l_z = z(i)' z(i)
    l_u  = u(i)' u(i)          l_Q = x(i)' Q x(i)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    Infeasible,
    IterationLimit,
    MissingInputs,
    MissingOutputs,
    NonzeroInitialState,
    NotPositiveDefinite,
    NotPositiveDefiniteResult,
    QNotPositiveDefinite,
    RankDeficient,
    Singular,
    TooFewSamples,
    Unbounded,
    ZeroLambda,
)
from .linalg import (
    check_symmetric,
    cholesky,
    is_positive_definite,
    lu_solve,
    oplus,
    oplus_rows,
    sym_unpack,
)
from .lp import FEAS_RTOL, LpProblem, LpSolution, Relation, Sense, Status, solve
from .trajectory import DiffTrajectory

log = logging.getLogger(__name__)

# margin for the "V > 0" rows inside the bound LPs; small enough not to move the optimum
PD_MARGIN = 1e-9
DEFAULT_C1 = 1e-3
# must dominate the forward-difference bias in Vdot, roughly dt/2 * |xddot|/|xdot| relative
DEFAULT_C2 = 0.1
ZERO_STATE_RTOL = 1e-12


@dataclass
class DataMatrices:
    L1: np.ndarray
    L2: np.ndarray
    l: np.ndarray
    x0: np.ndarray
    l_z: Optional[np.ndarray] = None
    l_u: Optional[np.ndarray] = None
    l_Q: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.x0.size

    @property
    def num_rows(self) -> int:
        return self.l.size

    @property
    def num_params(self) -> int:
        return self.L1.shape[1]

    def require_outputs(self) -> np.ndarray:
        if self.l_z is None:
            raise MissingOutputs("trajectory has no output columns")
        return self.l_z

    def require_inputs(self) -> np.ndarray:
        if self.l_u is None:
            raise MissingInputs("trajectory has no input columns")
        return self.l_u


def build_data_matrices(data: DiffTrajectory, Q=None) -> DataMatrices:
    X, Xd = data.states, data.derivatives
    if X.shape[0] < 1:
        raise TooFewSamples("no samples")
    l_Q = None
    if Q is not None:
        Q = check_symmetric(Q)
        if Q.shape != (data.n, data.n):
            raise DimensionMismatch(f"Q is {Q.shape}, state dimension is {data.n}")
        try:
            cholesky(Q)
        except NotPositiveDefinite:
            raise QNotPositiveDefinite("Q must be positive definite") from None
        l_Q = np.einsum("ij,jk,ik->i", X, Q, X)
    sq = lambda a: None if a is None else np.einsum("ij,ij->i", a, a)  # noqa: E731
    return DataMatrices(
        L1=oplus_rows(X, X),
        L2=2.0 * oplus_rows(X, Xd),
        l=np.einsum("ij,ij->i", X, X),
        x0=X[0].copy(),
        l_z=sq(data.outputs),
        l_u=sq(data.inputs),
        l_Q=l_Q,
    )


def _check_rows(prob: LpProblem, sol: LpSolution, what: str) -> None:
    if not prob.satisfied(sol.x):
        worst = float(np.max(prob.row_violations(sol.x) / (1 + np.abs(prob.b))))
        raise AssertionError(f"{what}: LP optimum violates a row by {worst:.3e} (relative)")


def _solve_or_raise(prob: LpProblem, what: str) -> LpSolution:
    sol = solve(prob)
    if sol.status is Status.INFEASIBLE:
        raise Infeasible(f"{what}: no certificate satisfies the data constraints")
    if sol.status is Status.UNBOUNDED:
        raise Unbounded(f"{what}: LP unbounded, the trajectory is not exciting enough; record a longer one")
    if sol.status is Status.ITERATION_LIMIT:
        raise IterationLimit(f"{what}: simplex hit its iteration cap")
    _check_rows(prob, sol, what)
    return sol


@dataclass
class LyapunovCertificate:
    P: np.ndarray
    c1: float
    c2: float
    # min_i (L1 p - c1 l)_i and min_i (-L2 p - c2 l)_i
    positivity_residual: float
    decrease_residual: float

    def V(self, x) -> np.ndarray:
        x = np.atleast_2d(x)
        return np.einsum("ij,jk,ik->i", x, self.P, x)


def learn_lyapunov(dm: DataMatrices, c1: float = DEFAULT_C1, c2: float = DEFAULT_C2) -> LyapunovCertificate:
    """Find ``P`` with ``V > c1 |x|^2`` and ``Vdot < -c2 |x|^2`` on every sample.

    The scale of ``P`` is fixed by ``trace(P) = n``; the LP has no objective.
    """
    if dm.num_rows < 1:
        raise TooFewSamples("no samples")
    if not (c1 > 0 and c2 > 0):
        raise ValueError("margins c1, c2 must be positive")
    n, k = dm.n, dm.num_params
    trace_row = np.zeros(k)
    trace_row[:n] = 1.0
    prob = (
        LpProblem(np.zeros(k))
        .add_rows(dm.L1, Relation.GE, c1 * dm.l)
        .add_rows(dm.L2, Relation.LE, -c2 * dm.l)
        .add_row(trace_row, Relation.EQ, float(n))
    )
    sol = _solve_or_raise(prob, "lyapunov")
    p = sol.x
    P = sym_unpack(p)
    if not is_positive_definite(P):
        raise NotPositiveDefiniteResult("data constraints hold but the learned P is not positive definite")
    return LyapunovCertificate(
        P=P,
        c1=c1,
        c2=c2,
        positivity_residual=float(np.min(dm.L1 @ p - c1 * dm.l)),
        decrease_residual=float(np.min(-dm.L2 @ p - c2 * dm.l)),
    )


def solve_lyapunov_equation(data: DiffTrajectory, Q) -> np.ndarray:
    """Recover ``P`` with ``PA + A'P = -Q`` from samples alone.

    Uses ``2 x' P xdot = -x' Q x`` at each sample; with more samples than
    unknowns the system is solved in the least-squares sense.
    """
    dm = build_data_matrices(data, Q)
    k = dm.num_params
    if dm.num_rows < k:
        raise TooFewSamples(f"need at least {k} samples for n={dm.n}, got {dm.num_rows}")
    L2 = dm.L2
    sv = np.linalg.svd(L2, compute_uv=False)
    if sv[-1] <= 1e-9 * sv[0] or sv[0] == 0.0:
        raise RankDeficient("derivative rows are rank deficient; the trajectory does not excite every direction")
    try:
        if dm.num_rows == k:
            p = lu_solve(L2, -dm.l_Q)
        else:
            p = lu_solve(L2.T @ L2, -L2.T @ dm.l_Q)
    except Singular as exc:
        raise RankDeficient(str(exc)) from None
    return sym_unpack(p)


@dataclass
class EnergyBound:
    P: np.ndarray
    bound: float


def energy_bound(dm: DataMatrices, x0) -> EnergyBound:
    """Smallest ``x0' P x0`` with ``Vdot <= -z'z`` on the data: an output-energy bound."""
    l_z = dm.require_outputs()
    x0 = _vector(x0, dm.n)
    w = oplus(x0, x0)
    prob = (
        LpProblem(w)
        .add_rows(dm.L1, Relation.GE, PD_MARGIN * dm.l)
        .add_rows(dm.L2, Relation.LE, -l_z)
    )
    sol = _solve_or_raise(prob, "energy bound")
    P = sym_unpack(sol.x)
    # evaluate through the same pairing so bound == quad_form(p, x0, x0)
    return EnergyBound(P=P, bound=float(w @ sol.x))


@dataclass
class PeakBound:
    P: np.ndarray
    lam: float
    bound: float


def peak_bound(dm: DataMatrices, x0) -> PeakBound:
    """Invariant ellipsoid ``x'Px <= 1`` through ``x0`` maximizing ``lambda``; bound ``1/sqrt(lambda)``."""
    l_z = dm.require_outputs()
    x0 = _vector(x0, dm.n)
    if not np.any(l_z > 0):
        raise ZeroLambda("every recorded output is zero; no peak information")
    k = dm.num_params
    zeros = np.zeros((dm.num_rows, 1))
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    lower = np.full(k + 1, -np.inf)
    lower[-1] = 0.0
    prob = LpProblem(cost, Sense.MAXIMIZE, lower=lower)
    prob.add_rows(np.hstack([dm.L1, zeros]), Relation.GE, PD_MARGIN * dm.l)
    prob.add_rows(np.hstack([dm.L2, zeros]), Relation.LE, 0.0)
    prob.add_row(np.append(oplus(x0, x0), 0.0), Relation.LE, 1.0)
    prob.add_rows(np.hstack([dm.L1, -l_z[:, None]]), Relation.GE, 0.0)
    sol = _solve_or_raise(prob, "peak bound")
    lam = float(sol.x[-1])
    if lam <= 0.0:
        raise ZeroLambda("optimal lambda is zero; no finite peak bound from this data")
    return PeakBound(P=sym_unpack(sol.x[:-1]), lam=lam, bound=math.sqrt(1.0 / lam))


@dataclass
class GainBound:
    P: np.ndarray
    beta: float
    gamma: float


def l2_gain(dm: DataMatrices) -> GainBound:
    """Smallest ``beta`` with ``Vdot + z'z - beta u'u <= 0`` on the data; ``gamma = sqrt(beta)``.

    Only meaningful for a trajectory started at rest. Samples with (numerically)
    zero state are left out of the ``V > 0`` block, where the row would read ``0 > 0``.
    """
    l_z = dm.require_outputs()
    l_u = dm.require_inputs()
    scale = np.max(dm.l) if dm.num_rows else 0.0
    if dm.l[0] > (1e-9) ** 2 * scale:
        raise NonzeroInitialState("the gain LP needs a trajectory starting from x(0) = 0")
    if not np.any(l_u > 0):
        raise MissingInputs("every recorded input is zero")
    k = dm.num_params
    active = dm.l > ZERO_STATE_RTOL * scale
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    lower = np.full(k + 1, -np.inf)
    lower[-1] = 0.0
    prob = LpProblem(cost, lower=lower)
    prob.add_rows(np.hstack([dm.L1[active], np.zeros((active.sum(), 1))]), Relation.GE, PD_MARGIN * dm.l[active])
    prob.add_rows(np.hstack([dm.L2, -l_u[:, None]]), Relation.LE, -l_z)
    sol = _solve_or_raise(prob, "l2 gain")
    beta = max(float(sol.x[-1]), 0.0)
    return GainBound(P=sym_unpack(sol.x[:-1]), beta=beta, gamma=math.sqrt(beta))


def _vector(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != n:
        raise DimensionMismatch(f"vector has length {x.size}, state dimension is {n}")
    return x


Kind = Literal["lyapunov", "energy", "peak", "gain"]


@dataclass
class ValidationReport:
    kind: str
    num_samples: int
    v_min: float
    v_max: float
    vdot_max: float
    violations: int
    violation_fraction: float
    monotone: Optional[bool] = None
    max_output_norm: Optional[float] = None
    bound: Optional[float] = None

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.monotone is not False


def validate_certificate(
    P,
    fresh: DiffTrajectory,
    kind: Kind,
    *,
    lam: Optional[float] = None,
    beta: Optional[float] = None,
    tol: float = FEAS_RTOL,
) -> ValidationReport:
    """Check a certificate's defining inequalities on data it was not trained on.

    Violations are counted and reported, never raised. A sample violates when:

    * lyapunov: ``V <= 0`` or ``Vdot >= 0``
    * energy:   ``V <= 0`` or ``Vdot > -z'z``
    * peak:     ``V <= 0``, ``Vdot > 0`` or ``z'z > V / lambda``
    * gain:     ``V <= 0`` or ``Vdot + z'z - beta u'u > 0``

    ``V`` must also decrease from sample to sample for lyapunov and peak.
    """
    P = check_symmetric(P)
    if P.shape != (fresh.n, fresh.n):
        raise DimensionMismatch(f"P is {P.shape}, data has n={fresh.n}")
    X, Xd = fresh.states, fresh.derivatives
    V = np.einsum("ij,jk,ik->i", X, P, X)
    Vdot = 2.0 * np.einsum("ij,jk,ik->i", X, P, Xd)
    zz = None if fresh.outputs is None else np.einsum("ij,ij->i", fresh.outputs, fresh.outputs)
    uu = None if fresh.inputs is None else np.einsum("ij,ij->i", fresh.inputs, fresh.inputs)
    nonzero = np.einsum("ij,ij->i", X, X) > 0
    bad = nonzero & (V <= 0)
    slack = tol * (1.0 + np.abs(V))
    monotone = max_z = bound = None

    if kind == "lyapunov":
        bad |= nonzero & (Vdot >= 0)
        monotone = bool(np.all(np.diff(V) < 0))
    elif kind == "energy":
        if zz is None:
            raise MissingOutputs("energy validation needs outputs")
        bad |= Vdot > -zz + slack
    elif kind == "peak":
        if zz is None:
            raise MissingOutputs("peak validation needs outputs")
        if lam is None or lam <= 0:
            raise ValueError("peak validation needs lam > 0")
        bad |= Vdot > slack
        bad |= zz > V / lam + slack / lam
        monotone = bool(np.all(np.diff(V) <= slack[1:]))
        max_z = float(np.sqrt(np.max(zz)))
        bound = math.sqrt(1.0 / lam)
    elif kind == "gain":
        if zz is None or uu is None:
            raise MissingInputs("gain validation needs inputs and outputs")
        if beta is None:
            raise ValueError("gain validation needs beta")
        bad |= Vdot + zz - beta * uu > slack
        bound = math.sqrt(max(beta, 0.0))
    else:
        raise ValueError(f"unknown certificate kind {kind!r}")

    count = int(bad.sum())
    return ValidationReport(
        kind=kind,
        num_samples=int(V.size),
        v_min=float(V.min()),
        v_max=float(V.max()),
        vdot_max=float(Vdot.max()),
        violations=count,
        violation_fraction=count / V.size if V.size else 0.0,
        monotone=monotone,
        max_output_norm=max_z,
        bound=bound,
    )


__all__ = [
    "DataMatrices",
    "EnergyBound",
    "GainBound",
    "LyapunovCertificate",
    "PeakBound",
    "ValidationReport",
    "build_data_matrices",
    "energy_bound",
    "l2_gain",
    "learn_lyapunov",
    "peak_bound",
    "solve_lyapunov_equation",
    "validate_certificate",
]
