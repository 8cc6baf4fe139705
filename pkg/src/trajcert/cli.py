"""Command-line front end.

Exit codes: 0 success, 1 input or I/O fault, 2 analysis verdict
(infeasible, unbounded, rank deficient, ...).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import certificates as cert
from . import oracles
from .errors import AnalysisVerdict, DimensionMismatch, InputError, TrajcertError
from .linalg import check_symmetric
from .trajectory import DiffTrajectory, LtiModel, Trajectory, differentiate, read_csv, simulate, write_csv

log = logging.getLogger("trajcert")

LEVELSET_POINTS = 360


def load_model(path) -> LtiModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "A" not in doc:
        raise InputError(f"{path}: model file needs an object with at least an 'A' field")
    try:
        return LtiModel(*(doc.get(k) for k in ("A", "B", "C", "D")))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{path}: {exc}") from None


def save_model(model: LtiModel, path) -> None:
    doc = {k: getattr(model, k).tolist() for k in ("A", "B", "C", "D")}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(" ", "").split(",") if v], dtype=float)
    except ValueError:
        raise InputError(f"cannot parse {text!r} as a comma-separated list of numbers") from None


def _load_Q(spec: str, n: int) -> np.ndarray:
    if spec == "identity":
        return np.eye(n)
    try:
        doc = json.loads(Path(spec).read_text(encoding="utf-8"))
        Q = np.asarray(doc["Q"] if isinstance(doc, dict) else doc, dtype=float)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{spec}: cannot read Q ({exc})") from None
    if Q.shape != (n, n):
        raise DimensionMismatch(f"Q is {Q.shape}, state dimension is {n}")
    return check_symmetric(Q)


def ellipse_points(P, level: float = 1.0, count: int = LEVELSET_POINTS) -> np.ndarray:
    """Boundary of ``{x : x'Px = level}`` for ``n = 2`` by a sweep over the polar angle."""
    P = np.asarray(P, dtype=float)
    if P.shape != (2, 2):
        raise DimensionMismatch("level-set emission is only defined for n = 2")
    theta = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
    d = np.column_stack([np.cos(theta), np.sin(theta)])
    r = np.sqrt(level / np.einsum("ij,jk,ik->i", d, P, d))
    return d * r[:, None]


def _write_points(points: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x1,x2\n")
        for x1, x2 in points:
            fh.write(f"{float(x1)!r},{float(x2)!r}\n")


def _input_digest(path, traj: Trajectory) -> dict:
    return {
        "path": str(path),
        "samples": traj.num_samples,
        "dt": traj.dt,
        "T": traj.horizon,
        "n": traj.n,
        "inputs": 0 if traj.inputs is None else traj.inputs.shape[1],
        "outputs": 0 if traj.outputs is None else traj.outputs.shape[1],
    }


def _report(args, path, traj, certificate, validation=None, oracle=None) -> dict:
    return {
        "command": args.command,
        "input": _input_digest(path, traj),
        "certificate": certificate,
        "validation": validation,
        "oracle": oracle,
    }


def _validation_dict(rep: cert.ValidationReport) -> dict:
    return dataclasses.asdict(rep)


def _diff(traj: Trajectory, args) -> DiffTrajectory:
    return differentiate(traj, args.diff)


def _model_for(args, n: int) -> Optional[LtiModel]:
    if not getattr(args, "model", None):
        return None
    model = load_model(args.model)
    if model.n != n:
        raise DimensionMismatch(f"model has n={model.n}, trajectory has n={n}")
    return model


def cmd_simulate(args) -> dict:
    model = load_model(args.model)
    x0 = _floats(args.x0) if args.x0 else np.zeros(model.n)
    traj = simulate(model, x0, args.input, args.T, args.dt, args.method)
    write_csv(traj, args.out_csv)
    return {
        "command": "simulate",
        "input": {"model": str(args.model), "x0": x0.tolist(), "input": args.input, "T": args.T, "dt": args.dt},
        "certificate": None,
        "validation": None,
        "oracle": None,
        "output": {"path": str(args.out_csv), "rows": traj.num_samples},
    }


def cmd_lyap(args) -> dict:
    traj = read_csv(args.trajectory)
    data = _diff(traj, args)
    dm = cert.build_data_matrices(data)
    c = cert.learn_lyapunov(dm, args.c1, args.c2)
    certificate = {
        "P": c.P.tolist(),
        "c1": c.c1,
        "c2": c.c2,
        "positivity_residual": c.positivity_residual,
        "decrease_residual": c.decrease_residual,
    }
    if args.levelset:
        level, path = float(args.levelset[0]), args.levelset[1]
        _write_points(ellipse_points(c.P, level), path)
        certificate["levelset"] = {"level": level, "path": str(path), "points": LEVELSET_POINTS}
    validation = _validation_dict(cert.validate_certificate(c.P, data, "lyapunov"))
    oracle = None
    model = _model_for(args, traj.n)
    if model is not None:
        S = c.P @ model.A + model.A.T @ c.P
        oracle = {"max_eig_PA_plus_AtP": float(np.max(np.linalg.eigvalsh(S))), "valid": bool(np.all(np.linalg.eigvalsh(S) < 0))}
    return _report(args, args.trajectory, traj, certificate, validation, oracle)


def cmd_lyap_eq(args) -> dict:
    traj = read_csv(args.trajectory)
    data = _diff(traj, args)
    model = _model_for(args, traj.n)
    if model is not None:
        data = data.with_exact_derivatives(model)
    if args.points:
        idx = np.unique(np.round(np.linspace(0, data.num_samples - 1, args.points)).astype(int))
        data = data.subset(idx)
    Q = _load_Q(args.Q, traj.n)
    P = cert.solve_lyapunov_equation(data, Q)
    oracle = None
    if model is not None:
        P_ref = oracles.lyap_solve_model(model.A, Q)
        oracle = {"P": P_ref.tolist(), "max_abs_deviation": float(np.max(np.abs(P - P_ref)))}
    certificate = {"P": P.tolist(), "samples_used": data.num_samples, "times": data.times.tolist()}
    return _report(args, args.trajectory, traj, certificate, None, oracle)


def _x0(args, traj: Trajectory) -> np.ndarray:
    return _floats(args.x0) if args.x0 else traj.states[0].copy()


def cmd_energy(args) -> dict:
    traj = read_csv(args.trajectory)
    data = _diff(traj, args)
    x0 = _x0(args, traj)
    res = cert.energy_bound(cert.build_data_matrices(data), x0)
    validation = _validation_dict(cert.validate_certificate(res.P, data, "energy"))
    oracle = None
    model = _model_for(args, traj.n)
    if model is not None:
        W = oracles.observability_gramian(model.A, model.C)
        oracle = oracles.OracleReport("output_energy", float(x0 @ W @ x0), res.bound).to_dict()
        oracle["gramian"] = W.tolist()
    return _report(args, args.trajectory, traj, {"P": res.P.tolist(), "x0": x0.tolist(), "bound": res.bound}, validation, oracle)


def cmd_peak(args) -> dict:
    traj = read_csv(args.trajectory)
    data = _diff(traj, args)
    x0 = _x0(args, traj)
    res = cert.peak_bound(cert.build_data_matrices(data), x0)
    certificate = {"P": res.P.tolist(), "x0": x0.tolist(), "lambda": res.lam, "bound": res.bound}
    if args.ellipse:
        _write_points(ellipse_points(res.P, 1.0), args.ellipse)
        certificate["ellipse"] = {"path": str(args.ellipse), "points": LEVELSET_POINTS}
    validation = _validation_dict(cert.validate_certificate(res.P, data, "peak", lam=res.lam))
    oracle = {"sdp_reference_bound": oracles.PEAK_SDP_REFERENCE_BOUND}
    model = _model_for(args, traj.n)
    if model is not None:
        rep = oracles.ellipsoid_invariance_check(model, res.P, args.samples, args.horizon, args.check_dt, args.seed)
        oracle.update(
            samples=rep.samples,
            max_level=rep.max_level,
            max_output_norm=rep.max_output_norm,
            violations=rep.violations,
            bound_respected=rep.max_output_norm <= res.bound * (1 + 1e-3),
        )
    return _report(args, args.trajectory, traj, certificate, validation, oracle)


def cmd_gain(args) -> dict:
    traj = read_csv(args.trajectory)
    data = _diff(traj, args)
    res = cert.l2_gain(cert.build_data_matrices(data))
    print(f"T={traj.horizon:g}  learned gamma={res.gamma:.5f}", file=sys.stderr)
    validation = _validation_dict(cert.validate_certificate(res.P, data, "gain", beta=res.beta))
    oracle = None
    model = _model_for(args, traj.n)
    if model is not None:
        oracle = oracles.OracleReport("l2_gain", oracles.hinf_norm(model), res.gamma).to_dict()
    certificate = {"P": res.P.tolist(), "beta": res.beta, "gamma": res.gamma, "T": traj.horizon}
    return _report(args, args.trajectory, traj, certificate, validation, oracle)


def _compare_gain(traj: Trajectory, model: LtiModel, args) -> dict:
    if traj.inputs is None:
        return {"skipped": "no inputs"}
    if traj.outputs is None:
        return {"skipped": "no outputs"}
    ref = oracles.hinf_norm(model)
    horizons = _floats(args.horizons) if args.horizons else [traj.horizon]
    rows = []
    for T in horizons:
        try:
            g = cert.l2_gain(cert.build_data_matrices(differentiate(traj.truncate(T), args.diff)))
            rows.append(oracles.OracleReport("l2_gain", ref, g.gamma).to_dict() | {"T": float(T)})
        except AnalysisVerdict as exc:
            rows.append({"T": float(T), "error": f"{type(exc).__name__}: {exc}"})
    return {"oracle": ref, "rows": rows}


def _compare_energy(traj: Trajectory, model: LtiModel, args) -> dict:
    if traj.outputs is None:
        return {"skipped": "no outputs"}
    x0 = _x0(args, traj)
    try:
        res = cert.energy_bound(cert.build_data_matrices(differentiate(traj, args.diff)), x0)
    except AnalysisVerdict as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}
    W = oracles.observability_gramian(model.A, model.C)
    return oracles.OracleReport("output_energy", float(x0 @ W @ x0), res.bound).to_dict()


def _compare_lyap_eq(traj: Trajectory, model: LtiModel, args) -> dict:
    try:
        P = cert.solve_lyapunov_equation(differentiate(traj, args.diff), np.eye(traj.n))
    except AnalysisVerdict as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}
    P_ref = oracles.lyap_solve_model(model.A, np.eye(traj.n))
    dev = float(np.max(np.abs(P - P_ref)))
    return {
        "quantity": "lyapunov_equation_P",
        "oracle": P_ref.tolist(),
        "learned": P.tolist(),
        "abs_deviation": dev,
        "rel_deviation": dev / float(np.max(np.abs(P_ref))),
    }


def cmd_compare(args) -> dict:
    traj = read_csv(args.trajectory)
    model = load_model(args.model)
    if model.n != traj.n:
        raise DimensionMismatch(f"model has n={model.n}, trajectory has n={traj.n}")
    which = ["lyap-eq", "energy", "gain"] if args.which == "all" else [args.which]
    handlers = {"lyap-eq": _compare_lyap_eq, "energy": _compare_energy, "gain": _compare_gain}
    sections = {name: handlers[name](traj, model, args) for name in which}
    return _report(args, args.trajectory, traj, None, None, sections)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trajcert", description="Learn LTI certificates from a single trajectory.")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized validation sampling")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, model_help="model JSON; enables the oracle comparison"):
        p.add_argument("trajectory", help="trajectory CSV")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--diff", choices=["forward", "central"], default="forward")
        p.add_argument("--model", help=model_help)

    p = sub.add_parser("simulate", help="simulate a model and write a trajectory CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--x0", help="comma-separated initial state (default zero)")
    p.add_argument("--input", choices=["zero", "step"], default="zero")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--method", choices=["exact-zoh", "rk4"], default="exact-zoh")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lyap", help="learn a quadratic Lyapunov function")
    common(p)
    p.add_argument("--c1", type=float, default=cert.DEFAULT_C1)
    p.add_argument("--c2", type=float, default=cert.DEFAULT_C2)
    p.add_argument("--levelset", nargs=2, metavar=("LEVEL", "CSV"), help="write the boundary of V(x) = LEVEL")
    p.set_defaults(func=cmd_lyap)

    p = sub.add_parser("lyap-eq", help="solve PA + A'P = -Q from samples")
    common(p, "model JSON; substitutes exact derivatives and compares with the Kronecker solution")
    p.add_argument("--Q", default="identity", help="'identity' or a JSON file holding Q")
    p.add_argument("--points", type=int, help="use k evenly spaced samples")
    p.set_defaults(func=cmd_lyap_eq)

    p = sub.add_parser("energy", help="output-energy bound")
    common(p)
    p.add_argument("--x0", help="initial state (default: first sample)")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("peak", help="output-peak bound and invariant ellipsoid")
    common(p)
    p.add_argument("--x0", help="initial state (default: first sample)")
    p.add_argument("--ellipse", help="write the boundary of x'Px = 1 to this CSV")
    p.add_argument("--samples", type=int, default=100, help="boundary trajectories for the model check")
    p.add_argument("--horizon", type=float, default=10.0)
    p.add_argument("--check-dt", type=float, default=0.01)
    p.set_defaults(func=cmd_peak)

    p = sub.add_parser("gain", help="L2 / RMS gain bound")
    common(p)
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("compare", help="data-driven values against model-based oracles")
    p.add_argument("trajectory")
    p.add_argument("model")
    p.add_argument("--which", choices=["lyap-eq", "energy", "gain", "all"], default="all")
    p.add_argument("--horizons", help="comma-separated T values for the gain sweep")
    p.add_argument("--x0", help="initial state for the energy comparison (default: first sample)")
    p.add_argument("--diff", choices=["forward", "central"], default="forward")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)
    return ap


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    start = time.perf_counter()
    try:
        report = args.func(args)
    except AnalysisVerdict as exc:
        print(f"trajcert: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError, KeyError) as exc:
        print(f"trajcert: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except TrajcertError as exc:  # pragma: no cover - every subclass is handled above
        print(f"trajcert: {exc}", file=sys.stderr)
        return 1
    report["duration_ms"] = round((time.perf_counter() - start) * 1000.0, 3)
    text = json.dumps(_jsonable(report), indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
