"""Command-line front end.

Exit codes: 0 success / all checks passed, 1 a requested check failed,
2 input error, 3 numeric failure or degenerate result.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import euclid3, hyp3, kaehler
from .core import (
    DEFAULT_TOL,
    EUCLID3,
    Tolerances,
    HYP3,
    CurveSpec,
    NormalField,
    arclength_reparametrize,
    curve_from_json,
    curve_to_json,
    evaluate,
)
from .errors import DegenerateWarning, FrenetUndefined, InputError, NumericError, RMFrameError
from .formats import dumps, frames_to_csv, mesh_to_obj, read_field_csv, write_text

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

CHECKS = ("rm", "rm_j", "speed", "planar", "spherical", "developable")


@dataclass
class RunConfig:
    command: str
    input: Path
    output: Path | None
    steps: int
    tol: float
    lambda_range: tuple
    grid_rows: int | None
    grid_cols: int
    field: str
    checks: list
    clamp_z: float | None
    n0: list | None
    c: float | None


def _positive_int(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return val


def _positive_float(text: str) -> float:
    val = float(text)
    if not val > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return val


def _vector(text: str) -> list:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, type=Path)
    common.add_argument("--output", type=Path)
    common.add_argument("--steps", type=_positive_int, default=2000)
    common.add_argument("--tol", type=_positive_float, default=None)

    surf = argparse.ArgumentParser(add_help=False)
    surf.add_argument("--field", default="rmf", help="rmf | frenet | tangent | file:PATH")
    surf.add_argument("--n0", type=_vector)

    parser = argparse.ArgumentParser(prog="rmframe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("frames", parents=[common], help="RM frames and natural curvatures as CSV")
    p.add_argument("--n0", type=_vector)

    p = sub.add_parser("surface", parents=[common, surf], help="ruled surface as OBJ + JSON sidecar")
    p.add_argument("--lambda-min", type=float, default=0.0)
    p.add_argument("--lambda-max", type=float, default=1.0)
    p.add_argument("--grid-rows", type=_positive_int)
    p.add_argument("--grid-cols", type=_positive_int, default=11)
    p.add_argument("--clamp-z", type=_positive_float)

    p = sub.add_parser("check", parents=[common, surf], help="run RM / speed / planarity / spherical checks")
    p.add_argument("--check", action="append", required=True, help=" | ".join(CHECKS) + " (repeatable)")

    p = sub.add_parser("involute", parents=[common], help="involute and evolute RM field")
    p.add_argument("--c", type=float, required=True)

    sub.add_parser("magnetic", parents=[common], help="integrate a magnetic curve in C^n")
    sub.add_parser("spherical", parents=[common], help="normal-development sphere test")
    return parser


def _config(args) -> RunConfig:
    checks = []
    for item in getattr(args, "check", None) or []:
        checks += [c.strip().lower() for c in item.split(",") if c.strip()]
    for c in checks:
        if c not in CHECKS:
            raise InputError(f"unknown check {c!r}; choose from {', '.join(CHECKS)}")
    return RunConfig(
        command=args.command,
        input=args.input,
        output=args.output,
        steps=args.steps,
        tol=args.tol if args.tol is not None else Tolerances.from_env().residual,
        lambda_range=(getattr(args, "lambda_min", 0.0), getattr(args, "lambda_max", 1.0)),
        grid_rows=getattr(args, "grid_rows", None),
        grid_cols=getattr(args, "grid_cols", 11),
        field=getattr(args, "field", "rmf"),
        checks=checks,
        clamp_z=getattr(args, "clamp_z", None),
        n0=getattr(args, "n0", None),
        c=getattr(args, "c", None),
    )


def _read_json(path: Path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _load_curve(cfg: RunConfig) -> CurveSpec:
    return curve_from_json(_read_json(cfg.input))


def _emit(cfg: RunConfig, text: str, suffix: str | None = None) -> None:
    if cfg.output is None:
        sys.stdout.write(text)
        return
    path = cfg.output if suffix is None else cfg.output.with_suffix(suffix)
    write_text(path, text)


def _rm_frame(curve: CurveSpec, cfg: RunConfig):
    if curve.ambient == EUCLID3:
        return euclid3.rm_frame(curve, cfg.n0, cfg.steps)
    if curve.ambient == HYP3:
        return hyp3.rm_frame_hyp(curve, cfg.n0, cfg.steps)
    raise InputError("RM frames are computed for euclid3 and hyp3 curves")


def _field(curve: CurveSpec, cfg: RunConfig) -> NormalField:
    spec = cfg.field
    if spec == "rmf":
        fr = _rm_frame(curve, cfg)
        return NormalField(curve, fr.ts, fr.normals[:, 0])
    if spec == "frenet":
        if curve.ambient != EUCLID3:
            raise InputError("the frenet field is available for euclid3 curves only")
        app = euclid3.frenet(curve, cfg.steps + 1)
        if not np.all(app.defined):
            raise FrenetUndefined("Frenet normal undefined where the curvature vanishes")
        return NormalField(curve, app.ts, app.N)
    if spec.startswith("file:"):
        ts, vecs = read_field_csv(spec[5:])
        return NormalField(curve, ts, vecs)
    raise InputError(f"unknown field source {spec!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_frames(cfg: RunConfig) -> int:
    curve = _load_curve(cfg)
    fr = _rm_frame(curve, cfg)
    err = fr.max_orthonormality_error()
    _emit(cfg, frames_to_csv(fr))
    print(f"frames: {len(fr.ts)} rows, max |Gram - I| = {err:.3e}", file=sys.stderr)
    if err > DEFAULT_TOL.tol_orth:
        print("frames: orthonormality check failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_surface(cfg: RunConfig) -> int:
    curve = _load_curve(cfg)
    side = {"ambient": curve.ambient.name, "field": cfg.field, "lambda_range": list(cfg.lambda_range)}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateWarning)
        if cfg.field == "tangent":
            if curve.ambient != HYP3:
                raise InputError("--field tangent builds hyperbolic tangential surfaces (hyp3 only)")
            rows = cfg.grid_rows or cfg.steps + 1
            mesh = hyp3.tangential_surface_hyp(curve, cfg.lambda_range, rows, cfg.grid_cols)
            if "degenerate" not in mesh.flags:
                side["ruling_plane_residual"] = hyp3.ruling_plane_residual(mesh).to_dict()
        else:
            field = _field(curve, cfg)
            if curve.ambient == EUCLID3:
                mesh = euclid3.ruled_surface(curve, field, cfg.lambda_range, cfg.grid_cols)
                side["developability_residual"] = euclid3.developability_residual(curve, field).to_dict()
            elif curve.ambient == HYP3:
                mesh = hyp3.ruled_surface_hyp(curve, field, cfg.lambda_range, cfg.grid_cols)
                side["developability_residual"] = hyp3.developability_residual_hyp(curve, field).to_dict()
            else:
                raise InputError("surfaces are built for euclid3 and hyp3 curves")
    if cfg.grid_rows and cfg.field != "tangent" and cfg.grid_rows < mesh.shape[0]:
        idx = np.unique(np.linspace(0, mesh.shape[0] - 1, cfg.grid_rows).round().astype(int))
        mesh = type(mesh)(mesh.points[idx], mesh.s[idx], mesh.lam, mesh.flags)
    side["rows"], side["cols"] = mesh.shape
    side["flags"] = sorted(mesh.flags)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if cfg.output is None:
        raise InputError("surface needs --output for the OBJ mesh")
    write_text(cfg.output, mesh_to_obj(mesh, cfg.clamp_z))
    write_text(cfg.output.with_suffix(".json"), dumps(side))
    return EXIT_NUMERIC if "degenerate" in mesh.flags else EXIT_OK


def _check_one(name: str, curve: CurveSpec, cfg: RunConfig, tol_given: bool) -> dict:
    tol = cfg.tol
    params = {"tol": tol}
    if name in ("rm", "developable"):
        field = _field(curve, cfg)
        params["field"] = cfg.field
        if curve.ambient == EUCLID3:
            fn = euclid3.rm_residual if name == "rm" else euclid3.developability_residual
        else:
            fn = hyp3.rm_residual_hyp if name == "rm" else hyp3.developability_residual_hyp
        rep = fn(curve, field)
        return {"check_name": name, "verdict": rep.passes(tol), "residuals": rep.to_dict(), "parameters": params}
    if name == "rm_j":
        tol = cfg.tol if tol_given else 1e-5
        r = kaehler.rm_J_test(curve, cfg.steps + 1, tol)
        params["tol"] = tol
        return {
            "check_name": name,
            "verdict": r.is_rm,
            "residuals": r.residual.to_dict(),
            "parameters": params,
            "kappa1": [[float(t), float(k)] for t, k in zip(r.ts, r.kappa1)],
        }
    if name == "speed":
        r = kaehler.constant_speed_check(curve, cfg.steps + 1, tol)
        return {"check_name": name, "verdict": r["is_constant"], "residuals": r, "parameters": params}
    if name == "planar":
        tol = cfg.tol if tol_given else 1e-5
        r = kaehler.analytic_planar_test(curve, cfg.steps + 1, tol)
        params["tol"] = tol
        return {"check_name": name, "verdict": r.is_planar, "residuals": r.residual.to_dict(), "parameters": params}
    if name == "spherical":
        r = euclid3.spherical_test(curve, cfg.steps, tol)
        return {"check_name": name, "verdict": r.verdict == "spherical", "residuals": r.to_dict(), "parameters": params}
    raise InputError(f"unknown check {name!r}")


def cmd_check(cfg: RunConfig, tol_given: bool = False) -> int:
    curve = _load_curve(cfg)
    results = [_check_one(name, curve, cfg, tol_given) for name in cfg.checks]
    for r in results:
        r["verdict"] = "pass" if r["verdict"] else "fail"
    ok = all(r["verdict"] == "pass" for r in results)
    _emit(cfg, dumps({"checks": results, "verdict": "pass" if ok else "fail"}))
    return EXIT_OK if ok else EXIT_FAILED


def cmd_involute(cfg: RunConfig) -> int:
    alpha = _load_curve(cfg)
    report = {"ambient": alpha.ambient.name, "c": cfg.c}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateWarning)
        if alpha.ambient == EUCLID3:
            d1 = evaluate(alpha, alpha.grid(64), 1)
            if np.max(np.abs(np.linalg.norm(d1, axis=1) - 1.0)) > 1e-6:
                alpha = arclength_reparametrize(alpha, cfg.steps + 1)
                report["reparametrized"] = True
            beta = euclid3.involute(alpha, cfg.c, cfg.steps + 1)
            cols = [beta.ts, beta.points]
            header = ["s", "beta_1", "beta_2", "beta_3"]
            if "degenerate" not in beta.flags:
                _, rep = euclid3.evolute_normal_field(alpha, beta)
                report["evolute_rm_residual"] = rep.to_dict()
                t_a = evaluate(alpha, beta.ts, 1)
                t_b = evaluate(beta, beta.ts, 1)
                cos = np.abs(np.sum(t_a * t_b, axis=1)) / np.linalg.norm(t_b, axis=1)
                report["orthogonality_residual"] = float(cos.max())
        elif alpha.ambient == HYP3:
            inv = hyp3.involute_hyp(alpha, cfg.c, cfg.steps)
            beta = inv.curve
            cols = [inv.ts, inv.curve.points, inv.lam]
            header = ["s", "beta_1", "beta_2", "beta_3", "lambda"]
            report["orthogonality_residual"] = inv.orthogonality.max_abs
            report["lambda_vs_c_minus_s"] = float(np.max(np.abs(inv.lam - (cfg.c - inv.ts))))
            if "degenerate" not in beta.flags:
                _, rep = hyp3.evolute_rm_field_hyp(alpha, beta, inv.lam)
                report["evolute_rm_residual"] = rep.to_dict()
        else:
            raise InputError("involutes are computed for euclid3 and hyp3 curves")
    report["flags"] = sorted(beta.flags)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    data = np.column_stack([np.atleast_2d(c).T if np.ndim(c) == 1 else c for c in cols])
    lines = [",".join(header)] + [",".join("%.17g" % x for x in row) for row in data]
    _emit(cfg, "\n".join(lines) + "\n")
    if cfg.output is not None:
        write_text(cfg.output.with_suffix(".json"), dumps(report))
    else:
        sys.stderr.write(dumps(report))
    return EXIT_NUMERIC if "degenerate" in beta.flags else EXIT_OK


def _kappa_from_json(spec):
    if isinstance(spec, (int, float)):
        return float(spec)
    if isinstance(spec, list) and spec and all(isinstance(x, (int, float)) for x in spec):
        coeffs = [float(x) for x in spec]
        return lambda t: np.polyval(coeffs, t)
    raise InputError("kappa1 must be a number or a list of polynomial coefficients")


def cmd_magnetic(cfg: RunConfig) -> int:
    data = _read_json(cfg.input)
    if not isinstance(data, dict):
        raise InputError("magnetic config must be a JSON object")
    try:
        n = int(data["complex_dim"])
        p0, v0 = data["p0"], data["v0"]
        kappa = _kappa_from_json(data["kappa1"])
        t_range = tuple(data.get("range", [0.0, 1.0]))
    except KeyError as exc:
        raise InputError(f"magnetic config is missing {exc}") from exc
    curve = kaehler.magnetic_integrate(n, p0, v0, kappa, t_range, cfg.steps)
    report = {"speed": kaehler.constant_speed_check(curve, tol=cfg.tol)}
    if isinstance(kappa, float) and kappa != 0.0:
        fit = kaehler.circle_params(curve)
        report["circle"] = fit
    _emit(cfg, dumps(curve_to_json(curve)))
    sys.stderr.write(dumps(report))
    return EXIT_OK


def cmd_spherical(cfg: RunConfig) -> int:
    curve = _load_curve(cfg)
    rep = euclid3.spherical_test(curve, cfg.steps, cfg.tol)
    _emit(cfg, dumps(rep.to_dict()))
    return EXIT_OK


COMMANDS = {
    "frames": cmd_frames,
    "surface": cmd_surface,
    "involute": cmd_involute,
    "magnetic": cmd_magnetic,
    "spherical": cmd_spherical,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = _config(args)
        if cfg.command == "check":
            return cmd_check(cfg, tol_given=args.tol is not None)
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RMFrameError as exc:  # pragma: no cover - every subclass is one of the two above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
