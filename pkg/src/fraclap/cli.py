"""Command-line front end: ``fraclap {spectrum,weyl,validate,selftest}``.

Exit codes: 0 ok, 1 selftest failure, 2 validation error, 3 numerical failure.
Option values are resolved as command-line flag, then ``--config`` JSON, then
built-in default.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from fraclap import special
from fraclap.core import (
    BoundaryCondition,
    FractionalOrder,
    Interval,
    bc_diagnostics,
    bc_from_dict,
    preset_bc,
    validate_bc,
)
from fraclap.errors import NumericalError, PoleProximity, ValidationError

__all__ = ["JobSpec", "build_parser", "main"]

PRESETS = ("dirichlet", "neumann", "kvn")

DEFAULTS: dict[str, Any] = {
    "interval": [-1.0, 1.0],
    "order": 0.75,
    "bc": "dirichlet",
    "basis": 120,
    "out": "json",
    "output": None,
    "dump_model": None,
    "lambda_max": 50.0,
    "lambda_min": None,
    "method": "weyl",
    "count": 10,
    "lambdas": None,
    "grid": None,
    "classify": False,
    "filter": None,
    "inject_fault": None,
}

FAULT_SLOPE = 0.05


@dataclass(frozen=True)
class JobSpec:
    """A fully resolved and validated job."""

    command: str
    interval: Interval
    order: float
    bc: BoundaryCondition | None
    basis: int
    options: dict[str, Any]

    @property
    def classical(self) -> bool:
        return self.order == 1.0


# ---------------------------------------------------------------- parsing


def _common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"), default=S)
    p.add_argument("--order", type=float, default=S, help="fractional order a in (1/2, 1); 1 selects the classical Laplacian")
    p.add_argument("--bc", default=S, help="preset (dirichlet, neumann, kvn) or path to a JSON file")
    p.add_argument("--basis", type=int, default=S, help="Galerkin basis size N")
    p.add_argument("--out", choices=("json", "csv"), default=S)
    p.add_argument("--output", default=S, help="output file (default: standard output)")
    p.add_argument("--config", default=None, help="JSON file with option values")
    p.add_argument("--dump-model", dest="dump_model", default=S, help="write Dirichlet eigenvalues and metadata as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraclap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    sp = sub.add_parser("spectrum", help="eigenvalues of a boundary condition")
    _common(sp)
    sp.add_argument("--lambda-max", dest="lambda_max", type=float, default=S)
    sp.add_argument("--lambda-min", dest="lambda_min", type=float, default=S)
    sp.add_argument("--method", choices=("weyl", "pencil"), default=S)
    sp.add_argument("--count", type=int, default=S, help="number of eigenvalues for --method pencil")

    wp = sub.add_parser("weyl", help="Weyl function on a lambda grid")
    _common(wp)
    wp.add_argument("--lambdas", default=S, help="comma-separated lambda values")
    wp.add_argument("--grid", nargs=3, type=float, metavar=("START", "STOP", "NUM"), default=S)

    vp = sub.add_parser("validate", help="check a boundary condition")
    _common(vp)
    vp.add_argument("--classify", action="store_true", default=S)

    tp = sub.add_parser("selftest", help="run the acceptance suite")
    tp.add_argument("--filter", default=S, help="criterion number, tag or title fragment")
    tp.add_argument("--inject-fault", dest="inject_fault", choices=("gamma",), default=S)
    tp.add_argument("--config", default=None)
    return parser


def _load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object")
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def _resolve(ns: argparse.Namespace) -> dict[str, Any]:
    opts = dict(DEFAULTS)
    opts.update(_load_config(getattr(ns, "config", None)))
    opts.update({k: v for k, v in vars(ns).items() if k not in ("command", "config")})
    return opts


def _parse_bc(spec: Any, interval: Interval, order: float) -> BoundaryCondition:
    if isinstance(spec, dict):
        return validate_bc(bc_from_dict(spec, interval, order))
    spec = str(spec)
    if spec.lower() in PRESETS:
        return preset_bc(spec, interval, order)
    if not os.path.exists(spec):
        raise ValidationError(f"--bc {spec!r} is neither a preset nor an existing file")
    try:
        with open(spec, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read boundary condition {spec}: {exc}") from exc
    return validate_bc(bc_from_dict(obj, interval, order))


def make_jobspec(command: str, opts: dict[str, Any]) -> JobSpec:
    """Validate the option set before any computation starts."""
    iv = opts["interval"]
    if not isinstance(iv, (list, tuple)) or len(iv) != 2:
        raise ValidationError("interval must be two numbers")
    interval = Interval(float(iv[0]), float(iv[1]))
    order = float(opts["order"])
    if order != 1.0:
        FractionalOrder(order)  # raises on an invalid order
    basis = int(opts["basis"])
    if basis < 8:
        raise ValidationError("--basis must be at least 8")
    bc = _parse_bc(opts["bc"], interval, order)
    return JobSpec(command, interval, order, bc, basis, opts)


# ---------------------------------------------------------------- output


def _meta(job: JobSpec, **extra: Any) -> dict[str, Any]:
    from fraclap.io import metadata

    return metadata(
        command=job.command,
        mode="classical" if job.classical else "fractional",
        a=job.order,
        N=None if job.classical else job.basis,
        interval=[job.interval.alpha, job.interval.beta],
        bc_label=job.bc.label if job.bc is not None else None,
        **extra,
    )


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _model(job: JobSpec):
    from fraclap.dirichlet import build_dirichlet_model

    return build_dirichlet_model(job.interval, FractionalOrder(job.order), job.basis)


def _dump_model(job: JobSpec, model) -> None:
    path = job.options.get("dump_model")
    if not path:
        return
    from fraclap.io import model_to_dict

    if model is None:
        w = math.pi / job.interval.L
        doc = {"metadata": _meta(job), "eigvals": [(k * w) ** 2 for k in range(1, job.basis + 1)]}
    else:
        doc = model_to_dict(model)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------- commands


def cmd_spectrum(job: JobSpec) -> int:
    from fraclap.io import spectrum_to_csv, spectrum_to_json

    o = job.options
    lam_max = float(o["lambda_max"])
    lam_min = o["lambda_min"]
    model = None
    if job.classical:
        from fraclap.classical import classical_spectrum

        res = classical_spectrum(job.interval, job.bc, lam_max, lambda_min=lam_min)
        tol = {"root_xtol_rel": 1e-14, "pole_rel": 1e-8}
    else:
        from fraclap.extensions import spectrum_pencil, spectrum_weyl

        model = _model(job)
        if o["method"] == "pencil":
            lo = -math.inf if lam_min is None else float(lam_min)
            res = spectrum_pencil(model, job.bc, int(o["count"]), lambda_min=lo)
        else:
            res = spectrum_weyl(model, job.bc, lam_max, lambda_min=lam_min)
        tol = {"root_xtol_rel": 1e-14, "merge_rel": 1e-6, "pole_rel": 1e-9}
    _dump_model(job, model)
    meta = _meta(job, method=o["method"] if not job.classical else "weyl", tolerances=tol)
    text = spectrum_to_json(res, meta) if o["out"] == "json" else spectrum_to_csv(res, meta)
    _emit(text, o["output"])
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def _lambda_grid(o: dict[str, Any]) -> list[float]:
    if o["lambdas"] is not None:
        vals = o["lambdas"]
        if isinstance(vals, str):
            try:
                return [float(v) for v in vals.split(",") if v.strip()]
            except ValueError as exc:
                raise ValidationError(f"bad --lambdas value: {exc}") from exc
        return [float(v) for v in vals]
    if o["grid"] is not None:
        start, stop, num = o["grid"]
        if int(num) < 1:
            raise ValidationError("grid needs at least one point")
        return [float(x) for x in np.linspace(start, stop, int(num))]
    return [0.0]


def _inv_norm(M: np.ndarray) -> float:
    try:
        return float(np.linalg.norm(np.linalg.inv(M), 2))
    except np.linalg.LinAlgError:
        return math.inf


def cmd_weyl(job: JobSpec) -> int:
    from fraclap.io import weyl_rows_to_csv, weyl_rows_to_json

    o = job.options
    grid = _lambda_grid(o)
    rows = []
    model = None
    if job.classical:
        from fraclap.classical import classical_pole_distance, classical_weyl

        def sample(lam):
            s = classical_weyl(job.interval, lam)
            return s.M, s.pole_distance

        def dist(lam):
            return classical_pole_distance(job.interval, lam)

    else:
        from fraclap.weyl import weyl_M

        model = _model(job)

        def sample(lam):
            e = weyl_M(model, lam)
            return e.M, e.pole_distance

        dist = model.pole_distance

    for lam in grid:
        try:
            M, d = sample(lam)
            rows.append({"lambda": lam, "M": M, "pole_distance": d, "inv_norm": _inv_norm(M), "status": "ok"})
        except PoleProximity:
            rows.append({"lambda": lam, "pole_distance": dist(lam), "status": "pole"})
            print(f"warning: lambda={lam!r} is at a pole; row marked", file=sys.stderr)
    _dump_model(job, model)
    meta = _meta(job, tolerances={"pole_rel": 1e-8 if job.classical else 1e-9})
    text = weyl_rows_to_json(rows, meta) if o["out"] == "json" else weyl_rows_to_csv(rows, meta)
    _emit(text, o["output"])
    return 0


def _classical_classification(job: JobSpec) -> dict[str, Any]:
    """Classification of a classical realization from its exact Weyl function."""
    from fraclap._roots import form_margin
    from fraclap.classical import classical_spectrum, classical_weyl

    p1 = (math.pi / job.interval.L) ** 2
    M0 = classical_weyl(job.interval, 0.0).M
    nonneg = form_margin(job.bc.A, job.bc.B, M0) >= -1e-10
    spec = classical_spectrum(job.interval, job.bc, p1)
    tol = 1e-8 * p1
    return {
        "nonnegative": bool(nonneg),
        "lower_bound": float(spec.eigenvalues[0].lam) if spec.eigenvalues else p1,
        "num_nonpositive": spec.num_nonpositive(tol),
        "neumann_like_flag": bool(
            np.linalg.matrix_rank(job.bc.A) == 2 and np.linalg.norm(job.bc.B, 2) <= 1e-12 * np.linalg.norm(job.bc.A, 2)
        ),
        "tolerance": tol,
    }


def _load_raw_bc(spec: Any) -> tuple[np.ndarray, np.ndarray] | None:
    """Raw ``(A, B)`` from a file, for diagnostics of invalid input."""
    if isinstance(spec, str) and spec.lower() not in PRESETS and os.path.exists(spec):
        from fraclap.core import _decode_matrix

        try:
            with open(spec, encoding="utf-8") as fh:
                obj = json.load(fh)
            return _decode_matrix(obj["A"], "A"), _decode_matrix(obj["B"], "B")
        except (OSError, KeyError, TypeError, json.JSONDecodeError, ValidationError):
            return None
    return None


def cmd_validate(opts: dict[str, Any]) -> int:
    try:
        job = make_jobspec("validate", opts)
    except ValidationError as exc:
        raw = _load_raw_bc(opts["bc"])
        if raw is not None:
            d = bc_diagnostics(*raw)
            print(f"hermitian_residual: {d['sym_residual']:.6e}")
            print(f"sigma_min: {d['sigma_min']:.6e}")
        print(f"valid: false ({exc})")
        return 2
    d = bc_diagnostics(job.bc.A, job.bc.B)
    print("valid: true")
    print(f"label: {job.bc.label}")
    print(f"hermitian_residual: {d['sym_residual']:.6e}")
    print(f"sigma_min: {d['sigma_min']:.6e}")
    if opts["classify"]:
        if job.classical:
            cls = _classical_classification(job)
        else:
            from fraclap.extensions import classify

            c = classify(_model(job), job.bc)
            cls = {
                "nonnegative": c.nonnegative,
                "lower_bound": c.lower_bound,
                "num_nonpositive": c.num_nonpositive,
                "neumann_like_flag": c.neumann_like_flag,
                "tolerance": c.tolerance,
            }
            for n in c.notes:
                print(f"note: {n}", file=sys.stderr)
        for k, v in cls.items():
            val = str(v).lower() if isinstance(v, bool) else (f"{v:.12g}" if isinstance(v, float) else v)
            print(f"{k}: {val}")
    return 0


def cmd_selftest(opts: dict[str, Any]) -> int:
    from fraclap.acceptance import run_all, select

    selected = select(opts["filter"])
    if not selected:
        print(f"no criterion matches filter {opts['filter']!r}", file=sys.stderr)
        return 2
    saved = special._LOG_GAMMA_FAULT
    if opts["inject_fault"] == "gamma":
        special._LOG_GAMMA_FAULT = FAULT_SLOPE
    try:
        results = run_all(opts["filter"])
    finally:
        special._LOG_GAMMA_FAULT = saved
    width = max(len(r.title) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.number:>2}  {r.title:<{width}}  {status}  {r.seconds:7.2f}s  {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} passed")
    return 1 if failed else 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        opts = _resolve(ns)
        if ns.command == "selftest":
            return cmd_selftest(opts)
        if ns.command == "validate":
            return cmd_validate(opts)
        job = make_jobspec(ns.command, opts)
        return cmd_spectrum(job) if ns.command == "spectrum" else cmd_weyl(job)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
