"""Command-line entry point: ``udn-coverage {coverage,sweep,simulate,validate}``.

Densities on the command line are per km^2 and the SIR threshold is in dB.
Exit codes: 0 success, 1 usage error, 2 numeric-convergence failure,
3 validation failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .montecarlo import EdgeEffectError, LoadMode, ResourceLimitError, SimConfig
from .pathloss import PathLossModel, Variant
from .specfun import ConvergenceError
from .sweep import (
    METHODS,
    SweepError,
    SweepSpec,
    load_manifest,
    parse_lambda_u,
    rows_to_csv,
    run_sweep,
    spec_from_mapping,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONVERGENCE = 2
EXIT_VALIDATION = 3

log = logging.getLogger("udn_coverage")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_model_args(p: argparse.ArgumentParser, multiple: bool = False) -> None:
    choices = [v.value for v in Variant]
    if multiple:
        p.add_argument("--models", nargs="+", choices=choices, help="path loss variants")
    else:
        p.add_argument("--model", choices=choices, default=Variant.BOUNDED_DUAL_SLOPE.value)
    p.add_argument("--R-b", dest="R_b", type=float, help="bounded radius in m (default 1)")
    p.add_argument("--R-c", dest="R_c", type=float, help="critical distance in m (default 70)")
    p.add_argument("--alpha-c", dest="alpha_c", type=float, help="near-field exponent (default 2.5)")
    p.add_argument("--alpha", type=float, help="far-field exponent (default 4)")


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--load-mode", choices=[m.value for m in LoadMode])
    p.add_argument("--window-radius", type=float, help="simulation window radius in m (default: automatic)")
    p.add_argument("--min-expected-bs", type=int)


def _path_loss_params(args) -> dict:
    return {k: getattr(args, k) for k in ("R_b", "R_c", "alpha_c", "alpha") if getattr(args, k, None) is not None}


def _sim_overrides(args) -> dict:
    mapping = {
        "trials": "trials",
        "seed": "master_seed",
        "load_mode": "load_mode",
        "window_radius": "window_radius",
        "min_expected_bs": "min_expected_bs",
    }
    return {dst: getattr(args, src) for src, dst in mapping.items() if getattr(args, src, None) is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="udn-coverage", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coverage", help="analytical coverage and ASE at one point")
    p.add_argument("--lambda-b", type=float, required=True, help="BS density per km^2")
    p.add_argument("--lambda-u", type=parse_lambda_u, default=parse_lambda_u("full"),
                   help="UE density per km^2, or 'full' (default)")
    p.add_argument("--T-db", type=float, default=10.0, help="SIR threshold in dB")
    p.add_argument("--method", choices=[m for m in METHODS if m != "montecarlo"], default="exact")
    _add_model_args(p)

    p = sub.add_parser("sweep", help="evaluate a density grid and write CSV")
    p.add_argument("--config", type=Path, help="YAML manifest; flags below override it")
    p.add_argument("--lambda-b", nargs="+", type=float, help="BS densities per km^2")
    p.add_argument("--lambda-u", nargs="+", type=parse_lambda_u, help="UE densities per km^2 or 'full'")
    p.add_argument("--T-db", type=float)
    p.add_argument("--methods", nargs="+", choices=METHODS)
    p.add_argument("--output", type=Path, help="CSV path (stdout when omitted)")
    p.add_argument("--workers", type=int, help="parallel grid points")
    p.add_argument("--record-runtime", action="store_true", default=None,
                   help="fill runtime_ms (makes the CSV non-reproducible)")
    _add_model_args(p, multiple=True)
    _add_sim_args(p)

    p = sub.add_parser("simulate", help="Monte Carlo coverage at one point")
    p.add_argument("--lambda-b", type=float, required=True, help="BS density per km^2")
    p.add_argument("--lambda-u", type=parse_lambda_u, default=parse_lambda_u("full"))
    p.add_argument("--T-db", type=float, default=10.0)
    p.add_argument("--workers", type=int, default=1, help="parallel trial batches")
    _add_model_args(p)
    _add_sim_args(p)

    p = sub.add_parser("validate", help="run the acceptance checks")
    p.add_argument("--only", nargs="+", metavar="ID", help="criterion ids, e.g. C1 C10")
    p.add_argument("--report", type=Path, help="also write the report to this file")
    return parser


def _model(args) -> PathLossModel:
    return PathLossModel(Variant(args.model), **{**_default_params(), **_path_loss_params(args)})


def _default_params() -> dict:
    ref = PathLossModel.reference()
    return {"R_b": ref.R_b, "R_c": ref.R_c, "alpha_c": ref.alpha_c, "alpha": ref.alpha}


def _cmd_coverage(args) -> int:
    model = _model(args)
    spec = SweepSpec([args.lambda_b], [args.lambda_u], [model], args.T_db, [args.method])
    sys.stdout.write(rows_to_csv(run_sweep(spec)))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    model = _model(args)
    sim = SimConfig(**{"workers": args.workers, **_sim_overrides(args)})
    spec = SweepSpec([args.lambda_b], [args.lambda_u], [model], args.T_db, ["montecarlo"], sim=sim)
    sys.stdout.write(rows_to_csv(run_sweep(spec)))
    return EXIT_OK


def sweep_spec_from_args(args) -> SweepSpec:
    data = load_manifest(args.config) if args.config else {}
    if args.lambda_b is not None:
        data["lambda_b_per_km2"] = args.lambda_b
        data.pop("points", None)
    if args.lambda_u is not None:
        data["lambda_u_per_km2"] = args.lambda_u
        data.pop("points", None)
    if args.T_db is not None:
        data["T_db"] = args.T_db
    if args.methods is not None:
        data["methods"] = args.methods
    if args.output is not None:
        data["output"] = str(args.output)
    if args.workers is not None:
        data["workers"] = args.workers
    if args.record_runtime is not None:
        data["record_runtime"] = args.record_runtime
    if args.models is not None:
        data["models"] = args.models
    params = _path_loss_params(args)
    if params:
        data["path_loss"] = {**(data.get("path_loss") or {}), **params}
    sim = _sim_overrides(args)
    if sim or ("montecarlo" in data.get("methods", []) and data.get("sim") is None):
        data["sim"] = {**(data.get("sim") or {}), **sim}
    return spec_from_mapping(data)


def _cmd_sweep(args) -> int:
    spec = sweep_spec_from_args(args)
    rows = run_sweep(spec)
    if spec.output_path is None:
        sys.stdout.write(rows_to_csv(rows))
    else:
        print(f"wrote {len(rows)} rows to {spec.output_path}", file=sys.stderr)
    return EXIT_OK


def _cmd_validate(args) -> int:
    from . import validation

    only = {c.upper() for c in args.only} if args.only else None
    lines = [validation.REPORT_HEADER]
    print(validation.REPORT_HEADER, flush=True)

    def emit(result):
        lines.append(result.line())
        print(result.line(), flush=True)

    results = validation.run_all(only, emit)
    if args.report:
        args.report.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


_COMMANDS = {
    "coverage": _cmd_coverage,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
}


def _root_cause(exc: BaseException) -> BaseException:
    return exc.cause if isinstance(exc, SweepError) else exc


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (SweepError, ConvergenceError, ValueError, OSError,
            ResourceLimitError, EdgeEffectError) as exc:
        cause = _root_cause(exc)
        print(f"udn-coverage: error: {exc}", file=sys.stderr)
        if isinstance(cause, ConvergenceError):
            return EXIT_CONVERGENCE
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
