"""Command-line interface.

Subcommands: validate, swap, certify, pipeline, sweep.  Exit codes:
0 success, 1 physicality failure, 2 instability / convergence failure,
3 schema violation.  Failures emit a machine-readable
{"error": {"code", "message"}} JSON object on stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import (
    CVSwapError,
    DegenerateMeasurementError,
    IntegrationError,
    NonPhysicalError,
    NumericalError,
    SchemaError,
    ShapeError,
    UnstableModelError,
)
from .gaussian import cm_from_dict, validate_physical
from .optomech import OmParams, reference_params
from .pipeline import (
    DEFAULT_TAU_B_OMEGA_M,
    SweepSpec,
    closed_form_en,
    default_sweep_spec,
    run_pipeline,
    run_sweep,
    sweep_rows_to_csv,
)
from .swap import bell_swap, swap_result_to_dict
from .threemode import ThreeModeState, is_certifying, purities

EXIT_OK = 0
EXIT_NONPHYSICAL = 1
EXIT_UNSTABLE = 2
EXIT_SCHEMA = 3

_ERROR_CODES = [
    (SchemaError, "schema", EXIT_SCHEMA),
    (ShapeError, "schema", EXIT_SCHEMA),
    (NonPhysicalError, "nonphysical", EXIT_NONPHYSICAL),
    (UnstableModelError, "unstable", EXIT_UNSTABLE),
    (IntegrationError, "integration", EXIT_UNSTABLE),
    (DegenerateMeasurementError, "degenerate_measurement", EXIT_UNSTABLE),
    (NumericalError, "numerical", EXIT_UNSTABLE),
]


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _fail(exc: Exception) -> int:
    for etype, code, exit_code in _ERROR_CODES:
        if isinstance(exc, etype):
            print(json.dumps({"error": {"code": code, "message": str(exc)}}))
            return exit_code
    raise exc


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"input file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc


def _load_three_mode(path: str) -> ThreeModeState:
    cm = cm_from_dict(_load_json(path))
    if cm.n_modes != 3:
        raise SchemaError(f"{path}: expected a 3-mode covariance matrix, got {cm.n_modes} modes")
    return ThreeModeState(cm)


def cmd_validate(args) -> int:
    cm = cm_from_dict(_load_json(args.cm))
    report = validate_physical(cm)
    _emit(
        {"is_physical": report.is_physical, "min_symplectic_eig": report.min_symplectic_eig},
        args.out,
    )
    return EXIT_OK if report.is_physical else EXIT_NONPHYSICAL


def cmd_swap(args) -> int:
    s1 = _load_three_mode(args.cm1)
    s2 = _load_three_mode(args.cm2)
    result = bell_swap(s1, s2)
    _emit(swap_result_to_dict(result), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    state = _load_three_mode(args.cm)
    rep = validate_physical(state.cm)
    if not rep.is_physical:
        raise NonPhysicalError(
            f"input covariance matrix is not physical (min eig {rep.min_symplectic_eig:.6g})"
        )
    mu = purities(state)
    check = is_certifying(state)
    en_rr, en_cc = closed_form_en(state)
    _emit(
        {
            "purities": {"rb": mu.mu_rb, "bc": mu.mu_bc, "b": mu.mu_b, "c": mu.mu_c},
            "certifying": check.certifying,
            "margins": {"rb_bc": check.margin_rb_bc, "bc_b": check.margin_bc_b},
            "en_closed_form": {"rr": en_rr, "cc": en_cc},
        },
        args.out,
    )
    return EXIT_OK


def _params_with_overrides(args) -> OmParams:
    params = OmParams.from_dict(_load_json(args.params)) if args.params else reference_params(1.0)
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(OmParams)
        if getattr(args, f.name, None) is not None
    }
    return dataclasses.replace(params, **overrides) if overrides else params


def _add_params_overrides(parser) -> None:
    group = parser.add_argument_group("parameter overrides (SI units)")
    for f in dataclasses.fields(OmParams):
        group.add_argument(f"--{f.name.replace('_', '-')}", type=float, default=None,
                           dest=f.name, help=f"override {f.name}")


def cmd_pipeline(args) -> int:
    report = run_pipeline(
        _params_with_overrides(args),
        tau_b_omega_m=args.tau_b_omega_m,
        seed=args.seed,
        n_rounds=args.rounds,
    )
    _emit(report, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.grid:
        spec = SweepSpec.from_dict(_load_json(args.grid))
    else:
        spec = default_sweep_spec(_params_with_overrides(args))
    if args.format == "csv":
        rows = run_sweep(spec, out_path=args.out)
        if not args.out:
            sys.stdout.write(sweep_rows_to_csv(rows))
    else:
        rows = run_sweep(spec, out_path=None)
        _emit([r.to_dict() for r in rows], args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cvswap",
        description="Entanglement swapping with local certification for three-mode Gaussian states.",
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("validate", help="Check a covariance-matrix JSON file for physicality.")
    v.add_argument("cm", help="covariance matrix JSON file")
    v.add_argument("--out", default=None, help="write the report JSON here instead of stdout")
    v.set_defaults(fn=cmd_validate)

    s = sub.add_parser("swap", help="Bell-swap two three-mode covariance matrices.")
    s.add_argument("cm1")
    s.add_argument("cm2")
    s.add_argument("--out", default=None)
    s.set_defaults(fn=cmd_swap)

    c = sub.add_parser("certify", help="Purities and certifying verdict of a three-mode CM.")
    c.add_argument("cm")
    c.add_argument("--out", default=None)
    c.set_defaults(fn=cmd_certify)

    pl = sub.add_parser("pipeline", help="Optomechanical state -> certification -> swap -> protocol.")
    pl.add_argument("--params", default=None, help="OmParams JSON file (default: reference parameters)")
    pl.add_argument("--tau-b-omega-m", type=float, default=DEFAULT_TAU_B_OMEGA_M,
                    dest="tau_b_omega_m",
                    help="normalized Bell-filter inverse bandwidth tau_b * omega_m")
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--rounds", type=int, default=10)
    pl.add_argument("--out", default=None)
    _add_params_overrides(pl)
    pl.set_defaults(fn=cmd_pipeline)

    sw = sub.add_parser("sweep", help="Grid sweep over (tau_b omega_m, kappa/omega_m).")
    sw.add_argument("--grid", default=None, help="SweepSpec JSON file (default grid otherwise)")
    sw.add_argument("--params", default=None, help="OmParams JSON overriding the default base")
    sw.add_argument("--out", default=None, help="output CSV path (resumable)")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_params_overrides(sw)
    sw.set_defaults(fn=cmd_sweep)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CVSwapError as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
