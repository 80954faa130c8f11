"""End-to-end drivers: single-point pipeline and the two-axis sweep.

The sweep scans the normalized Bell-filter inverse bandwidth tau_b * omega_m
(log axis) against the normalized cavity decay kappa / omega_m (linear
axis), with the certification filter tied to tau_c = tau_b / 5 and the
filter centers at the scattered sidebands (Omega_b = -omega_m,
Omega_c = +omega_m).  Per point it builds the stationary three-mode output
state and reports the closed-form purity-ratio log-negativities of the
swapped pairs; with identical certifying resources those obey
en_rr > en_cc > 0 identically, which the CSV post-pass checks.

The single-point pipeline additionally standardizes the state (exact in the
R-B sector, best-effort in B-C), runs the actual Bell swap on it, and
samples protocol rounds, so the closed-form prediction can be compared with
the simulated measurement.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    IntegrationError,
    NonPhysicalError,
    NumericalError,
    SchemaError,
    UnstableModelError,
)
from .gaussian import cm_to_dict
from .optomech import FilterSpec, OmParams, build_linear_model, reference_params, stability_check
from .spectrum import OUTPUT_MODE_LABELS, IntegrationConfig, output_cm_with_info
from .swap import (
    bell_swap,
    protocol_records_to_csv,
    run_protocol,
    swap_result_to_dict,
)
from .threemode import ThreeModeState, is_certifying, purities, standardize_for_swap

SWEEP_CSV_HEADER = "tau_b_omega_m,kappa_over_omega_m,en_rr,en_cc,certifying,stable"
TAU_C_OVER_TAU_B = 0.2

DEFAULT_TAU_B_OMEGA_M = 10.0


@dataclass(frozen=True)
class SweepAxis:
    name: str
    min: float
    max: float
    points: int

    def __post_init__(self):
        if self.points < 2:
            raise SchemaError(f"axis '{self.name}' needs at least 2 points")
        if self.min <= 0 or self.max <= self.min:
            raise SchemaError(f"axis '{self.name}' needs 0 < min < max")


@dataclass(frozen=True)
class SweepSpec:
    axis1: SweepAxis  # tau_b_omega_m, log-spaced
    axis2: SweepAxis  # kappa_over_omega_m, linear
    base: OmParams

    def __post_init__(self):
        if self.axis1.name != "tau_b_omega_m":
            raise SchemaError(f"axis1 must be named 'tau_b_omega_m', got {self.axis1.name!r}")
        if self.axis2.name != "kappa_over_omega_m":
            raise SchemaError(f"axis2 must be named 'kappa_over_omega_m', got {self.axis2.name!r}")

    def axis1_values(self) -> np.ndarray:
        return np.geomspace(self.axis1.min, self.axis1.max, self.axis1.points)

    def axis2_values(self) -> np.ndarray:
        return np.linspace(self.axis2.min, self.axis2.max, self.axis2.points)

    def to_dict(self) -> dict:
        return {
            "axis1": {"name": self.axis1.name, "min": self.axis1.min,
                      "max": self.axis1.max, "points": self.axis1.points},
            "axis2": {"name": self.axis2.name, "min": self.axis2.min,
                      "max": self.axis2.max, "points": self.axis2.points},
            "base": self.base.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        if not isinstance(d, dict):
            raise SchemaError("sweep spec must be a JSON object")
        for key in ("axis1", "axis2", "base"):
            if key not in d:
                raise SchemaError(f"missing required field '{key}'")
        axes = []
        for key in ("axis1", "axis2"):
            ax = d[key]
            for sub in ("name", "min", "max", "points"):
                if sub not in ax:
                    raise SchemaError(f"missing field '{key}.{sub}'")
            axes.append(SweepAxis(ax["name"], float(ax["min"]), float(ax["max"]), int(ax["points"])))
        return cls(axes[0], axes[1], OmParams.from_dict(d["base"]))


def default_sweep_spec(base: OmParams | None = None) -> SweepSpec:
    """Default grid bracketing the resolved-sideband regime of the reference
    parameters: tau_b omega_m in [1, 500] (40 log points), kappa / omega_m in
    [0.2, 3] (30 linear points)."""
    return SweepSpec(
        axis1=SweepAxis("tau_b_omega_m", 1.0, 500.0, 40),
        axis2=SweepAxis("kappa_over_omega_m", 0.2, 3.0, 30),
        base=base or reference_params(1.0),
    )


@dataclass(frozen=True)
class SweepRow:
    tau_b_omega_m: float
    kappa_over_omega_m: float
    en_rr: float
    en_cc: float
    certifying: bool
    stable: bool

    def csv_line(self) -> str:
        return (
            f"{self.tau_b_omega_m!r},{self.kappa_over_omega_m!r},"
            f"{self.en_rr!r},{self.en_cc!r},"
            f"{'true' if self.certifying else 'false'},"
            f"{'true' if self.stable else 'false'}"
        )

    def to_dict(self) -> dict:
        return {
            "tau_b_omega_m": self.tau_b_omega_m,
            "kappa_over_omega_m": self.kappa_over_omega_m,
            "en_rr": self.en_rr if np.isfinite(self.en_rr) else None,
            "en_cc": self.en_cc if np.isfinite(self.en_cc) else None,
            "certifying": self.certifying,
            "stable": self.stable,
        }


def point_params(base: OmParams, kappa_over_omega_m: float) -> OmParams:
    kappa = kappa_over_omega_m * base.mech_freq
    return replace(base, kappa_b=kappa, kappa_c=kappa)


def point_filters(base: OmParams, tau_b_omega_m: float) -> tuple[FilterSpec, FilterSpec]:
    omega_m = base.mech_freq
    tau_b = tau_b_omega_m / omega_m
    return (
        FilterSpec(tau=tau_b, omega_c=-omega_m),
        FilterSpec(tau=TAU_C_OVER_TAU_B * tau_b, omega_c=omega_m),
    )


def stationary_output_state(
    base: OmParams,
    tau_b_omega_m: float,
    kappa_over_omega_m: float,
    config: IntegrationConfig | None = None,
):
    params = point_params(base, kappa_over_omega_m)
    filter_b, filter_c = point_filters(params, tau_b_omega_m)
    model = build_linear_model(params)
    state, info = output_cm_with_info(model, filter_b, filter_c, config)
    return state, info


def closed_form_en(state: ThreeModeState) -> tuple[float, float]:
    """Swap log-negativities from the purity ratios (identical certifying sites)."""
    mu = purities(state)
    return (
        max(0.0, float(np.log(mu.mu_rb / mu.mu_b))),
        max(0.0, float(np.log(mu.mu_bc / mu.mu_b))),
    )


def evaluate_sweep_point(
    base: OmParams,
    tau_b_omega_m: float,
    kappa_over_omega_m: float,
    config: IntegrationConfig | None = None,
) -> SweepRow:
    """One grid point; failures degrade to a stable=false row."""
    try:
        state, _ = stationary_output_state(base, tau_b_omega_m, kappa_over_omega_m, config)
        en_rr, en_cc = closed_form_en(state)
        certifying = is_certifying(state).certifying
        return SweepRow(tau_b_omega_m, kappa_over_omega_m, en_rr, en_cc, certifying, True)
    except (UnstableModelError, IntegrationError, NonPhysicalError, NumericalError):
        return SweepRow(tau_b_omega_m, kappa_over_omega_m, float("nan"), float("nan"), False, False)


def _parse_sweep_csv(text: str) -> dict[tuple[str, str], str]:
    rows: dict[tuple[str, str], str] = {}
    lines = text.splitlines()
    if not lines or lines[0] != SWEEP_CSV_HEADER:
        return rows
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != 6:
            continue  # tolerate a truncated trailing line from an interrupted run
        rows[(parts[0], parts[1])] = line
    return rows


def run_sweep(
    spec: SweepSpec,
    out_path: str | None = None,
    config: IntegrationConfig | None = None,
    resume: bool = True,
) -> list[SweepRow]:
    """Evaluate the grid in lexicographic order (axis1 outer).

    Rows are flushed to out_path as they complete; a rerun against an
    existing partial file recomputes only the missing grid points and emits
    the identical final file.
    """
    existing: dict[tuple[str, str], str] = {}
    if resume and out_path and os.path.exists(out_path):
        with open(out_path) as fh:
            existing = _parse_sweep_csv(fh.read())

    rows: list[SweepRow] = []
    lines: list[str] = []
    for tau in spec.axis1_values():
        for kap in spec.axis2_values():
            key = (repr(float(tau)), repr(float(kap)))
            cached = existing.get(key)
            if cached is not None:
                lines.append(cached)
                rows.append(_row_from_csv(cached))
            else:
                row = evaluate_sweep_point(spec.base, float(tau), float(kap), config)
                rows.append(row)
                lines.append(row.csv_line())
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(SWEEP_CSV_HEADER + "\n")
            for line in lines:
                fh.write(line + "\n")
                fh.flush()
    return rows


def _row_from_csv(line: str) -> SweepRow:
    parts = line.split(",")
    return SweepRow(
        float(parts[0]), float(parts[1]), float(parts[2]), float(parts[3]),
        parts[4] == "true", parts[5] == "true",
    )


def sweep_rows_to_csv(rows: list[SweepRow]) -> str:
    return SWEEP_CSV_HEADER + "\n" + "\n".join(r.csv_line() for r in rows) + "\n"


def check_sweep_ordering(rows: list[SweepRow]) -> list[SweepRow]:
    """Post-pass: every certifying row must satisfy en_rr > en_cc > 0."""
    return [r for r in rows if r.certifying and not (r.en_rr > r.en_cc > 0.0)]


# ---------------------------------------------------------------------------
# single-point pipeline
# ---------------------------------------------------------------------------


def run_pipeline(
    params: OmParams,
    tau_b_omega_m: float = DEFAULT_TAU_B_OMEGA_M,
    seed: int = 0,
    n_rounds: int = 10,
    config: IntegrationConfig | None = None,
) -> dict:
    """Stationary state -> certification -> standardization -> swap -> protocol.

    Raises UnstableModelError / IntegrationError for points without a usable
    stationary state; the CLI maps those to exit code 2.
    """
    filter_b, filter_c = point_filters(params, tau_b_omega_m)
    model = build_linear_model(params)
    if not stability_check(model):
        raise UnstableModelError("drift matrix unstable at the requested parameters")
    state, info = output_cm_with_info(model, filter_b, filter_c, config)
    mu = purities(state)
    check = is_certifying(state)
    en_rr_cf, en_cc_cf = closed_form_en(state)

    aligned, _, residual = standardize_for_swap(state)
    swap_result = bell_swap(aligned, aligned)
    records, summary = run_protocol(aligned, aligned, n_rounds, seed)

    return {
        "stationary_cm": cm_to_dict(state.cm, labels=OUTPUT_MODE_LABELS),
        "purities": {"rb": mu.mu_rb, "bc": mu.mu_bc, "b": mu.mu_b, "c": mu.mu_c},
        "certifying": check.certifying,
        "margins": {"rb_bc": check.margin_rb_bc, "bc_b": check.margin_bc_b},
        "en_closed_form": {"rr": en_rr_cf, "cc": en_cc_cf},
        "standardization_residual": residual,
        "swap": swap_result_to_dict(swap_result),
        "protocol": {
            "n_rounds": n_rounds,
            "seed": seed,
            "certified": bool(summary.certified),
            "en_rr": float(summary.en_rr),
            "en_cc": float(summary.en_cc),
            "records_csv": protocol_records_to_csv(records),
        },
        "integration": {
            "n_evals": info.n_evals,
            "n_panels": info.n_panels,
            "est_error": info.est_error,
            "window": info.window,
            "backend": info.backend,
        },
        "filters": {
            "tau_b": filter_b.tau,
            "omega_b": filter_b.omega_c,
            "tau_c": filter_c.tau,
            "omega_c": filter_c.omega_c,
        },
    }
