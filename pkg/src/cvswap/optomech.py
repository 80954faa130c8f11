"""Linearized dynamics of a bichromatically driven optomechanical cavity.

One site consists of a mechanical resonator (frequency omega_m, damping
gamma_m = omega_m / Q_m) coupled to two independently driven cavity modes
b and c.  Strong driving is eliminated semiclassically; the quadrature
fluctuations u = (dq, dp, dx_b, dy_b, dx_c, dy_c) then obey the linear
Langevin equation du/dt = A u + n with white (or quantum-Brownian) noises.

All inputs are SI; quadratures are dimensionless with vacuum variance 1/2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .constants import C_LIGHT, HBAR, KB
from .errors import DomainError, SchemaError, UnstableModelError
from .gaussian import CovMatrix

STABILITY_MARGIN = 1e-9


@dataclass(frozen=True)
class OmParams:
    """Physical parameters of one optomechanical site (SI units)."""

    cavity_length: float  # m
    mech_freq: float  # rad/s
    quality_factor: float
    mass: float  # kg
    temperature: float  # K
    wavelength_b: float  # m
    power_b: float  # W
    kappa_b: float  # rad/s
    detuning_b: float  # rad/s (effective; signed)
    wavelength_c: float  # m
    power_c: float  # W
    kappa_c: float  # rad/s
    detuning_c: float  # rad/s (effective; signed)

    def __post_init__(self):
        positive = (
            "cavity_length", "mech_freq", "mass",
            "wavelength_b", "kappa_b", "wavelength_c", "kappa_c",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("power_b", "power_c", "temperature"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.quality_factor < 1:
            raise DomainError(f"quality_factor must be >= 1, got {self.quality_factor}")

    @property
    def gamma_m(self) -> float:
        return self.mech_freq / self.quality_factor

    def laser_freq(self, mode: str) -> float:
        wavelength = self.wavelength_b if mode == "b" else self.wavelength_c
        return 2.0 * np.pi * C_LIGHT / wavelength

    def to_dict(self) -> dict:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "OmParams":
        if not isinstance(d, dict):
            raise SchemaError("parameter document must be a JSON object")
        names = {f.name for f in fields(cls)}
        missing = names - set(d)
        if missing:
            raise SchemaError(f"missing required field(s): {', '.join(sorted(missing))}")
        unknown = set(d) - names
        if unknown:
            raise SchemaError(f"unknown field(s): {', '.join(sorted(unknown))}")
        vals = {}
        for name in names:
            try:
                vals[name] = float(d[name])
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"field '{name}' must be a number, got {d[name]!r}") from exc
        try:
            return cls(**vals)
        except DomainError as exc:
            raise SchemaError(str(exc)) from exc


def reference_params(kappa_over_omega_m: float = 1.0) -> OmParams:
    """Reference parameter set: 1 mm cavity, 10 MHz / 10 ng resonator at 0.1 K,
    blue-detuned Bell drive (4.5 mW) and red-detuned certification drive (5.0 mW)."""
    omega_m = 2.0 * np.pi * 1e7
    kappa = kappa_over_omega_m * omega_m
    return OmParams(
        cavity_length=1e-3,
        mech_freq=omega_m,
        quality_factor=1e6,
        mass=1e-11,
        temperature=0.1,
        wavelength_b=810e-9,
        power_b=4.5e-3,
        kappa_b=kappa,
        detuning_b=-omega_m,
        wavelength_c=810e-9,
        power_c=5.0e-3,
        kappa_c=kappa,
        detuning_c=omega_m,
    )


@dataclass(frozen=True)
class FilterSpec:
    """Causal exponential output filter h(t) = sqrt(2/tau) Theta(t) e^{-(1/tau + i Omega) t}."""

    tau: float  # s (inverse bandwidth)
    omega_c: float  # rad/s, central frequency relative to the drive

    def __post_init__(self):
        if self.tau <= 0:
            raise DomainError(f"filter tau must be positive, got {self.tau}")


def filter_transfer(spec: FilterSpec, omega) -> np.ndarray:
    """Fourier transform h(omega) = sqrt(2/tau) / (1/tau + i(Omega - omega)).

    Convention h(omega) = int h(t) e^{i omega t} dt; the peak modulus is
    sqrt(2 tau) at omega = Omega and int |h|^2 domega / 2pi = 1.
    """
    omega = np.asarray(omega, dtype=float)
    return np.sqrt(2.0 / spec.tau) / (1.0 / spec.tau + 1j * (spec.omega_c - omega))


@dataclass(frozen=True)
class SemiclassicalState:
    alpha_b: complex
    alpha_c: complex
    q_shift: float  # dimensionless equilibrium displacement


def thermal_occupancy(omega: float, temperature: float) -> float:
    """Planck occupation [exp(hbar omega / kB T) - 1]^-1 (0 at T = 0)."""
    if temperature <= 0:
        return 0.0
    x = HBAR * omega / (KB * temperature)
    if x > 700:
        return 0.0
    return float(1.0 / np.expm1(x))


def drive_rate(params: OmParams, mode: str) -> float:
    """|E_k| = sqrt(2 kappa_k P_k / (hbar omega_L,k))."""
    kappa = params.kappa_b if mode == "b" else params.kappa_c
    power = params.power_b if mode == "b" else params.power_c
    return np.sqrt(2.0 * kappa * power / (HBAR * params.laser_freq(mode)))


def bare_coupling(params: OmParams, mode: str) -> float:
    """Single-photon coupling G_0k = (omega_k / L) sqrt(hbar / (m omega_m))."""
    return (params.laser_freq(mode) / params.cavity_length) * np.sqrt(
        HBAR / (params.mass * params.mech_freq)
    )


def semiclassical_steady_state(params: OmParams) -> SemiclassicalState:
    """Intracavity amplitudes alpha_k = E_k / (kappa_k + i Delta_k) and the
    static mechanical displacement q_s = sum_k G_0k |alpha_k|^2 / omega_m.

    Closed form because the detunings supplied in OmParams are the effective
    (already shifted) ones.
    """
    alpha_b = drive_rate(params, "b") / (params.kappa_b + 1j * params.detuning_b)
    alpha_c = drive_rate(params, "c") / (params.kappa_c + 1j * params.detuning_c)
    q_shift = (
        bare_coupling(params, "b") * abs(alpha_b) ** 2
        + bare_coupling(params, "c") * abs(alpha_c) ** 2
    ) / params.mech_freq
    return SemiclassicalState(alpha_b, alpha_c, q_shift)


def coupling_constants(params: OmParams) -> tuple[float, float, float, float]:
    """(G_0b, G_0c, G_b, G_c): bare couplings and the field-enhanced
    G_k = sqrt(2) G_0k |alpha_k| (the amplitude phase is absorbed into the
    cavity quadrature definition)."""
    sc = semiclassical_steady_state(params)
    g0b = bare_coupling(params, "b")
    g0c = bare_coupling(params, "c")
    return g0b, g0c, np.sqrt(2.0) * g0b * abs(sc.alpha_b), np.sqrt(2.0) * g0c * abs(sc.alpha_c)


@dataclass(frozen=True)
class LinearModel:
    """Drift/diffusion matrices of the quadrature fluctuations plus scalars."""

    drift: np.ndarray  # 6x6
    diffusion: np.ndarray  # 6x6 diagonal
    g_b: float
    g_c: float
    alpha_b: complex
    alpha_c: complex
    n_bar: float
    params: OmParams

    def __post_init__(self):
        for name in ("drift", "diffusion"):
            m = np.array(getattr(self, name), dtype=float)
            m.flags.writeable = False
            object.__setattr__(self, name, m)


def build_linear_model(params: OmParams) -> LinearModel:
    """Assemble A and D for u = (dq, dp, dx_b, dy_b, dx_c, dy_c).

        A = [[0,      w_m,   0,    0,    0,    0],
             [-w_m,  -g_m,   G_b,  0,    G_c,  0],
             [0,      0,    -k_b,  D_b,  0,    0],
             [G_b,    0,    -D_b, -k_b,  0,    0],
             [0,      0,     0,    0,   -k_c,  D_c],
             [G_c,    0,     0,    0,   -D_c, -k_c]]

    The (2,2) entry is -gamma_m: a damped resonator needs the negative sign
    for stationarity (the opposite sign admits no steady state even at
    G = 0), and the momentum diffusion gamma_m (2 n_bar + 1) is the matching
    Markovian noise floor.
    """
    sc = semiclassical_steady_state(params)
    _, _, g_b, g_c = coupling_constants(params)
    wm, gm = params.mech_freq, params.gamma_m
    kb, kc = params.kappa_b, params.kappa_c
    db, dc = params.detuning_b, params.detuning_c
    a = np.array(
        [
            [0.0, wm, 0.0, 0.0, 0.0, 0.0],
            [-wm, -gm, g_b, 0.0, g_c, 0.0],
            [0.0, 0.0, -kb, db, 0.0, 0.0],
            [g_b, 0.0, -db, -kb, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -kc, dc],
            [g_c, 0.0, 0.0, 0.0, -dc, -kc],
        ]
    )
    n_bar = thermal_occupancy(wm, params.temperature)
    d = np.diag([0.0, gm * (2.0 * n_bar + 1.0), kb, kb, kc, kc])
    return LinearModel(
        drift=a,
        diffusion=d,
        g_b=g_b,
        g_c=g_c,
        alpha_b=sc.alpha_b,
        alpha_c=sc.alpha_c,
        n_bar=n_bar,
        params=params,
    )


def stability_check(model: LinearModel) -> bool:
    """True iff every drift eigenvalue has real part < -1e-9 omega_m."""
    eigs = np.linalg.eigvals(model.drift)
    return bool(np.all(eigs.real < -STABILITY_MARGIN * model.params.mech_freq))


def intracavity_steady_cm(model: LinearModel) -> CovMatrix:
    """Stationary second moments from the Lyapunov equation A V + V A^T = -D."""
    if not stability_check(model):
        raise UnstableModelError("drift matrix is not strictly stable; no stationary state")
    v = solve_continuous_lyapunov(model.drift, -model.diffusion)
    return CovMatrix(0.5 * (v + v.T))


def effective_detunings_from_bare(
    params: OmParams,
    bare_detuning_b: float,
    bare_detuning_c: float,
    relaxation: float = 0.5,
    tol: float = 1e-12,
    max_iter: int = 10000,
) -> tuple[float, float]:
    """Self-consistent effective detunings Delta_k = Delta0_k - G_0k q_s.

    Damped fixed-point iteration; q_s depends on the amplitudes which depend
    on the effective detunings.  Convergence is measured relative to omega_m.
    """
    g0b = bare_coupling(params, "b")
    g0c = bare_coupling(params, "c")
    db, dc = bare_detuning_b, bare_detuning_c
    for _ in range(max_iter):
        trial = replace(params, detuning_b=db, detuning_c=dc)
        q_s = semiclassical_steady_state(trial).q_shift
        new_db = (1 - relaxation) * db + relaxation * (bare_detuning_b - g0b * q_s)
        new_dc = (1 - relaxation) * dc + relaxation * (bare_detuning_c - g0c * q_s)
        delta = max(abs(new_db - db), abs(new_dc - dc))
        db, dc = new_db, new_dc
        if delta < tol * params.mech_freq:
            return db, dc
    raise UnstableModelError("effective-detuning iteration did not converge")


# ---------------------------------------------------------------------------
# parameter file I/O
# ---------------------------------------------------------------------------


def params_to_json(params: OmParams, indent: int | None = 2) -> str:
    return json.dumps(params.to_dict(), indent=indent)


def params_from_json(text: str) -> OmParams:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return OmParams.from_dict(d)
