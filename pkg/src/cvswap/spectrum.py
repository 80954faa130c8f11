"""Stationary covariance of the mechanical mode and two filtered cavity outputs.

The quadrature fluctuations obey du/dt = A u + n with white/quantum noises,
so every output quadrature is a frequency-local linear map K(w) on the noise
vector and the stationary CM is the noise-spectrum integral

    V = int dw/2pi  Re[ K(w) diag(s(w)) K(w)^dag ],

evaluated here by adaptive Gauss-Legendre panels on [0, W] (the integrand of
the symmetrized part satisfies J(-w) = J(w)*) plus an exact compactified
tail, w = W/t on t in (0, 1].  Panels are pre-split at the known resonances
(drift eigenvalues, filter centers): the integrand is a sum of Lorentzians
up to seven decades narrower than the window, which blind subdivision would
miss.  The same machinery integrates the unsymmetrized spectrum over the
full axis to audit the commutators of the filtered output modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .constants import HBAR, KB
from .errors import IntegrationError, NonPhysicalError, UnstableModelError
from .gaussian import CovMatrix, symplectic_form, validate_physical
from .optomech import FilterSpec, LinearModel, stability_check
from .threemode import ThreeModeState

OUTPUT_MODE_LABELS = ["mech", "out_b", "out_c"]


@dataclass(frozen=True)
class IntegrationConfig:
    """Tolerances for the frequency-domain construction.

    abs_tol is per CM entry on the final integral; 1e-9 keeps the symplectic
    eigenvalues of the result good to ~1e-8 end to end.  thermal_model
    selects the mechanical noise floor: "markovian" (flat, gamma (2 nbar+1))
    or "qbm" (quantum Brownian w coth(hbar w / 2 kB T) spectrum with a Drude
    ultraviolet rolloff at qbm_cutoff_factor times the window edge).
    """

    abs_tol: float = 1e-9
    max_panels: int = 20000
    gl_order: int = 15
    thermal_model: str = "markovian"
    qbm_cutoff_factor: float = 20.0

    def __post_init__(self):
        if self.thermal_model not in ("markovian", "qbm"):
            raise ValueError(f"unknown thermal_model {self.thermal_model!r}")


@dataclass
class SpectralInfo:
    n_evals: int = 0
    n_panels: int = 0
    est_error: float = 0.0
    tail_value: float = 0.0
    window: float = 0.0
    backend: str = field(default_factory=_kernels.backend_name)


# tail substitution w = W/t: the left edge t = 0 compactifies w -> infinity
# (Gauss nodes are interior, so the endpoint is never evaluated)
_TAIL_BREAKS = np.array([0.0, 1e-4, 0.01, 0.1, 0.5, 1.0])

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(order: int):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


class _EigSystem:
    """Eigenbasis form of the resolvent plus the noise input map."""

    def __init__(self, model: LinearModel):
        a = model.drift
        self.a_mat = a
        lam, p = np.linalg.eig(a)
        self.lam = lam.astype(complex)
        self.p_mat = p.astype(complex)
        n_mat = np.zeros((6, 5))
        n_mat[1, 0] = 1.0
        n_mat[2, 1] = n_mat[3, 2] = np.sqrt(2.0 * model.params.kappa_b)
        n_mat[4, 3] = n_mat[5, 4] = np.sqrt(2.0 * model.params.kappa_c)
        self.n_mat = n_mat
        self.cond = float(np.linalg.cond(p))
        self.q_mat = np.linalg.solve(self.p_mat, n_mat.astype(complex))
        self.refl_b = np.sqrt(2.0 * model.params.kappa_b)
        self.refl_c = np.sqrt(2.0 * model.params.kappa_c)


def _sxi_functions(model: LinearModel, config: IntegrationConfig, window: float):
    """(symmetric, odd) mechanical noise spectral densities as callables."""
    gamma = model.params.gamma_m
    omega_m = model.params.mech_freq
    temp = model.params.temperature
    flat = gamma * (2.0 * model.n_bar + 1.0)

    if config.thermal_model == "markovian":
        def s_sym(omega):
            return np.full(np.shape(omega), flat)
    else:
        cutoff = config.qbm_cutoff_factor * window

        def s_sym(omega):
            omega = np.asarray(omega, dtype=float)
            rolloff = cutoff**2 / (omega**2 + cutoff**2)
            if temp <= 0:
                return gamma * np.abs(omega) / omega_m * rolloff
            x = HBAR * omega / (2.0 * KB * temp)
            # w coth(x) with the w -> 0 limit 2 kB T / hbar taken smoothly
            small = np.abs(x) < 1e-6
            coth_term = np.where(small, 2.0 * KB * temp / HBAR * (1.0 + x * x / 3.0),
                                 omega / np.tanh(np.where(small, 1.0, x)))
            return gamma / omega_m * coth_term * rolloff

    def s_odd(omega):
        return gamma * np.asarray(omega, dtype=float) / omega_m

    return s_sym, s_odd


def _features(model: LinearModel, filters) -> list[tuple[float, float]]:
    """(center, width) of every Lorentzian feature on the positive axis."""
    eigs = np.linalg.eigvals(model.drift)
    feats = [(abs(ev.imag), max(abs(ev.real), 1e-9 * model.params.mech_freq)) for ev in eigs]
    for spec in filters:
        feats.append((abs(spec.omega_c), 1.0 / spec.tau))
    return feats


def _window(model: LinearModel, filters) -> float:
    params = model.params
    w = max(10.0 * params.mech_freq, 10.0 * max(params.kappa_b, params.kappa_c))
    if filters:
        w = max(w, 20.0 / min(spec.tau for spec in filters))
    for center, width in _features(model, filters):
        w = max(w, 3.0 * (center + 10.0 * width))
    return w


def _breakpoints(features, lo: float, hi: float) -> np.ndarray:
    pts = {lo, hi}
    for center, width in features:
        for sign in (1.0, -1.0):
            c = sign * center
            if not (lo <= c <= hi) and not (lo <= c + width <= hi) and not (lo <= c - width <= hi):
                continue
            ladder = [0.0] + [width * 4.0**k for k in range(0, 9)]
            for step in ladder:
                for s2 in (1.0, -1.0):
                    x = c + s2 * step
                    if lo < x < hi:
                        pts.add(x)
    arr = np.array(sorted(pts))
    # drop near-duplicates
    keep = np.concatenate([[True], np.diff(arr) > 1e-12 * (hi - lo)])
    return arr[keep]


def _adaptive_panels(evaluate, breakpoints, tol_total, max_panels, order, info: SpectralInfo):
    """Adaptive bisection with whole-vs-halves error control.

    evaluate(omegas) -> (n, 6, 6) stacked integrand samples; panels are
    processed in deterministic batches and summed in left-edge order, so the
    result is bit-reproducible for identical inputs.
    """
    xs, ws = _gl_nodes(order)
    span = breakpoints[-1] - breakpoints[0]
    pending = [(breakpoints[i], breakpoints[i + 1]) for i in range(len(breakpoints) - 1)]
    accepted = []
    n_panels = len(pending)

    def _panel_nodes(a, b):
        mid = 0.5 * (a + b)
        whole = 0.5 * (b - a) * xs + 0.5 * (a + b)
        left = 0.5 * (mid - a) * xs + 0.5 * (a + mid)
        right = 0.5 * (b - mid) * xs + 0.5 * (mid + b)
        return np.concatenate([whole, left, right])

    while pending:
        nodes = np.concatenate([_panel_nodes(a, b) for a, b in pending])
        vals = evaluate(nodes)
        info.n_evals += len(nodes)
        vals = vals.reshape(len(pending), 3, len(xs), *vals.shape[1:])
        next_pending = []
        for idx, (a, b) in enumerate(pending):
            half = 0.5 * (b - a)
            i_whole = half * np.tensordot(ws, vals[idx, 0], axes=(0, 0))
            i_left = 0.5 * half * np.tensordot(ws, vals[idx, 1], axes=(0, 0))
            i_right = 0.5 * half * np.tensordot(ws, vals[idx, 2], axes=(0, 0))
            refined = i_left + i_right
            err = float(np.abs(i_whole - refined).max())
            budget = tol_total * max((b - a) / span, 1e-6)
            if err <= budget or err <= 1e-4 * tol_total:
                accepted.append((a, refined, err))
            else:
                mid = 0.5 * (a + b)
                next_pending.extend([(a, mid), (mid, b)])
                n_panels += 1
        if n_panels > max_panels:
            worst = max((p[1] - p[0] for p in next_pending), default=0.0)
            raise IntegrationError(
                f"adaptive quadrature exceeded {max_panels} panels "
                f"({len(next_pending)} unresolved, widest {worst:.3g})"
            )
        pending = next_pending

    accepted.sort(key=lambda item: item[0])
    total = sum(item[1] for item in accepted)
    info.n_panels += len(accepted)
    info.est_error += sum(item[2] for item in accepted)
    return total


def _integrate_symmetric(model, filters, mode, config) -> tuple[np.ndarray, SpectralInfo]:
    """(1/pi) int_0^W Re J + exact compactified tail, J the symmetric integrand."""
    if not stability_check(model):
        raise UnstableModelError("drift matrix is not strictly stable; no stationary spectrum")
    info = SpectralInfo()
    window = _window(model, filters)
    info.window = window
    sys_ = _EigSystem(model)
    s_sym, _ = _sxi_functions(model, config, window)

    if filters:
        tau_b, om_b = filters[0].tau, filters[0].omega_c
        tau_c, om_c = filters[1].tau, filters[1].omega_c
    else:
        tau_b = tau_c = 1.0
        om_b = om_c = 0.0

    use_direct = sys_.cond > 1e10

    def evaluate(omegas):
        if use_direct:
            return _kernels.spectrum_batch_direct(
                omegas, sys_.a_mat, sys_.n_mat, sys_.refl_b, sys_.refl_c,
                tau_b, om_b, tau_c, om_c, s_sym(omegas), mode)
        return _kernels.spectrum_batch(
            omegas, sys_.lam, sys_.p_mat, sys_.q_mat, sys_.refl_b, sys_.refl_c,
            tau_b, om_b, tau_c, om_c, s_sym(omegas), mode)

    def evaluate_tail(ts):
        omegas = window / ts
        return evaluate(omegas) * (window / ts**2)[:, None, None]

    breaks = _breakpoints(_features(model, filters), 0.0, window)
    main = _adaptive_panels(evaluate, breaks, 0.5 * config.abs_tol,
                            config.max_panels, config.gl_order, info)
    tail = _adaptive_panels(evaluate_tail, _TAIL_BREAKS, 0.5 * config.abs_tol,
                            config.max_panels, config.gl_order, info)
    info.tail_value = float(np.abs(tail).max()) / np.pi
    result = (main + tail) / np.pi
    return 0.5 * (result + result.T), info


def intracavity_spectral_cm(model: LinearModel, config: IntegrationConfig | None = None):
    """Intracavity stationary CM via the resolvent integral.

    Independent frequency-domain counterpart of the Lyapunov solution; the
    two must agree to the integration tolerance for any stable model.
    """
    config = config or IntegrationConfig()
    v, info = _integrate_symmetric(model, (), 0, config)
    return CovMatrix(v), info


def output_cm_with_info(
    model: LinearModel,
    filter_b: FilterSpec,
    filter_c: FilterSpec,
    config: IntegrationConfig | None = None,
) -> tuple[ThreeModeState, SpectralInfo]:
    """Stationary CM of (mechanics, filtered output b, filtered output c)."""
    config = config or IntegrationConfig()
    v, info = _integrate_symmetric(model, (filter_b, filter_c), 1, config)
    report = validate_physical(CovMatrix(v))
    if report.min_symplectic_eig < 0.5 - 1e-6:
        raise NonPhysicalError(
            "filtered-output CM badly unphysical "
            f"(min symplectic eigenvalue {report.min_symplectic_eig:.8g}); "
            "integration diagnostics: "
            f"panels={info.n_panels} est_error={info.est_error:.3g}"
        )
    return ThreeModeState(CovMatrix(v)), info


def output_cm(model, filter_b, filter_c, config=None) -> ThreeModeState:
    state, _ = output_cm_with_info(model, filter_b, filter_c, config)
    return state


def commutator_matrix(
    model: LinearModel,
    filter_b: FilterSpec,
    filter_c: FilterSpec,
    config: IntegrationConfig | None = None,
) -> np.ndarray:
    """Im of the full-range unsymmetrized integral; Omega/2 for bona fide modes.

    Uses the exact noise commutators (optical (i/2) Omega blocks and the odd
    mechanical part gamma w / w_m).  Only the frequency-antisymmetric
    combination Im J(w) + Im J(-w) is integrated: the symmetric part drops
    out of Im of the full-range integral, and with it the logarithmically
    divergent zero-point momentum spectrum of the exact Brownian noise.
    The optical 4x4 corner must come out as Omega/2 to quadrature accuracy;
    the mechanical block carries the usual O(gamma_m / w_m) quantum-Langevin
    defect.
    """
    config = config or IntegrationConfig()
    if not stability_check(model):
        raise UnstableModelError("drift matrix is not strictly stable")
    info = SpectralInfo()
    window = _window(model, (filter_b, filter_c))
    info.window = window
    sys_ = _EigSystem(model)
    s_sym, s_odd = _sxi_functions(model, config, window)

    def full_density(omegas):
        return _kernels.spectrum_batch_full(
            omegas, sys_.lam, sys_.p_mat, sys_.q_mat, sys_.refl_b, sys_.refl_c,
            filter_b.tau, filter_b.omega_c, filter_c.tau, filter_c.omega_c,
            s_sym(omegas), s_odd(omegas), 1)

    def evaluate(omegas):
        return np.imag(full_density(omegas)) + np.imag(full_density(-omegas))

    def evaluate_tail(ts):
        omegas = window / ts
        return evaluate(omegas) * (window / ts**2)[:, None, None]

    breaks = _breakpoints(_features(model, (filter_b, filter_c)), 0.0, window)
    main = _adaptive_panels(evaluate, breaks, 0.5 * config.abs_tol,
                            config.max_panels, config.gl_order, info)
    tail = _adaptive_panels(evaluate_tail, _TAIL_BREAKS, 0.5 * config.abs_tol,
                            config.max_panels, config.gl_order, info)
    return (main + tail) / (2.0 * np.pi)


def commutator_defect(model, filter_b, filter_c, config=None) -> float:
    """Max deviation of the filtered-output symplectic form from Omega/2."""
    im = commutator_matrix(model, filter_b, filter_c, config)
    target = 0.5 * symplectic_form(3)
    return float(np.abs(im[2:, 2:] - target[2:, 2:]).max())
