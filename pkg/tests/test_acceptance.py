"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.
"""

import time
from contextlib import contextmanager
from dataclasses import replace

import numpy as np

from conftest import covariance_standard_errors, tmsv_x_vacuum, wigner_conditional_moments
from cvswap.gaussian import random_physical_cm, validate_physical
from cvswap.optomech import build_linear_model, reference_params, intracavity_steady_cm, stability_check
from cvswap.pipeline import (
    closed_form_en,
    default_sweep_spec,
    point_filters,
    point_params,
    run_pipeline,
    run_sweep,
    SweepAxis,
    SweepSpec,
)
from cvswap.spectrum import intracavity_spectral_cm, output_cm_with_info
from cvswap.swap import bell_swap, eta_closed_form
from cvswap.threemode import (
    ThreeModeState,
    is_certifying,
    random_certifying_state,
    random_standard_form_state,
)

MC_SEED = 8  # frozen: verified against the brute-force rejection oracle


@contextmanager
def criterion(number: int, label: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {number:2d} FAIL  {label}  "
              f"[{time.perf_counter() - start:.1f}s]", flush=True)
        raise
    print(f"\nACCEPTANCE {number:2d} PASS  {label}  "
          f"[{time.perf_counter() - start:.1f}s]", flush=True)


def test_criterion_1_eq5_equivalence():
    with criterion(1, "closed-form swap eigenvalues match the general update (1000 states, 1e-10)"):
        start = time.perf_counter()
        rng = np.random.default_rng(501)
        for _ in range(1000):
            state = random_standard_form_state(rng)
            result = bell_swap(state, state)
            eta_rr, eta_cc = eta_closed_form(state)
            assert abs(result.eta_rr - eta_rr) < 1e-10
            assert abs(result.eta_cc - eta_cc) < 1e-10
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"runtime {elapsed:.1f}s exceeds 60s"


def test_criterion_2_certifying_ordering():
    with criterion(2, "every certifying state swaps to en_rr > en_cc > 0 (100 states)"):
        start = time.perf_counter()
        rng = np.random.default_rng(502)
        for _ in range(100):
            state = random_certifying_state(rng)
            result = bell_swap(state, state)
            assert result.en_rr > result.en_cc > 0.0
        elapsed = time.perf_counter() - start
        assert elapsed < 120.0, f"runtime {elapsed:.1f}s exceeds 120s"


def test_criterion_3_monte_carlo_oracle():
    with criterion(3, "Wigner-sampling conditional covariance within 3 SE/entry (20 pairs)"):
        rng = np.random.default_rng(MC_SEED)
        pairs = []
        for _ in range(7):
            pairs.append((random_certifying_state(rng), random_certifying_state(rng)))
        for _ in range(7):
            pairs.append((random_standard_form_state(rng), random_standard_form_state(rng)))
        for _ in range(6):
            pairs.append((ThreeModeState(random_physical_cm(3, rng=rng)),
                          ThreeModeState(random_physical_cm(3, rng=rng))))

        # oracle self-check: the fast conditional sampler against brute-force
        # rejection on the first pair
        s1, s2 = pairs[0]
        cov_brute, _, n_brute = wigner_conditional_moments(
            s1, s2, n_accept=20_000, rng=np.random.default_rng(MC_SEED + 1), brute_force=True)
        cov_fast, _, n_fast = wigner_conditional_moments(
            s1, s2, n_accept=100_000, rng=np.random.default_rng(MC_SEED + 2))
        se_pair = np.sqrt(covariance_standard_errors(cov_brute, n_brute) ** 2
                          + covariance_standard_errors(cov_fast, n_fast) ** 2)
        assert np.all(np.abs(cov_brute - cov_fast) <= 4.0 * se_pair)

        for s1, s2 in pairs:
            result = bell_swap(s1, s2)
            cov, _, n = wigner_conditional_moments(s1, s2, n_accept=100_000, rng=rng)
            assert n >= 100_000
            se = covariance_standard_errors(cov, n)
            assert np.all(np.abs(cov - result.v_out.data) <= 3.0 * se)


def test_criterion_4_tmsv_swap_closed_form():
    with criterion(4, "TMSV x vacuum swap: en_rr = ln cosh 2r (1e-9), en_cc = 0 exactly"):
        for r in (0.1, 0.5, 1.0):
            result = bell_swap(tmsv_x_vacuum(r), tmsv_x_vacuum(r))
            assert abs(result.en_rr - np.log(np.cosh(2 * r))) < 1e-9
            assert result.en_cc == 0.0


def test_criterion_5_coupling_constant():
    with criterion(5, "reference parameters give G_0 within 10% of 1e3 rad/s"):
        from cvswap.optomech import coupling_constants

        g0b, g0c, _, _ = coupling_constants(reference_params())
        for g0 in (g0b, g0c):
            assert abs(g0 - 1e3) <= 0.10 * 1e3


def _random_stable_params(rng):
    base = reference_params(1.0)
    om = base.mech_freq
    while True:
        trial = replace(
            base,
            power_b=base.power_b * rng.uniform(0.2, 1.5),
            power_c=base.power_c * rng.uniform(0.5, 2.0),
            kappa_b=om * rng.uniform(0.3, 3.0),
            kappa_c=om * rng.uniform(0.3, 3.0),
            temperature=rng.uniform(0.02, 0.5),
            quality_factor=10 ** rng.uniform(5, 7),
            mass=base.mass * rng.uniform(0.5, 2.0),
            detuning_b=-om * rng.uniform(0.7, 1.3),
            detuning_c=om * rng.uniform(0.7, 1.3),
        )
        model = build_linear_model(trial)
        if stability_check(model):
            return model


def test_criterion_6_lyapunov_spectral_cross_validation():
    with criterion(6, "Lyapunov vs frequency-integrated intracavity CM, 1e-6 rel (10 sets)"):
        start = time.perf_counter()
        rng = np.random.default_rng(506)
        for _ in range(10):
            model = _random_stable_params(rng)
            lyap = intracavity_steady_cm(model)
            spec, _ = intracavity_spectral_cm(model)
            rel = np.linalg.norm(spec.data - lyap.data) / np.linalg.norm(lyap.data)
            assert rel < 1e-6
        elapsed = time.perf_counter() - start
        assert elapsed < 300.0, f"runtime {elapsed:.1f}s exceeds 5 min"


def test_criterion_7_end_to_end_physicality():
    with criterion(7, "filtered-output CM physical (min eig >= 1/2 - 1e-8) on 10x10 sub-grid"):
        base = reference_params()
        for tau_b in np.geomspace(1.0, 500.0, 10):
            for kappa in np.linspace(0.2, 3.0, 10):
                params = point_params(base, float(kappa))
                model = build_linear_model(params)
                if not stability_check(model):
                    continue
                fb, fc = point_filters(params, float(tau_b))
                state, _ = output_cm_with_info(model, fb, fc)
                rep = validate_physical(state.cm)
                assert rep.min_symplectic_eig >= 0.5 - 1e-8


def test_criterion_8_reference_sweep_structure(tmp_path):
    with criterion(8, "default 1200-point sweep: certifying region exists with the right ordering"):
        start = time.perf_counter()
        rows = run_sweep(default_sweep_spec(), out_path=str(tmp_path / "sweep.csv"))
        assert len(rows) == 1200
        certifying = [r for r in rows if r.certifying]
        assert certifying, "no certifying points on the default grid"
        for row in certifying:
            assert row.en_rr > row.en_cc > 0.0
        # a contiguous region, not scattered single points: flood-fill on the
        # grid with 4-adjacency
        spec = default_sweep_spec()
        t_vals = list(spec.axis1_values())
        k_vals = list(spec.axis2_values())
        cells = {(t_vals.index(r.tau_b_omega_m), k_vals.index(r.kappa_over_omega_m))
                 for r in certifying}
        seen = set()
        best = 0
        for cell in cells:
            if cell in seen:
                continue
            stack, comp = [cell], 0
            while stack:
                cur = stack.pop()
                if cur in seen or cur not in cells:
                    continue
                seen.add(cur)
                comp += 1
                i, j = cur
                stack.extend([(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)])
            best = max(best, comp)
        assert best >= 5, f"largest connected certifying component has {best} cells"
        finite = [r.en_rr for r in rows if r.stable and np.isfinite(r.en_rr)]
        assert max(finite) - min(finite) > 0.01
        elapsed = time.perf_counter() - start
        assert elapsed < 1800.0, f"runtime {elapsed:.1f}s exceeds 30 min"


def test_criterion_9_thermal_decoherence():
    with criterion(9, "heating 0.1 K -> 10 K strictly lowers the remote log-negativity"):
        vals = {}
        for temperature in (0.1, 10.0):
            params = replace(point_params(reference_params(), 1.0), temperature=temperature)
            model = build_linear_model(params)
            fb, fc = point_filters(params, 10.0)
            state, _ = output_cm_with_info(model, fb, fc)
            if temperature == 0.1:
                assert is_certifying(state).certifying, "fixed grid point must certify at 0.1 K"
            vals[temperature] = closed_form_en(state)[0]
        assert vals[10.0] < vals[0.1]


def test_criterion_10_determinism(tmp_path):
    with criterion(10, "identical seeds and inputs produce byte-identical artifacts"):
        spec = SweepSpec(
            axis1=SweepAxis("tau_b_omega_m", 5.0, 20.0, 3),
            axis2=SweepAxis("kappa_over_omega_m", 0.8, 1.2, 2),
            base=reference_params(),
        )
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_sweep(spec, out_path=str(a), resume=False)
        run_sweep(spec, out_path=str(b), resume=False)
        assert a.read_bytes() == b.read_bytes()

        import json

        rep1 = json.dumps(run_pipeline(reference_params(), seed=42, n_rounds=8), sort_keys=True)
        rep2 = json.dumps(run_pipeline(reference_params(), seed=42, n_rounds=8), sort_keys=True)
        assert rep1.encode() == rep2.encode()
