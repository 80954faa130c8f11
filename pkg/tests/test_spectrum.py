import numpy as np
import pytest
from dataclasses import replace

from cvswap.errors import UnstableModelError
from cvswap.gaussian import symplectic_form, validate_physical
from cvswap.optomech import (
    build_linear_model,
    reference_params,
    intracavity_steady_cm,
)
from cvswap.pipeline import closed_form_en, point_filters, point_params
from cvswap.spectrum import (
    IntegrationConfig,
    commutator_matrix,
    intracavity_spectral_cm,
    output_cm,
    output_cm_with_info,
)
from cvswap.threemode import is_certifying

OMEGA_M = 2 * np.pi * 1e7
CERT_POINT = (10.0, 1.0)  # (tau_b omega_m, kappa / omega_m): certifying


def _model_and_filters(tau_b_omega_m=10.0, kappa_over=1.0, **overrides):
    params = point_params(reference_params(), kappa_over)
    if overrides:
        params = replace(params, **overrides)
    fb, fc = point_filters(params, tau_b_omega_m)
    return build_linear_model(params), fb, fc


class TestOutputCm:
    def test_vacuum_inputs_give_vacuum_outputs(self):
        # no drive, zero temperature: filtering reflected vacuum yields vacuum
        model, fb, fc = _model_and_filters(power_b=0.0, power_c=0.0, temperature=0.0)
        state = output_cm(model, fb, fc)
        assert np.abs(state.cm.data - 0.5 * np.eye(6)).max() < 1e-9

    def test_mech_block_matches_lyapunov(self):
        # the mechanics is stationary either way; cross-validates both paths
        model, fb, fc = _model_and_filters(*CERT_POINT)
        state = output_cm(model, fb, fc)
        lyap = intracavity_steady_cm(model)
        assert np.abs(state.cm.data[:2, :2] - lyap.data[:2, :2]).max() < 1e-6

    def test_output_physical_at_reference_points(self):
        for tau_b, kappa in ((2.0, 0.5), (10.0, 1.0), (50.0, 2.0), (300.0, 3.0)):
            model, fb, fc = _model_and_filters(tau_b, kappa)
            state = output_cm(model, fb, fc)
            rep = validate_physical(state.cm)
            assert rep.min_symplectic_eig >= 0.5 - 1e-8

    def test_certifying_point_matches_expectations(self):
        model, fb, fc = _model_and_filters(*CERT_POINT)
        state = output_cm(model, fb, fc)
        assert is_certifying(state).certifying
        en_rr, en_cc = closed_form_en(state)
        assert en_rr > en_cc > 0

    def test_unstable_model_raises(self):
        params = replace(point_params(reference_params(), 1.0), power_c=1e-5, power_b=50e-3)
        fb, fc = point_filters(params, 10.0)
        with pytest.raises(UnstableModelError):
            output_cm(build_linear_model(params), fb, fc)

    def test_integration_deterministic(self):
        model, fb, fc = _model_and_filters(*CERT_POINT)
        a = output_cm(model, fb, fc)
        b = output_cm(model, fb, fc)
        assert np.array_equal(a.cm.data, b.cm.data)

    def test_info_reports(self):
        model, fb, fc = _model_and_filters(*CERT_POINT)
        state, info = output_cm_with_info(model, fb, fc)
        assert info.n_evals > 0
        assert info.est_error < 1e-8
        assert info.window >= 10 * OMEGA_M
        assert info.backend in ("compiled", "python")


class TestLyapunovSpectralEquivalence:
    def test_reference_point(self):
        model, _, _ = _model_and_filters()
        lyap = intracavity_steady_cm(model)
        spec, _ = intracavity_spectral_cm(model)
        rel = np.linalg.norm(spec.data - lyap.data) / np.linalg.norm(lyap.data)
        assert rel < 1e-6

    def test_thermal_decoupled_point(self):
        model, _, _ = _model_and_filters(power_b=0.0, power_c=0.0, temperature=0.5)
        lyap = intracavity_steady_cm(model)
        spec, _ = intracavity_spectral_cm(model)
        assert np.allclose(spec.data, lyap.data, atol=1e-6 * np.abs(lyap.data).max())


class TestCommutators:
    def test_filtered_outputs_are_bona_fide_modes(self):
        model, fb, fc = _model_and_filters(*CERT_POINT)
        im = commutator_matrix(model, fb, fc)
        target = 0.5 * symplectic_form(3)
        assert np.abs(im[2:, 2:] - target[2:, 2:]).max() < 1e-6
        # mechanics commutes with the already-emitted filtered outputs
        assert np.abs(im[:2, 2:]).max() < 1e-6


class TestThermalModels:
    def test_qbm_agrees_with_markovian_at_high_q(self):
        model, fb, fc = _model_and_filters(*CERT_POINT)
        st_m = output_cm(model, fb, fc, IntegrationConfig(thermal_model="markovian"))
        st_q = output_cm(model, fb, fc, IntegrationConfig(thermal_model="qbm"))
        scale = np.abs(st_m.cm.data).max()
        assert np.abs(st_q.cm.data - st_m.cm.data).max() < 0.01 * scale

    def test_qbm_output_physical(self):
        model, fb, fc = _model_and_filters(*CERT_POINT)
        st_q = output_cm(model, fb, fc, IntegrationConfig(thermal_model="qbm"))
        assert validate_physical(st_q.cm).is_physical

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            IntegrationConfig(thermal_model="exact")


class TestThermalDecoherence:
    def test_remote_entanglement_decreases_with_temperature(self):
        vals = {}
        for temp in (0.1, 1.0, 10.0):
            model, fb, fc = _model_and_filters(*CERT_POINT, temperature=temp)
            state = output_cm(model, fb, fc)
            vals[temp] = closed_form_en(state)[0]
        assert vals[0.1] > vals[1.0] > vals[10.0]
        # decays towards zero: an order of magnitude hotter loses most of it
        assert vals[10.0] < 0.5 * vals[0.1]


class TestFilterNormalizationInUse:
    def test_pipeline_filters_normalized(self):
        # every FilterSpec the sweep builds: int |h|^2 domega / 2pi = 1
        from scipy.integrate import quad

        from cvswap.optomech import filter_transfer

        params = reference_params()
        for tau_b in (1.0, 10.0, 500.0):
            for spec in point_filters(params, tau_b):
                def density(u, spec=spec):
                    return np.abs(filter_transfer(spec, spec.omega_c + u / spec.tau)) ** 2 / (
                        2 * np.pi * spec.tau
                    )

                total = (
                    quad(density, -np.inf, -50, epsabs=1e-9)[0]
                    + quad(density, -50, 50, points=[0.0], epsabs=1e-10, limit=200)[0]
                    + quad(density, 50, np.inf, epsabs=1e-9)[0]
                )
                assert total == pytest.approx(1.0, abs=1e-6)


class TestIntegrationFailure:
    def test_panel_budget_exhaustion_raises(self):
        from cvswap.errors import IntegrationError

        model, fb, fc = _model_and_filters(*CERT_POINT)
        with pytest.raises(IntegrationError, match="panels"):
            output_cm(model, fb, fc, IntegrationConfig(max_panels=8))
