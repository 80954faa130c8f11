import importlib.util

import numpy as np
import pytest

from cvswap import _kernels
from cvswap._kernels import reference
from cvswap.optomech import build_linear_model, reference_params
from cvswap.spectrum import _EigSystem

HAVE_COMPILED = importlib.util.find_spec("cvswap._kernels._spectrum") is not None


def _kernel_args(n=2000, seed=0, kappa_over=0.9):
    rng = np.random.default_rng(seed)
    model = build_linear_model(reference_params(kappa_over))
    sys_ = _EigSystem(model)
    omega_m = model.params.mech_freq
    omegas = np.sort(rng.uniform(-8 * omega_m, 8 * omega_m, n))
    s_xi = np.full(n, model.params.gamma_m * (2 * model.n_bar + 1))
    return model, (
        omegas, sys_.lam, sys_.p_mat, sys_.q_mat, sys_.refl_b, sys_.refl_c,
        12.0 / omega_m, -omega_m, 2.4 / omega_m, omega_m, s_xi,
    )


def test_backend_identifies_itself():
    assert _kernels.backend_name() in ("compiled", "python")


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel not built")
@pytest.mark.parametrize("mode", [0, 1])
def test_compiled_matches_reference(mode):
    from cvswap._kernels import _spectrum

    _, args = _kernel_args()
    fast = _spectrum.spectrum_batch(*args, mode)
    slow = reference.spectrum_batch(*args, mode)
    scale = np.abs(slow).max()
    assert np.abs(fast - slow).max() < 1e-12 * scale


def test_direct_solver_matches_eigenbasis():
    model, args = _kernel_args(n=500)
    sys_ = _EigSystem(model)
    via_eig = reference.spectrum_batch(*args, 1)
    via_solve = reference.spectrum_batch_direct(
        args[0], sys_.a_mat, sys_.n_mat, sys_.refl_b, sys_.refl_c,
        *args[6:10], args[10], 1,
    )
    assert np.abs(via_eig - via_solve).max() < 1e-10 * np.abs(via_eig).max()


def test_symmetry_of_integrand():
    # J(-w) = J(w) transposed for the symmetrized density
    _, args = _kernel_args(n=300)
    omegas = args[0]
    plus = reference.spectrum_batch(*args, 1)
    minus = reference.spectrum_batch(-omegas, *args[1:], 1)
    assert np.abs(plus - minus.transpose(0, 2, 1)).max() < 1e-12 * np.abs(plus).max()


def test_full_density_hermitian():
    _, args = _kernel_args(n=200)
    s_odd = np.zeros_like(args[0])
    dens = reference.spectrum_batch_full(*args[:11], s_odd, 1)
    assert np.abs(dens - dens.conj().transpose(0, 2, 1)).max() < 1e-12 * np.abs(dens).max()
