"""Shared fixtures and the Wigner-sampling oracle for the swap tests."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import truncnorm

from cvswap.gaussian import CovMatrix, tmsv, vacuum
from cvswap.threemode import ThreeModeState

# indices of (x_-, p_+) source quadratures in the stacked 12-vector
_B1X, _B1P, _B2X, _B2P = 2, 3, 8, 9
# conditional-state coordinates, ordered (R1, R2, C1, C2)
_KEEP = [0, 1, 6, 7, 4, 5, 10, 11]


def tmsv_x_vacuum(r: float) -> ThreeModeState:
    """TMSV on (R, B) with a decoupled vacuum certification mode."""
    m = np.zeros((6, 6))
    m[:4, :4] = tmsv(r).data
    m[4:6, 4:6] = vacuum(1).data
    return ThreeModeState(CovMatrix(m))


def _bell_selector() -> np.ndarray:
    g = np.zeros((2, 12))
    g[0, _B2X] = 1.0
    g[0, _B1X] = -1.0
    g[1, _B2P] = 1.0
    g[1, _B1P] = 1.0
    return g


def wigner_conditional_moments(
    s1: ThreeModeState,
    s2: ThreeModeState,
    target=(0.3, -0.2),
    half_width: float = 0.05,
    n_accept: int = 100_000,
    rng: np.random.Generator | None = None,
    brute_force: bool = False,
):
    """Conditional covariance/mean of (R1, R2, C1, C2) by sampling the Wigner
    function and keeping draws whose Bell record lands in a narrow bin.

    brute_force=True rejects raw 12-dimensional draws directly.  The default
    path draws the Bell pair exactly from its bin-truncated marginal and then
    the remaining standard-normal coordinates conditioned on that linear
    constraint (orthogonal projection of an isotropic Gaussian); this is
    sample-for-sample equivalent and never touches the covariance-update
    formulas under test.
    """
    rng = rng or np.random.default_rng(0)
    joint = np.zeros((12, 12))
    joint[:6, :6] = s1.cm.data
    joint[6:, 6:] = s2.cm.data
    chol = np.linalg.cholesky(joint)
    g = _bell_selector()
    a_mat = g @ chol  # Bell record as a function of the standard-normal seed
    lo = np.array(target) - half_width
    hi = np.array(target) + half_width

    if brute_force:
        accepted = []
        got = 0
        while got < n_accept:
            w = rng.standard_normal((2_000_000, 12))
            u = w @ chol.T
            ell_all = u @ g.T
            mask = np.all((ell_all > lo) & (ell_all < hi), axis=1)
            accepted.append(np.column_stack([u[mask][:, _KEEP], ell_all[mask]]))
            got += mask.sum()
        block = np.concatenate(accepted)[:n_accept]
        samples, ell = block[:, :8], block[:, 8:]
    else:
        s_mat = a_mat @ a_mat.T
        sig1 = np.sqrt(s_mat[0, 0])
        ell1 = truncnorm.rvs(lo[0] / sig1, hi[0] / sig1, scale=sig1,
                             size=n_accept, random_state=rng)
        mu_c = s_mat[1, 0] / s_mat[0, 0] * ell1
        sig_c = np.sqrt(s_mat[1, 1] - s_mat[1, 0] ** 2 / s_mat[0, 0])
        ell2 = truncnorm.rvs((lo[1] - mu_c) / sig_c, (hi[1] - mu_c) / sig_c,
                             loc=mu_c, scale=sig_c, size=n_accept, random_state=rng)
        ell = np.column_stack([ell1, ell2])
        pinv = a_mat.T @ np.linalg.inv(s_mat)
        proj = np.eye(12) - pinv @ a_mat
        g_free = rng.standard_normal((n_accept, 12))
        w = ell @ pinv.T + g_free @ proj.T
        samples = (w @ chol.T)[:, _KEEP]

    # regress the recorded record values out of the samples: conditioning on
    # the exact outcomes removes the O(h^2) bin-smearing bias from both the
    # covariance and the reported mean (empirical least squares, nothing from
    # the Gaussian-update formulas under test)
    du = samples - samples.mean(axis=0)
    dl = ell - ell.mean(axis=0)
    beta = np.linalg.solve(dl.T @ dl, dl.T @ du).T
    resid = du - dl @ beta.T
    n = len(samples)
    cov = resid.T @ resid / (n - 3)
    mean_at_target = samples.mean(axis=0) + beta @ (np.array(target) - ell.mean(axis=0))
    return cov, mean_at_target, n


def covariance_standard_errors(cov: np.ndarray, n: int) -> np.ndarray:
    """Large-sample standard error of each sample-covariance entry."""
    d = np.diag(cov)
    return np.sqrt((np.outer(d, d) + cov**2) / (n - 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
