"""Three-mode states with remote/Bell/certification roles.

Mode order is fixed as R (remote), B (Bell), C (certification).  The block
layout of the 6x6 covariance matrix is

    [[R,   D,  F],
     [D^T, B,  E],
     [F^T, E^T, C]]

with 2x2 blocks.  A state is *certifying* when the subsystem purities obey
mu_RB > mu_BC > mu_B strictly; that ordering is what later guarantees that
certification-mode entanglement after the swap witnesses stronger remote
entanglement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ShapeError, StandardFormError
from .gaussian import CovMatrix, purity, rotation, validate_physical

CERTIFYING_MARGIN_TOL = 1e-12
STANDARD_FORM_TOL = 1e-10


@dataclass(frozen=True)
class ThreeModeState:
    """Covariance matrix (mode order R, B, C) plus a mean vector."""

    cm: CovMatrix
    mean: np.ndarray = None

    def __post_init__(self):
        if self.cm.n_modes != 3:
            raise ShapeError(f"ThreeModeState needs 3 modes, got {self.cm.n_modes}")
        mean = np.zeros(6) if self.mean is None else np.array(self.mean, dtype=float)
        if mean.shape != (6,):
            raise ShapeError(f"mean vector must have 6 entries, got shape {mean.shape}")
        mean.flags.writeable = False
        object.__setattr__(self, "mean", mean)

    # block accessors, named after the roles they couple
    @property
    def r_block(self) -> np.ndarray:
        return self.cm.block(0, 0)

    @property
    def b_block(self) -> np.ndarray:
        return self.cm.block(1, 1)

    @property
    def c_block(self) -> np.ndarray:
        return self.cm.block(2, 2)

    @property
    def d_block(self) -> np.ndarray:
        """R-B cross block."""
        return self.cm.block(0, 1)

    @property
    def e_block(self) -> np.ndarray:
        """B-C cross block."""
        return self.cm.block(1, 2)

    @property
    def f_block(self) -> np.ndarray:
        """R-C cross block."""
        return self.cm.block(0, 2)


@dataclass(frozen=True)
class PurityTriple:
    mu_rb: float
    mu_bc: float
    mu_b: float
    mu_c: float

    def __post_init__(self):
        for name in ("mu_rb", "mu_bc", "mu_b", "mu_c"):
            val = getattr(self, name)
            if not 0.0 < val <= 1.0 + 1e-9:
                raise NumericalError(f"purity {name}={val:.6g} outside (0, 1]")


def purities(state: ThreeModeState) -> PurityTriple:
    """Subsystem purities mu_RB, mu_BC, mu_B (and mu_C) from determinants."""
    cm = state.cm
    return PurityTriple(
        mu_rb=purity(cm.reduced([0, 1])),
        mu_bc=purity(cm.reduced([1, 2])),
        mu_b=purity(cm.reduced([1])),
        mu_c=purity(cm.reduced([2])),
    )


@dataclass(frozen=True)
class CertificationCheck:
    certifying: bool
    margin_rb_bc: float
    margin_bc_b: float


def is_certifying(state: ThreeModeState, tol: float = CERTIFYING_MARGIN_TOL) -> CertificationCheck:
    """Strict purity ordering mu_RB > mu_BC > mu_B (margins above tol)."""
    mu = purities(state)
    m1 = mu.mu_rb - mu.mu_bc
    m2 = mu.mu_bc - mu.mu_b
    return CertificationCheck(bool(m1 > tol and m2 > tol), float(m1), float(m2))


# ---------------------------------------------------------------------------
# standard form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StandardFormCM:
    """Scalar parameters of the locally-reduced three-mode form.

    Diagonal blocks are isotropic (r I, b I, c I), the R-B and B-C cross
    blocks are diagonal (diag[d, d'] and diag[e, e']) and the R-C block is a
    general 2x2 [[f, f'], [f'', f''']].
    """

    r: float
    b: float
    c: float
    d: float
    d_prime: float
    e: float
    e_prime: float
    f: float = 0.0
    f_prime: float = 0.0
    f_dprime: float = 0.0
    f_tprime: float = 0.0

    def matrix(self) -> np.ndarray:
        m = np.zeros((6, 6))
        m[0, 0] = m[1, 1] = self.r
        m[2, 2] = m[3, 3] = self.b
        m[4, 4] = m[5, 5] = self.c
        m[0, 2] = m[2, 0] = self.d
        m[1, 3] = m[3, 1] = self.d_prime
        m[2, 4] = m[4, 2] = self.e
        m[3, 5] = m[5, 3] = self.e_prime
        fblk = np.array([[self.f, self.f_prime], [self.f_dprime, self.f_tprime]])
        m[0:2, 4:6] = fblk
        m[4:6, 0:2] = fblk.T
        return m

    def to_state(self) -> ThreeModeState:
        return ThreeModeState(CovMatrix(self.matrix()))


def is_standard_form(v, tol: float = STANDARD_FORM_TOL) -> bool:
    """Layout check: isotropic diagonal blocks, diagonal D and E blocks."""
    m = v.data if isinstance(v, CovMatrix) else np.asarray(v, dtype=float)
    if m.shape != (6, 6):
        return False
    scale = max(np.abs(m).max(), 1.0)
    off = 0.0
    for k in range(3):
        blk = m[2 * k : 2 * k + 2, 2 * k : 2 * k + 2]
        off = max(off, abs(blk[0, 1]), abs(blk[1, 0]), abs(blk[0, 0] - blk[1, 1]))
    for (i, j) in ((0, 1), (1, 2)):
        blk = m[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
        off = max(off, abs(blk[0, 1]), abs(blk[1, 0]))
    return off <= tol * scale


def standard_form_params(state: ThreeModeState, tol: float = STANDARD_FORM_TOL) -> StandardFormCM:
    """Read the scalar parameters off a CM already in standard form."""
    m = state.cm.data
    if not is_standard_form(m, tol):
        raise StandardFormError("covariance matrix is not in standard form")
    return StandardFormCM(
        r=m[0, 0], b=m[2, 2], c=m[4, 4],
        d=m[0, 2], d_prime=m[1, 3],
        e=m[2, 4], e_prime=m[3, 5],
        f=m[0, 4], f_prime=m[0, 5], f_dprime=m[1, 4], f_tprime=m[1, 5],
    )


def _isotropize(block: np.ndarray) -> np.ndarray:
    """Symmetric symplectic S with S block S^T = sqrt(det block) I."""
    det = np.linalg.det(block)
    if det <= 0:
        raise StandardFormError(
            f"standard form unavailable: diagonal block has non-positive determinant {det:.3g}"
        )
    evals, evecs = np.linalg.eigh(block)
    if evals.min() <= 0:
        raise StandardFormError("standard form unavailable: diagonal block not positive definite")
    inv_sqrt = evecs @ np.diag(evals**-0.5) @ evecs.T
    return det**0.25 * inv_sqrt


def _signed_svd_rotations(blk: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rotations U, W in SO(2) and signed Sigma with blk = U Sigma W^T.

    Sigma = diag(s1, +/- s2), s1 >= |s2|, sign(s2 term) = sign(det blk).
    Deterministic: U's angle is canonicalized to (-pi/2, pi/2].
    """
    u, s, vh = np.linalg.svd(blk)
    s = np.array(s)
    if np.linalg.det(u) < 0:
        u = u @ np.diag([1.0, -1.0])
        s[1] = -s[1]
    if np.linalg.det(vh) < 0:
        vh = np.diag([1.0, -1.0]) @ vh
        s[1] = -s[1]
    # canonical angle: representative of the {U, -U} pair with u[0,0] >= 0
    if u[0, 0] < 0 or (u[0, 0] == 0 and u[1, 0] < 0):
        u = -u
        vh = -vh
    return u, np.diag(s), vh.T


def standard_form_reduce(
    state: ThreeModeState, tol: float = STANDARD_FORM_TOL, strict: bool = True
):
    """Local-symplectic reduction towards the standard form.

    The construction is: bring each diagonal block to sqrt(det) I with a
    symmetric squeeze, diagonalize the R-B block with the R and B rotations
    from its signed SVD, then spend the remaining C rotation zeroing one
    off-diagonal entry of the B-C block.  When the input is locally
    equivalent to a standard-form state this lands exactly on it (up to
    diagonal sign conventions); for a generic three-mode CM the second B-C
    off-diagonal cannot also be cancelled (three local angles cannot satisfy
    four constraints) and the reduction is reported as inexact.

    Returns (StandardFormCM, (S_R, S_B, S_C), residual).  With strict=True a
    residual above tol raises StandardFormError.
    """
    m = state.cm.data
    blocks = [state.r_block, state.b_block, state.c_block]
    for name, blk in zip("RBC", blocks):
        if abs(np.linalg.det(blk)) < 1e-12:
            raise StandardFormError(f"standard form unavailable: singular {name} block")
    for name, blk in zip(("D", "E"), (state.d_block, state.e_block)):
        if abs(np.linalg.det(blk)) < 1e-14:
            raise StandardFormError(f"standard form unavailable: singular {name} block")

    s_loc = [_isotropize(blk) for blk in blocks]
    s_full = np.zeros((6, 6))
    for k in range(3):
        s_full[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = s_loc[k]
    v1 = s_full @ m @ s_full.T

    # rotations: R and B angles diagonalize the new D block
    d1 = v1[0:2, 2:4]
    u, _, w = _signed_svd_rotations(d1)
    rot_r = u.T
    rot_b = w.T

    # C angle zeroes one off-diagonal of the rotated E block
    e1 = rot_b @ v1[2:4, 4:6]
    row = 0 if np.hypot(e1[0, 0], e1[0, 1]) >= np.hypot(e1[1, 0], e1[1, 1]) else 1
    gamma = np.arctan2(-e1[0, 1], e1[0, 0]) if row == 0 else np.arctan2(e1[1, 0], e1[1, 1])
    if gamma > np.pi / 2:
        gamma -= np.pi
    elif gamma <= -np.pi / 2:
        gamma += np.pi
    rot_c = rotation(gamma)

    transforms = (rot_r @ s_loc[0], rot_b @ s_loc[1], rot_c @ s_loc[2])
    s_tot = np.zeros((6, 6))
    for k, s2 in enumerate(transforms):
        s_tot[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = s2
    v2 = s_tot @ m @ s_tot.T

    scale = max(np.abs(v2).max(), 1.0)
    e2 = v2[2:4, 4:6]
    residual = max(abs(e2[0, 1]), abs(e2[1, 0])) / scale
    if strict and not is_standard_form(v2, tol):
        raise StandardFormError(
            "standard form unavailable: state is not locally reducible "
            f"(B-C off-diagonal residual {residual:.3g})"
        )
    v2 = _clean_standard_form(v2) if is_standard_form(v2, tol) else v2
    params = StandardFormCM(
        r=v2[0, 0], b=v2[2, 2], c=v2[4, 4],
        d=v2[0, 2], d_prime=v2[1, 3],
        e=v2[2, 4], e_prime=v2[3, 5],
        f=v2[0, 4], f_prime=v2[0, 5], f_dprime=v2[1, 4], f_tprime=v2[1, 5],
    )
    return params, transforms, residual


def _clean_standard_form(v: np.ndarray) -> np.ndarray:
    """Zero the entries that are structurally absent from the standard form."""
    out = v.copy()
    for k in range(3):
        i = 2 * k
        iso = 0.5 * (out[i, i] + out[i + 1, i + 1])
        out[i, i] = out[i + 1, i + 1] = iso
        out[i, i + 1] = out[i + 1, i] = 0.0
    for (i, j) in ((0, 2), (2, 4)):
        out[i, j + 1] = out[j + 1, i] = 0.0
        out[i + 1, j] = out[j, i + 1] = 0.0
    return out


def standardize_for_swap(state: ThreeModeState):
    """Best-effort local standardization used ahead of a Bell swap.

    Same angle construction as standard_form_reduce but tolerant: singular
    cross blocks are simply left alone (a decoupled mode needs no rotation)
    and an irreducible B-C block never raises.  The returned state always
    has isotropic diagonal blocks and a diagonal R-B block, which is what
    the remote-pair closed form needs; the residual B-C off-diagonal is
    reported alongside.
    """
    m = state.cm.data
    scale = max(np.abs(m).max(), 1.0)
    s_loc = [_isotropize(m[2 * k : 2 * k + 2, 2 * k : 2 * k + 2]) for k in range(3)]
    s_full = np.zeros((6, 6))
    for k in range(3):
        s_full[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = s_loc[k]
    v1 = s_full @ m @ s_full.T

    d1 = v1[0:2, 2:4]
    if np.abs(d1).max() > 1e-12 * scale:
        u, _, w = _signed_svd_rotations(d1)
        rot_r, rot_b = u.T, w.T
    else:
        rot_r = rot_b = np.eye(2)

    e1 = rot_b @ v1[2:4, 4:6]
    if np.abs(e1).max() > 1e-12 * scale:
        row = 0 if np.hypot(e1[0, 0], e1[0, 1]) >= np.hypot(e1[1, 0], e1[1, 1]) else 1
        gamma = np.arctan2(-e1[0, 1], e1[0, 0]) if row == 0 else np.arctan2(e1[1, 0], e1[1, 1])
        if gamma > np.pi / 2:
            gamma -= np.pi
        elif gamma <= -np.pi / 2:
            gamma += np.pi
        rot_c = rotation(gamma)
    else:
        rot_c = np.eye(2)

    transforms = (rot_r @ s_loc[0], rot_b @ s_loc[1], rot_c @ s_loc[2])
    s_tot = np.zeros((6, 6))
    for k, s2 in enumerate(transforms):
        s_tot[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = s2
    v2 = s_tot @ m @ s_tot.T
    e2 = v2[2:4, 4:6]
    residual = float(max(abs(e2[0, 1]), abs(e2[1, 0])) / max(np.abs(v2).max(), 1.0))
    cm = CovMatrix(s_tot @ m @ s_tot.T)
    return ThreeModeState(cm, s_tot @ state.mean), transforms, residual


# ---------------------------------------------------------------------------
# random generators
# ---------------------------------------------------------------------------


def random_standard_form_state(
    rng: np.random.Generator, max_tries: int = 10000
) -> ThreeModeState:
    """Random physical state drawn directly in standard form.

    Correlations are drawn with two-mode-squeezing-like sign structure
    (d' ~ -d, e' ~ -e) so that a useful fraction of draws is entangled.
    """
    for _ in range(max_tries):
        r = 0.5 + rng.exponential(0.6)
        b = 0.5 + rng.exponential(0.6)
        c = 0.5 + rng.exponential(0.6)
        dmax = np.sqrt((r - 0.5) * (b - 0.5) + 0.25 * min(r, b))
        emax = np.sqrt((b - 0.5) * (c - 0.5) + 0.25 * min(b, c))
        d = rng.uniform(0, dmax)
        d_prime = -d * rng.uniform(0.5, 1.0)
        e = rng.uniform(0, emax)
        e_prime = -e * rng.uniform(0.5, 1.0)
        fscale = 0.1 * rng.uniform(0, 1)
        fblk = fscale * rng.normal(size=4)
        params = StandardFormCM(r, b, c, d, d_prime, e, e_prime, *fblk)
        try:
            cm = CovMatrix(params.matrix())
        except Exception:
            continue
        if validate_physical(cm).is_physical:
            state = ThreeModeState(cm)
            try:
                purities(state)
            except NumericalError:
                continue
            return state
    raise NumericalError("random standard-form search did not converge")


def _certifying_proposal(rng: np.random.Generator) -> StandardFormCM:
    """Propose a standard-form state likely to be certifying.

    A two-mode squeezer R-B followed by a weaker two-mode squeezer B-C
    produces a pure certifying state whenever sinh^2(r2) < (a-1/2)/(a+1/2)
    with a = cosh(2 r1)/2; the proposal draws from that family and adds
    isotropic thermal noise plus generic perturbations of the off-diagonal
    scalars, so mixed and asymmetric states are explored as well.
    """
    r1 = rng.uniform(0.2, 1.2)
    a = 0.5 * np.cosh(2.0 * r1)
    corr = 0.5 * np.sinh(2.0 * r1)
    sh2 = rng.uniform(0.1, 0.85) * (a - 0.5) / (a + 0.5)
    ch2 = 1.0 + sh2
    chsh = np.sqrt(sh2 * ch2)
    ch = np.sqrt(ch2)
    sh = np.sqrt(sh2)

    noise = np.abs(rng.normal(scale=0.03, size=3))
    wobble = 1.0 + rng.normal(scale=0.02, size=2)
    fnoise = rng.normal(scale=0.01, size=4)
    return StandardFormCM(
        r=a + noise[0],
        b=ch2 * a + 0.5 * sh2 + noise[1],
        c=sh2 * a + 0.5 * ch2 + noise[2],
        d=ch * corr,
        d_prime=-ch * corr * wobble[0],
        e=chsh * (a + 0.5),
        e_prime=-chsh * (a + 0.5) * wobble[1],
        f=sh * corr + fnoise[0],
        f_prime=fnoise[1],
        f_dprime=fnoise[2],
        f_tprime=sh * corr + fnoise[3],
    )


def random_certifying_state(
    rng: np.random.Generator, max_tries: int = 200000
) -> ThreeModeState:
    """Rejection-sample standard-form states until one is certifying."""
    for _ in range(max_tries):
        params = _certifying_proposal(rng)
        try:
            cm = CovMatrix(params.matrix())
        except Exception:
            continue
        if not validate_physical(cm).is_physical:
            continue
        state = ThreeModeState(cm)
        if is_certifying(state).certifying:
            return state
    raise NumericalError("certifying-state search did not converge")
