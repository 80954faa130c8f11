"""CV Bell measurement between two three-mode sites, with certification.

Charlie mixes the two Bell modes on a balanced beamsplitter and homodynes
x_- = x_B2 - x_B1 and p_+ = p_B2 + p_B1 (commuting pair, jointly measurable).
Outcomes are quoted in these difference/sum units, so for two vacuum Bell
modes the outcome covariance is diag(1, 1).

Because the measured pair is commuting, the conditional state of the
unmeasured modes (R1, R2, C1, C2) follows from Gaussian conditioning on the
linear form L = (x_B2 - x_B1, p_B2 + p_B1):

    V'_ab = V_ab - Cov(a, L) Var(L)^-1 Cov(b, L)^T,
    d_a   = Cov(a, L) Var(L)^-1 L_outcome,

with Var(L) = Z B1 Z + B2 and Z = diag(1, -1).  The conditional covariance
is outcome-independent; only the first moments depend on the record.  For
identical sites in standard form Var(L) reduces to B1 + Z B2 Z and the
update coincides with the closed-form purity-ratio expressions checked in
eta_closed_form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMeasurementError, DomainError, NonPhysicalError
from .gaussian import CovMatrix, cm_to_dict, ppt_min_eig, validate_physical
from .threemode import ThreeModeState, purities, standard_form_params

_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

CERTIFICATION_EN_TOL = 1e-12
MAX_KERNEL_CONDITION = 1e12


@dataclass(frozen=True)
class BellOutcome:
    """Homodyne record (x_minus, p_plus) in difference/sum quadrature units."""

    x_minus: float
    p_plus: float

    def __post_init__(self):
        if not (np.isfinite(self.x_minus) and np.isfinite(self.p_plus)):
            raise DomainError("Bell outcomes must be finite")

    def vector(self) -> np.ndarray:
        return np.array([self.x_minus, self.p_plus])


@dataclass(frozen=True)
class SwapResult:
    """Conditional state after the Bell measurement (mode order R1, R2, C1, C2)."""

    v_out: CovMatrix
    v_r1r2: CovMatrix
    v_c1c2: CovMatrix
    x_block: np.ndarray
    d_r1: np.ndarray
    d_r2: np.ndarray
    eta_rr: float
    eta_cc: float
    en_rr: float
    en_cc: float
    kernel_condition: float


def _site_blocks(state: ThreeModeState):
    return (
        state.r_block,
        state.b_block,
        state.c_block,
        state.d_block,
        state.e_block,
        state.f_block,
    )


def _measurement_kernel(s1: ThreeModeState, s2: ThreeModeState) -> np.ndarray:
    """Var(L) for L = (x_B2 - x_B1, p_B2 + p_B1)."""
    return _Z @ s1.b_block @ _Z + s2.b_block


def _outcome_couplings(s1: ThreeModeState, s2: ThreeModeState) -> list[np.ndarray]:
    """Cov(a, L) for a in (R1, R2, C1, C2)."""
    _, _, _, d1, e1, _ = _site_blocks(s1)
    _, _, _, d2, e2, _ = _site_blocks(s2)
    return [-d1 @ _Z, d2, -e1.T @ _Z, e2.T]


def bell_swap(s1: ThreeModeState, s2: ThreeModeState) -> SwapResult:
    """Conditional covariance of (R1, R2, C1, C2) after the Bell measurement.

    Works for arbitrary physical 2x2 blocks at either site; the result is
    outcome-independent, so displacements are returned as zero here (see
    swap_displacements).  Raises DegenerateMeasurementError when the
    measured-quadrature covariance is numerically singular.
    """
    for state in (s1, s2):
        rep = validate_physical(state.cm)
        if not rep.is_physical:
            raise NonPhysicalError(
                f"input state is not physical (min symplectic eigenvalue {rep.min_symplectic_eig:.6g})"
            )
    kernel = _measurement_kernel(s1, s2)
    cond = float(np.linalg.cond(kernel))
    if not np.isfinite(cond) or cond > MAX_KERNEL_CONDITION:
        raise DegenerateMeasurementError(
            f"Bell-measurement covariance is near-singular (condition number {cond:.3g})"
        )
    kinv = np.linalg.inv(kernel)
    couplings = _outcome_couplings(s1, s2)

    r1, _, c1, _, _, f1 = _site_blocks(s1)
    r2, _, c2, _, _, f2 = _site_blocks(s2)
    # unconditional blocks among (R1, R2, C1, C2); cross-site blocks vanish
    prior = [[None] * 4 for _ in range(4)]
    prior[0][0], prior[1][1], prior[2][2], prior[3][3] = r1, r2, c1, c2
    prior[0][2], prior[1][3] = f1, f2

    out = np.zeros((8, 8))
    for i in range(4):
        for j in range(i, 4):
            base = prior[i][j] if prior[i][j] is not None else np.zeros((2, 2))
            blk = base - couplings[i] @ kinv @ couplings[j].T
            out[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = blk
            out[2 * j : 2 * j + 2, 2 * i : 2 * i + 2] = blk.T

    v_out = CovMatrix(out)
    rep = validate_physical(v_out)
    if rep.min_symplectic_eig < 0.5 - 1e-7:
        raise NonPhysicalError(
            f"conditional state unexpectedly unphysical (min eig {rep.min_symplectic_eig:.6g})"
        )
    v_r1r2 = CovMatrix(out[0:4, 0:4])
    v_c1c2 = CovMatrix(out[4:8, 4:8])
    eta_rr = ppt_min_eig(v_r1r2)
    eta_cc = ppt_min_eig(v_c1c2)
    return SwapResult(
        v_out=v_out,
        v_r1r2=v_r1r2,
        v_c1c2=v_c1c2,
        x_block=out[0:4, 4:8].copy(),
        d_r1=np.zeros(2),
        d_r2=np.zeros(2),
        eta_rr=eta_rr,
        eta_cc=eta_cc,
        en_rr=max(0.0, -np.log(2.0 * eta_rr)),
        en_cc=max(0.0, -np.log(2.0 * eta_cc)),
        kernel_condition=cond,
    )


def swap_displacements(
    s1: ThreeModeState, s2: ThreeModeState, outcome: BellOutcome
) -> tuple[np.ndarray, np.ndarray]:
    """Outcome-dependent first moments of R1 and R2, linear in the record."""
    kernel = _measurement_kernel(s1, s2)
    cond = float(np.linalg.cond(kernel))
    if not np.isfinite(cond) or cond > MAX_KERNEL_CONDITION:
        raise DegenerateMeasurementError(
            f"Bell-measurement covariance is near-singular (condition number {cond:.3g})"
        )
    kinv = np.linalg.inv(kernel)
    o = outcome.vector()
    d_r1 = -s1.d_block @ _Z @ kinv @ o
    d_r2 = s2.d_block @ kinv @ o
    return d_r1, d_r2


@dataclass(frozen=True)
class OutcomeDistribution:
    """Gaussian statistics of the Bell record (x_minus, p_plus)."""

    covariance: np.ndarray

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        chol = np.linalg.cholesky(self.covariance)
        return rng.standard_normal((n, 2)) @ chol.T


def bell_outcome_distribution(s1: ThreeModeState, s2: ThreeModeState) -> OutcomeDistribution:
    """Covariance of (x_B2 - x_B1, p_B2 + p_B1) read off the joint input CM."""
    for state in (s1, s2):
        if np.abs(state.mean).max() > 0:
            raise DomainError("outcome distribution assumes zero-mean inputs")
    return OutcomeDistribution(_measurement_kernel(s1, s2))


def eta_closed_form(state: ThreeModeState) -> tuple[float, float]:
    """Purity-ratio minimum symplectic eigenvalues for identical standard-form sites.

    eta_RR = mu_B / (2 mu_RB) and eta_CC = mu_B / (2 mu_BC).  Valid only for
    a standard-form input used at both sites; other inputs must go through
    bell_swap + ppt_min_eig.
    """
    standard_form_params(state)  # raises StandardFormError when not in standard form
    mu = purities(state)
    return mu.mu_b / (2.0 * mu.mu_rb), mu.mu_b / (2.0 * mu.mu_bc)


# ---------------------------------------------------------------------------
# repeated protocol
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProtocolRecord:
    round_index: int
    outcome: BellOutcome
    d_r1: np.ndarray
    d_r2: np.ndarray
    certified: bool


@dataclass(frozen=True)
class ProtocolSummary:
    en_rr: float
    en_cc: float
    certified: bool
    v_r1r2: CovMatrix


def run_protocol(
    s1: ThreeModeState, s2: ThreeModeState, n_rounds: int, seed
) -> tuple[list[ProtocolRecord], ProtocolSummary]:
    """Sample n_rounds Bell records and the per-round remote displacements.

    Every round shares the same conditional CM (outcome independence); the
    certified flag is E_N of the certification pair exceeding 1e-12.  Round
    seeds are spawned deterministically from the top-level seed, so the
    record list does not depend on evaluation order.
    """
    result = bell_swap(s1, s2)
    dist = bell_outcome_distribution(s1, s2)
    certified = bool(result.en_cc > CERTIFICATION_EN_TOL)
    records = []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(n_rounds)):
        rng = np.random.default_rng(child)
        x_minus, p_plus = dist.sample(1, rng)[0]
        outcome = BellOutcome(float(x_minus), float(p_plus))
        d_r1, d_r2 = swap_displacements(s1, s2, outcome)
        records.append(ProtocolRecord(i, outcome, d_r1, d_r2, certified))
    summary = ProtocolSummary(result.en_rr, result.en_cc, certified, result.v_r1r2)
    return records, summary


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

PROTOCOL_CSV_HEADER = "round,x_minus,p_plus,d_r1x,d_r1p,d_r2x,d_r2p,certified"


def swap_result_to_dict(result: SwapResult) -> dict:
    """JSON schema: {v_out, v_r1r2, v_c1c2, x_block, eta:{rr,cc}, en:{rr,cc}}."""
    return {
        "v_out": cm_to_dict(result.v_out),
        "v_r1r2": cm_to_dict(result.v_r1r2),
        "v_c1c2": cm_to_dict(result.v_c1c2),
        "x_block": [[float(x) for x in row] for row in result.x_block],
        "eta": {"rr": float(result.eta_rr), "cc": float(result.eta_cc)},
        "en": {"rr": float(result.en_rr), "cc": float(result.en_cc)},
    }


def protocol_records_to_csv(records: list[ProtocolRecord]) -> str:
    lines = [PROTOCOL_CSV_HEADER]
    for rec in records:
        lines.append(
            f"{rec.round_index},{rec.outcome.x_minus!r},{rec.outcome.p_plus!r},"
            f"{rec.d_r1[0]!r},{rec.d_r1[1]!r},{rec.d_r2[0]!r},{rec.d_r2[1]!r},"
            f"{'true' if rec.certified else 'false'}"
        )
    return "\n".join(lines) + "\n"
