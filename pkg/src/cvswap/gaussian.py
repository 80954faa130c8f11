"""Covariance-matrix algebra for multimode Gaussian states.

Conventions
-----------
Quadratures are ordered (x1, p1, ..., xN, pN) with [x_k, p_k'] = i delta_kk',
so the vacuum variance is 1/2 per quadrature and a covariance matrix V is
physical iff V + (i/2) Omega >= 0, with Omega the direct sum of n blocks
[[0, 1], [-1, 0]].  Equivalently, every symplectic eigenvalue is >= 1/2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonPhysicalError, NumericalError, SchemaError, ShapeError

SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-9

_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def symplectic_form(n_modes: int) -> np.ndarray:
    """Return the 2n x 2n symplectic form, a direct sum of [[0, 1], [-1, 0]]."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


def _as_matrix(v) -> np.ndarray:
    return v.data if isinstance(v, CovMatrix) else np.asarray(v, dtype=float)


@dataclass(frozen=True)
class CovMatrix:
    """Real symmetric 2n x 2n matrix of symmetrized quadrature second moments."""

    data: np.ndarray

    def __post_init__(self):
        m = np.array(self.data, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"covariance matrix must be square, got shape {m.shape}")
        if m.shape[0] % 2 != 0 or m.shape[0] == 0:
            raise ShapeError(f"covariance matrix must be 2n x 2n, got {m.shape[0]} rows")
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.T).max() > SYMMETRY_TOL * scale:
            raise ShapeError("covariance matrix is not symmetric to 1e-12 (relative)")
        m = 0.5 * (m + m.T)
        m.flags.writeable = False
        object.__setattr__(self, "data", m)

    @property
    def n_modes(self) -> int:
        return self.data.shape[0] // 2

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 block coupling mode i to mode j."""
        return np.array(self.data[2 * i : 2 * i + 2, 2 * j : 2 * j + 2])

    def reduced(self, modes) -> "CovMatrix":
        """Covariance matrix of the listed modes (partial trace over the rest)."""
        idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes]).astype(int)
        return CovMatrix(self.data[np.ix_(idx, idx)])

    def matrix(self) -> np.ndarray:
        return np.array(self.data)


@dataclass(frozen=True)
class PhysicalityReport:
    is_physical: bool
    min_symplectic_eig: float


def _symplectic_spectrum(m: np.ndarray, pairing_tol: float = PHYSICALITY_TOL) -> np.ndarray:
    """Symplectic spectrum from the eigenvalues of Omega V.

    For a bona fide V these come in pairs +/- i nu; the returned array holds
    the n paired moduli in ascending order.  Raises NumericalError-free: a
    broken pairing (possible for unphysical symmetric input) is reported by
    the caller through the physicality flag, not an exception.
    """
    n = m.shape[0] // 2
    ev = np.linalg.eigvals(symplectic_form(n) @ m)
    nus = np.sort(np.abs(ev.imag))
    # pair consecutive entries; their mismatch measures how far the spectrum
    # is from the +/- i nu structure
    paired = 0.5 * (nus[0::2] + nus[1::2])
    mismatch = np.abs(nus[0::2] - nus[1::2]).max() if n else 0.0
    scale = max(paired.max(), 1.0)
    if mismatch > pairing_tol * scale or np.abs(ev.real).max() > 1e-6 * max(scale, np.abs(ev).max()):
        # signal an unpaired spectrum with a NaN-free sentinel: callers treat
        # the state as unphysical (min eig 0 is always below vacuum)
        return np.zeros(n)
    return paired


def validate_physical(v) -> PhysicalityReport:
    """Check the bona fide condition V + (i/2) Omega >= 0.

    Returns a report with the minimum symplectic eigenvalue; the flag is true
    iff that eigenvalue is >= 1/2 - 1e-9.  Raises ShapeError for
    non-symmetric or odd-dimension input.
    """
    m = _as_matrix(v)
    if not isinstance(v, CovMatrix):
        v = CovMatrix(m)  # shape/symmetry validation
        m = v.data
    nus = _symplectic_spectrum(m)
    min_eig = float(nus.min())
    return PhysicalityReport(min_eig >= 0.5 - PHYSICALITY_TOL, min_eig)


def symplectic_eigenvalues(v) -> np.ndarray:
    """Symplectic spectrum of a physical covariance matrix, ascending.

    Raises NonPhysicalError when any eigenvalue falls below 1/2 - 1e-9.
    """
    m = _as_matrix(v)
    nus = _symplectic_spectrum(m)
    if nus.min() < 0.5 - PHYSICALITY_TOL:
        raise NonPhysicalError(
            f"covariance matrix is not physical (min symplectic eigenvalue {nus.min():.6g})"
        )
    return nus


def partial_transpose(v, mode: int) -> CovMatrix:
    """Flip the sign of the chosen mode's momentum quadrature."""
    m = _as_matrix(v)
    n = m.shape[0] // 2
    if not 0 <= mode < n:
        raise DomainError(f"mode index {mode} out of range for {n} modes")
    signs = np.ones(2 * n)
    signs[2 * mode + 1] = -1.0
    return CovMatrix(m * signs[:, None] * signs[None, :])


def ppt_min_eig(v, transposed_mode: int = 1) -> float:
    """Minimum symplectic eigenvalue after partial transposition of a two-mode state.

    A value below 1/2 witnesses entanglement.  Raises ShapeError unless the
    input is two-mode, NonPhysicalError unless it is physical.
    """
    m = _as_matrix(v)
    if m.shape[0] != 4:
        raise ShapeError(f"ppt_min_eig needs a two-mode (4x4) matrix, got {m.shape}")
    symplectic_eigenvalues(m)  # physicality precondition
    mt = partial_transpose(m, transposed_mode)
    return float(_symplectic_spectrum(mt.data).min())


def log_negativity(v, transposed_mode: int = 1) -> float:
    """Logarithmic negativity E_N = max{0, -ln(2 eta-)} of a two-mode state."""
    eta = ppt_min_eig(v, transposed_mode)
    return max(0.0, -np.log(2.0 * eta))


def purity(v) -> float:
    """Purity of an n-mode Gaussian state, [2^n sqrt(det V)]^-1."""
    m = _as_matrix(v)
    n = m.shape[0] // 2
    det = np.linalg.det(m)
    if det <= 0 or not np.isfinite(det):
        raise NumericalError(
            f"singular covariance determinant {det:.3g} "
            f"(condition number {np.linalg.cond(m):.3g})"
        )
    return float(1.0 / (2.0**n * np.sqrt(det)))


# ---------------------------------------------------------------------------
# state factories
# ---------------------------------------------------------------------------


def vacuum(n_modes: int) -> CovMatrix:
    return CovMatrix(0.5 * np.eye(2 * n_modes))


def thermal(nbar, n_modes: int | None = None) -> CovMatrix:
    """Thermal state(s) with mean occupation nbar (scalar or one per mode)."""
    occ = np.atleast_1d(np.asarray(nbar, dtype=float))
    if n_modes is not None and occ.size == 1:
        occ = np.repeat(occ, n_modes)
    if np.any(occ < 0):
        raise DomainError("thermal occupation must be non-negative")
    return CovMatrix(np.diag(np.repeat(occ + 0.5, 2)))


def tmsv(r: float) -> CovMatrix:
    """Two-mode squeezed vacuum: blocks aI, aI and cZ with a = cosh(2r)/2, c = sinh(2r)/2."""
    a = 0.5 * np.cosh(2.0 * r)
    c = 0.5 * np.sinh(2.0 * r)
    m = np.block([[a * np.eye(2), c * _Z], [c * _Z, a * np.eye(2)]])
    return CovMatrix(m)


def beamsplitter_symplectic(n_modes: int, modes: tuple[int, int], transmissivity: float) -> np.ndarray:
    """Symplectic matrix of a beamsplitter of given transmissivity on two modes."""
    if not 0.0 <= transmissivity <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {transmissivity}")
    i, j = modes
    if i == j:
        raise DomainError("beamsplitter needs two distinct modes")
    t = np.sqrt(transmissivity)
    rcoef = np.sqrt(1.0 - transmissivity)
    s = np.eye(2 * n_modes)
    for q in range(2):
        s[2 * i + q, 2 * i + q] = t
        s[2 * j + q, 2 * j + q] = t
        s[2 * i + q, 2 * j + q] = rcoef
        s[2 * j + q, 2 * i + q] = -rcoef
    return s


def apply_beamsplitter(v, modes: tuple[int, int], transmissivity: float) -> CovMatrix:
    m = _as_matrix(v)
    s = beamsplitter_symplectic(m.shape[0] // 2, modes, transmissivity)
    return CovMatrix(s @ m @ s.T)


def apply_local_symplectic(v, mode: int, s2: np.ndarray) -> CovMatrix:
    """Apply a single-mode symplectic (2x2, det 1) to the chosen mode."""
    s2 = np.asarray(s2, dtype=float)
    if s2.shape != (2, 2) or abs(np.linalg.det(s2) - 1.0) > 1e-10:
        raise DomainError("local symplectic must be 2x2 with unit determinant")
    m = _as_matrix(v)
    n = m.shape[0] // 2
    s = np.eye(2 * n)
    s[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2] = s2
    return CovMatrix(s @ m @ s.T)


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def random_symplectic(n_modes: int, rng: np.random.Generator, squeeze_scale: float = 0.4) -> np.ndarray:
    """Random symplectic via Euler decomposition O1 . diag(e^r, e^-r) . O2.

    O1, O2 are Haar orthogonal-symplectic matrices (images of Haar unitaries).
    """

    def _orthogonal_symplectic() -> np.ndarray:
        g = rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))
        q, r = np.linalg.qr(g)
        q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
        o = np.zeros((2 * n_modes, 2 * n_modes))
        for a in range(n_modes):
            for b in range(n_modes):
                o[2 * a, 2 * b] = q[a, b].real
                o[2 * a, 2 * b + 1] = -q[a, b].imag
                o[2 * a + 1, 2 * b] = q[a, b].imag
                o[2 * a + 1, 2 * b + 1] = q[a, b].real
        return o

    rs = rng.normal(scale=squeeze_scale, size=n_modes)
    squeeze = np.diag(np.repeat(np.exp(rs), 2) ** np.tile([1.0, -1.0], n_modes))
    return _orthogonal_symplectic() @ squeeze @ _orthogonal_symplectic()


def random_physical_cm(n_modes: int, seed=None, rng: np.random.Generator | None = None,
                       thermal_scale: float = 0.5, squeeze_scale: float = 0.4) -> CovMatrix:
    """Random physical CM: S (direct sum of thermal blocks) S^T with random symplectic S."""
    if rng is None:
        rng = np.random.default_rng(seed)
    nbars = np.abs(rng.normal(scale=thermal_scale, size=n_modes))
    s = random_symplectic(n_modes, rng, squeeze_scale)
    core = np.diag(np.repeat(nbars + 0.5, 2))
    return CovMatrix(s @ core @ s.T)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def cm_to_dict(v, labels: list[str] | None = None) -> dict:
    """JSON-ready dict: {n_modes, ordering:"xpxp", vacuum_variance:0.5, data:[rows]}."""
    m = _as_matrix(v)
    d = {
        "n_modes": m.shape[0] // 2,
        "ordering": "xpxp",
        "vacuum_variance": 0.5,
        "data": [[float(x) for x in row] for row in m],
    }
    if labels is not None:
        d["labels"] = list(labels)
    return d


def cm_from_dict(d: dict) -> CovMatrix:
    """Parse the CM JSON schema, raising SchemaError with the offending field."""
    if not isinstance(d, dict):
        raise SchemaError("covariance matrix document must be a JSON object")
    for key in ("n_modes", "ordering", "vacuum_variance", "data"):
        if key not in d:
            raise SchemaError(f"missing required field '{key}'")
    if d["ordering"] != "xpxp":
        raise SchemaError(f"field 'ordering' must be 'xpxp', got {d['ordering']!r}")
    if d["vacuum_variance"] != 0.5:
        raise SchemaError(f"field 'vacuum_variance' must be 0.5, got {d['vacuum_variance']!r}")
    n = d["n_modes"]
    if not isinstance(n, int) or n <= 0:
        raise SchemaError(f"field 'n_modes' must be a positive integer, got {n!r}")
    try:
        data = np.asarray(d["data"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"field 'data' is not a numeric matrix: {exc}") from exc
    if data.shape != (2 * n, 2 * n):
        raise SchemaError(
            f"field 'data' must be a {2 * n}x{2 * n} row-major matrix, got shape {data.shape}"
        )
    try:
        return CovMatrix(data)
    except ShapeError as exc:
        raise SchemaError(f"field 'data': {exc}") from exc


def cm_to_json(v, labels: list[str] | None = None, indent: int | None = None) -> str:
    return json.dumps(cm_to_dict(v, labels), indent=indent)


def cm_from_json(text: str) -> CovMatrix:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return cm_from_dict(d)


def cm_to_csv(v) -> str:
    """Row-major CSV export, one matrix row per line."""
    m = _as_matrix(v)
    return "\n".join(",".join(repr(float(x)) for x in row) for row in m) + "\n"


def cm_from_csv(text: str) -> CovMatrix:
    rows = [r for r in text.strip().splitlines() if r.strip()]
    try:
        data = np.array([[float(x) for x in row.split(",")] for row in rows])
    except ValueError as exc:
        raise SchemaError(f"invalid CSV matrix: {exc}") from exc
    return CovMatrix(data)
