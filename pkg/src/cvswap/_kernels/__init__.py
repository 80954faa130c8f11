"""Spectral-kernel backend selection.

The hot integrand (drift resolvent + filter assembly per frequency) exists
twice: a Cython extension built at install time and a vectorized numpy
fallback.  The compiled module is preferred when importable; set
CVSWAP_PURE_PYTHON=1 to force the fallback.  Both expose the same
spectrum_batch signature and agree to float round-off (see the parity
tests and benchmarks/bench_kernels.py).
"""

import os

from . import reference
from .reference import spectrum_batch_direct, spectrum_batch_full

if os.environ.get("CVSWAP_PURE_PYTHON", "") == "1":
    _impl = reference
else:
    try:
        from . import _spectrum as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = reference

spectrum_batch = _impl.spectrum_batch


def backend_name() -> str:
    return "compiled" if _impl is not reference else "python"
