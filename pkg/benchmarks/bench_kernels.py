"""Benchmark the compiled spectral kernel against the numpy fallback.

Times the raw integrand batches and the full filtered-output CM
construction at the reference operating point.  Run from the repo root:

    python benchmarks/bench_kernels.py
"""

import os
import time

import numpy as np

from cvswap import _kernels
from cvswap._kernels import reference
from cvswap.optomech import build_linear_model, reference_params
from cvswap.pipeline import point_filters
from cvswap.spectrum import IntegrationConfig, _EigSystem, output_cm_with_info


def _time(fn, *args, repeat=7):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_raw(n_nodes=20000):
    model = build_linear_model(reference_params(1.0))
    sys_ = _EigSystem(model)
    rng = np.random.default_rng(0)
    omegas = np.sort(rng.uniform(0.0, 10 * model.params.mech_freq, n_nodes))
    s_xi = np.full(n_nodes, model.params.gamma_m * (2 * model.n_bar + 1))
    args = (
        omegas, sys_.lam, sys_.p_mat, sys_.q_mat, sys_.refl_b, sys_.refl_c,
        10 / model.params.mech_freq, -model.params.mech_freq,
        2 / model.params.mech_freq, model.params.mech_freq, s_xi, 1,
    )
    rows = []
    compiled_available = _kernels.backend_name() == "compiled"
    if compiled_available:
        rows.append(("compiled", _time(_kernels.spectrum_batch, *args)))
    rows.append(("python", _time(reference.spectrum_batch, *args)))
    print(f"raw integrand batch ({n_nodes} frequencies):")
    for name, dt in rows:
        print(f"  {name:>9}: {dt * 1e3:8.2f} ms   ({n_nodes / dt / 1e6:.2f} M evals/s)")
    if compiled_available and len(rows) == 2:
        print(f"  speedup: {rows[1][1] / rows[0][1]:.2f}x")
        a = _kernels.spectrum_batch(*args)
        b = reference.spectrum_batch(*args)
        print(f"  max |compiled - python|: {np.abs(a - b).max():.3e}")


def bench_output_cm():
    params = reference_params(1.0)
    model = build_linear_model(params)
    fb, fc = point_filters(params, 10.0)
    config = IntegrationConfig()

    def run():
        output_cm_with_info(model, fb, fc, config)

    print("full filtered-output CM (adaptive integration):")
    backend = _kernels.backend_name()
    dt = _time(run, repeat=5)
    print(f"  {backend:>9}: {dt * 1e3:8.2f} ms / point")
    if backend == "compiled":
        print("  (set CVSWAP_PURE_PYTHON=1 and rerun to time the fallback)")


if __name__ == "__main__":
    print(f"active backend: {_kernels.backend_name()}"
          + (" (forced)" if os.environ.get("CVSWAP_PURE_PYTHON") == "1" else ""))
    bench_raw()
    bench_output_cm()
