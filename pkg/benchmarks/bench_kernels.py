"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--n 500] [--seed 0]

Times area-function construction, resonance search (lossless and lossy),
and one full Nelder-Mead run, and reports the largest disagreement between
the two backends on the same inputs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from artinv import _kernels_py as numpy_backend
from artinv.model import load_model_data

try:
    from artinv import _kernels as compiled_backend
except ImportError:
    compiled_backend = None

A_MIN = L_MIN = 0.05


def _time(fn, reps: int) -> float:
    t0 = time.perf_counter()
    for i in range(reps):
        fn(i)
    return (time.perf_counter() - t0) / reps


def bench(backend, xs, model, reps_lossy: int):
    def areas(i):
        return backend.area_function(xs[i], model.mean, model.basis, model.alpha, model.beta, 1.0, A_MIN, L_MIN)

    shapes = [areas(i) for i in range(len(xs))]

    def lossless(i):
        a, l = shapes[i]
        return backend.tract_resonances(a, l, 34000.0, False, 10.0, 8000.0, 4)

    def lossy(i):
        a, l = shapes[i]
        return backend.tract_resonances(a, l, 34000.0, True, 10.0, 8000.0, 4)

    return {
        "area_function": _time(areas, len(xs)),
        "resonances (lossless)": _time(lossless, len(xs)),
        "resonances (lossy)": _time(lossy, reps_lossy),
    }, [lossless(i) for i in range(len(xs))]


def bench_inversion(backend_name: str, model) -> float:
    # the selector reads the environment at import, so patch the module instead
    from artinv import inversion, kernels

    chosen = numpy_backend if backend_name == "numpy" else compiled_backend
    saved = (kernels.area_function, kernels.tract_resonances)
    kernels.area_function, kernels.tract_resonances = chosen.area_function, chosen.tract_resonances
    try:
        ctx = inversion.InversionContext(model)
        f = ctx.formants(np.full(7, 0.5))
        fun = inversion.FormantCost(f, ctx, inversion.InversionConfig())
        t0 = time.perf_counter()
        inversion.nelder_mead(fun, np.zeros(7))
        return time.perf_counter() - t0
    finally:
        kernels.area_function, kernels.tract_resonances = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    model = load_model_data()
    xs = np.random.default_rng(args.seed).uniform(-3, 3, (args.n, 7))
    reps_lossy = max(1, args.n // 10)
    py, py_f = bench(numpy_backend, xs, model, reps_lossy)
    rows = [("numpy", py)]
    if compiled_backend is None:
        print("compiled extension not built; numpy backend only")
    else:
        cy, cy_f = bench(compiled_backend, xs, model, reps_lossy)
        rows.append(("cython", cy))
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(py_f, cy_f) if a.shape == b.shape)
        print(f"max |numpy - cython| lossless resonance: {diff:.2e} Hz")

    print(f"{'kernel':<24}" + "".join(f"{name:>14}" for name, _ in rows) + ("     speed-up" if len(rows) > 1 else ""))
    for k in rows[0][1]:
        line = f"{k:<24}" + "".join(f"{r[k] * 1e6:>11.1f} us" for _, r in rows)
        if len(rows) > 1:
            line += f"{rows[0][1][k] / rows[1][1][k]:>12.1f}x"
        print(line)
    for name, _ in rows:
        print(f"one Nelder-Mead run ({name}): {bench_inversion(name, model):.3f} s")


if __name__ == "__main__":
    main()
