"""Time the numba and numpy kernel backends, alone and inside a full solve.

    python benchmarks/bench_kernels.py [--repeats 5]
"""
import argparse
from time import perf_counter

import numpy as np

from tubal import _backend, _kernels
from tubal.altmin import SolverConfig, complete
from tubal.sampling import project, random_element_mask, random_trace_mask
from tubal.synth import SynthConfig, synthesize


def best_of(fn, repeats):
    fn()  # warm-up, includes numba compilation on first call
    times = []
    for _ in range(repeats):
        start = perf_counter()
        fn()
        times.append(perf_counter() - start)
    return min(times)


def cases(rng):
    m, n, r, h = 64, 64, 2, 129
    xh = rng.standard_normal((m, r, h)) + 1j * rng.standard_normal((m, r, h))
    th = rng.standard_normal((m, n, h)) + 1j * rng.standard_normal((m, n, h))
    w = (rng.random((m, n)) < 0.4).astype(float)
    x = rng.standard_normal((32, 2, 64))
    ii = rng.integers(0, 32, 800)
    tt = rng.integers(0, 64, 800)
    vol = synthesize(SynthConfig(dims=(64, 64, 256)))
    tmask = random_trace_mask(64, 64, 0.4, 0)
    small = synthesize(SynthConfig(dims=(24, 24, 32)))
    emask = random_element_mask(24, 24, 32, 0.5, 0)
    return {
        "trace_gram 64x64 r=2 h=129": lambda: _kernels.trace_gram(xh, w, th),
        "element_design 800 rows r=2 k=64": lambda: _kernels.element_design(x, ii, tt),
        "complete trace 64x64x256 @40%": lambda: complete(project(vol, tmask), tmask, SolverConfig(r=2, max_iters=5)),
        "complete element 24x24x32 @50%": lambda: complete(project(small, emask), emask, SolverConfig(r=2, max_iters=3)),
    }


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()
    backends = ["numpy"] + (["numba"] if _backend.HAVE_NUMBA else [])
    previous = _backend.get_backend()
    table = {}
    try:
        for name in backends:
            _backend.set_backend(name)
            for label, fn in cases(np.random.default_rng(0)).items():
                table.setdefault(label, {})[name] = best_of(fn, args.repeats)
    finally:
        _backend.set_backend(previous)
    print(f"{'case':36s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label, row in table.items():
        line = f"{label:36s}" + "".join(f"{row[b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) > 1:
            line += f"{row['numpy'] / row['numba']:11.2f}x"
        print(line)


if __name__ == "__main__":
    main()
