"""Compare the compiled kernel core with the numpy fallback.

    python3 benchmarks/bench_kernel.py [--repeat 3] [--size 200000]

Times pointwise evaluation off the axis, tabulated evaluation on the real
axis, and the two kernel matvecs used by the transform, and checks that
both backends agree.
"""

import argparse
import time

import numpy as np

from dunklpw._backend import backends, thread_count
from dunklpw.kernel import axis_table


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(size, seed):
    rng = np.random.default_rng(seed)
    k = 1.3 + 0.4j
    w = rng.uniform(-20, 20, size) + 1j * rng.uniform(-3, 3, size)
    y = rng.uniform(-60, 60, size)
    a = np.linspace(-10, 10, 400)
    b = np.linspace(-6, 6, 1200)
    V = rng.standard_normal((b.size, 3)) + 1j * rng.standard_normal((b.size, 3))
    ac = a[:80] + 0.5j
    tab = axis_table(k, 64.0)
    return {
        "psi (complex w)": lambda m: m.psi(k, w),
        "eval_axis (table)": lambda m: m.eval_axis(tab, y),
        "matvec_axis 400x1200x3": lambda m: m.matvec_axis(tab, a, b, V),
        "matvec_general 80x1200x3": lambda m: m.matvec_general(k, ac, b, V),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    impls = backends()
    print(f"backends: {', '.join(impls)}   threads: {thread_count()}")
    if "cython" not in impls:
        print("compiled core not built; only the fallback is timed")
    print(f"{'case':28s}" + "".join(f"{name:>12s}" for name in impls) + f"{'speedup':>10s}{'max diff':>12s}")
    for label, fn in cases(args.size, args.seed).items():
        row, outs = [], []
        for mod in impls.values():
            t, out = best_of(lambda: fn(mod), args.repeat)
            row.append(t)
            outs.append(out)
        speed = row[0] / row[-1] if len(row) > 1 else float("nan")
        diff = float(np.max(np.abs(outs[0] - outs[-1]) / (1 + np.abs(outs[0])))) if len(outs) > 1 else 0.0
        print(f"{label:28s}" + "".join(f"{t:11.4f}s" for t in row) + f"{speed:9.1f}x{diff:12.2e}")


if __name__ == "__main__":
    main()
