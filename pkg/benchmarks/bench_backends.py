"""Time the compiled and the numpy kernels on the built-in cases.

    python3 benchmarks/bench_backends.py [--repeat N] [--t-end SECONDS]

Each case is run once per backend to warm up (JIT compile or cache load),
then timed ``--repeat`` times; the best time is reported together with the
largest difference between the two backends' waveforms.
"""

import argparse
import time

import numpy as np

from transient_bench import scenarios as sc


def best_time(cfg, backend, repeat):
    result = sc.simulate(cfg, backend=backend)
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        sc.simulate(cfg, backend=backend)
        times.append(time.perf_counter() - start)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--t-end", type=float, default=0.03,
                    help="run end in seconds (default 0.03)")
    args = ap.parse_args(argv)

    print(f"{'case':<8}{'phases':>7}{'steps':>9}{'numba s':>10}{'numpy s':>10}"
          f"{'speedup':>9}{'max |diff|':>12}")
    for case in ("case_a", "case_b"):
        for phases in (1, 3):
            cfg = sc.default_config(case, sim__phases=phases, sim__t_end_s=args.t_end)
            t_jit, w_jit = best_time(cfg, "numba", args.repeat)
            t_np, w_np = best_time(cfg, "numpy", args.repeat)
            diff = float(np.abs(w_jit.data - w_np.data).max())
            steps = len(w_jit.time) - 1
            print(f"{case:<8}{phases:>7}{steps:>9}{t_jit:>10.3f}{t_np:>10.3f}"
                  f"{t_np / t_jit:>8.1f}x{diff:>12.2e}")


if __name__ == "__main__":
    main()
