"""Time the compiled Taylor kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Uses the oscillator equation
``y'' = (x^2 - 1) y`` on ``[0, 6]`` and reports the best of several repeats.
"""
import argparse
import timeit

import numpy as np

from qtraj import kernels


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=2000, help="table steps")
    parser.add_argument("--points", type=int, default=100_000, help="evaluation points")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    p = (-1.0, 0.0, 1.0)
    h = 6.0 / args.steps
    x = np.linspace(0.0, 6.0, args.points)
    print(f"steps={args.steps} points={args.points} best of {args.repeat}")
    timings = {}
    for name, impl in sorted(kernels.IMPLEMENTATIONS.items()):
        ys, dys = impl.taylor_table(*p, 0.0, 1.0, 0.0, h, args.steps)
        t_table = min(timeit.repeat(lambda: impl.taylor_table(*p, 0.0, 1.0, 0.0, h, args.steps),
                                    number=1, repeat=args.repeat))
        t_eval = min(timeit.repeat(lambda: impl.taylor_eval(*p, 0.0, h, ys, dys, x),
                                   number=1, repeat=args.repeat))
        timings[name] = (t_table, t_eval)
        print(f"{name:>9}: table {t_table * 1e3:9.3f} ms   eval {t_eval * 1e3:9.3f} ms")
    if "compiled" in timings:
        (pt, pe), (ct, ce) = timings["python"], timings["compiled"]
        print(f"  speedup: table {pt / ct:7.1f}x   eval {pe / ce:7.1f}x")
    else:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
