"""Compiled vs pure-Python pixel kernels on fixture-sized masks.

    python benchmarks/bench_kernels.py [--size 480] [--repeat 3]
"""

import argparse
import time

import numpy as np

from scrubbot import _kernels_py
from scrubbot import fixtures as fx
from scrubbot.clean import threshold, to_grayscale

try:
    from scrubbot import _kernels as _compiled
except ImportError:
    _compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=480, help="random mask side length")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    noise = np.ascontiguousarray(rng.random((args.size, args.size)) < 0.45, dtype=np.uint8)
    plate = np.ascontiguousarray(threshold(to_grayscale(fx.load_fixture("plate_before")), 200),
                                 dtype=np.uint8)
    start = tuple(int(v) for v in np.argwhere(plate)[0])
    sites = np.ascontiguousarray(~plate.astype(bool), dtype=np.uint8)

    cases = [
        ("label 8-conn, random mask", lambda k: k.label(noise, 8)),
        ("label 8-conn, plate", lambda k: k.label(plate, 8)),
        ("trace plate rim", lambda k: k.trace(plate, *start)),
        ("squared EDT, plate", lambda k: k.squared_edt(sites)),
    ]
    print(f"{'kernel':<28}{'python (s)':>12}{'compiled (s)':>14}{'speed-up':>10}")
    for name, fn in cases:
        t_py = best_of(lambda: fn(_kernels_py), args.repeat)
        if _compiled is None:
            print(f"{name:<28}{t_py:>12.4f}{'n/a':>14}{'':>10}")
            continue
        t_c = best_of(lambda: fn(_compiled), args.repeat)
        print(f"{name:<28}{t_py:>12.4f}{t_c:>14.5f}{t_py / t_c:>9.0f}x")


if __name__ == "__main__":
    main()
