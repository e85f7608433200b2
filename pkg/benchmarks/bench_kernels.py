"""Compare the compiled and pure-Python Gaussian-integer kernels.

Runs matmul and fraction-free RREF on seeded sparse random matrices, checks
that both backends agree exactly and prints median timings.  With --workload
it also times a few end-to-end CLI runs under each backend (separate
processes, TRACTORSUPER_PURE=1 for the pure one).

Dense RREF beyond n ~ 32 is dominated by big-integer growth, where the two
backends perform alike.

    python benchmarks/bench_kernels.py --sizes 8 16 32 --repeat 5 --workload
"""
from __future__ import annotations

import argparse
import os
import random
import statistics
import subprocess
import sys
import time

from tractorsuper import _kernels_py

try:
    from tractorsuper import _kernels
except ImportError:  # extension not built
    _kernels = None


def random_matrix(rng: random.Random, rows: int, cols: int, density: float, bound: int):
    re, im = [], []
    for _ in range(rows * cols):
        if rng.random() < density:
            re.append(rng.randint(-bound, bound))
            im.append(rng.randint(-bound, bound))
        else:
            re.append(0)
            im.append(0)
    return re, im


def _median_time(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench_matmul(mod, n: int, a, b, repeat: int):
    out = mod.gi_matmul(n, n, n, a[0], a[1], b[0], b[1])
    return out, _median_time(lambda: mod.gi_matmul(n, n, n, a[0], a[1], b[0], b[1]), repeat)


def bench_rref(mod, n: int, a, repeat: int):
    def once():
        re_rows = [a[0][i * n:(i + 1) * n] for i in range(n)]
        im_rows = [a[1][i * n:(i + 1) * n] for i in range(n)]
        piv = mod.gi_rref(re_rows, im_rows, n)
        return piv, re_rows, im_rows
    return once(), _median_time(once, repeat)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--density", type=float, default=0.1)
    ap.add_argument("--bound", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workload", action="store_true", help="also time end-to-end CLI runs")
    args = ap.parse_args(argv)

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.append(("compiled", _kernels))
    else:
        print("compiled extension not available; timing the pure backend only")

    rng = random.Random(args.seed)
    print(f"{'op':<8}{'n':>5}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}")
    status = 0
    for n in args.sizes:
        a = random_matrix(rng, n, n, args.density, args.bound)
        b = random_matrix(rng, n, n, args.density, args.bound)
        for op in ("matmul", "rref"):
            results, times = [], []
            for _, mod in backends:
                if op == "matmul":
                    res, t = bench_matmul(mod, n, a, b, args.repeat)
                else:
                    res, t = bench_rref(mod, n, a, args.repeat)
                results.append(res)
                times.append(t)
            if any(r != results[0] for r in results[1:]):
                print(f"MISMATCH in {op} at n = {n}")
                status = 1
            speed = f"{times[0] / times[-1]:.1f}x" if len(times) > 1 else "-"
            print(f"{op:<8}{n:>5}" + "".join(f"{t * 1e3:>12.2f}ms" for t in times) + f"{speed:>10}")
    if args.workload:
        status |= bench_workloads(args.repeat)
    return status


WORKLOADS = [
    ["--sig", "1,3", "--holonomy", "trivial"],
    ["--sig", "3,2", "--holonomy", "g2_split", "--profile", "general"],
    ["--sig", "1,5", "--holonomy", "su"],
]


def _cli_seconds(args: list, pure: bool) -> tuple:
    env = dict(os.environ)
    env.pop("TRACTORSUPER_PURE", None)
    if pure:
        env["TRACTORSUPER_PURE"] = "1"
    t0 = time.perf_counter()
    out = subprocess.run([sys.executable, "-m", "tractorsuper.cli", *args], env=env,
                         capture_output=True, text=True, check=False)
    return time.perf_counter() - t0, out.stdout


def bench_workloads(repeat: int) -> int:
    print()
    print(f"{'workload':<44}{'python':>10}{'compiled':>10}")
    status = 0
    for args in WORKLOADS:
        runs = {True: [], False: []}
        reports = {}
        for pure in (True, False):
            for _ in range(max(1, repeat // 2)):
                t, text = _cli_seconds(args, pure)
                runs[pure].append(t)
                reports[pure] = text
        if reports[True] != reports[False]:
            print(f"report differs between backends for {' '.join(args)}")
            status = 1
        print(f"{' '.join(args):<44}{statistics.median(runs[True]):>9.2f}s"
              f"{statistics.median(runs[False]):>9.2f}s")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
