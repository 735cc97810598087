"""Compare the compiled and pure-Python word kernels.

    python benchmarks/bench_kernels.py [--n 20000] [--length 40]

Also times a tower workload (normal forms in a rank-2 tower) under each backend by
re-running itself in a subprocess with FREEQPI_PURE set.
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from freeqpi import _pykernels

try:
    from freeqpi import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def words(n, length, seed=0):
    rng = random.Random(seed)
    return [tuple(rng.choice((1, -1, 2, -2, 3, -3)) for _ in range(length)) for _ in range(n)]


def bench(mod, ws, repeat):
    pairs = list(zip(ws, ws[1:]))
    images = {1: (1, 2), 2: (2,), 3: (1, -2, 1)}
    jobs = {
        "free_reduce": lambda: [mod.free_reduce(w) for w in ws],
        "mul": lambda: [mod.mul(a, b) for a, b in pairs],
        "inverse": lambda: [mod.inverse(w) for w in ws],
        "power(5)": lambda: [mod.power(mod.free_reduce(w), 5) for w in ws],
        "cyclic_split": lambda: [mod.cyclic_split(mod.free_reduce(w)) for w in ws],
        "shortlex_key": lambda: [mod.shortlex_key(w) for w in ws],
        "substitute": lambda: [mod.substitute(w, images) for w in ws],
    }
    return {k: min(timeit.repeat(f, number=1, repeat=repeat)) for k, f in jobs.items()}


TOWER_JOB = """
import random, time
from freeqpi.tower import Tower
from freeqpi.pi_arith import PiSet
from freeqpi import kernels
T = Tower(["a", "b"], PiSet([2, 3])).adjoin_root("a", 2).adjoin_root("t1 b", 3)
rng = random.Random(1)
ws = [tuple(rng.choice((1, -1, 2, -2, 3, -3, 4, -4)) for _ in range(16)) for _ in range(3000)]
t = time.perf_counter()
for w in ws:
    T.normal_form(w)
print(kernels.BACKEND, time.perf_counter() - t)
"""


def tower_times():
    out = {}
    for pure in ("", "1"):
        env = dict(os.environ, FREEQPI_PURE=pure)
        if not pure:
            env.pop("FREEQPI_PURE")
        line = subprocess.run([sys.executable, "-c", TOWER_JOB], env=env, capture_output=True, text=True).stdout
        name, secs = line.split()
        out["pure" if pure else name] = float(secs)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--length", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    ws = words(args.n, args.length)
    py = bench(_pykernels, ws, args.repeat)
    c = bench(_ckernels, ws, args.repeat) if _ckernels else None
    print(f"{args.n} words of length {args.length}, best of {args.repeat}")
    print(f"{'kernel':14s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for k, t in py.items():
        if c:
            print(f"{k:14s} {t:10.4f} {c[k]:10.4f} {t / c[k]:7.1f}x")
        else:
            print(f"{k:14s} {t:10.4f} {'n/a':>10s}")
    tt = tower_times()
    print("tower normal forms (3000 words, rank 2): " + ", ".join(f"{k} {v:.3f} s" for k, v in tt.items()))


if __name__ == "__main__":
    main()
