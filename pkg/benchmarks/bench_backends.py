"""Timing harness for the IDEMQ_BACKEND kernel lanes.

Two workloads:

  synthetic - rank of random dense matrices mod p, which is exactly the
              loop the numba kernel compiles
  pipeline  - a small homotopy computation over F_7, where elimination
              time is buried under bookkeeping

Run as a script:

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --sizes 200 400 --repeat 5

Backends are switched in-process through the same env flag users set, so
numbers include whatever dispatch overhead the flag costs. The numba lane
gets one untimed warmup call to pay for compilation.
"""

from __future__ import annotations

import argparse
import os
import random
import time
from fractions import Fraction

import numpy as np

from idemq import kernels
from idemq.derived import quotient_homotopy
from idemq.fields import GF
from idemq.ideals import IdealFamily
from idemq.rings import RingSpec, VarInfo
from idemq.sparsela import rank_rows

P = 7


def _use(name: str) -> None:
    os.environ["IDEMQ_BACKEND"] = name
    kernels.reset_backend()


def _lanes() -> list[str]:
    names = ["python", "numpy"]
    if kernels.HAS_NUMBA:
        names.append("numba")
    return names


def _fmt(seconds: float) -> str:
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    if seconds < 1.0:
        return f"{seconds * 1e3:8.2f} ms"
    return f"{seconds:8.3f} s "


# ---------- synthetic: dense rank mod p ----------


def _random_rows(rng: random.Random, n: int, density: float) -> list[dict]:
    rows = []
    for _ in range(n):
        row = {}
        for j in range(n):
            if rng.random() < density:
                row[j] = rng.randrange(1, P)
        rows.append(row)
    return rows


def bench_synthetic(sizes: list[int], density: float, repeat: int) -> None:
    rng = random.Random(11)
    field = GF(P)
    print(f"rank of random n x n matrices mod {P}, density {density}")
    print(f"{'n':>6}  " + "".join(f"{name:>12}" for name in _lanes()))
    for n in sizes:
        rows = _random_rows(rng, n, density)
        cells = []
        want = None
        for name in _lanes():
            _use(name)
            if name == "numba":
                rank_rows([dict(r) for r in rows], n, field)  # compile
            best = float("inf")
            for _ in range(repeat):
                work = [dict(r) for r in rows]
                t0 = time.perf_counter()
                got = rank_rows(work, n, field)
                best = min(best, time.perf_counter() - t0)
            if want is None:
                want = got
            assert got == want, f"{name} disagrees on rank"
            cells.append(_fmt(best))
        print(f"{n:>6}  " + "".join(f"{c:>12}" for c in cells))


# ---------- pipeline: homotopy over F_7 ----------


def bench_pipeline(repeat: int) -> None:
    field = GF(P)
    spec = RingSpec(
        field,
        2,
        (VarInfo("x", divisible=True), VarInfo("y", divisible=True)),
        ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))),
    )
    print(f"\nquotient homotopy over F_{P}, two root variables, degrees <= 3")
    print(f"{'lane':>6}  {'best':>12}")
    for name in _lanes():
        _use(name)
        best = float("inf")
        runs = repeat + (1 if name == "numba" else 0)
        for i in range(runs):
            fam = IdealFamily(name="I", spec=spec, root_vars=(0, 1))
            t0 = time.perf_counter()
            qh = quotient_homotopy(spec, fam, 3)
            dt = time.perf_counter() - t0
            if name == "numba" and i == 0:
                continue  # warmup pays compilation
            best = min(best, dt)
        assert qh.dims == (1, 2, 1, 0)
        print(f"{name:>6}  {_fmt(best):>12}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--density", type=float, default=0.3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--skip-pipeline", action="store_true")
    args = ap.parse_args()

    saved = os.environ.get("IDEMQ_BACKEND")
    try:
        bench_synthetic(args.sizes, args.density, args.repeat)
        if not args.skip_pipeline:
            bench_pipeline(args.repeat)
    finally:
        if saved is None:
            os.environ.pop("IDEMQ_BACKEND", None)
        else:
            os.environ["IDEMQ_BACKEND"] = saved
        kernels.reset_backend()


if __name__ == "__main__":
    main()
