"""Compare the numba and numpy similarity backends, then time the full pipeline.

    python3 benchmarks/bench_kernels.py [--sizes 100,400,1000] [--repeat 3]
"""
from __future__ import annotations

import argparse
import random
import string
import time

import numpy as np

from cdimpact import _kernels
from cdimpact.builtin import load_builtin
from cdimpact.checklist import build_checklist, render_text
from cdimpact.differ import diff_models
from cdimpact.engine import evaluate_all
from cdimpact.synthetic import generate_synthetic


def random_names(n: int, rng: random.Random) -> list[str]:
    return ["".join(rng.choice(string.ascii_letters) for _ in range(rng.randint(4, 14)))
            for _ in range(n)]


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels(sizes: list[int], repeat: int) -> None:
    rng = random.Random(0)
    print(f"{'n x n':>12} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8}")
    for n in sizes:
        a, b = random_names(n, rng), random_names(n, rng)
        results = {}
        timing = {}
        for name in ("numba", "numpy"):
            if name == "numba" and not _kernels.HAVE_NUMBA:
                continue
            _kernels.set_backend(name)
            _kernels.levenshtein_matrix(a[:2], b[:2])  # compile / warm up
            timing[name] = best_of(lambda: results.__setitem__(name, _kernels.levenshtein_matrix(a, b)), repeat)
        if len(results) == 2:
            assert np.array_equal(results["numba"], results["numpy"]), "backends disagree"
        nb = timing.get("numba", float("nan"))
        npy = timing["numpy"]
        print(f"{n:>5} x {n:<5} {nb:>10.4f} {npy:>10.4f} {npy / nb:>8.1f}")


def bench_pipeline(classes: int, edits: int, repeat: int) -> None:
    case = generate_synthetic(classes, edits, seed=1)
    rules, reg = load_builtin()
    for name in ("numba", "numpy"):
        if name == "numba" and not _kernels.HAVE_NUMBA:
            continue
        _kernels.set_backend(name)

        def run() -> None:
            dm = diff_models(case.old, case.new)
            render_text(build_checklist(rules, evaluate_all(rules, dm, reg)))

        print(f"pipeline {classes} classes / {edits} edits, {name}: {best_of(run, repeat):.3f} s")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="100,400,1000")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--classes", type=int, default=4000)
    p.add_argument("--edits", type=int, default=500)
    args = p.parse_args()
    bench_kernels([int(s) for s in args.sizes.split(",")], args.repeat)
    bench_pipeline(args.classes, args.edits, args.repeat)


if __name__ == "__main__":
    main()
