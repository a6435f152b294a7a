"""Time each kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

The numba column excludes compilation (one warm-up call per kernel).
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from zrasr.ablation import AblationConfig, build_language
from zrasr.g2p import _initial_logp, _lattice, _pairs
from zrasr.kernels import backends


def workloads(seed: int):
    rng = np.random.default_rng(seed)
    ref = rng.integers(0, 50, 400)
    hyp = rng.integers(0, 50, 400)
    logits = rng.normal(size=(2000, 40))
    labels = rng.integers(0, 40, 20000)
    pairs = _pairs(build_language(AblationConfig(), seed).lexicon)
    inventory = _lattice(pairs, None)
    arrays = _lattice(pairs, {g: i for i, g in enumerate(inventory)})
    logp = _initial_logp(inventory)
    return {
        "edit_distance_matrix 400x400": lambda k: k.edit_distance_matrix(ref, hyp),
        "row_logsumexp 2000x40": lambda k: k.row_logsumexp(logits),
        "greedy_collapse 2000x40": lambda k: k.greedy_collapse(logits, 0),
        "ctc_collapse 20000": lambda k: k.ctc_collapse(labels, 0),
        f"forward_backward {len(pairs)} words": lambda k: k.forward_backward(logp, *arrays),
        f"viterbi {len(pairs)} words": lambda k: k.viterbi(logp, *arrays),
    }


def best_of(fn, kernels, repeat: int) -> float:
    fn(kernels)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(kernels)
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    impls = backends()
    names = sorted(impls)
    print("kernel".ljust(34) + "".join(f"{n:>12}" for n in names) + "     speedup")
    for label, fn in workloads(args.seed).items():
        t = {n: best_of(fn, impls[n], args.repeat) for n in names}
        row = label.ljust(34) + "".join(f"{1e3 * t[n]:>10.3f}ms" for n in names)
        if "numba" in t:
            row += f"{t['numpy'] / t['numba']:>11.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
