#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--sweeps N] [--tokens N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lecturemap._accel import _pure

try:
    from lecturemap._accel import _core
except ImportError:
    _core = None


def bench(label, fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def bench_emd(backend, n_frames=2000, bins=256):
    rng = np.random.default_rng(0)
    hists = rng.random((n_frames, bins))
    hists /= hists.sum(axis=1, keepdims=True)
    return bench("emd", lambda: backend.emd_1d_consecutive(hists))


def bench_gibbs(backend, n_tokens, sweeps, n_topics=8, vocab=500, n_docs=50):
    rng = np.random.default_rng(1)
    doc_of = rng.integers(0, n_docs, n_tokens).astype(np.int64)
    word_of = rng.integers(0, vocab, n_tokens).astype(np.int64)

    def run():
        z = rng.integers(0, n_topics, n_tokens).astype(np.int64)
        n_dk = np.zeros((n_docs, n_topics), dtype=np.int64)
        n_kw = np.zeros((n_topics, vocab), dtype=np.int64)
        n_k = np.zeros(n_topics, dtype=np.int64)
        np.add.at(n_dk, (doc_of, z), 1)
        np.add.at(n_kw, (z, word_of), 1)
        np.add.at(n_k, z, 1)
        for _ in range(sweeps):
            pdf = rng.random((n_tokens, n_topics)) + 1e-3
            uniforms = rng.random(n_tokens)
            backend.gibbs_sweep(z, doc_of, word_of, n_dk, n_kw, n_k,
                                0.5, 0.01, pdf, uniforms)

    return bench("gibbs", run, repeats=2)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sweeps", type=int, default=50)
    parser.add_argument("--tokens", type=int, default=2000)
    args = parser.parse_args()

    backends = [("pure", _pure)]
    if _core is not None:
        backends.append(("compiled", _core))
    else:
        print("compiled backend not built; showing pure only")

    print(f"{'kernel':<28}" + "".join(f"{name:>12}" for name, _ in backends)
          + ("     speedup" if len(backends) == 2 else ""))
    rows = [
        ("emd_1d_consecutive 2000x256",
         [bench_emd(b) for _, b in backends]),
        (f"gibbs {args.sweeps} sweeps x {args.tokens} tok",
         [bench_gibbs(b, args.tokens, args.sweeps) for _, b in backends]),
    ]
    for label, times in rows:
        line = f"{label:<28}" + "".join(f"{t * 1000:>10.1f}ms" for t in times)
        if len(times) == 2 and times[1] > 0:
            line += f"{times[0] / times[1]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
