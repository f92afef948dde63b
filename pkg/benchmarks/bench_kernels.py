"""Time the numba and pure-numpy builds of each hot kernel on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

Compilation is triggered before timing, so the numbers are steady-state.
"""

import argparse
import timeit

import numpy as np

from docexpand import kernels


def bm25_case(r, scale):
    n_docs, n_terms = int(50_000 * scale), 2_000
    df = r.integers(1, max(2, n_docs // 20), n_terms)
    offsets = np.concatenate([[0], np.cumsum(df)]).astype(np.int64)
    docs = np.concatenate([np.sort(r.choice(n_docs, d, replace=False)) for d in df]).astype(np.int64)
    tfs = r.integers(1, 5, docs.size).astype(np.int32)
    lengths = r.integers(20, 400, n_docs).astype(np.float64)
    terms = np.unique(r.integers(0, n_terms, 12)).astype(np.int64)
    idfs = r.uniform(0.1, 5, terms.size)

    def run(f):
        f(offsets, docs, tfs, terms, idfs, lengths, lengths.mean(), 0.9, 0.4, np.zeros(n_docs))
    return run


def maxpool_case(r, scale):
    n_docs = int(50_000 * scale)
    owner = r.integers(0, n_docs, 1000).astype(np.int64)
    sims = r.uniform(-1, 1, owner.size)

    def run(f):
        f(owner, sims, np.full(n_docs, -np.inf), np.zeros(n_docs, np.bool_))
    return run


def centroid_case(r, scale):
    X = r.normal(size=(int(20_000 * scale), 64))
    C = r.normal(size=(20, 64))
    return lambda f: f(X, C)


def mmr_case(r, scale):
    n = int(400 * scale)
    rel = r.uniform(-1, 1, n)
    sim = r.uniform(-1, 1, (n, n))
    return lambda f: f(rel, sim, 20, 0.7)


CASES = {
    "bm25_accumulate": bm25_case,
    "maxpool_scatter": maxpool_case,
    "nearest_centroid": centroid_case,
    "mmr_select": mmr_case,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args()
    r = np.random.default_rng(0)
    print(f"{'kernel':<18}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, make in CASES.items():
        run = make(r, args.scale)
        impl = kernels.implementations(name)
        run(impl["numba"])  # compile
        best = {}
        for label, f in impl.items():
            best[label] = min(timeit.repeat(lambda: run(f), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<18}{best['numpy']:>12.2f}{best['numba']:>12.2f}{best['numpy'] / best['numba']:>9.1f}x")


if __name__ == "__main__":
    main()
