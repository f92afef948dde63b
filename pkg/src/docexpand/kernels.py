"""Hot inner loops, each with a numba build and a pure-numpy fallback.

The active implementation is chosen once at import time from the
``DOCEXPAND_NUMBA`` environment variable (``0``/``false``/``off`` disables
numba).  Both variants are always importable as ``<name>_numpy`` and
``<name>_numba`` so tests and the benchmark can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def _flag_enabled() -> bool:
    return os.environ.get("DOCEXPAND_NUMBA", "1").strip().lower() not in ("0", "false", "off", "no")


USE_NUMBA = HAVE_NUMBA and _flag_enabled()


# --- BM25 posting accumulation -----------------------------------------------

def bm25_accumulate_numpy(offsets, postings_doc, postings_tf, term_ids, idfs, doc_len,
                          avg_len, k1, b, scores):
    """Add each query term's BM25 contribution into ``scores`` in place."""
    for t, idf in zip(term_ids, idfs):
        lo, hi = offsets[t], offsets[t + 1]
        docs = postings_doc[lo:hi]
        tf = postings_tf[lo:hi].astype(np.float64)
        norm = k1 * (1.0 - b + b * doc_len[docs] / avg_len)
        scores[docs] += idf * (tf * (k1 + 1.0) / (tf + norm))
    return scores


@njit(cache=True, nogil=True)
def bm25_accumulate_numba(offsets, postings_doc, postings_tf, term_ids, idfs, doc_len,
                          avg_len, k1, b, scores):
    for i in range(term_ids.shape[0]):
        t = term_ids[i]
        idf = idfs[i]
        for p in range(offsets[t], offsets[t + 1]):
            d = postings_doc[p]
            tf = np.float64(postings_tf[p])
            norm = k1 * (1.0 - b + b * doc_len[d] / avg_len)
            scores[d] += idf * (tf * (k1 + 1.0) / (tf + norm))
    return scores


# --- max-pooling of query hits onto documents --------------------------------

def maxpool_scatter_numpy(owner, sims, out, hit):
    """``out[owner[i]] = max(out[owner[i]], sims[i])`` and mark ``hit[owner[i]]``.

    ``out`` must be pre-filled with ``-inf``.
    """
    np.maximum.at(out, owner, sims)
    hit[owner] = True
    return out


@njit(cache=True, nogil=True)
def maxpool_scatter_numba(owner, sims, out, hit):
    for i in range(owner.shape[0]):
        d = owner[i]
        if sims[i] > out[d]:
            out[d] = sims[i]
        hit[d] = True
    return out


# --- nearest-centroid assignment (L2) -----------------------------------------

def nearest_centroid_numpy(X, C):
    """Return (labels, distances) of the L2-nearest row of ``C`` for each row of ``X``.

    Ties resolve to the lowest centroid index.
    """
    n = X.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n, dtype=np.float64)
    step = max(1, 2_000_000 // max(1, C.size))
    for lo in range(0, n, step):
        diff = X[lo:lo + step, None, :] - C[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        lab = np.argmin(d2, axis=1)
        labels[lo:lo + step] = lab
        dists[lo:lo + step] = np.sqrt(d2[np.arange(d2.shape[0]), lab])
    return labels, dists


@njit(cache=True, nogil=True)
def nearest_centroid_numba(X, C):
    n, m = X.shape
    k = C.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n, dtype=np.float64)
    for i in range(n):
        best = np.inf
        arg = 0
        for j in range(k):
            s = 0.0
            for c in range(m):
                v = X[i, c] - C[j, c]
                s += v * v
            if s < best:
                best = s
                arg = j
        labels[i] = arg
        dists[i] = np.sqrt(best)
    return labels, dists


# --- greedy maximal marginal relevance ---------------------------------------

def mmr_select_numpy(relevance, similarity, top_n, lam):
    """Greedy MMR over candidates already sorted by their tie-break key."""
    n = relevance.shape[0]
    top_n = min(top_n, n)
    chosen = np.zeros(n, dtype=np.bool_)
    redundancy = np.full(n, -np.inf)
    order = np.empty(top_n, dtype=np.int64)
    for step in range(top_n):
        if step == 0:
            obj = relevance.astype(np.float64).copy()
        else:
            obj = lam * relevance - (1.0 - lam) * redundancy
        obj[chosen] = -np.inf
        pick = int(np.argmax(obj))
        order[step] = pick
        chosen[pick] = True
        redundancy = np.maximum(redundancy, similarity[pick])
    return order


@njit(cache=True, nogil=True)
def mmr_select_numba(relevance, similarity, top_n, lam):
    n = relevance.shape[0]
    if top_n > n:
        top_n = n
    chosen = np.zeros(n, dtype=np.bool_)
    redundancy = np.full(n, -np.inf)
    order = np.empty(top_n, dtype=np.int64)
    for step in range(top_n):
        best = -np.inf
        pick = -1
        for c in range(n):
            if chosen[c]:
                continue
            if step == 0:
                obj = relevance[c]
            else:
                obj = lam * relevance[c] - (1.0 - lam) * redundancy[c]
            if pick < 0 or obj > best:
                best = obj
                pick = c
        order[step] = pick
        chosen[pick] = True
        for c in range(n):
            if similarity[pick, c] > redundancy[c]:
                redundancy[c] = similarity[pick, c]
    return order


def _select(name):
    return globals()[f"{name}_numba" if USE_NUMBA else f"{name}_numpy"]


bm25_accumulate = _select("bm25_accumulate")
maxpool_scatter = _select("maxpool_scatter")
nearest_centroid = _select("nearest_centroid")
mmr_select = _select("mmr_select")

KERNELS = ("bm25_accumulate", "maxpool_scatter", "nearest_centroid", "mmr_select")


def implementations(name: str) -> dict:
    """Both variants of a kernel, keyed ``numpy``/``numba``."""
    g = globals()
    return {"numpy": g[f"{name}_numpy"], "numba": g[f"{name}_numba"]}
