"""Batched string-distance kernels.

Two interchangeable backends compute the same all-pairs Levenshtein matrix:
a numba ``@njit`` loop and a pure-numpy version vectorised over pairs.
``CDIMPACT_DISABLE_NUMBA=1`` (or a missing numba install) selects numpy.
"""
from __future__ import annotations

import os
from typing import Sequence

import numpy as np

_FLAG = "CDIMPACT_DISABLE_NUMBA"

try:  # pragma: no cover - exercised implicitly by whichever backend is active
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _numba_requested() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


_backend = "numba" if HAVE_NUMBA and _numba_requested() else "numpy"


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


def encode(strings: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Flatten strings into (code points, offsets) arrays."""
    offsets = np.zeros(len(strings) + 1, dtype=np.int64)
    if strings:
        np.cumsum([len(s) for s in strings], out=offsets[1:])
    joined = "".join(strings)
    codes = np.frombuffer(joined.encode("utf-32-le"), dtype=np.uint32).astype(np.int32) \
        if joined else np.zeros(0, dtype=np.int32)
    return codes, offsets


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _lev_pairs_numba(ca, oa, cb, ob, out):  # pragma: no cover - compiled
        na = oa.shape[0] - 1
        nb = ob.shape[0] - 1
        maxb = 0
        for j in range(nb):
            if ob[j + 1] - ob[j] > maxb:
                maxb = ob[j + 1] - ob[j]
        row = np.empty(maxb + 1, dtype=np.int64)
        for i in range(na):
            a0 = oa[i]
            la = oa[i + 1] - a0
            for j in range(nb):
                b0 = ob[j]
                lb = ob[j + 1] - b0
                for k in range(lb + 1):
                    row[k] = k
                for x in range(la):
                    diag = row[0]
                    row[0] = x + 1
                    cx = ca[a0 + x]
                    for y in range(lb):
                        up = row[y + 1]
                        best = diag + (0 if cx == cb[b0 + y] else 1)
                        if up + 1 < best:
                            best = up + 1
                        if row[y] + 1 < best:
                            best = row[y] + 1
                        row[y + 1] = best
                        diag = up
                out[i, j] = row[lb]


def _pad(strings: Sequence[str], fill: int) -> tuple[np.ndarray, np.ndarray]:
    lens = np.fromiter((len(s) for s in strings), dtype=np.int64, count=len(strings))
    width = int(lens.max()) if len(strings) else 0
    arr = np.full((len(strings), width), fill, dtype=np.int32)
    for i, s in enumerate(strings):
        if s:
            arr[i, :len(s)] = np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32)
    return arr, lens


def _lev_matrix_numpy(a: Sequence[str], b: Sequence[str], chunk_cells: int = 4_000_000) -> np.ndarray:
    A, la = _pad(a, -1)
    B, lb = _pad(b, -2)
    na, nb = len(a), len(b)
    out = np.empty((na, nb), dtype=np.int64)
    if na == 0 or nb == 0:
        return out
    wb = B.shape[1]
    cols = np.arange(nb)
    rows_per_chunk = max(1, chunk_cells // max(1, nb * (wb + 1)))
    for start in range(0, na, rows_per_chunk):
        stop = min(na, start + rows_per_chunk)
        Ac, lac = A[start:stop], la[start:stop]
        prev = np.broadcast_to(np.arange(wb + 1, dtype=np.int64), (stop - start, nb, wb + 1)).copy()
        block = out[start:stop]
        zero = lac == 0
        if zero.any():
            block[zero] = lb
        for x in range(Ac.shape[1]):
            cur = np.empty_like(prev)
            cur[:, :, 0] = x + 1
            cost = (Ac[:, x, None, None] != B[None, :, :]).astype(np.int64)
            sub = prev[:, :, :-1] + cost
            dele = prev[:, :, 1:] + 1
            base = np.minimum(sub, dele)
            # insertion runs left to right along the row
            for y in range(wb):
                cur[:, :, y + 1] = np.minimum(base[:, :, y], cur[:, :, y] + 1)
            done = lac == x + 1
            if done.any():
                idx = np.nonzero(done)[0]
                block[idx] = cur[idx][:, cols, lb]
            prev = cur
    return out


def levenshtein_matrix(a: Sequence[str], b: Sequence[str]) -> np.ndarray:
    """All-pairs edit distance, shape ``(len(a), len(b))``."""
    a, b = list(a), list(b)
    if _backend == "numba":
        ca, oa = encode(a)
        cb, ob = encode(b)
        out = np.empty((len(a), len(b)), dtype=np.int64)
        if len(a) and len(b):
            _lev_pairs_numba(ca, oa, cb, ob, out)
        return out
    return _lev_matrix_numpy(a, b)


def jaccard_matrix(a: Sequence[frozenset], b: Sequence[frozenset]) -> np.ndarray:
    """All-pairs Jaccard index of sets; two empty sets score 1.0."""
    a, b = list(a), list(b)
    # only items present on both sides can contribute to an intersection
    shared = set().union(*a) & set().union(*b) if a and b else set()
    vocab = {item: k for k, item in enumerate(sorted(shared, key=repr))}
    Ia = np.zeros((len(a), len(vocab)), dtype=np.float64)
    Ib = np.zeros((len(b), len(vocab)), dtype=np.float64)
    for i, s in enumerate(a):
        Ia[i, [vocab[x] for x in s if x in vocab]] = 1.0
    for j, s in enumerate(b):
        Ib[j, [vocab[x] for x in s if x in vocab]] = 1.0
    size_a = np.array([len(s) for s in a], dtype=np.float64)
    size_b = np.array([len(s) for s in b], dtype=np.float64)
    inter = Ia @ Ib.T
    union = size_a[:, None] + size_b[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(union > 0, inter / np.where(union > 0, union, 1.0), 1.0)
    return out
