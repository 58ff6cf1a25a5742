"""Hot string-DP kernels: character edit distance and token LCS.

Both kernels exist twice: a numba-compiled version and a vectorized numpy
fallback. The active implementation is picked at import time; set
``PARAEVAL_NO_NUMBA=1`` to force the numpy path (also used when numba is
not importable). ``benchmarks/bench_kernels.py`` compares the two.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = [
    "ACTIVE_IMPL",
    "levenshtein_codes",
    "lcs_codes",
    "str_to_codes",
    "tokens_to_ids",
]

_FORCE_NUMPY = os.environ.get("PARAEVAL_NO_NUMBA", "").strip() not in ("", "0")

try:
    if _FORCE_NUMPY:
        raise ImportError
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False


def str_to_codes(s: str) -> np.ndarray:
    """Unicode code points of ``s`` as an int32 array."""
    if not s:
        return np.empty(0, dtype=np.int32)
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.int32)


def tokens_to_ids(a: tuple, b: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Map two token sequences onto a shared int32 id space."""
    ids: dict = {}
    for tok in a:
        ids.setdefault(tok, len(ids))
    for tok in b:
        ids.setdefault(tok, len(ids))
    a_ids = np.fromiter((ids[t] for t in a), dtype=np.int32, count=len(a))
    b_ids = np.fromiter((ids[t] for t in b), dtype=np.int32, count=len(b))
    return a_ids, b_ids


def _levenshtein_py(a: np.ndarray, b: np.ndarray) -> int:
    # Two-row DP; compiled by numba when available.
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1, dtype=np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(n):
        cur[0] = i + 1
        ai = a[i]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            x = prev[j - 1] + cost
            y = prev[j] + 1
            z = cur[j - 1] + 1
            if y < x:
                x = y
            if z < x:
                x = z
            cur[j] = x
        prev, cur = cur, prev
    return int(prev[m])


def _lcs_py(a: np.ndarray, b: np.ndarray) -> int:
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    prev = np.zeros(m + 1, dtype=np.int64)
    cur = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        ai = a[i]
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                x = prev[j]
                y = cur[j - 1]
                cur[j] = x if x >= y else y
        prev, cur = cur, prev
        cur[:] = 0
    return int(prev[m])


def _levenshtein_numpy(a: np.ndarray, b: np.ndarray) -> int:
    # Row-vectorized DP. The insertion dependency along a row is resolved
    # with the running-minimum identity cur[j] = j + min_{k<=j}(base[k] - k).
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1, dtype=np.int64)
    idx = np.arange(m + 1, dtype=np.int64)
    for i in range(n):
        cost = (a[i] != b).astype(np.int64)
        base = np.empty(m + 1, dtype=np.int64)
        base[0] = i + 1
        base[1:] = np.minimum(prev[:-1] + cost, prev[1:] + 1)
        prev = idx + np.minimum.accumulate(base - idx)
    return int(prev[m])


def _lcs_numpy(a: np.ndarray, b: np.ndarray) -> int:
    # cur[j] = max(prev[j], prev[j-1] + eq, cur[j-1]); the cur[j-1] term is
    # a prefix maximum, so one accumulate per row suffices.
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    prev = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        eq = (a[i] == b).astype(np.int64)
        cand = np.empty(m + 1, dtype=np.int64)
        cand[0] = 0
        cand[1:] = np.maximum(prev[1:], prev[:-1] + eq)
        prev = np.maximum.accumulate(cand)
    return int(prev[m])


if _HAVE_NUMBA:
    levenshtein_njit = njit(cache=True)(_levenshtein_py)
    lcs_njit = njit(cache=True)(_lcs_py)
    levenshtein_codes = levenshtein_njit
    lcs_codes = lcs_njit
    ACTIVE_IMPL = "numba"
else:
    levenshtein_njit = None
    lcs_njit = None
    levenshtein_codes = _levenshtein_numpy
    lcs_codes = _lcs_numpy
    ACTIVE_IMPL = "numpy"

levenshtein_numpy = _levenshtein_numpy
lcs_numpy = _lcs_numpy
