"""Benchmark the string-DP kernels: numba @njit versus the numpy fallback.

Run with the default environment to get the numba path compiled; the numpy
fallback is imported explicitly here, so one process times both. Setting
PARAEVAL_NO_NUMBA=1 shows what a numba-less install would dispatch to.
"""
import random
import time

import numpy as np

from paraeval import kernels

rng = random.Random(20240501)
ALPHABET = "abcdefghijklmnopqrstuvwxyz .,"


def random_codes(n):
    s = "".join(rng.choice(ALPHABET) for _ in range(n))
    return kernels.str_to_codes(s)


def time_impl(fn, pairs, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for a, b in pairs:
            fn(a, b)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    print(f"dispatch selected at import: {kernels.ACTIVE_IMPL}")
    impls = [("numpy", kernels.levenshtein_numpy, kernels.lcs_numpy)]
    if kernels.levenshtein_njit is not None:
        # trigger compilation outside the timed region
        warm = random_codes(8)
        kernels.levenshtein_njit(warm, warm)
        kernels.lcs_njit(warm, warm)
        impls.append(("numba", kernels.levenshtein_njit, kernels.lcs_njit))
    else:
        print("numba unavailable or disabled; timing the numpy path only")

    for length, count in [(20, 2000), (80, 500), (200, 150), (600, 20)]:
        pairs = [(random_codes(length), random_codes(length)) for _ in range(count)]
        print(f"\nstrings of length {length}, {count} pairs:")
        for name, lev, lcs in impls:
            lev_t = time_impl(lev, pairs)
            lcs_t = time_impl(lcs, pairs)
            print(
                f"  {name:>6}: levenshtein {lev_t * 1e3:8.1f} ms"
                f"   lcs {lcs_t * 1e3:8.1f} ms"
            )

    # sanity: both paths agree
    for _ in range(200):
        a, b = random_codes(rng.randint(0, 64)), random_codes(rng.randint(0, 64))
        assert kernels.levenshtein_numpy(a, b) == kernels.levenshtein_codes(a, b)
        assert kernels.lcs_numpy(a, b) == kernels.lcs_codes(a, b)
    print("\nagreement check passed (200 random pairs)")


if __name__ == "__main__":
    main()
