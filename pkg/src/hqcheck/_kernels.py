"""Jitted hot loops for bulk GF(q) rank computation.

Every kernel is an exact integer algorithm with the same pivot rule as
gf.rank_ref; the numpy fallbacks in gf.py/local.py produce bit-identical
results, and the test suite asserts that.
"""

from __future__ import annotations

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is normally present
    numba = None
    HAVE_NUMBA = False


def set_threads(n: int) -> None:
    if not HAVE_NUMBA:
        return
    try:
        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_DEFAULT_NUM_THREADS)))
    except ValueError:  # pragma: no cover
        pass


def mod_table(q: int) -> np.ndarray:
    """modtab[moff + d] = d mod q for d in [-(q-1)^2, q-1]; moff = (q-1)^2."""
    moff = (q - 1) ** 2
    return np.array([(i - moff) % q for i in range(moff + q)], dtype=np.int16)


if HAVE_NUMBA:

    @numba.njit(cache=True, inline="always")
    def _rank_inplace(work, q, inv, modtab, moff):
        # rows >= rank hold zeros in every column left of the current one,
        # so all inner loops may start at the pivot column
        r, c = work.shape
        rank = 0
        for col in range(c):
            piv = -1
            for row in range(rank, r):
                if work[row, col] != 0:
                    piv = row
                    break
            if piv < 0:
                continue
            if piv != rank:
                for j in range(col, c):
                    t = work[rank, j]
                    work[rank, j] = work[piv, j]
                    work[piv, j] = t
            invp = inv[work[rank, col]]
            if invp != 1:
                for j in range(col, c):
                    work[rank, j] = (work[rank, j] * invp) % q
            for row in range(rank + 1, r):
                f = work[row, col]
                if f != 0:
                    for j in range(col, c):
                        work[row, j] = modtab[moff + work[row, j] - f * work[rank, j]]
            rank += 1
            if rank == r:
                break
        return rank

    @numba.njit(cache=True, parallel=True)
    def batch_rank_kernel(mats, q, inv, modtab, out):
        n = mats.shape[0]
        r, c = mats.shape[1], mats.shape[2]
        moff = (q - 1) * (q - 1)
        for i in numba.prange(n):
            work = np.empty((r, c), dtype=np.int16)
            for rr in range(r):
                for cc in range(c):
                    work[rr, cc] = mats[i, rr, cc] % q
            out[i] = _rank_inplace(work, q, inv, modtab, moff)

    @numba.njit(cache=True, parallel=True)
    def pair_rank_kernel(a, b, q, inv, modtab, out):
        na, r, c = a.shape
        nb = b.shape[0]
        moff = (q - 1) * (q - 1)
        for i in numba.prange(na):
            work = np.empty((r, c), dtype=np.int16)
            for j in range(nb):
                for rr in range(r):
                    for cc in range(c):
                        d = np.int16(a[i, rr, cc]) - np.int16(b[j, rr, cc])
                        work[rr, cc] = d + q if d < 0 else d
                out[i, j] = _rank_inplace(work, q, inv, modtab, moff)

else:  # pragma: no cover

    batch_rank_kernel = None
    pair_rank_kernel = None
