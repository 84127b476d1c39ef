"""GF(q) scalars and small-matrix primitives, tuned for bulk rank computation.

q is restricted to odd primes. Matrices are stored as packed row-major
residue arrays (uint8 digits); the hot paths operate on numpy batches and are
checked against a plain-Python reference eliminator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_RANK_TABLE_MAX = 2_000_000  # largest q**(rows*cols) for which a full table is built


def is_odd_prime(q: int) -> bool:
    if q < 3 or q % 2 == 0:
        return False
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def ff_add(a: int, b: int, q: int) -> int:
    return (a + b) % q


def ff_sub(a: int, b: int, q: int) -> int:
    return (a - b) % q


def ff_mul(a: int, b: int, q: int) -> int:
    return (a * b) % q


def ff_inv(a: int, q: int) -> int:
    """Multiplicative inverse in GF(q); zero has none."""
    a %= q
    if a == 0:
        raise ZeroDivisionError("inverse of zero in GF(%d)" % q)
    return pow(a, q - 2, q)


@lru_cache(maxsize=None)
def inverse_table(q: int) -> np.ndarray:
    """inv[a] for a in 1..q-1; inv[0] = 0 as a sentinel."""
    t = np.zeros(q, dtype=np.int16)
    for a in range(1, q):
        t[a] = pow(a, q - 2, q)
    t.setflags(write=False)
    return t


@lru_cache(maxsize=None)
def key_powers(q: int, n: int) -> np.ndarray:
    """Powers q**0 .. q**(n-1) used to pack digit vectors into int64 keys."""
    if q**n >= 2**63:
        raise OverflowError("vertex keys for q=%d, n=%d exceed int64" % (q, n))
    pw = q ** np.arange(n, dtype=np.int64)
    pw.setflags(write=False)
    return pw


def pack_keys(digits: np.ndarray, q: int) -> np.ndarray:
    """Pack (..., m) digit arrays into canonical int64 keys."""
    flat = digits.reshape(digits.shape[: digits.ndim - 2] + (-1,)) if digits.ndim >= 2 else digits
    return flat.astype(np.int64) @ key_powers(q, flat.shape[-1])


def unpack_keys(keys: np.ndarray, q: int, rows: int, cols: int) -> np.ndarray:
    """Inverse of pack_keys: int64 keys -> (..., rows, cols) uint8 digits."""
    keys = np.asarray(keys, dtype=np.int64)
    n = rows * cols
    out = np.empty(keys.shape + (n,), dtype=np.uint8)
    rem = keys.copy()
    for d in range(n):
        out[..., d] = rem % q
        rem //= q
    return out.reshape(keys.shape + (rows, cols))


@dataclass(frozen=True)
class MatVertex:
    """A rows x cols matrix over GF(q); a vertex of the bilinear forms graph."""

    q: int
    rows: int
    cols: int
    data: bytes

    def __post_init__(self):
        if len(self.data) != self.rows * self.cols:
            raise ValueError("entry count %d != rows*cols" % len(self.data))
        if any(b >= self.q for b in self.data):
            raise ValueError("entry out of GF(%d)" % self.q)

    @classmethod
    def from_array(cls, arr, q: int) -> "MatVertex":
        a = np.asarray(arr, dtype=np.int64) % q
        return cls(q=q, rows=a.shape[0], cols=a.shape[1], data=a.astype(np.uint8).tobytes())

    @classmethod
    def zero(cls, q: int, rows: int, cols: int) -> "MatVertex":
        return cls(q=q, rows=rows, cols=cols, data=bytes(rows * cols))

    def array(self) -> np.ndarray:
        return np.frombuffer(self.data, dtype=np.uint8).reshape(self.rows, self.cols)

    def key(self) -> int:
        return int(pack_keys(self.array(), self.q))

    def sub(self, other: "MatVertex") -> "MatVertex":
        if (self.rows, self.cols, self.q) != (other.rows, other.cols, other.q):
            raise ValueError("shape/field mismatch")
        return MatVertex.from_array(
            (self.array().astype(np.int16) - other.array()) % self.q, self.q
        )

    def add(self, other: "MatVertex") -> "MatVertex":
        if (self.rows, self.cols, self.q) != (other.rows, other.cols, other.q):
            raise ValueError("shape/field mismatch")
        return MatVertex.from_array(
            (self.array().astype(np.int16) + other.array()) % self.q, self.q
        )

    def transpose(self) -> "MatVertex":
        return MatVertex.from_array(self.array().T, self.q)

    def rank(self) -> int:
        return rank_ref(self.array(), self.q)

    def __sub__(self, other: "MatVertex") -> "MatVertex":
        return self.sub(other)


def rank_ref(mat, q: int) -> int:
    """Reference rank over GF(q): plain row reduction, first nonzero pivot."""
    work = [list(int(v) % q for v in row) for row in np.asarray(mat)]
    nrows = len(work)
    ncols = len(work[0]) if nrows else 0
    rank = 0
    for col in range(ncols):
        piv = None
        for r in range(rank, nrows):
            if work[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        inv = pow(work[rank][col], q - 2, q)
        work[rank] = [(v * inv) % q for v in work[rank]]
        for r in range(rank + 1, nrows):
            f = work[r][col]
            if f:
                work[r] = [(a - f * b) % q for a, b in zip(work[r], work[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


def batch_rank(mats: np.ndarray, q: int) -> np.ndarray:
    """Rank of each matrix in a (n, rows, cols) batch.

    Bit-identical to rank_ref on every input: same pivot rule (first nonzero
    in column order), exact arithmetic mod q throughout. Uses the jitted
    kernel when available, else the vectorized numpy eliminator.
    """
    from . import _kernels

    mats = np.asarray(mats)
    if mats.ndim != 3:
        raise ValueError("expected (n, rows, cols) batch")
    if _kernels.HAVE_NUMBA and mats.shape[0] >= 64:
        m16 = np.ascontiguousarray(mats, dtype=np.int16)
        out = np.empty(mats.shape[0], dtype=np.uint8)
        _kernels.batch_rank_kernel(m16, q, inverse_table(q), _kernels.mod_table(q), out)
        return out
    return _batch_rank_numpy(mats, q)


def _batch_rank_numpy(mats: np.ndarray, q: int) -> np.ndarray:
    m = np.ascontiguousarray(mats, dtype=np.int16) % q
    if m.ndim != 3:
        raise ValueError("expected (n, rows, cols) batch")
    n, r, c = m.shape
    rank = np.zeros(n, dtype=np.int16)
    if n == 0 or r == 0 or c == 0:
        return rank.astype(np.uint8)
    inv = inverse_table(q)
    row_idx = np.arange(r, dtype=np.int16)
    ar = np.arange(n)
    maxrank = min(r, c)
    for col in range(c):
        cand = (m[:, :, col] != 0) & (row_idx[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        piv = np.argmax(cand, axis=1)
        cur = np.minimum(rank, r - 1)
        pivrow = m[ar, piv, :].copy()
        currow = m[ar, cur, :].copy()
        pv = pivrow[ar, col]
        pivnorm = (pivrow * inv[pv][:, None]) % q
        hasm = has[:, None]
        m[ar, piv, :] = np.where(hasm, currow, m[ar, piv, :])
        m[ar, cur, :] = np.where(hasm, pivnorm, m[ar, cur, :])
        below = (row_idx[None, :] > cur[:, None]) & hasm
        fac = np.where(below, m[:, :, col], 0)
        m -= fac[:, :, None] * pivnorm[:, None, :]
        m %= q
        rank += has
        if rank.min() >= maxrank:
            break
    return rank.astype(np.uint8)


@lru_cache(maxsize=None)
def rank1_offsets(q: int, rows: int, cols: int) -> np.ndarray:
    """All rank-one matrices u v^t, u normalized to leading entry 1, v nonzero.

    Deterministic order; length (q**rows - 1)(q**cols - 1)/(q - 1).
    """
    us = []
    for lead in range(rows):
        tail = rows - lead - 1
        block = np.zeros((q**tail, rows), dtype=np.uint8)
        block[:, lead] = 1
        if tail:
            block[:, lead + 1 :] = unpack_keys(
                np.arange(q**tail, dtype=np.int64), q, 1, tail
            ).reshape(-1, tail)
        us.append(block)
    u = np.concatenate(us, axis=0)
    v = unpack_keys(np.arange(1, q**cols, dtype=np.int64), q, 1, cols).reshape(-1, cols)
    out = (u[:, None, :, None].astype(np.int16) * v[None, :, None, :]) % q
    out = out.reshape(-1, rows, cols).astype(np.uint8)
    out.setflags(write=False)
    return out


def enumerate_rank_one(q: int, rows: int, cols: int) -> list[MatVertex]:
    return [MatVertex(q=q, rows=rows, cols=cols, data=row.tobytes()) for row in rank1_offsets(q, rows, cols)]


def all_vertex_digits(q: int, rows: int, cols: int) -> np.ndarray:
    """Digit arrays of every vertex of the q**(rows*cols) matrix space."""
    total = q ** (rows * cols)
    if total > _RANK_TABLE_MAX:
        raise ValueError("matrix space too large to enumerate (%d vertices)" % total)
    return unpack_keys(np.arange(total, dtype=np.int64), q, rows, cols)


@lru_cache(maxsize=2)
def rank_table(q: int, rows: int, cols: int) -> np.ndarray:
    """rank of every matrix in the space, indexed by packed key."""
    digits = all_vertex_digits(q, rows, cols)
    out = batch_rank(digits, q)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SplitKeySpace:
    """Digitwise mod-q arithmetic on packed keys via two half-key tables.

    A key over m digits splits as hi * q**(m//2) + lo; adding or subtracting
    whole matrices then costs two table gathers instead of digit unpacking.
    """

    q: int
    m: int
    n_lo: int
    add_lo: np.ndarray
    add_hi: np.ndarray
    sub_lo: np.ndarray
    sub_hi: np.ndarray

    def split(self, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        keys = np.asarray(keys, dtype=np.int64)
        return (keys % self.n_lo).astype(np.int32), (keys // self.n_lo).astype(np.int32)

    def add(self, a_lo, a_hi, b_lo, b_hi) -> np.ndarray:
        return self.add_hi[a_hi, b_hi].astype(np.int64) * self.n_lo + self.add_lo[a_lo, b_lo]

    def sub(self, a_lo, a_hi, b_lo, b_hi) -> np.ndarray:
        return self.sub_hi[a_hi, b_hi].astype(np.int64) * self.n_lo + self.sub_lo[a_lo, b_lo]


def _half_tables(q: int, h: int) -> tuple[np.ndarray, np.ndarray]:
    n = q**h
    digits = unpack_keys(np.arange(n, dtype=np.int64), q, 1, h).reshape(n, h)
    pw = key_powers(q, h)
    add = ((digits[:, None, :].astype(np.int16) + digits[None, :, :]) % q).astype(np.int64) @ pw
    sub = ((digits[:, None, :].astype(np.int16) - digits[None, :, :]) % q).astype(np.int64) @ pw
    return add.astype(np.int32), sub.astype(np.int32)


@lru_cache(maxsize=2)
def split_key_space(q: int, m: int) -> SplitKeySpace:
    h_lo = m // 2
    h_hi = m - h_lo
    if q**h_hi > 4096:
        raise ValueError("half-key tables too large for q=%d, m=%d" % (q, m))
    add_lo, sub_lo = _half_tables(q, h_lo)
    add_hi, sub_hi = _half_tables(q, h_hi)
    for t in (add_lo, sub_lo, add_hi, sub_hi):
        t.setflags(write=False)
    return SplitKeySpace(q=q, m=m, n_lo=q**h_lo, add_lo=add_lo, add_hi=add_hi, sub_lo=sub_lo, sub_hi=sub_hi)
