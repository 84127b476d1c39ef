"""Ground-truth engine for a fixed pair (x, y) at distance k: neighborhoods,
the six-class partition of Gamma(x), equitable-quotient counts, cross-distance
censuses, the local spectrum, and the breadth-first audit of the rank metric.

Every count is taken over every vertex (no sampling); constancy violations
surface as typed exceptions carrying a witness.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exactlin import det as frac_det
from .gf import (
    MatVertex,
    batch_rank,
    inverse_table,
    pack_keys,
    rank1_offsets,
    rank_table,
    split_key_space,
)
from .params import (
    GraphParams,
    class_patterns,
    dual_eigenvalues,
    eigenvalues,
    intersection_numbers,
    local_spectrum_table,
    sphere_size,
    valency,
)
from .util import chunk_ranges, map_chunks

_DIST_MATRIX_BYTE_LIMIT = 512 * 1024 * 1024
_PAIR_CHUNK_TARGET = 2_000_000  # differences per batch_rank call

CONTEXT_MAGIC = b"HQCTX3\n"


class StructuralViolation(Exception):
    """A neighbor fails to match any partition class signature."""

    def __init__(self, payload: dict):
        self.payload = payload
        super().__init__(f"partition structure violated: {payload}")


class EquitabilityViolation(Exception):
    """A per-vertex count that must be class-constant is not."""

    def __init__(self, payload: dict):
        self.payload = payload
        super().__init__(f"equitability violated: {payload}")


def canonical_pair(p: GraphParams, k: int) -> tuple[MatVertex, MatVertex]:
    """x = zero matrix, y = identity block of size k; distance is exactly k."""
    p.validate_k(k)
    x = MatVertex.zero(p.q, p.D, p.e)
    arr = np.zeros((p.D, p.e), dtype=np.uint8)
    for i in range(k):
        arr[i, i] = 1
    return x, MatVertex.from_array(arr, p.q)


def random_pair(p: GraphParams, k: int, seed: int) -> tuple[MatVertex, MatVertex]:
    """x uniform, y = x + (random rank-k matrix); deterministic per seed."""
    p.validate_k(k)
    rng = np.random.default_rng(seed)
    x = rng.integers(0, p.q, size=(p.D, p.e)).astype(np.uint8)

    def full_rank(rows: int, cols: int, r: int) -> np.ndarray:
        while True:
            m = rng.integers(0, p.q, size=(rows, cols)).astype(np.uint8)
            if batch_rank(m[None, :, :], p.q)[0] == r:
                return m

    u = full_rank(p.D, k, k)
    v = full_rank(k, p.e, k)
    y = (x.astype(np.int64) + u.astype(np.int64) @ v.astype(np.int64)) % p.q
    return MatVertex.from_array(x, p.q), MatVertex.from_array(y, p.q)


def neighbors(p: GraphParams, v: MatVertex) -> list[MatVertex]:
    """All vertices at rank-distance one from v; length equals the valency."""
    arr = neighbor_digits(p, v)
    return [MatVertex(q=p.q, rows=p.D, cols=p.e, data=row.tobytes()) for row in arr]


def neighbor_digits(p: GraphParams, v: MatVertex) -> np.ndarray:
    off = rank1_offsets(p.q, p.D, p.e)
    return ((v.array().astype(np.int16)[None, :, :] + off) % p.q).astype(np.uint8)


def distance(p: GraphParams, u: MatVertex, v: MatVertex) -> int:
    """Rank of the difference; audited against path-length by the BFS audit."""
    return int(batch_rank((u.sub(v)).array()[None], p.q)[0])


def _pair_chunk_rows(nb: int) -> int:
    from . import _kernels

    target = _PAIR_CHUNK_TARGET * (8 if _kernels.HAVE_NUMBA else 1)
    return max(1, target // max(1, nb))


def _dist_chunk(a_digits: np.ndarray, b_digits: np.ndarray, q: int, lo: int, hi: int) -> np.ndarray:
    from . import _kernels

    ca, nb = hi - lo, b_digits.shape[0]
    if _kernels.HAVE_NUMBA:
        out = np.empty((ca, nb), dtype=np.uint8)
        _kernels.pair_rank_kernel(
            np.ascontiguousarray(a_digits[lo:hi]),
            np.ascontiguousarray(b_digits),
            q,
            inverse_table(q),
            _kernels.mod_table(q),
            out,
        )
        return out
    diff = (a_digits[lo:hi, None, :, :].astype(np.int16) - b_digits[None, :, :, :]) % q
    return batch_rank(diff.reshape(ca * nb, *a_digits.shape[1:]), q).reshape(ca, nb)


def iter_dist_chunks(a_digits, b_digits, q, threads=1, stored: np.ndarray | None = None):
    """Yield (lo, dist_block) covering all rows of a_digits, in order."""
    n = a_digits.shape[0]
    ranges = chunk_ranges(n, _pair_chunk_rows(b_digits.shape[0]))
    if stored is not None:
        for lo, hi in ranges:
            yield lo, stored[lo:hi]
        return
    yield from zip(
        (lo for lo, _ in ranges),
        map_chunks(lambda r: _dist_chunk(a_digits, b_digits, q, *r), ranges, threads),
    )


def offsets_distance_matrix(p: GraphParams, threads: int = 1, audit_rows: int = 48) -> np.ndarray:
    """dist[i][j] = rank(m_i - m_j) over the rank-one offsets; shared by the
    local graphs of every vertex (translation invariance).

    The difference of two distinct products u v^t is singular iff the u's or
    the v's agree projectively, which pins the rank to {0, 1, 2} by pure id
    comparison. The shortcut is audited per call: audit_rows rows (all rows,
    for small neighborhoods) are recomputed with the generic eliminator and
    must agree bit for bit.
    """
    from .gf import unpack_keys

    q = p.q
    off = rank1_offsets(q, p.D, p.e)
    n = off.shape[0]
    if n * n > _DIST_MATRIX_BYTE_LIMIT:
        raise MemoryError("local distance matrix would need %d bytes" % (n * n))
    nv = q**p.e - 1
    idx = np.arange(n, dtype=np.int64)
    uid = (idx // nv).astype(np.int32)
    v_digits = unpack_keys(np.arange(1, nv + 1, dtype=np.int64), q, 1, p.e).reshape(nv, p.e)
    lead = np.argmax(v_digits != 0, axis=1)
    scale = inverse_table(q)[v_digits[np.arange(nv), lead]].astype(np.int16)
    v_norm = (v_digits.astype(np.int16) * scale[:, None]) % q
    pv_keys = pack_keys(v_norm[:, None, :], q).ravel()
    pvid = pv_keys[(idx % nv).astype(np.int64)].astype(np.int64)

    out = np.empty((n, n), dtype=np.uint8)
    for lo, hi in chunk_ranges(n, max(1, 4_000_000 // n)):
        singular = (uid[lo:hi, None] == uid[None, :]) | (pvid[lo:hi, None] == pvid[None, :])
        block = np.where(singular, np.uint8(1), np.uint8(2))
        block[np.arange(lo, hi) - lo, np.arange(lo, hi)] = 0
        out[lo:hi] = block

    audit_idx = np.arange(n) if n <= 1536 else np.unique(
        np.concatenate([[0, n - 1], np.random.default_rng(n).choice(n, audit_rows, replace=False)])
    )
    audited = _dist_chunk(off[audit_idx], off, q, 0, audit_idx.size)
    if not (audited == out[audit_idx]).all():
        bad = np.argwhere(audited != out[audit_idx])[0]
        raise StructuralViolation(
            {
                "what": "rank-one pencil shortcut disagrees with eliminator",
                "row": int(audit_idx[bad[0]]),
                "col": int(bad[1]),
            }
        )
    return out


@dataclass
class LocalContext:
    """A fixed pair at distance k with both six-class partitions and the full
    per-vertex distance censuses of Gamma(x) and Gamma(y)."""

    p: GraphParams
    k: int
    x: MatVertex
    y: MatVertex
    dist_y: np.ndarray  # distance of each Gamma(x) member to y
    dist_x: np.ndarray  # distance of each Gamma(y) member to x
    class_x: np.ndarray  # 0..5 over Gamma(x)
    class_y: np.ndarray  # 0..5 over Gamma(y)
    census_xx: np.ndarray  # (kappa, 6, D+1): per z in Gamma(x), counts into (class of Gamma(x), distance)
    census_yy: np.ndarray
    census_xy: np.ndarray  # per z in Gamma(x), counts into (class of Gamma(y), distance)

    @property
    def kappa(self) -> int:
        return self.dist_y.shape[0]

    def sizes(self, side: str = "x") -> tuple[int, ...]:
        cls = self.class_x if side == "x" else self.class_y
        return tuple(int(c) for c in np.bincount(cls, minlength=6))

    def neighbors_x(self) -> list[MatVertex]:
        return neighbors(self.p, self.x)

    def neighbors_y(self) -> list[MatVertex]:
        return neighbors(self.p, self.y)


def _classify_side(p, k, levels, nminus, nplus) -> np.ndarray:
    """Assign classes from distance levels and common-neighbor signatures."""
    patterns = class_patterns(p, k)
    classes = np.full(levels.shape[0], -1, dtype=np.int8)
    classes[levels == k - 1] = 0
    classes[levels == k + 1] = 5
    mid = levels == k
    for cls, (nm, npl) in patterns.items():
        classes[mid & (nminus == nm) & (nplus == npl)] = cls - 1
    if (classes < 0).any():
        i = int(np.argmax(classes < 0))
        raise StructuralViolation(
            {
                "index": i,
                "distance": int(levels[i]),
                "n_minus": int(nminus[i]),
                "n_plus": int(nplus[i]),
                "patterns": {str(c): list(v) for c, v in patterns.items()},
            }
        )
    return classes


def _census_from_chunks(chunks, col_classes, dmax: int, n_rows: int) -> np.ndarray:
    census = np.zeros((n_rows, 6, dmax + 1), dtype=np.int64)
    code_cols = col_classes.astype(np.int32) * (dmax + 1)
    nbins = 6 * (dmax + 1)
    for lo, block in chunks:
        code = code_cols[None, :] + block
        for r in range(block.shape[0]):
            census[lo + r] = np.bincount(code[r], minlength=nbins).reshape(6, dmax + 1)
    return census


def build_local_context(
    p: GraphParams,
    k: int,
    x: MatVertex | None = None,
    y: MatVertex | None = None,
    *,
    threads: int = 1,
    low_memory: bool = False,
    dist_xx: np.ndarray | None = None,
) -> LocalContext:
    """Classify both partitions and take the full pairwise distance censuses.

    dist_xx, when supplied, must be the offsets_distance_matrix of p; with
    low_memory the Gamma(x) x Gamma(y) block is streamed and never stored.
    """
    p.validate_k(k)
    if x is None or y is None:
        x, y = canonical_pair(p, k)
    if distance(p, x, y) != k:
        raise ValueError("pair is not at distance k")
    q = p.q
    off = rank1_offsets(q, p.D, p.e)
    kappa = off.shape[0]
    w = x.sub(y).array().astype(np.int16)  # x - y

    dist_y = batch_rank((off.astype(np.int16) + w) % q, q)  # (x + m) - y
    dist_x = batch_rank((off.astype(np.int16) - w) % q, q)  # (y + m) - x
    for levels, side in ((dist_y, "x"), (dist_x, "y")):
        stray = ~np.isin(levels, (k - 1, k, k + 1))
        if stray.any():
            i = int(np.argmax(stray))
            raise StructuralViolation({"side": side, "index": i, "distance": int(levels[i])})

    if dist_xx is None and not low_memory:
        dist_xx = offsets_distance_matrix(p, threads=threads)

    # common-neighbor signatures for the distance-k rows of both sides
    nminus_x = np.zeros(kappa, dtype=np.int64)
    nplus_x = np.zeros(kappa, dtype=np.int64)
    nminus_y = np.zeros(kappa, dtype=np.int64)
    nplus_y = np.zeros(kappa, dtype=np.int64)
    my = ((dist_y == k - 1).astype(np.int32), (dist_y == k + 1).astype(np.int32))
    mx = ((dist_x == k - 1).astype(np.int32), (dist_x == k + 1).astype(np.int32))
    for lo, block in iter_dist_chunks(off, off, q, threads=threads, stored=dist_xx):
        adj = (block == 1).astype(np.int32)
        hi = lo + block.shape[0]
        nminus_x[lo:hi] = adj @ my[0]
        nplus_x[lo:hi] = adj @ my[1]
        nminus_y[lo:hi] = adj @ mx[0]
        nplus_y[lo:hi] = adj @ mx[1]
    class_x = _classify_side(p, k, dist_y, nminus_x, nplus_x)
    class_y = _classify_side(p, k, dist_x, nminus_y, nplus_y)

    dmax = p.D
    census_xx = _census_from_chunks(
        iter_dist_chunks(off, off, q, threads=threads, stored=dist_xx), class_x, dmax, kappa
    )
    census_yy = _census_from_chunks(
        iter_dist_chunks(off, off, q, threads=threads, stored=dist_xx), class_y, dmax, kappa
    )
    nx = ((x.array().astype(np.int16)[None] + off) % q).astype(np.uint8)
    ny = ((y.array().astype(np.int16)[None] + off) % q).astype(np.uint8)
    census_xy = _census_from_chunks(
        iter_dist_chunks(nx, ny, q, threads=threads), class_y, dmax, kappa
    )
    return LocalContext(
        p=p,
        k=k,
        x=x,
        y=y,
        dist_y=dist_y,
        dist_x=dist_x,
        class_x=class_x,
        class_y=class_y,
        census_xx=census_xx,
        census_yy=census_yy,
        census_xy=census_xy,
    )


def _constant_rows(census_slice: np.ndarray, classes: np.ndarray, what: str) -> np.ndarray:
    """Verify census rows are constant within each class; return the 6 rows."""
    out = np.zeros((6,) + census_slice.shape[1:], dtype=np.int64)
    for cls in range(6):
        members = np.nonzero(classes == cls)[0]
        rows = census_slice[members]
        first = rows[0]
        bad = np.nonzero((rows != first[None]).any(axis=tuple(range(1, rows.ndim))))[0]
        if bad.size:
            raise EquitabilityViolation(
                {
                    "what": what,
                    "class": cls + 1,
                    "vertex_index": int(members[bad[0]]),
                    "row": rows[bad[0]].tolist(),
                    "expected": first.tolist(),
                }
            )
        out[cls] = first
    return out


def empirical_quotient(ctx: LocalContext, side: str = "x") -> tuple[tuple[int, ...], ...]:
    """The adjacency counts into each class, verified constant over every vertex."""
    census = ctx.census_xx if side == "x" else ctx.census_yy
    classes = ctx.class_x if side == "x" else ctx.class_y
    rows = _constant_rows(census[:, :, 1], classes, f"quotient[{side}]")
    return tuple(tuple(int(v) for v in r) for r in rows)


def empirical_cross(ctx: LocalContext, ell: int) -> tuple[tuple[int, ...], ...]:
    """Counts of the other side's classes at distance ell, verified constant."""
    if ell < 0:
        raise ValueError("negative distance")
    if ell > ctx.p.D:
        return tuple((0,) * 6 for _ in range(6))
    rows = _constant_rows(ctx.census_xy[:, :, ell], ctx.class_x, f"cross[{ell}]")
    return tuple(tuple(int(v) for v in r) for r in rows)


def census_row_totals_ok(ctx: LocalContext) -> bool:
    """Every census row must account for the whole opposite neighborhood."""
    kappa = ctx.kappa
    return bool(
        (ctx.census_xx.sum(axis=(1, 2)) == kappa).all()
        and (ctx.census_yy.sum(axis=(1, 2)) == kappa).all()
        and (ctx.census_xy.sum(axis=(1, 2)) == kappa).all()
    )


def local_adjacency(p: GraphParams, dist_xx: np.ndarray) -> np.ndarray:
    """Local graph adjacency as float64 (exact 0/1 values)."""
    return (dist_xx == 1).astype(np.float64)


def _bounded_matmul(a: np.ndarray, b: np.ndarray, bound_a: float, bound_b_colsum: float):
    """float64 matmul that is exact because every partial sum stays below 2^53."""
    bound = bound_a * bound_b_colsum
    if bound >= 2**53:
        raise OverflowError("matrix product bound %.3g exceeds exact float64 range" % bound)
    return a @ b, bound


def local_spectrum_check(p: GraphParams, dist_xx: np.ndarray) -> dict:
    """Annihilate the local adjacency by its five eigenvalue factors and
    recover multiplicities from traces; both must match the closed-form table.
    """
    table = local_spectrum_table(p)
    a1 = table[0][0]
    adj = local_adjacency(p, dist_xx)
    kappa = adj.shape[0]
    if int(adj.sum()) != kappa * a1 or np.diagonal(adj).any():
        raise StructuralViolation({"what": "local adjacency is not a1-regular"})

    eigs = sorted((e for e, _ in table), key=abs)
    ident = np.eye(kappa)
    prod = adj - eigs[0] * ident
    bound = float(max(1, abs(eigs[0])))
    for e in eigs[1:]:
        prod, bound = _bounded_matmul(prod, adj - e * ident, bound, a1 + abs(e))
    if prod.any():
        nz = np.argwhere(prod)[0]
        raise StructuralViolation(
            {"what": "annihilator product nonzero", "entry": [int(nz[0]), int(nz[1])]}
        )

    traces = [Fraction(kappa)]
    power = ident
    bound = 1.0
    for _ in range(4):
        power, bound = _bounded_matmul(power, adj, bound, a1)
        traces.append(Fraction(int(round(power.trace()))))
    # solve the 5x5 Vandermonde system sum_r mult_r eig_r^m = trace_m exactly
    eig_list = [e for e, _ in table]
    vander = [[Fraction(e) ** m for e in eig_list] for m in range(5)]
    mults = _solve_fraction(vander, traces)
    recovered = {e: m for e, m in zip(eig_list, mults)}
    expected = {e: Fraction(m) for e, m in table}
    if recovered != expected:
        raise StructuralViolation(
            {
                "what": "multiplicity mismatch",
                "recovered": {str(e): str(m) for e, m in recovered.items()},
                "expected": {str(e): str(m) for e, m in expected.items()},
            }
        )
    return {
        "multiplicities": [int(m) for _, m in table],
        "trace": int(traces[1]),
        "trace_sq": int(traces[2]),
    }


def _solve_fraction(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(a)
    work = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = next(r for r in range(col, n) if work[r][col] != 0)
        work[col], work[piv] = work[piv], work[col]
        inv = 1 / work[col][col]
        work[col] = [v * inv for v in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [u - f * v for u, v in zip(work[r], work[col])]
    return [work[r][n] for r in range(n)]


def verify_local_basis(p: GraphParams, dist_xx: np.ndarray, seed: int = 0) -> dict:
    """The E-images of a neighborhood span the eigenspace: check the two scalar
    nonvanishing conditions and that the interpolation polynomial through the
    nontrivial local eigenvalues maps the local adjacency to the all-ones matrix.
    """
    th = eigenvalues(p)
    ts = dual_eigenvalues(p)
    table = local_spectrum_table(p)
    a1 = table[0][0]
    kappa = valency(p)
    if th[1] * ts[1] == 0:
        raise StructuralViolation({"what": "theta1 theta*_1 vanished"})
    for e, _ in table[1:]:
        if (ts[1] - ts[2]) * (e + p.q + 1) == 0:
            raise StructuralViolation({"what": "local Gram eigenvalue vanished", "eig": e})

    adj = local_adjacency(p, dist_xx)
    nontrivial = sorted((e for e, _ in table[1:]), key=abs)
    ident = np.eye(kappa)
    prod = adj - nontrivial[0] * ident
    bound = float(max(1, abs(nontrivial[0])))
    for e in nontrivial[1:]:
        prod, bound = _bounded_matmul(prod, adj - e * ident, bound, a1 + abs(e))
    g_at_a1 = 1
    for e in nontrivial:
        g_at_a1 *= a1 - e
    if bound * kappa >= 2**53:
        raise OverflowError("exactness bound exceeded")
    lhs = np.rint(prod * kappa).astype(np.int64)
    if not (lhs == g_at_a1).all():
        nz = np.argwhere(lhs != g_at_a1)[0]
        raise StructuralViolation(
            {"what": "interpolation image is not all-ones", "entry": [int(nz[0]), int(nz[1])]}
        )

    rng = np.random.default_rng(seed)
    sub = rng.choice(kappa, size=6, replace=False)
    asub = dist_xx[np.ix_(sub, sub)] == 1
    gram = [
        [
            Fraction(ts[0] if i == j else (ts[1] if asub[i][j] else ts[2]))
            for j in range(6)
        ]
        for i in range(6)
    ]
    d = frac_det(gram)
    if d == 0:
        raise StructuralViolation({"what": "sampled local Gram is singular", "subset": sub.tolist()})
    return {"poly_value_at_a1": g_at_a1, "spot_det_nonzero": True}


@dataclass(frozen=True)
class BfsAudit:
    sphere_sizes: tuple[int, ...]
    vertex_count: int
    matches_rank: bool


def bfs_distance_audit(
    p: GraphParams, *, limit: int = 2_000_000, threads: int = 1, chunk: int = 1024
) -> BfsAudit:
    """Full breadth-first search from the zero matrix, comparing path-length
    distance with matrix rank on every vertex and sphere sizes with the
    closed-form counts. Fatal on any mismatch."""
    total = p.vertex_count
    if total > limit:
        raise ValueError("configuration too large for BFS audit (%d vertices)" % total)
    q = p.q
    space = split_key_space(q, p.D * p.e)
    off_keys = pack_keys(rank1_offsets(q, p.D, p.e), q)
    off_lo, off_hi = space.split(off_keys)
    dist = np.full(total, -1, dtype=np.int8)
    dist[0] = 0
    frontier = np.array([0], dtype=np.int64)
    level = 0
    sphere_sizes = [1]

    while frontier.size:
        level += 1
        f_lo, f_hi = space.split(frontier)

        def expand(rg):
            lo, hi = rg
            return space.add(
                f_lo[lo:hi, None], f_hi[lo:hi, None], off_lo[None, :], off_hi[None, :]
            ).ravel()

        seen = np.zeros(total, dtype=bool)
        for keys in map_chunks(expand, chunk_ranges(frontier.size, chunk), threads):
            seen[keys] = True
        fresh = np.nonzero(seen)[0]
        fresh = fresh[dist[fresh] < 0]
        dist[fresh] = level
        frontier = fresh
        if frontier.size:
            sphere_sizes.append(int(frontier.size))
        if level > p.D + 1:
            raise StructuralViolation({"what": "BFS exceeded the diameter", "level": level})

    if (dist < 0).any():
        raise StructuralViolation({"what": "graph not connected under BFS"})
    expected = tuple(sphere_size(p, i) for i in range(p.D + 1))
    if tuple(sphere_sizes) != expected:
        raise StructuralViolation(
            {"what": "sphere sizes disagree", "got": sphere_sizes, "want": list(expected)}
        )
    ranks = rank_table(q, p.D, p.e)
    if not (dist == ranks.astype(np.int8)).all():
        i = int(np.argmax(dist != ranks.astype(np.int8)))
        raise StructuralViolation(
            {"what": "BFS distance != rank", "key": i, "bfs": int(dist[i]), "rank": int(ranks[i])}
        )
    return BfsAudit(sphere_sizes=tuple(sphere_sizes), vertex_count=total, matches_rank=True)


def rank_metric_spot_audit(p: GraphParams, seed: int = 0, samples: int = 40) -> dict:
    """Light-weight rank-metric cross-validation for configurations too large
    to BFS: triangle inequality, symmetry, and the sphere-intersection counts
    |Gamma(u) n Gamma_j(w)| = c_i/a_i/b_i for random pairs at each distance i."""
    rng = np.random.default_rng(seed)
    q = p.q
    off = rank1_offsets(q, p.D, p.e).astype(np.int16)
    checked = 0
    for _ in range(samples):
        u = rng.integers(0, q, size=(p.D, p.e)).astype(np.int16)
        v = rng.integers(0, q, size=(p.D, p.e)).astype(np.int16)
        w = rng.integers(0, q, size=(p.D, p.e)).astype(np.int16)
        duv = batch_rank(((u - v) % q)[None], q)[0]
        dvu = batch_rank(((v - u) % q)[None], q)[0]
        dvw = batch_rank(((v - w) % q)[None], q)[0]
        duw = batch_rank(((u - w) % q)[None], q)[0]
        if duv != dvu or duw > duv + dvw:
            raise StructuralViolation({"what": "rank metric axioms failed"})
        checked += 1
    for i in range(1, p.D + 1):
        x, y = random_pair(p, i, int(rng.integers(0, 2**63 - 1))) if 2 <= i <= p.D - 1 else _pair_at(p, i)
        wdiff = x.sub(y).array().astype(np.int16)
        levels = batch_rank((off + wdiff) % q, q)
        counts = np.bincount(levels, minlength=p.D + 2)
        c, a, b = intersection_numbers(p, i)
        want = {i - 1: c, i: a, i + 1: b}
        for lvl in range(p.D + 2):
            if counts[lvl] != want.get(lvl, 0):
                raise StructuralViolation(
                    {"what": "sphere intersection count", "i": i, "level": lvl, "got": int(counts[lvl])}
                )
    return {"triangle_samples": checked, "distances_checked": p.D}


def _pair_at(p: GraphParams, i: int) -> tuple[MatVertex, MatVertex]:
    x = MatVertex.zero(p.q, p.D, p.e)
    arr = np.zeros((p.D, p.e), dtype=np.uint8)
    for j in range(i):
        arr[j, j] = 1
    return x, MatVertex.from_array(arr, p.q)


def context_cache_key(p: GraphParams, k: int, x: MatVertex, y: MatVertex) -> str:
    h = hashlib.sha256()
    h.update(f"{p.q},{p.D},{p.N},{k}".encode())
    h.update(x.data)
    h.update(y.data)
    return h.hexdigest()[:16]


def save_context(ctx: LocalContext, path) -> None:
    """Versioned binary cache: magic, JSON header, then the packed arrays."""
    header = {
        "version": 3,
        "q": ctx.p.q,
        "D": ctx.p.D,
        "N": ctx.p.N,
        "k": ctx.k,
        "x": ctx.x.data.hex(),
        "y": ctx.y.data.hex(),
    }
    with open(path, "wb") as fh:
        fh.write(CONTEXT_MAGIC)
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        for arr in (
            ctx.dist_y,
            ctx.dist_x,
            ctx.class_x,
            ctx.class_y,
            ctx.census_xx,
            ctx.census_yy,
            ctx.census_xy,
        ):
            np.save(fh, arr, allow_pickle=False)


def load_context(path, p: GraphParams, k: int, x: MatVertex, y: MatVertex) -> LocalContext | None:
    """Load a cached context; None when the file is absent or keyed differently."""
    try:
        fh = open(path, "rb")
    except FileNotFoundError:
        return None
    with fh:
        if fh.read(len(CONTEXT_MAGIC)) != CONTEXT_MAGIC:
            return None
        header = json.loads(fh.readline().decode())
        if header != {
            "version": 3,
            "q": p.q,
            "D": p.D,
            "N": p.N,
            "k": k,
            "x": x.data.hex(),
            "y": y.data.hex(),
        }:
            return None
        arrays = [np.load(fh, allow_pickle=False) for _ in range(7)]
    return LocalContext(p, k, x, y, *arrays)
