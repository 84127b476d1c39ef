"""Exact inner products of E-images of formal vertex sums.

The generic path pairs up supports, groups by distance and applies the dual
eigenvalues once per distance class. For the identity suites over a fixed
pair (x, y), the atom space (the twelve partition classes plus x and y) is
precomputed from the counted censuses, so every inner product among class
sums is a few hundred exact rational operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .exactlin import mat_rank, vec_dot
from .gf import MatVertex, pack_keys
from .local import LocalContext, iter_dist_chunks, neighbor_digits
from .params import GraphParams, ParamBundle, dual_eigenvalues, IdentityCheck
from .exactlin import frac_str


class VertexSum:
    """Finitely supported rational combination of vertices; keys are the
    packed entry bytes, zero coefficients are never stored."""

    __slots__ = ("q", "rows", "cols", "terms")

    def __init__(self, q: int, rows: int, cols: int, terms: dict[bytes, Fraction] | None = None):
        self.q = q
        self.rows = rows
        self.cols = cols
        self.terms: dict[bytes, Fraction] = {}
        if terms:
            for key, coeff in terms.items():
                self.add_term(key, coeff)

    @classmethod
    def zero_like(cls, p: GraphParams) -> "VertexSum":
        return cls(p.q, p.D, p.e)

    @classmethod
    def single(cls, v: MatVertex, coeff=1) -> "VertexSum":
        out = cls(v.q, v.rows, v.cols)
        out.add_term(v.data, coeff)
        return out

    @classmethod
    def from_digits(cls, digits: np.ndarray, q: int, coeff=1) -> "VertexSum":
        out = cls(q, digits.shape[1], digits.shape[2])
        for row in digits:
            out.add_term(row.astype(np.uint8).tobytes(), coeff)
        return out

    def add_term(self, key: bytes, coeff) -> None:
        c = self.terms.get(key, Fraction(0)) + Fraction(coeff)
        if c:
            self.terms[key] = c
        else:
            self.terms.pop(key, None)

    def scaled(self, c) -> "VertexSum":
        c = Fraction(c)
        out = VertexSum(self.q, self.rows, self.cols)
        if c:
            out.terms = {k: v * c for k, v in self.terms.items()}
        return out

    def plus(self, other: "VertexSum") -> "VertexSum":
        out = VertexSum(self.q, self.rows, self.cols, dict(self.terms))
        for k, v in other.terms.items():
            out.add_term(k, v)
        return out

    def minus(self, other: "VertexSum") -> "VertexSum":
        return self.plus(other.scaled(-1))

    def __len__(self) -> int:
        return len(self.terms)

    def support_digits(self) -> np.ndarray:
        keys = sorted(self.terms)
        arr = np.zeros((len(keys), self.rows, self.cols), dtype=np.uint8)
        for i, key in enumerate(keys):
            arr[i] = np.frombuffer(key, dtype=np.uint8).reshape(self.rows, self.cols)
        return arr

    def coeffs(self) -> list[Fraction]:
        return [self.terms[k] for k in sorted(self.terms)]


def _int_coeffs(coeffs: list[Fraction]) -> tuple[np.ndarray, int]:
    scale = lcm(*(c.denominator for c in coeffs)) if coeffs else 1
    ints = [int(c * scale) for c in coeffs]
    return np.array(ints, dtype=object), scale


def e_inner(p: GraphParams, u: VertexSum, v: VertexSum, threads: int = 1) -> Fraction:
    """<E u, E v> = |X|^{-1} sum_{a,b} u_a v_b theta*_{d(a,b)}, exact."""
    if not u.terms or not v.terms:
        return Fraction(0)
    ts = dual_eigenvalues(p)
    ua, us = _int_coeffs(u.coeffs())
    va, vs = _int_coeffs(v.coeffs())
    ud = u.support_digits()
    vd = v.support_digits()
    weights = [0] * (p.D + 1)
    umax = max(1, max(abs(int(c)) for c in ua))
    vmax = max(1, max(abs(int(c)) for c in va))
    int64_ok = umax * vmax * len(va) < 2**62
    u64 = ua.astype(np.int64) if int64_ok else None
    v64 = va.astype(np.int64) if int64_ok else None
    for lo, block in iter_dist_chunks(ud, vd, p.q, threads=threads):
        hi = lo + block.shape[0]
        for d in range(p.D + 1):
            mask = block == d
            if not mask.any():
                continue
            if int64_ok:
                weights[d] += int(u64[lo:hi] @ (mask @ v64))
            else:
                rows, cols = np.nonzero(mask)
                weights[d] += sum(
                    int(ua[lo + r]) * int(va[c]) for r, c in zip(rows.tolist(), cols.tolist())
                )
    total = sum(Fraction(w * t) for w, t in zip(weights, ts))
    return total / (us * vs * p.vertex_count)


def e_norm_zero(p: GraphParams, u: VertexSum, threads: int = 1) -> bool:
    return e_inner(p, u, u, threads=threads) == 0


def gram(p: GraphParams, sums: list[VertexSum], threads: int = 1) -> list[list[Fraction]]:
    n = len(sums)
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            val = e_inner(p, sums[i], sums[j], threads=threads)
            out[i][j] = val
            out[j][i] = val
    return out


# ---------------------------------------------------------------------------
# atom space over a fixed local context

ATOM_NAMES = tuple(
    [f"O{i}" for i in range(1, 7)] + [f"O{i}p" for i in range(1, 7)] + ["x", "y"]
)
N_ATOMS = 14
AtomVec = list  # 14 Fractions


@dataclass
class AtomSpace:
    """Distance statistics between the twelve classes and the base pair,
    reduced from the context censuses; inner products of any rational
    combination of these atoms are exact."""

    ctx: LocalContext
    pair_weight: list[list[int]]  # sum_d hist[a][b][d] theta*_d, |X| times inner

    @property
    def p(self) -> GraphParams:
        return self.ctx.p

    def inner(self, u: AtomVec, v: AtomVec) -> Fraction:
        total = Fraction(0)
        for a, ua in enumerate(u):
            if not ua:
                continue
            row = self.pair_weight[a]
            acc = Fraction(0)
            for b, vb in enumerate(v):
                if vb:
                    acc += vb * row[b]
            total += ua * acc
        return total / self.p.vertex_count

    def norm_zero(self, u: AtomVec) -> bool:
        return self.inner(u, u) == 0

    def gram(self, vecs: list[AtomVec]) -> list[list[Fraction]]:
        n = len(vecs)
        out = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                val = self.inner(vecs[i], vecs[j])
                out[i][j] = val
                out[j][i] = val
        return out

    def gram_rank(self, vecs: list[AtomVec]) -> int:
        return mat_rank(self.gram(vecs))

    def lift(self, u: AtomVec) -> VertexSum:
        """Expand an atom vector into the explicit vertex sum it abbreviates."""
        ctx = self.ctx
        out = VertexSum(ctx.p.q, ctx.p.D, ctx.p.e)
        nx = neighbor_digits(ctx.p, ctx.x)
        ny = neighbor_digits(ctx.p, ctx.y)
        for i in range(6):
            if u[i]:
                for row in nx[ctx.class_x == i]:
                    out.add_term(row.tobytes(), u[i])
            if u[6 + i]:
                for row in ny[ctx.class_y == i]:
                    out.add_term(row.tobytes(), u[6 + i])
        if u[12]:
            out.add_term(ctx.x.data, u[12])
        if u[13]:
            out.add_term(ctx.y.data, u[13])
        return out


def unit(a: int) -> AtomVec:
    out = [Fraction(0)] * N_ATOMS
    out[a] = Fraction(1)
    return out


def combine(*pairs) -> AtomVec:
    """combine((c1, v1), (c2, v2), ...) = sum c_i v_i in atom coordinates."""
    out = [Fraction(0)] * N_ATOMS
    for c, v in pairs:
        c = Fraction(c)
        if c:
            for i in range(N_ATOMS):
                out[i] += c * v[i]
    return out


def build_atom_space(ctx: LocalContext) -> AtomSpace:
    p = ctx.p
    ts = dual_eigenvalues(p)
    dmax = p.D
    hist = np.zeros((N_ATOMS, N_ATOMS, dmax + 1), dtype=np.int64)
    for i in range(6):
        mx = ctx.class_x == i
        my = ctx.class_y == i
        hist[i, 0:6] = ctx.census_xx[mx].sum(axis=0)
        hist[6 + i, 6:12] = ctx.census_yy[my].sum(axis=0)
        hist[i, 6:12] = ctx.census_xy[mx].sum(axis=0)
        hist[6 + i, 0:6] = 0  # filled by symmetry below
        hist[i, 12, 1] = int(mx.sum())
        hist[i, 13] = np.bincount(ctx.dist_y[mx], minlength=dmax + 1)
        hist[6 + i, 13, 1] = int(my.sum())
        hist[6 + i, 12] = np.bincount(ctx.dist_x[my], minlength=dmax + 1)
    for a in range(12):
        for b in range(12, 14):
            hist[b, a] = hist[a, b]
    for i in range(6):
        for j in range(6):
            hist[6 + j, i] = hist[i, 6 + j]
    hist[12, 12, 0] = 1
    hist[13, 13, 0] = 1
    hist[12, 13, ctx.k] = 1
    hist[13, 12, ctx.k] = 1
    pw = [
        [int(sum(int(hist[a, b, d]) * ts[d] for d in range(dmax + 1))) for b in range(N_ATOMS)]
        for a in range(N_ATOMS)
    ]
    return AtomSpace(ctx=ctx, pair_weight=pw)


# ---------------------------------------------------------------------------
# named vectors in atom coordinates


@dataclass
class NamedVectors:
    """Atom coordinates of every vector the identity suites reason about."""

    x: AtomVec
    y: AtomVec
    o: list[AtomVec]  # class sums O_1..O_6
    op: list[AtomVec]  # primed class sums
    h: list[AtomVec]
    hp: list[AtomVec]
    ov: list[AtomVec]  # O^vee_i = O_i - lambda_i x
    hv: list[AtomVec]  # h^vee_j = h_j - mu_j x
    omega: AtomVec


def named_vectors(bundle: ParamBundle) -> NamedVectors:
    t = bundle.tables
    H = bundle.H
    x = unit(12)
    y = unit(13)
    o = [unit(i) for i in range(6)]
    op = [unit(6 + i) for i in range(6)]
    h = [combine(*((H[i][j], o[i]) for i in range(6))) for j in range(6)]
    hp = [combine(*((H[i][j], op[i]) for i in range(6))) for j in range(6)]
    ov = [combine((1, o[i]), (-t.lam[i], x)) for i in range(6)]
    hv = [combine((1, h[j]), (-t.mu[j], x)) for j in range(6)]
    return NamedVectors(x=x, y=y, o=o, op=op, h=h, hp=hp, ov=ov, hv=hv, omega=h[5])


def verify_span_identities(atoms: AtomSpace, bundle: ParamBundle) -> list[IdentityCheck]:
    """Certify, against the counted censuses, every vanishing-norm and Gram
    identity tying the class sums, the h bases, the vee vectors and the pair
    vectors together."""
    p, k = bundle.p, bundle.k
    t = bundle.tables
    ts = bundle.theta_star
    th1 = bundle.theta[1]
    X = p.vertex_count
    v = named_vectors(bundle)
    out: list[IdentityCheck] = []

    def add(name, ok, witness=None):
        out.append(IdentityCheck(name, bool(ok), None if ok else witness))

    def vanishes(name, vec):
        n2 = atoms.inner(vec, vec)
        add(name, n2 == 0, {"norm_sq": frac_str(n2)})

    ip_xx = atoms.inner(v.x, v.x)
    ip_xy = atoms.inner(v.x, v.y)
    add("pair-self-inner", ip_xx == Fraction(ts[0], X), {"got": frac_str(ip_xx)})
    add("pair-cross-inner", ip_xy == Fraction(ts[k], X), {"got": frac_str(ip_xy)})
    add("pair-independent", ip_xx * ip_xx - ip_xy * ip_xy > 0)

    q1k = Fraction(1, p.q ** (k - 1))
    dep = combine(
        (1, v.y), (Fraction(1 - q1k, p.q - 1), v.x), (-q1k, v.o[0]), (q1k, v.o[1])
    )
    vanishes("dependency-vector-vanishes", dep)

    vanishes("x-is-scaled-class-total", combine((th1, v.x), *((-1, v.o[i]) for i in range(6))))
    vanishes("y-is-scaled-class-total", combine((th1, v.y), *((-1, v.op[i]) for i in range(6))))

    for i in range(6):
        diff = combine((1, v.o[i]), (-1, v.op[i]), (-t.lam[i], v.x), (t.lam[i], v.y))
        n2 = atoms.inner(diff, diff)
        add(f"balance-class-{i + 1}", n2 == 0, {"norm_sq": frac_str(n2), "lambda": frac_str(t.lam[i])})

    g_count = atoms.gram(v.o)
    ok = all(
        g_count[i][j] * X == bundle.G[i][j] for i in range(6) for j in range(6)
    )
    add("gram-counting-matches-closed-form", ok, {"got": [[frac_str(g_count[i][j] * X) for j in range(6)] for i in range(6)]})
    gp_count = atoms.gram(v.op)
    add("gram-primed-equal", gp_count == g_count)

    hg = atoms.gram(v.h)
    ok = all(
        hg[i][j] == (t.epsfac[i] * t.eta[i] / X if i == j else 0)
        for i in range(6)
        for j in range(6)
    )
    add("h-basis-orthogonal", ok)
    hpg = atoms.gram(v.hp)
    add("h-primed-orthogonal", hpg == hg)

    ip = atoms.inner(v.x, v.h[0])
    add("x-against-h1", ip == Fraction(th1) * t.eta[0] / X, {"got": frac_str(ip)})
    add("x-against-h-rest", all(atoms.inner(v.x, v.h[j]) == 0 for j in range(1, 6)))
    add("y-against-hp", atoms.inner(v.y, v.hp[0]) == Fraction(th1) * t.eta[0] / X
        and all(atoms.inner(v.y, v.hp[j]) == 0 for j in range(1, 6)))

    vanishes("y-gamma-expansion", combine((1, v.y), *((-t.gamma[j], v.h[j]) for j in range(6))))
    vanishes("x-gamma-expansion", combine((1, v.x), *((-t.gamma[j], v.hp[j]) for j in range(6))))

    for j in range(6):
        vanishes(
            f"h-minus-primed-{j + 1}",
            combine((1, v.h[j]), (-1, v.hp[j]), (-t.mu[j], v.x), (t.mu[j], v.y)),
        )

    vanishes("vee-total-vanishes", combine(*((1, v.ov[i]) for i in range(6))))
    vanishes(
        "pair-sum-from-vee",
        combine((1, v.x), (1, v.y), (-q1k, v.ov[0]), (q1k, v.ov[1])),
    )
    a = combine((1, v.x), (-1, v.y))
    add("vee-orthogonal-to-difference", all(atoms.inner(v.ov[i], a) == 0 for i in range(6)))

    for i in range(6):
        vanishes(
            f"primed-class-decomposition-{i + 1}",
            combine((1, v.op[i]), (-1, v.ov[i]), (-t.lam[i], v.y)),
        )

    vanishes("hv1-vanishes", v.hv[0])
    for j in range(6):
        vanishes(
            f"hv-primed-form-{j + 1}",
            combine((1, v.hv[j]), (-1, v.hp[j]), (t.mu[j], v.y)),
        )
    vanishes(
        "pair-sum-from-hv",
        combine((1, v.x), (1, v.y), *((-t.gamma[j], v.hv[j]) for j in range(1, 5))),
    )

    add("class-gram-rank-6", atoms.gram_rank(v.o) == 6)
    add("vee-gram-rank-5", atoms.gram_rank(v.ov) == 5)
    add("hv-gram-rank-5", atoms.gram_rank(v.hv[1:]) == 5)
    add("sym-asym-dimensions", atoms.gram_rank(v.ov + [a]) == 6)

    omega = v.omega
    add("omega-nonzero", atoms.inner(omega, omega) != 0)
    add("omega-orthogonal-to-pair", atoms.inner(v.x, omega) == 0 and atoms.inner(v.y, omega) == 0)
    vanishes("omega-primed-equal", combine((1, omega), (-1, v.hp[5])))
    vanishes(
        "omega-vee-expansion",
        combine((1, omega), *((-t.omega[i], v.ov[i]) for i in range(6))),
    )
    return out


def verify_model_faithful(atoms: AtomSpace, bundle: ParamBundle, coords_to_atoms, s_inner, seed: int = 0, n_random: int = 10) -> list[IdentityCheck]:
    """Cross-validate a 6-dimensional coordinate model against the counting
    oracle on the basis vectors and on random rational vectors."""
    from random import Random

    rng = Random(seed)
    out = []
    ok = True
    witness = None
    cases = [[Fraction(int(i == j)) for i in range(6)] for j in range(6)]
    for _ in range(n_random):
        cases.append([Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(6)])
    for i, u in enumerate(cases):
        for w in cases[i:]:
            lhs = s_inner(u, w)
            rhs = atoms.inner(coords_to_atoms(u), coords_to_atoms(w))
            if lhs != rhs:
                ok = False
                witness = {"u": [frac_str(c) for c in u], "lhs": frac_str(lhs), "rhs": frac_str(rhs)}
                break
        if not ok:
            break
    out.append(IdentityCheck("model-matches-counting-oracle", ok, witness))
    return out
