"""Norton product by the pair vectors as exact 6x6 operators on S, the full
identity suite for the product, the omega eigenvector, the generated bases of
the omega complement, the word condition, and the heavy brute-force triple
oracle over the whole vertex set."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .eimage import VertexSum, combine, unit
from .exactlin import (
    Vector,
    frac_str,
    gram_rank,
    is_zero_vec,
    mat_inv,
    mat_mul,
    mat_vec,
    vec_add,
    vec_scale,
    vec_sub,
)
from .gf import pack_keys, rank_table, split_key_space
from .params import GraphParams, IdentityCheck, ParamBundle, krein_q111, sym_star_asym_scalars
from .smodel import SModel, asym_component, s_inner
from .util import chunk_ranges, map_chunks


@dataclass(frozen=True)
class NortonOps:
    """Left multiplication by E x-hat and E y-hat in class-sum coordinates."""

    model: SModel
    Lx: list[list[Fraction]]
    Ly: list[list[Fraction]]

    @property
    def bundle(self) -> ParamBundle:
        return self.model.bundle


def build_norton_ops(m: SModel) -> NortonOps:
    """Lx acts on the class-sum basis through the quotient matrix over |X|;
    Ly is the same operator transported through the swap involution."""
    X = m.vertex_count
    Lx = [[Fraction(m.bundle.C[i][j], X) for j in range(6)] for i in range(6)]
    Tinv = mat_inv(m.T)
    Ly = mat_mul(m.T, mat_mul(Lx, Tinv))
    ops = NortonOps(model=m, Lx=Lx, Ly=Ly)
    if mat_vec(Lx, m.yhat) != mat_vec(Ly, m.xhat):
        raise ValueError("star product fails commutativity at the generators")
    return ops


def star_x(ops: NortonOps, u: Vector) -> Vector:
    return mat_vec(ops.Lx, u)


def star_y(ops: NortonOps, u: Vector) -> Vector:
    return mat_vec(ops.Ly, u)


def verify_norton_identities(ops: NortonOps) -> list[IdentityCheck]:
    m = ops.model
    b = ops.bundle
    t = b.tables
    p, k = b.p, b.k
    ts = b.theta_star
    th = b.theta
    X = p.vertex_count
    q111 = krein_q111(p)
    out: list[IdentityCheck] = []

    def add(name, ok, witness=None):
        out.append(IdentityCheck(name, bool(ok), None if ok else witness))

    a = vec_sub(m.xhat, m.yhat)
    pair_sum = vec_add(m.xhat, m.yhat)

    add("x-star-x-eigen", star_x(ops, m.xhat) == vec_scale(Fraction(q111, X), m.xhat))
    add("y-star-y-eigen", star_y(ops, m.yhat) == vec_scale(Fraction(q111, X), m.yhat))
    add("generator-commutativity", star_x(ops, m.yhat) == star_y(ops, m.xhat))

    e1, e6 = unit_vec(0), unit_vec(5)
    closed = vec_scale(
        Fraction(1, X * (th[1] - th[2])),
        vec_add(
            vec_add(vec_scale(ts[k - 1] - ts[k], e1), vec_scale(ts[k + 1] - ts[k], e6)),
            vec_add(
                vec_scale((th[1] - th[2]) * ts[k], m.xhat),
                vec_scale(th[2] - th[0], m.yhat),
            ),
        ),
    )
    xy = star_x(ops, m.yhat)
    add("x-star-y-closed-form", xy == closed, {"got": [frac_str(v) for v in xy]})

    closed2 = vec_scale(
        Fraction(1, X * (th[1] - th[2])),
        vec_add(
            vec_add(vec_scale(ts[k - 1] - ts[k], m.ov[0]), vec_scale(ts[k + 1] - ts[k], m.ov[5])),
            vec_scale(th[2] - th[0], pair_sum),
        ),
    )
    add("x-star-y-vee-form", xy == closed2)
    add("x-star-y-symmetric-part", s_inner(m, xy, a) == 0)

    acc = [Fraction(0)] * 6
    for j in range(5):
        acc = vec_add(acc, vec_scale(t.gamma[j] * t.vartheta[j], m.h[j]))
    add("x-star-y-h-expansion", xy == vec_scale(Fraction(1, X), acc))
    acc = [Fraction(0)] * 6
    for j in range(1, 5):
        acc = vec_add(acc, vec_scale(t.gamma[j] * t.vartheta[j], m.hv[j]))
    add("x-star-y-hv-expansion", xy == vec_scale(Fraction(1, X), acc))

    ok = all(
        star_x(ops, m.h[j]) == vec_scale(Fraction(t.vartheta[j], X), m.h[j]) for j in range(6)
    )
    add("h-eigenvectors-of-x", ok)
    ok = all(
        star_y(ops, m.hp[j]) == vec_scale(Fraction(t.vartheta[j], X), m.hp[j]) for j in range(6)
    )
    add("hp-eigenvectors-of-y", ok)

    ok = True
    witness = None
    for j in range(6):
        scal = Fraction(sum(t.lam[i] * b.C[i][j] for i in range(6)) - t.lam[j] * q111, 1) / X
        acc = vec_scale(scal, m.xhat)
        for i in range(6):
            acc = vec_add(acc, vec_scale(Fraction(b.C[i][j], X), m.ov[i]))
        if star_x(ops, m.ov[j]) != acc:
            ok = False
            witness = {"j": j + 1}
            break
        accy = vec_add(vec_sub(acc, vec_scale(scal, m.xhat)), vec_scale(scal, m.yhat))
        if star_y(ops, m.ov[j]) != accy:
            ok = False
            witness = {"j": j + 1, "side": "y"}
            break
    add("vee-action-closed-form", ok, witness)

    printed = sym_star_asym_scalars(p, k)
    ok = True
    witness = None
    for j in range(6):
        got = vec_sub(star_x(ops, m.ov[j]), star_y(ops, m.ov[j]))
        want = vec_scale(printed[j], a)
        if got != want:
            ok = False
            witness = {"j": j + 1, "want": frac_str(printed[j])}
            break
    add("sym-star-asym-scalars", ok, witness)
    add(
        "sym-star-asym-stays-asym",
        all(is_zero_vec(vec_sub(vec_sub(star_x(ops, m.ov[j]), star_y(ops, m.ov[j])), asym_component(m, vec_sub(star_x(ops, m.ov[j]), star_y(ops, m.ov[j]))))) for j in range(6)),
    )

    diff_sq = vec_add(vec_sub(star_x(ops, m.xhat), star_x(ops, m.yhat)), vec_sub(star_y(ops, m.yhat), star_y(ops, m.xhat)))
    add("asym-star-asym-symmetric", s_inner(m, diff_sq, a) == 0)

    ok = True
    for j in range(6):
        got = vec_add(star_x(ops, m.ov[j]), star_y(ops, m.ov[j]))
        scal = Fraction(sum(t.lam[i] * b.C[i][j] for i in range(6)) - t.lam[j] * q111, 1) / X
        want = vec_scale(scal, pair_sum)
        for i in range(6):
            want = vec_add(want, vec_scale(Fraction(2 * b.C[i][j], X), m.ov[i]))
        if got != want:
            ok = False
            break
    add("pair-sum-action-on-vee", ok)
    add(
        "pair-sum-preserves-sym",
        all(s_inner(m, vec_add(star_x(ops, m.ov[j]), star_y(ops, m.ov[j])), a) == 0 for j in range(6)),
    )

    ok = True
    for j in range(6):
        want = vec_add(
            vec_scale(Fraction(t.vartheta[j], X), m.hv[j]),
            vec_scale(Fraction(t.vartheta[j] - t.vartheta[0], X) * t.mu[j], m.xhat),
        )
        if star_x(ops, m.hv[j]) != want:
            ok = False
            break
        wanty = vec_add(
            vec_scale(Fraction(t.vartheta[j], X), m.hv[j]),
            vec_scale(Fraction(t.vartheta[j] - t.vartheta[0], X) * t.mu[j], m.yhat),
        )
        if star_y(ops, m.hv[j]) != wanty:
            ok = False
            break
    add("hv-action-closed-form", ok)

    ok = all(
        vec_sub(star_x(ops, m.hv[j]), star_y(ops, m.hv[j]))
        == vec_scale(Fraction(t.vartheta[j] - t.vartheta[0], X) * t.mu[j], a)
        for j in range(6)
    )
    add("hv-star-asym-scalars", ok)

    ok = all(
        vec_add(star_x(ops, m.hv[j]), star_y(ops, m.hv[j]))
        == vec_add(
            vec_scale(Fraction(2 * t.vartheta[j], X), m.hv[j]),
            vec_scale(Fraction(t.vartheta[j] - t.vartheta[0], X) * t.mu[j], pair_sum),
        )
        for j in range(6)
    )
    add("pair-sum-action-on-hv", ok)
    return out


def unit_vec(i: int) -> Vector:
    return [Fraction(int(r == i)) for r in range(6)]


def verify_omega(ops: NortonOps) -> list[IdentityCheck]:
    m = ops.model
    b = ops.bundle
    X = b.vertex_count
    q = b.p.q
    out: list[IdentityCheck] = []

    def add(name, ok, witness=None):
        out.append(IdentityCheck(name, bool(ok), None if ok else witness))

    w = m.omega
    eig = Fraction(-q, X)
    add("omega-x-eigenvector", star_x(ops, w) == vec_scale(eig, w), {"eig": frac_str(eig)})
    add("omega-y-eigenvector", star_y(ops, w) == vec_scale(eig, w))
    add("omega-swap-invariant", mat_vec(m.T, w) == w)
    a = vec_sub(m.xhat, m.yhat)
    add("omega-in-sym", s_inner(m, w, a) == 0)
    add("pair-in-omega-perp", s_inner(m, m.xhat, w) == 0 and s_inner(m, m.yhat, w) == 0)

    basis = m.h[:5]
    add(
        "omega-perp-basis-h",
        all(s_inner(m, v, w) == 0 for v in basis) and gram_rank(basis, m.G) == 5,
    )
    add(
        "omega-perp-basis-h-primed",
        all(s_inner(m, v, w) == 0 for v in m.hp[:5]) and gram_rank(m.hp[:5], m.G) == 5,
    )
    add(
        "omega-perp-invariant",
        all(
            s_inner(m, star_x(ops, v), w) == 0 and s_inner(m, star_y(ops, v), w) == 0
            for v in basis
        ),
    )

    mid = m.hv[1:5]  # basis of omega-perp intersect Sym
    add(
        "three-way-split",
        gram_rank([w] + [a] + mid, m.G) == 6
        and all(s_inner(m, w, v) == 0 for v in mid)
        and all(s_inner(m, a, v) == 0 for v in mid)
        and s_inner(m, w, a) == 0,
    )
    add("mid-dimension-4", gram_rank(mid, m.G) == 4)
    pair_sum = vec_add(m.xhat, m.yhat)
    add(
        "pair-sum-in-mid",
        s_inner(m, pair_sum, w) == 0 and s_inner(m, pair_sum, a) == 0,
    )
    add(
        "pair-sum-action-keeps-mid",
        all(
            s_inner(m, vec_add(star_x(ops, v), star_y(ops, v)), w) == 0
            and s_inner(m, vec_add(star_x(ops, v), star_y(ops, v)), a) == 0
            for v in mid
        ),
    )
    return out


def verify_generation(ops: NortonOps) -> list[IdentityCheck]:
    m = ops.model
    out: list[IdentityCheck] = []

    def add(name, ok, witness=None):
        out.append(IdentityCheck(name, bool(ok), None if ok else witness))

    w = m.omega
    fam_x = [m.yhat]
    for _ in range(4):
        fam_x.append(star_x(ops, fam_x[-1]))
    fam_y = [m.xhat]
    for _ in range(4):
        fam_y.append(star_y(ops, fam_y[-1]))
    add("x-word-family-rank-5", gram_rank(fam_x, m.G) == 5)
    add("y-word-family-rank-5", gram_rank(fam_y, m.G) == 5)
    add(
        "word-families-in-omega-perp",
        all(s_inner(m, v, w) == 0 for v in fam_x + fam_y),
    )

    B = vec_add(m.xhat, m.yhat)
    fam_b = [B]
    for _ in range(3):
        v = fam_b[-1]
        fam_b.append(vec_add(star_x(ops, v), star_y(ops, v)))
    a = vec_sub(m.xhat, m.yhat)
    add("pair-sum-family-rank-4", gram_rank(fam_b, m.G) == 4)
    add(
        "pair-sum-family-in-mid",
        all(s_inner(m, v, w) == 0 and s_inner(m, v, a) == 0 for v in fam_b),
    )
    return out


def word_vector(ops: NortonOps, word: str) -> Vector:
    """Right-associated product E z_1 * (E z_2 * (... E z_n)) for a word over
    {x, y}."""
    if not word or any(c not in "xy" for c in word):
        raise ValueError("word must be nonempty over {x, y}")
    vec = ops.model.xhat if word[-1] == "x" else ops.model.yhat
    for c in reversed(word[:-1]):
        vec = star_x(ops, vec) if c == "x" else star_y(ops, vec)
    return vec


def bbalanced_word_check(ops: NortonOps, n_max: int = 10) -> dict:
    """For every word w up to length n_max, the difference between the word
    vector and its letter-swapped mirror lies in the span of the pair
    difference, exactly; mirrors must also match the swap involution."""
    m = ops.model
    a = vec_sub(m.xhat, m.yhat)
    aa = s_inner(m, a, a)
    swap_tab = str.maketrans("xy", "yx")
    level = {"x": m.xhat, "y": m.yhat}
    checked = 0
    for n in range(1, n_max + 1):
        if n > 1:
            level = {
                c + wrd: (star_x(ops, v) if c == "x" else star_y(ops, v))
                for wrd, v in level.items()
                for c in "xy"
            }
        for wrd, v in level.items():
            mirror = level[wrd.translate(swap_tab)]
            if mat_vec(m.T, v) != mirror:
                return {"ok": False, "word": wrd, "reason": "swap involution mismatch"}
            diff = vec_sub(v, mirror)
            resid = vec_sub(diff, vec_scale(s_inner(m, diff, a) / aa, a))
            if not is_zero_vec(resid):
                return {"ok": False, "word": wrd, "reason": "difference leaves the span"}
            checked += 1
    return {"ok": True, "words_checked": checked, "n_max": n_max}


# ---------------------------------------------------------------------------
# heavy mode: brute-force triple products over the whole vertex set

HEAVY_LIMIT = 2_000_000


@dataclass
class TripleOracle:
    """Evaluates <Eu * Ev, Ew> = sum_z (Eu)_z (Ev)_z (Ew)_z by enumerating
    every vertex; exact, restricted to enumerable configurations."""

    p: GraphParams
    theta_star: tuple[int, ...]
    ranks: np.ndarray
    lo_all: np.ndarray
    hi_all: np.ndarray

    @classmethod
    def build(cls, p: GraphParams, limit: int = HEAVY_LIMIT) -> "TripleOracle":
        total = p.vertex_count
        if total > limit:
            raise ValueError(
                "brute-force oracle refused: %d vertices exceeds the %d limit" % (total, limit)
            )
        from .params import dual_eigenvalues

        space = split_key_space(p.q, p.D * p.e)
        all_keys = np.arange(total, dtype=np.int64)
        lo, hi = space.split(all_keys)
        return cls(
            p=p,
            theta_star=dual_eigenvalues(p),
            ranks=rank_table(p.q, p.D, p.e),
            lo_all=lo,
            hi_all=hi,
        )

    def field_values(self, u: VertexSum, threads: int = 1) -> tuple[np.ndarray, int]:
        """|X| * scale * (Eu)_z for every vertex z, as exact int64s."""
        from .eimage import _int_coeffs

        coeffs, scale = _int_coeffs(u.coeffs())
        keys = pack_keys(u.support_digits(), self.p.q)
        space = split_key_space(self.p.q, self.p.D * self.p.e)
        a_lo, a_hi = space.split(keys)
        tmax = max(abs(t) for t in self.theta_star)
        bound = sum(abs(int(c)) for c in coeffs) * tmax
        if bound >= 2**62:
            raise OverflowError("coefficients too large for the int64 field-value path")
        theta_arr = np.array(self.theta_star, dtype=np.int64)
        total = self.lo_all.shape[0]
        out = np.zeros(total, dtype=np.int64)

        def accumulate(rg):
            lo_i, hi_i = rg
            part = np.zeros(total, dtype=np.int64)
            for a in range(lo_i, hi_i):
                diff_keys = space.sub(self.lo_all, self.hi_all, int(a_lo[a]), int(a_hi[a]))
                part += int(coeffs[a]) * theta_arr[self.ranks[diff_keys]]
            return part

        for part in map_chunks(accumulate, chunk_ranges(keys.shape[0], 64), threads):
            out += part
        return out, scale

    def triple(self, u: VertexSum, v: VertexSum, w: VertexSum, threads: int = 1) -> Fraction:
        fu, su = self.field_values(u, threads)
        fv, sv = self.field_values(v, threads)
        fw, sw = self.field_values(w, threads)
        bu = int(np.abs(fu).max(initial=0))
        bv = int(np.abs(fv).max(initial=0))
        bw = int(np.abs(fw).max(initial=0))
        total = 0
        if bu and bv and bw and bu * bv * bw < 2**62:
            pair = fu * fv
            for lo, hi in chunk_ranges(fu.shape[0], 1 << 20):
                total += int((pair[lo:hi] * fw[lo:hi]).astype(object).sum())
        else:
            for lo, hi in chunk_ranges(fu.shape[0], 1 << 18):
                block = fu[lo:hi].astype(object) * fv[lo:hi].astype(object) * fw[lo:hi].astype(object)
                total += int(block.sum())
        X = self.p.vertex_count
        return Fraction(total, su * sv * sw * X**3)
