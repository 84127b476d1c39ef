"""Six-dimensional coordinate model of the span S of the class-sum E-images.

Coordinates live in the basis {E O_i-sum}; the swap involution to the primed
chart, the Gram form, and the symmetric/antisymmetric split are all closed
form, exact, and cross-validated against the counting oracle elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .eimage import AtomVec, combine, unit
from .exactlin import (
    Matrix,
    Vector,
    frac_matrix,
    frac_str,
    gram_rank,
    identity,
    leading_minors_positive,
    mat_eq,
    mat_inv,
    mat_mul,
    mat_vec,
    is_zero_vec,
    vec_dot,
    vec_scale,
    vec_sub,
    vec_add,
)
from .params import IdentityCheck, ParamBundle


@dataclass(frozen=True)
class SModel:
    """Everything needed to compute inside S: the Gram form G/|X|, the swap
    involution T (primed chart), and coordinates of the named vectors."""

    bundle: ParamBundle
    G: Matrix
    T: Matrix  # column j = coords of E O'_j-sum
    xhat: Vector
    yhat: Vector
    h: list[Vector]
    hp: list[Vector]
    ov: list[Vector]
    hv: list[Vector]
    omega: Vector

    @property
    def vertex_count(self) -> int:
        return self.bundle.vertex_count


def build_s_model(bundle: ParamBundle) -> SModel:
    """Populate all coordinates from closed forms only (no enumeration)."""
    t = bundle.tables
    th1 = Fraction(bundle.theta[1])
    q, k = bundle.p.q, bundle.k
    xhat = [1 / th1] * 6
    q1k = Fraction(1, q ** (k - 1))
    # the dependency relation solved for the y coordinates
    yhat = vec_add(
        vec_scale(-Fraction(1 - q1k, q - 1) / th1, [Fraction(1)] * 6),
        [q1k, -q1k, Fraction(0), Fraction(0), Fraction(0), Fraction(0)],
    )
    a = vec_sub(xhat, yhat)
    T = [[Fraction(0)] * 6 for _ in range(6)]
    for j in range(6):
        col = [Fraction(int(i == j)) for i in range(6)]
        col = vec_sub(col, vec_scale(t.lam[j], a))
        for i in range(6):
            T[i][j] = col[i]
    H = bundle.H
    h = [[H[i][j] for i in range(6)] for j in range(6)]
    hp = [mat_vec(T, hj) for hj in h]
    ov = [vec_sub([Fraction(int(i == j)) for i in range(6)], vec_scale(t.lam[j], xhat)) for j in range(6)]
    hv = [vec_sub(h[j], vec_scale(t.mu[j], xhat)) for j in range(6)]
    model = SModel(
        bundle=bundle,
        G=frac_matrix(bundle.G),
        T=T,
        xhat=xhat,
        yhat=yhat,
        h=h,
        hp=hp,
        ov=ov,
        hv=hv,
        omega=h[5],
    )
    if mat_rank_guard(model):
        return model
    raise ValueError("swap involution is singular")


def mat_rank_guard(m: SModel) -> bool:
    try:
        mat_inv(m.T)
    except ValueError:
        return False
    return True


def s_inner(m: SModel, u: Vector, v: Vector) -> Fraction:
    return vec_dot(u, mat_vec(m.G, v)) / m.vertex_count


def asym_component(m: SModel, u: Vector) -> Vector:
    a = vec_sub(m.xhat, m.yhat)
    return vec_scale(s_inner(m, u, a) / s_inner(m, a, a), a)


def decompose(m: SModel, u: Vector) -> tuple[Vector, Vector]:
    """Split u into (symmetric, antisymmetric) parts; sym is orthogonal to
    the pair difference, asym is its multiple."""
    asym = asym_component(m, u)
    return vec_sub(u, asym), asym


def coords_to_atoms(u: Vector) -> AtomVec:
    return combine(*((u[i], unit(i)) for i in range(6)))


def swap(m: SModel, u: Vector) -> Vector:
    return mat_vec(m.T, u)


def verify_s_model(m: SModel, seed: int = 0) -> list[IdentityCheck]:
    """Exact internal checks of the coordinate model."""
    b = m.bundle
    t = b.tables
    th1 = Fraction(b.theta[1])
    out: list[IdentityCheck] = []

    def add(name, ok, witness=None):
        out.append(IdentityCheck(name, bool(ok), None if ok else witness))

    add("swap-is-involution", mat_eq(mat_mul(m.T, m.T), identity(6)))
    add("gram-positive-definite", leading_minors_positive(m.G))
    a = vec_sub(m.xhat, m.yhat)
    add("swap-negates-difference", mat_vec(m.T, a) == vec_scale(-1, a))
    add("swap-exchanges-pair", mat_vec(m.T, m.xhat) == m.yhat and mat_vec(m.T, m.yhat) == m.xhat)

    add("h1-is-scaled-x", m.h[0] == vec_scale(th1, m.xhat))
    add("hp1-is-scaled-y", m.hp[0] == vec_scale(th1, m.yhat))
    add("hv1-zero", is_zero_vec(m.hv[0]))
    add("omega-is-h6-both-charts", m.omega == m.h[5] and m.omega == m.hp[5])

    y_exp = [Fraction(0)] * 6
    for j in range(6):
        y_exp = vec_add(y_exp, vec_scale(t.gamma[j], m.h[j]))
    add("y-gamma-expansion", y_exp == m.yhat, {"got": [frac_str(v) for v in y_exp]})
    x_exp = [Fraction(0)] * 6
    for j in range(6):
        x_exp = vec_add(x_exp, vec_scale(t.gamma[j], m.hp[j]))
    add("x-gamma-expansion", x_exp == m.xhat)

    ok = all(
        vec_sub(m.h[j], m.hp[j]) == vec_scale(t.mu[j], a) for j in range(6)
    )
    add("h-primed-difference", ok)

    ok = True
    for j in range(6):
        via_ov = [Fraction(0)] * 6
        for i in range(6):
            via_ov = vec_add(via_ov, vec_scale(b.H[i][j], m.ov[i]))
        if via_ov != m.hv[j]:
            ok = False
            break
    add("hv-from-vee", ok)

    add("h-gram-rank-6", gram_rank(m.h, m.G) == 6)
    add("hv-gram-rank-5", gram_rank(m.hv[1:], m.G) == 5)
    add("vee-span-rank-5", gram_rank(m.ov, m.G) == 5)
    add(
        "sym-asym-orthogonal-split",
        all(s_inner(m, v, a) == 0 for v in m.ov) and gram_rank(m.ov + [a], m.G) == 6,
    )

    sym, asym = decompose(m, a)
    add("difference-is-asym", is_zero_vec(sym) and asym == a)
    s2, a2 = decompose(m, vec_add(m.xhat, m.yhat))
    add("sum-is-sym", is_zero_vec(a2) and s2 == vec_add(m.xhat, m.yhat))
    ok = True
    for i in range(6):
        got = asym_component(m, [Fraction(int(r == i)) for r in range(6)])
        if got != vec_scale(t.lam[i] / 2, a):
            ok = False
            break
    add("class-asym-share", ok)

    pair_sum = vec_add(m.xhat, m.yhat)
    acc = [Fraction(0)] * 6
    for j in range(1, 5):
        acc = vec_add(acc, vec_scale(t.gamma[j], m.hv[j]))
    add("pair-sum-from-hv", acc == pair_sum)
    return out
