"""Small dense linear algebra over exact rationals (fractions.Fraction)."""

from __future__ import annotations

from fractions import Fraction

Matrix = list[list[Fraction]]
Vector = list[Fraction]


def frac_matrix(rows) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def zeros(n: int, m: int) -> Matrix:
    return [[Fraction(0)] * m for _ in range(n)]


def identity(n: int) -> Matrix:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def diag(values) -> Matrix:
    vals = [Fraction(v) for v in values]
    out = zeros(len(vals), len(vals))
    for i, v in enumerate(vals):
        out[i][i] = v
    return out


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def mat_vec(a: Matrix, v: Vector) -> Vector:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def vec_add(u: Vector, v: Vector) -> Vector:
    return [a + b for a, b in zip(u, v)]


def vec_sub(u: Vector, v: Vector) -> Vector:
    return [a - b for a, b in zip(u, v)]


def vec_scale(c, v: Vector) -> Vector:
    c = Fraction(c)
    return [c * a for a in v]


def vec_dot(u: Vector, v: Vector) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def is_zero_vec(v: Vector) -> bool:
    return all(a == 0 for a in v)


def mat_eq(a: Matrix, b: Matrix) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def mat_rank(a: Matrix) -> int:
    """Rank by fraction-exact Gaussian elimination."""
    work = [[Fraction(v) for v in row] for row in a]
    nrows = len(work)
    ncols = len(work[0]) if nrows else 0
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, nrows) if work[r][col] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        inv = 1 / work[rank][col]
        work[rank] = [v * inv for v in work[rank]]
        for r in range(nrows):
            if r != rank and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


def mat_inv(a: Matrix) -> Matrix:
    """Inverse by Gauss-Jordan; raises ValueError when singular."""
    n = len(a)
    work = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        work[col], work[piv] = work[piv], work[col]
        inv = 1 / work[col][col]
        work[col] = [v * inv for v in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return [row[n:] for row in work]


def det(a: Matrix) -> Fraction:
    n = len(a)
    work = [[Fraction(v) for v in row] for row in a]
    out = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            work[col], work[piv] = work[piv], work[col]
            out = -out
        out *= work[col][col]
        inv = 1 / work[col][col]
        for r in range(col + 1, n):
            if work[r][col] != 0:
                f = work[r][col] * inv
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return out


def leading_minors_positive(a: Matrix) -> bool:
    """All leading principal minors > 0 (positive definiteness test)."""
    n = len(a)
    return all(det([row[: k + 1] for row in a[: k + 1]]) > 0 for k in range(n))


def gram_rank(vectors: list[Vector], g: Matrix) -> int:
    """Rank of the Gram matrix of vectors under the bilinear form g."""
    gv = [mat_vec(g, v) for v in vectors]
    gram = [[vec_dot(u, gw) for gw in gv] for u in vectors]
    return mat_rank(gram)


def frac_str(x) -> str:
    """Serialize a rational as \"num/den\" (den kept even when 1)."""
    f = Fraction(x)
    return "%d/%d" % (f.numerator, f.denominator)
