"""Closed-form parameters of H_q(D, N-D): intersection numbers, eigenvalues,
the six-class local partition data (sizes, quotient matrix C, eigenvector
matrix H, Gram matrix G, cross-distance matrices), and every scalar table
attached to them.

Wherever two independent expressions exist for the same table, both are
evaluated and compared exactly; a mismatch raises InternalInconsistencyError.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exactlin import (
    Matrix,
    diag,
    frac_matrix,
    frac_str,
    mat_eq,
    mat_mul,
    transpose,
)
from .gf import is_odd_prime

# class pattern of distance-to-y offsets: classes 1 and 6 sit at distance
# k-1 and k+1 from y, the middle four at distance k
DIST_OFFSETS = (-1, 0, 0, 0, 0, 1)


class InternalInconsistencyError(Exception):
    """Two supposedly-equal closed-form evaluations disagree."""

    def __init__(self, table: str, detail: str = ""):
        self.table = table
        super().__init__(f"closed-form self-test failed for table '{table}' {detail}")


@dataclass(frozen=True)
class GraphParams:
    """The graph H_q(D, N-D): D x (N-D) matrices over GF(q), rank-1 adjacency."""

    q: int
    D: int
    N: int

    def __post_init__(self):
        if not is_odd_prime(self.q):
            raise ValueError("q must be an odd prime, got %r" % (self.q,))
        if not (self.N > 2 * self.D >= 6):
            raise ValueError("need N > 2D >= 6, got D=%d N=%d" % (self.D, self.N))

    @property
    def e(self) -> int:
        """Number of columns N - D; strictly larger than D."""
        return self.N - self.D

    @property
    def vertex_count(self) -> int:
        return self.q ** (self.D * self.e)

    def validate_k(self, k: int) -> None:
        if not (2 <= k <= self.D - 1):
            raise ValueError("need 2 <= k <= D-1, got k=%d with D=%d" % (k, self.D))


def _exact_div(num: int, den: int, what: str) -> int:
    if num % den:
        raise InternalInconsistencyError(what, f"{num}/{den} not integral")
    return num // den


def gaussian_bracket(q: int, n: int) -> int:
    """[n] = (q^n - 1)/(q - 1)."""
    return (q**n - 1) // (q - 1)


def intersection_numbers(p: GraphParams, i: int) -> tuple[int, int, int]:
    """(c_i, a_i, b_i) with c_0 = 0 and b_D = 0; always c_i + a_i + b_i = valency."""
    q, D, N = p.q, p.D, p.N
    if not 0 <= i <= D:
        raise ValueError("distance index out of range: %d" % i)
    c = q ** (i - 1) * (q**i - 1) // (q - 1) if i >= 1 else 0
    b = (q ** (N - D) - q**i) * (q**D - q**i) // (q - 1) if i <= D - 1 else 0
    a = _exact_div((q**i - 1) * (q ** (N - D) + q**D - q**i - q ** (i - 1) - 1), q - 1, "a_i")
    return c, a, b


def valency(p: GraphParams) -> int:
    return intersection_numbers(p, 0)[2]


def sphere_size(p: GraphParams, i: int) -> int:
    """|Gamma_i(x)| = b_0 ... b_{i-1} / (c_1 ... c_i)."""
    num = 1
    den = 1
    for j in range(i):
        num *= intersection_numbers(p, j)[2]
    for j in range(1, i + 1):
        den *= intersection_numbers(p, j)[0]
    return _exact_div(num, den, "sphere size")


def eigenvalues(p: GraphParams) -> tuple[int, ...]:
    """theta_i = (q^{N-i} + 1 - q^D - q^{N-D})/(q - 1), i = 0..D, strictly decreasing."""
    q, D, N = p.q, p.D, p.N
    return tuple(
        _exact_div(q ** (N - i) + 1 - q**D - q ** (N - D), q - 1, "theta") for i in range(D + 1)
    )


def dual_eigenvalues(p: GraphParams) -> tuple[int, ...]:
    """Formally self-dual: the dual eigenvalue sequence coincides with eigenvalues()."""
    return eigenvalues(p)


def dim_eigenspace(p: GraphParams) -> int:
    """Multiplicity of theta_1; equals theta*_0 = (q^{N-D}-1)(q^D-1)/(q-1)."""
    q, D, N = p.q, p.D, p.N
    return _exact_div((q ** (N - D) - 1) * (q**D - 1), q - 1, "dim EV")


def krein_q111(p: GraphParams) -> int:
    """The Krein parameter q^1_{1,1}; by self-duality equals a_1 = q^{N-D}+q^D-q-2."""
    q, D, N = p.q, p.D, p.N
    return q ** (N - D) + q**D - q - 2


def three_term_holds(p: GraphParams) -> bool:
    """theta*_{i-1} c_i + theta*_i a_i + theta*_{i+1} b_i = theta_1 theta*_i for all i.

    At i = 0 and i = D the out-of-range dual eigenvalue is multiplied by
    c_0 = 0 resp. b_D = 0, so the boundary terms drop.
    """
    ts = dual_eigenvalues(p)
    th1 = eigenvalues(p)[1]
    for i in range(p.D + 1):
        c, a, b = intersection_numbers(p, i)
        lhs = a * ts[i]
        if i >= 1:
            lhs += c * ts[i - 1]
        if i <= p.D - 1:
            lhs += b * ts[i + 1]
        if lhs != th1 * ts[i]:
            return False
    return True


def local_spectrum_table(p: GraphParams) -> tuple[tuple[int, int], ...]:
    """(eigenvalue, multiplicity) pairs of the local graph on Gamma(x)."""
    q, D, N = p.q, p.D, p.N
    a1 = q ** (N - D) + q**D - q - 2
    return (
        (a1, 1),
        (q ** (N - D) - q - 1, _exact_div(q**D - q, q - 1, "local mult")),
        (q**D - q - 1, _exact_div(q ** (N - D) - q, q - 1, "local mult")),
        (-1, _exact_div((q**D - 1) * (q ** (N - D) - 1) * (q - 2), (q - 1) ** 2, "local mult")),
        (-q, _exact_div((q**D - q) * (q ** (N - D) - q), (q - 1) ** 2, "local mult")),
    )


def partition_sizes(p: GraphParams, k: int) -> tuple[int, ...]:
    """|O_1| .. |O_6| of the six-class partition of Gamma(x) induced by y at distance k."""
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    g = q - 1
    return (
        _exact_div(q ** (k - 1) * (q**k - 1), g, "|O1|"),
        _exact_div((q**k - 1) * (q ** (k - 1) - 1), g, "|O2|"),
        _exact_div(q ** (k - 1) * (q**k - 1) * (q - 2), g, "|O3|"),
        _exact_div((q ** (N - D) - q**k) * (q**k - 1), g, "|O4|"),
        _exact_div((q**D - q**k) * (q**k - 1), g, "|O5|"),
        _exact_div((q ** (N - D) - q**k) * (q**D - q**k), g, "|O6|"),
    )


def class_patterns(p: GraphParams, k: int) -> dict[int, tuple[int, int]]:
    """Common-neighbor signatures (n_minus, n_plus) that pin down classes 2..5.

    For z in Gamma(x) at distance k from y, n_minus counts Gamma(x) n Gamma(z)
    n Gamma_{k-1}(y) and n_plus counts Gamma(x) n Gamma(z) n Gamma_{k+1}(y).
    """
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    return {
        2: (2 * q ** (k - 1), 0),
        3: (2 * q ** (k - 1) - 1, 0),
        4: (q ** (k - 1), q**D - q**k),
        5: (q ** (k - 1), q ** (N - D) - q**k),
    }


def quotient_matrix(p: GraphParams, k: int) -> tuple[tuple[int, ...], ...]:
    """The 6x6 equitable-quotient matrix C of the partition: C[i][j] counts the
    neighbors in O_{j+1} of any vertex of O_{i+1}."""
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    qk, qk1 = q**k, q ** (k - 1)
    qa, qb = q ** (N - D), q**D
    rows = (
        (2 * (qk1 - 1), 2 * (qk1 - 1), (2 * qk1 - 1) * (q - 2), qa - qk, qb - qk, 0),
        (2 * qk1, 2 * qk1 - 2 - q, 2 * qk1 * (q - 2), qa - qk, qb - qk, 0),
        (2 * qk1 - 1, 2 * (qk1 - 1), 2 * qk - 4 * qk1 - q + 1, qa - qk, qb - qk, 0),
        (qk1, qk1 - 1, qk1 * (q - 2), qa - q - 1, 0, qb - qk),
        (qk1, qk1 - 1, qk1 * (q - 2), 0, qb - q - 1, qa - qk),
        (0, 0, 0, qk - 1, qk - 1, qa + qb - 2 * qk - q),
    )
    return rows


def quotient_eigs(p: GraphParams) -> tuple[int, ...]:
    """Eigenvalues (vartheta_1..vartheta_6) of the quotient matrix, last one doubled."""
    q, D, N = p.q, p.D, p.N
    return (q ** (N - D) + q**D - q - 2, q ** (N - D) - q - 1, q**D - q - 1, -1, -q, -q)


def eigvec_matrix(p: GraphParams, k: int) -> Matrix:
    """The 6x6 matrix H whose columns are eigenvectors of the quotient matrix."""
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    F = Fraction
    qk, qk1 = q**k, q ** (k - 1)
    qa, qb = q ** (N - D), q**D
    g = q - 1
    col5_big = F(q**N - q ** (N - D + 1) - q ** (D + 1) + q ** (k + 1) - qk + q, g * g)
    col6_big = F((qb - qk) * (qa - qk) * (qk1 - 1), qk * g)
    rows = [
        [F(1), F(qb - qk, g), F(qa - qk, g), F(q - 2), col5_big, col6_big],
        [F(1), F(qb - qk, g), F(qa - qk, g), F(0), F(qk - q**N, g), F((qb - qk) * (qa - qk), q * g)],
        [F(1), F(qb - qk, g), F(qa - qk, g), F(-1), col5_big, col6_big],
        [F(1), F(qb - qk, g), F(-(qk - 1), g), F(0), F(qk - qb, g), F(-(qb - qk) * (qk1 - 1), g)],
        [F(1), F(-(qk - 1), g), F(qa - qk, g), F(0), F(qk - qa, g), F(-(qa - qk) * (qk1 - 1), g)],
        [F(1), F(-(qk - 1), g), F(-(qk - 1), g), F(0), F(qk - 1, g), F((qk - 1) * (qk1 - 1), g)],
    ]
    return rows


def eta_values(p: GraphParams, k: int) -> tuple[Fraction, ...]:
    """Diagonal of H^t diag(|O_1|..|O_6|) H."""
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    F = Fraction
    qk, qk1 = q**k, q ** (k - 1)
    qa, qb = q ** (N - D), q**D
    g = q - 1
    prefactor = F((qa - q) * (q ** (D - 1) - 1) + q ** (N - k) * (qk1 - 1) * g, g * g)
    return (
        F((qb - 1) * (qa - 1), g),
        F((qb - qk) * (qk - 1) * (qb - 1) * (qa - 1), g**3),
        F((qa - qk) * (qk - 1) * (qb - 1) * (qa - 1), g**3),
        F((q - 2) * qk1 * (qk - 1)),
        prefactor * F(qk * (qk - 1) * (qb - 1) * (qa - 1), g * g),
        prefactor * F((qk - 1) * (qk1 - 1) * (qb - qk) * (qa - qk), g * q),
    )


def norm_scales(p: GraphParams, k: int) -> tuple[int, ...]:
    """Scales epsilon_1..epsilon_6 making H^t G H = diag(epsilon_j eta_j)."""
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    th1 = eigenvalues(p)[1]
    return (th1 * th1, q ** (2 * N - D - 2), q ** (N + D - 2), q ** (N - 1), q ** (N - 2), q ** (N - 2))


def gram_closed_form(p: GraphParams, k: int) -> tuple[tuple[int, ...], ...]:
    """G[i][j] = |X| <E O_i-sum, E O_j-sum> from sizes, C and dual eigenvalues."""
    ts = dual_eigenvalues(p)
    sizes = partition_sizes(p, k)
    C = quotient_matrix(p, k)
    out = []
    for i in range(6):
        row = []
        for j in range(6):
            d = 1 if i == j else 0
            row.append(sizes[i] * (d * ts[0] + C[i][j] * ts[1] + (sizes[j] - C[i][j] - d) * ts[2]))
        out.append(tuple(row))
    return tuple(out)


def gram_closed_form_alt(p: GraphParams, k: int) -> tuple[tuple[int, ...], ...]:
    """Same Gram matrix from the transposed counting: |O_j| (d theta*_0 + C[j][i] theta*_1 + ...)."""
    ts = dual_eigenvalues(p)
    sizes = partition_sizes(p, k)
    C = quotient_matrix(p, k)
    out = []
    for i in range(6):
        row = []
        for j in range(6):
            d = 1 if i == j else 0
            row.append(sizes[j] * (d * ts[0] + C[j][i] * ts[1] + (sizes[i] - C[j][i] - d) * ts[2]))
        out.append(tuple(row))
    return tuple(out)


def cross_matrix(p: GraphParams, k: int, ell: int) -> tuple[tuple[int, ...], ...]:
    """The 6x6 matrix D^(ell): entry (i,j) counts vertices of O'_{j+1} (the
    x-side partition of Gamma(y)) at distance ell from any vertex of O_{i+1}.

    Zero outside ell in [k-2, k+2]; the printed forms at ell = k+2 vanish
    identically when k = D-1.
    """
    p.validate_k(k)
    if ell < 0:
        raise ValueError("negative distance")
    q, D, N = p.q, p.D, p.N
    g = q - 1
    qk, qk1, qk2 = q**k, q ** (k - 1), q ** (k - 2)
    qa, qb = q ** (N - D), q**D
    Z = (0, 0, 0, 0, 0, 0)

    def dv(num, den=1):
        return _exact_div(num, den, "cross matrix")

    if ell == k - 2:
        return ((dv(qk2 * (qk1 - 1), g), 0, 0, 0, 0, 0), Z, Z, Z, Z, Z)
    if ell == k - 1:
        r1 = (
            2 * qk2 * (qk1 - 1),
            dv((qk1 - 1) * (qk2 * g + qk1 - 1), g),
            dv((qk1 - 1) * qk2 * (2 * q - 1) * (q - 2), g),
            dv((qk1 - 1) * (qa - qk), g),
            dv((qk1 - 1) * (qb - qk), g),
            0,
        )
        r2 = (dv(qk1 * (qk2 * g + qk1 - 1), g), q ** (2 * k - 3), q ** (2 * k - 3) * (q - 2), 0, 0, 0)
        r3 = (
            dv((qk1 - 1) * qk2 * (2 * q - 1), g),
            qk2 * (qk1 - 1),
            qk2 * (qk - 2 * qk1 + 2),
            0,
            0,
            0,
        )
        r4 = (dv((qk1 - 1) * qk1, g), 0, 0, q ** (2 * (k - 1)), 0, 0)
        r5 = (dv((qk1 - 1) * qk1, g), 0, 0, 0, q ** (2 * (k - 1)), 0)
        return (r1, r2, r3, r4, r5, Z)
    if ell == k:
        r1 = (
            qk2 * (qk - qk1 + 1),
            (qk1 - 1) * (qk1 - qk2),
            qk2 * (qk - qk1 + 1) * (q - 2),
            qk1 * (qa - qk),
            qk1 * (qb - qk),
            dv((qa - qk) * (qb - qk), g),
        )
        r2 = (
            q ** (2 * k - 3) * g,
            dv((qk - 1) * (qk1 - 1), g) - q ** (2 * k - 3),
            dv((q - 2) * qk1 * (qk - qk1 + qk2 - 1), g),
            dv((qa - qk) * (qk - 1), g),
            dv((qb - qk) * (qk - 1), g),
            0,
        )
        r3 = (
            qk2 * (qk - qk1 + 1),
            dv((qk1 - 1) * (qk - qk1 + qk2 - 1), g),
            dv(qk2 * (q - 2) * (qk * g + qk1 - 1), g) - qk1,
            dv((qa - qk) * (qk - 1), g),
            dv((qb - qk) * (qk - 1), g),
            0,
        )
        r4 = (
            q ** (2 * (k - 1)),
            dv((qk1 - 1) * (qk - 1), g),
            dv(qk1 * (q - 2) * (qk - 1), g),
            dv((qa - qk) * (qk - 1), g) - q ** (2 * (k - 1)),
            dv((qb - qk) * (qk1 - 1), g),
            qk1 * (qb - qk),
        )
        r5 = (
            q ** (2 * (k - 1)),
            dv((qk1 - 1) * (qk - 1), g),
            dv(qk1 * (q - 2) * (qk - 1), g),
            dv((qa - qk) * (qk1 - 1), g),
            dv((qb - qk) * (qk - 1), g) - q ** (2 * (k - 1)),
            qk1 * (qa - qk),
        )
        r6 = (
            dv((qk - 1) * qk1, g),
            0,
            0,
            qk1 * (qk - 1),
            qk1 * (qk - 1),
            g * q ** (2 * k - 1) + qk1,
        )
        return (r1, r2, r3, r4, r5, r6)
    if ell == k + 1:
        r2 = (0, 0, 0, 0, 0, dv((qa - qk) * (qb - qk), g))
        r4 = (0, 0, 0, 0, (qb - qk) * qk1, dv((qb - qk) * (qa - 2 * qk + qk1), g))
        r5 = (0, 0, 0, (qa - qk) * qk1, 0, dv((qa - qk) * (qb - 2 * qk + qk1), g))
        r6 = (
            0,
            dv((qk - 1) * (qk1 - 1), g),
            dv((qk - 1) * qk1 * (q - 2), g),
            dv((qk - 1) * (qa - 2 * qk + qk1), g),
            dv((qk - 1) * (qb - 2 * qk + qk1), g),
            qk1 * (q ** (D + 1) + q ** (N - D + 1) - q ** (k + 2) - 2 * q ** (k + 1) + qk - 1),
        )
        return (Z, r2, r2, r4, r5, r6)
    if ell == k + 2:
        return (Z, Z, Z, Z, Z, (0, 0, 0, 0, 0, dv((qb - q ** (k + 1)) * (qa - q ** (k + 1)), g)))
    return (Z,) * 6


def lambda_closed(p: GraphParams, k: int) -> tuple[int, ...]:
    """Balance coefficients: E O_i-sum - E O'_i-sum = lambda_i (E x - E y)."""
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    g = q - 1
    qk, qk1 = q**k, q ** (k - 1)
    qa, qb = q ** (N - D), q**D
    return (
        _exact_div(qk * (q ** (k - 2) - 1), g, "lambda1"),
        _exact_div((qk1 - 1) ** 2, g, "lambda2"),
        _exact_div(qk1 * (qk1 - 1) * (q - 2), g, "lambda3"),
        _exact_div((qa - qk) * (qk1 - 1), g, "lambda4"),
        _exact_div((qb - qk) * (qk1 - 1), g, "lambda5"),
        _exact_div((qb - qk) * (qa - qk), q * g, "lambda6"),
    )


def lambda_from_sizes(p: GraphParams, k: int) -> tuple[Fraction, ...]:
    """Same coefficients via |O_i| (theta*_1 - theta*_{k+offset(i)}) / (theta*_0 - theta*_k)."""
    ts = dual_eigenvalues(p)
    sizes = partition_sizes(p, k)
    den = ts[0] - ts[k]
    return tuple(
        Fraction(sizes[i] * (ts[1] - ts[k + DIST_OFFSETS[i]]), den) for i in range(6)
    )


def mu_closed(p: GraphParams, k: int) -> tuple[Fraction, ...]:
    """Coefficients with h_j - h'_j = mu_j (E x - E y)."""
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    F = Fraction
    g = q - 1
    qk, qk1 = q**k, q ** (k - 1)
    qa, qb = q ** (N - D), q**D
    th1 = eigenvalues(p)[1]
    return (
        F(th1),
        F(-(q ** (N - D - 1)) * (qb - qk), g),
        F(-(q ** (D - 1)) * (qa - qk), g),
        F(-(q - 2) * qk1),
        F(-qk1 * ((qa - q) * (q ** (D - 1) - 1) + q ** (N - k) * (qk1 - 1) * g), g * g),
        F(0),
    )


def mu_from_matrix(p: GraphParams, k: int) -> tuple[Fraction, ...]:
    """Same coefficients via mu_j = sum_i lambda_i H[i][j]."""
    lam = lambda_closed(p, k)
    H = eigvec_matrix(p, k)
    return tuple(sum((Fraction(lam[i]) * H[i][j] for i in range(6)), Fraction(0)) for j in range(6))


def gamma_closed(p: GraphParams, k: int) -> tuple[Fraction, ...]:
    """Expansion coefficients of E y over the orthogonal basis h_1..h_6."""
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    F = Fraction
    qa, qb = q ** (N - D), q**D
    th1 = eigenvalues(p)[1]
    small = F(q ** (1 - k) if k <= 1 else 1, q ** (k - 1)) * F(q - 1, (qa - 1) * (qb - 1))
    return (
        F(q ** (N - k) - qa - qb + 1, th1 * (qa - 1) * (qb - 1)),
        small,
        small,
        F(1, q ** (k - 1) * (q - 1)),
        small,
        F(0),
    )


def gamma_derived(p: GraphParams, k: int) -> tuple[Fraction, ...]:
    """Same coefficients via gamma_j = <E y, h_j> / ||h_j||^2 in closed form."""
    ts = dual_eigenvalues(p)
    sizes = partition_sizes(p, k)
    H = eigvec_matrix(p, k)
    eta = eta_values(p, k)
    eps = norm_scales(p, k)
    out = []
    for j in range(6):
        num = sum(
            (H[i][j] * sizes[i] * ts[k + DIST_OFFSETS[i]] for i in range(6)), Fraction(0)
        )
        out.append(num / (Fraction(eps[j]) * eta[j]))
    return tuple(out)


def omega_coeffs_closed(p: GraphParams, k: int) -> tuple[Fraction, ...]:
    """Coordinates of omega over the E O_i-sum basis, as printed closed forms.

    Must coincide with column 6 of the eigenvector matrix H.
    """
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    F = Fraction
    g = q - 1
    qk, qk1 = q**k, q ** (k - 1)
    qa, qb = q ** (N - D), q**D
    return (
        F((qb - qk) * (qa - qk) * (qk1 - 1), qk * g),
        F((qb - qk) * (qa - qk), q * g),
        F((qb - qk) * (qa - qk) * (qk1 - 1), qk * g),
        F(-(qb - qk) * (qk1 - 1), g),
        F(-(qa - qk) * (qk1 - 1), g),
        F((qk - 1) * (qk1 - 1), g),
    )


def sym_star_asym_scalars(p: GraphParams, k: int) -> tuple[Fraction, ...]:
    """The six eigenvalues in EO^vee_j * (E x - E y) = scalar_j (E x - E y)."""
    p.validate_k(k)
    q, D, N = p.q, p.D, p.N
    F = Fraction
    X = p.vertex_count
    qk, qk1 = q**k, q ** (k - 1)
    qa, qb = q ** (N - D), q**D
    return (
        F(qk1 * (qb + qa - 2 * qk1 - q), X),
        F(-2 * qk1 * (qk1 - 1), X),
        F(-(q - 2) * qk1 * (2 * qk1 - 1), X),
        F((qb - 2 * qk) * (qa - qk), q * X),
        F((qb - qk) * (qa - 2 * qk), q * X),
        F(-2 * (qb - qk) * (qa - qk), q * X),
    )


@dataclass(frozen=True)
class ScalarTables:
    """All scalar tables at a fixed (params, k), each entry exact."""

    lam: tuple[Fraction, ...]
    mu: tuple[Fraction, ...]
    gamma: tuple[Fraction, ...]
    omega: tuple[Fraction, ...]
    eta: tuple[Fraction, ...]
    epsfac: tuple[Fraction, ...]
    vartheta: tuple[int, ...]
    eps_offset: tuple[int, ...]


def scalar_tables(p: GraphParams, k: int) -> ScalarTables:
    """Build every scalar table, computing each one two independent ways
    where two expressions exist and insisting on exact agreement."""
    lam_a = tuple(Fraction(v) for v in lambda_closed(p, k))
    lam_b = lambda_from_sizes(p, k)
    if lam_a != lam_b:
        raise InternalInconsistencyError("lambda", f"{lam_a} vs {lam_b}")
    mu_a = mu_closed(p, k)
    mu_b = mu_from_matrix(p, k)
    if mu_a != mu_b:
        raise InternalInconsistencyError("mu", f"{mu_a} vs {mu_b}")
    gam_a = gamma_closed(p, k)
    gam_b = gamma_derived(p, k)
    if gam_a != gam_b:
        raise InternalInconsistencyError("gamma", f"{gam_a} vs {gam_b}")
    om_a = omega_coeffs_closed(p, k)
    H = eigvec_matrix(p, k)
    om_b = tuple(H[i][5] for i in range(6))
    if om_a != om_b:
        raise InternalInconsistencyError("omega", f"{om_a} vs {om_b}")
    return ScalarTables(
        lam=lam_a,
        mu=mu_a,
        gamma=gam_a,
        omega=om_a,
        eta=eta_values(p, k),
        epsfac=tuple(Fraction(v) for v in norm_scales(p, k)),
        vartheta=quotient_eigs(p),
        eps_offset=DIST_OFFSETS,
    )


@dataclass(frozen=True)
class ParamBundle:
    """Every closed-form object at a fixed (params, k); the single source the
    model and verifier layers consume (and that negative-control tests perturb)."""

    p: GraphParams
    k: int
    theta: tuple[int, ...]
    theta_star: tuple[int, ...]
    sizes: tuple[int, ...]
    C: tuple[tuple[int, ...], ...]
    H: Matrix
    G: tuple[tuple[int, ...], ...]
    cross: dict[int, tuple[tuple[int, ...], ...]] = field(repr=False)
    tables: ScalarTables = field(repr=False)

    @property
    def vertex_count(self) -> int:
        return self.p.vertex_count


def param_bundle(p: GraphParams, k: int) -> ParamBundle:
    p.validate_k(k)
    return ParamBundle(
        p=p,
        k=k,
        theta=eigenvalues(p),
        theta_star=dual_eigenvalues(p),
        sizes=partition_sizes(p, k),
        C=quotient_matrix(p, k),
        H=eigvec_matrix(p, k),
        G=gram_closed_form(p, k),
        cross={ell: cross_matrix(p, k, ell) for ell in range(k - 2, k + 3)},
        tables=scalar_tables(p, k),
    )


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    ok: bool
    witness: dict | None = None


def _fail(name: str, **kw) -> IdentityCheck:
    return IdentityCheck(name, False, {k: (frac_str(v) if isinstance(v, Fraction) else v) for k, v in kw.items()})


def verify_closed_form_identities(bundle: ParamBundle) -> list[IdentityCheck]:
    """Check every internal identity among the closed forms, exactly.

    Returns one entry per named identity; failures carry a witness locating
    the first offending index.
    """
    p, k = bundle.p, bundle.k
    ts = bundle.theta_star
    th = bundle.theta
    t = bundle.tables
    sizes, C, H, G = bundle.sizes, bundle.C, bundle.H, bundle.G
    X = p.vertex_count
    out: list[IdentityCheck] = []

    def add(name: str, ok: bool, witness: dict | None = None):
        out.append(IdentityCheck(name, ok, witness if not ok else None))

    kappa = valency(p)
    c1, a1, b1 = intersection_numbers(p, 1)
    add("theta-strictly-decreasing", all(th[i] > th[i + 1] for i in range(p.D)))
    add("theta0-equals-valency", th[0] == kappa)
    add("self-duality", th == ts)
    add("dim-eigenspace-equals-valency", dim_eigenspace(p) == kappa)
    add("three-term-relation", three_term_holds(p))
    add("krein-equals-a1", krein_q111(p) == a1)
    add("partition-sizes-sum", sum(sizes) == kappa, {"sum": sum(sizes), "valency": kappa})
    add("partition-sizes-positive", all(s > 0 for s in sizes))
    add("offset-table", t.eps_offset == (-1, 0, 0, 0, 0, 1))

    bad = next((i for i in range(6) if sum(C[i]) != a1), None)
    add("quotient-row-sums", bad is None, None if bad is None else {"row": bad + 1, "sum": sum(C[bad]), "a1": a1})

    bad = next(
        ((i, j) for i in range(6) for j in range(6) if sizes[i] * C[i][j] != sizes[j] * C[j][i]),
        None,
    )
    add("quotient-detailed-balance", bad is None, None if bad is None else {"i": bad[0] + 1, "j": bad[1] + 1})

    CH = mat_mul(frac_matrix(C), H)
    HT = mat_mul(H, diag(t.vartheta))
    bad = next(((i, j) for i in range(6) for j in range(6) if CH[i][j] != HT[i][j]), None)
    add(
        "quotient-eigenvectors",
        bad is None,
        None
        if bad is None
        else {"i": bad[0] + 1, "j": bad[1] + 1, "lhs": frac_str(CH[bad[0]][bad[1]]), "rhs": frac_str(HT[bad[0]][bad[1]])},
    )

    HOH = mat_mul(transpose(H), mat_mul(diag(sizes), H))
    bad = next(
        (
            (i, j)
            for i in range(6)
            for j in range(6)
            if HOH[i][j] != (t.eta[i] if i == j else 0)
        ),
        None,
    )
    add(
        "weighted-h-orthogonality",
        bad is None,
        None if bad is None else {"i": bad[0] + 1, "j": bad[1] + 1, "value": frac_str(HOH[bad[0]][bad[1]])},
    )
    add("eta-positive", all(e > 0 for e in t.eta))

    add("gram-two-countings", mat_eq(frac_matrix(G), frac_matrix(gram_closed_form_alt(p, k))))

    HGH = mat_mul(transpose(H), mat_mul(frac_matrix(G), H))
    bad = next(
        (
            (i, j)
            for i in range(6)
            for j in range(6)
            if HGH[i][j] != (t.epsfac[i] * t.eta[i] if i == j else 0)
        ),
        None,
    )
    add(
        "h-gram-diagonal",
        bad is None,
        None if bad is None else {"i": bad[0] + 1, "j": bad[1] + 1, "value": frac_str(HGH[bad[0]][bad[1]])},
    )

    add("lambda-sum-is-theta1", sum(t.lam) == th[1], {"sum": frac_str(sum(t.lam))})
    add("mu1-is-theta1", t.mu[0] == th[1])
    add("mu6-zero", t.mu[5] == 0)
    add("gamma6-zero", t.gamma[5] == 0)
    add(
        "gamma-mu-sum",
        sum(g * m for g, m in zip(t.gamma, t.mu)) == -1,
        {"sum": frac_str(sum(g * m for g, m in zip(t.gamma, t.mu)))},
    )
    add(
        "vartheta-gamma-mu-sum",
        sum(Fraction(v) * g * m for v, g, m in zip(t.vartheta, t.gamma, t.mu)) == 0,
    )

    # distance census identity: for all i,j the inner products of class sums
    # against the balance relation close up exactly
    bad = None
    for i in range(6):
        for j in range(6):
            d = 1 if i == j else 0
            lhs = Fraction(d * ts[0] + C[i][j] * ts[1] + (sizes[j] - C[i][j] - d) * ts[2])
            lhs -= sum(
                Fraction(bundle.cross[ell][i][j] * ts[ell])
                for ell in range(k - 2, k + 3)
                if 0 <= ell <= p.D and bundle.cross[ell][i][j]
            )
            rhs = t.lam[j] * (ts[1] - ts[k + t.eps_offset[i]])
            if lhs != rhs:
                bad = {"i": i + 1, "j": j + 1, "lhs": frac_str(lhs), "rhs": frac_str(rhs)}
                break
        if bad:
            break
    add("distance-census-identity", bad is None, bad)

    # row sums of the cross matrices recover the intersection numbers at
    # distance k+offset(i)
    bad = None
    for i in range(6):
        h = k + t.eps_offset[i]
        ch, ah, bh = intersection_numbers(p, h)
        expected = {h - 1: ch, h: ah, h + 1: bh}
        for ell in range(k - 2, k + 3):
            got = sum(bundle.cross[ell][i])
            want = expected.get(ell, 0)
            if got != want:
                bad = {"i": i + 1, "ell": ell, "got": got, "want": want}
                break
        if bad:
            break
    add("cross-row-sums", bad is None, bad)

    bad = next(
        (
            (ell, i, j)
            for ell in range(k - 2, k + 3)
            for i in range(6)
            for j in range(6)
            if sizes[i] * bundle.cross[ell][i][j] != sizes[j] * bundle.cross[ell][j][i]
        ),
        None,
    )
    add("cross-detailed-balance", bad is None, None if bad is None else {"ell": bad[0], "i": bad[1] + 1, "j": bad[2] + 1})

    bad = next(
        (
            (ell, i, j)
            for ell in range(k - 2, k + 3)
            for i in range(6)
            for j in range(6)
            if bundle.cross[ell][i][j] < 0
        ),
        None,
    )
    add("cross-nonnegative", bad is None)

    mults = local_spectrum_table(p)
    add("local-multiplicities-sum", sum(m for _, m in mults) == kappa)
    add("local-trace-zero", sum(e * m for e, m in mults) == 0)
    add("local-trace-square", sum(e * e * m for e, m in mults) == kappa * a1)

    add(
        "sym-star-asym-closed-forms",
        _sym_star_scalar_consistency(bundle),
    )
    return out


def _sym_star_scalar_consistency(bundle: ParamBundle) -> bool:
    """The printed scalars of EO^vee_j * (E x - E y) agree with the generic
    expression (sum_i lambda_i C[i][j] - lambda_j q^1_{1,1}) / |X|."""
    p, k = bundle.p, bundle.k
    lam = bundle.tables.lam
    C = bundle.C
    X = p.vertex_count
    q111 = krein_q111(p)
    printed = sym_star_asym_scalars(p, k)
    for j in range(6):
        generic = (sum(lam[i] * C[i][j] for i in range(6)) - lam[j] * q111) / X
        if generic != printed[j]:
            return False
    return True
