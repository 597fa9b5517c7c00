"""Exact linear algebra over Q and Z: elimination, HNF, lattices, char polys.

Matrices are plain lists of lists of Fraction (or int where stated); rows are
vectors.  Everything here is deterministic and allocation-light so the rest of
the package can lean on it in inner loops.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm


def frac_mat(rows):
    return [[Fraction(x) for x in row] for row in rows]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    bt = list(zip(*b))
    return [[sum(a[i][t] * bt[j][t] for t in range(k)) for j in range(m)]
            for i in range(n)]


def mat_vec(a, v):
    return [sum(row[j] * v[j] for j in range(len(v))) for row in a]


def vec_mat(v, a):
    return [sum(v[i] * a[i][j] for i in range(len(v))) for j in range(len(a[0]))]


def transpose(a):
    return [list(row) for row in zip(*a)]


def rref(mat):
    """Reduced row echelon form; returns (new_matrix, pivot_columns)."""
    m = [list(map(Fraction, row)) for row in mat]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [m[i][j] - f * m[r][j] for j in range(cols)]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(mat):
    return len(rref(mat)[1])


def det(mat):
    """Determinant by fraction-free-ish Gaussian elimination."""
    n = len(mat)
    m = [list(map(Fraction, row)) for row in mat]
    d = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            d = -d
        d *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [m[i][j] - f * m[c][j] for j in range(c, n)]
                m[i] = [Fraction(0)] * c + m[i]
    return d


def inverse(mat):
    n = len(mat)
    aug = [list(map(Fraction, mat[i])) + identity(n)[i] for i in range(n)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ValueError("matrix not invertible")
    return [row[n:] for row in red]


def solve(mat, rhs):
    """Solve x * mat = rhs for a row vector x (mat square invertible)."""
    return vec_mat(rhs, inverse(mat))


def solve_right(mat, rhs):
    """Solve mat * x = rhs for a column vector x given as a list."""
    n = len(mat)
    aug = [list(map(Fraction, mat[i])) + [Fraction(rhs[i])] for i in range(n)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ValueError("matrix not invertible")
    return [red[i][n] for i in range(n)]


def nullspace(mat):
    """Basis of {x : mat * x = 0}, canonical rref-based form."""
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    red, piv = rref(mat)
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for r, pc in enumerate(piv):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def charpoly(mat):
    """Characteristic polynomial det(xI - M), coefficients high to low degree.

    Faddeev-LeVerrier; exact over Fraction.
    """
    n = len(mat)
    coeffs = [Fraction(1)]
    m = [[Fraction(0)] * n for _ in range(n)]
    c = Fraction(1)
    mk = None
    for k in range(1, n + 1):
        if mk is None:
            mk = [list(map(Fraction, row)) for row in mat]
        else:
            for i in range(n):
                mk[i][i] += c
            mk = mat_mul(mat, mk)
        c = -Fraction(sum(mk[i][i] for i in range(n)), k)
        coeffs.append(c)
    return coeffs


# ---------------------------------------------------------------------------
# Integer matrices, HNF and lattices
# ---------------------------------------------------------------------------

def hnf(mat):
    """Row-style Hermite normal form of an integer matrix.

    Returns the full-row-rank part: basis rows in echelon form with positive
    pivots and entries above each pivot reduced mod the pivot.  Unique, hence
    usable as a canonical lattice key.
    """
    m = [list(map(int, row)) for row in mat if any(row)]
    if not m:
        return []
    rows, cols = len(m), len(m[0])
    r = 0
    for c in range(cols):
        # find/make a pivot at (r, c) by gcd row combinations
        pr = None
        for i in range(r, rows):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        for i in range(r + 1, rows):
            while m[i][c] != 0:
                q = m[r][c] // m[i][c]
                m[r] = [m[r][j] - q * m[i][j] for j in range(cols)]
                m[r], m[i] = m[i], m[r]
        if m[r][c] < 0:
            m[r] = [-x for x in m[r]]
        for i in range(r):
            q = m[i][c] // m[r][c]
            if q:
                m[i] = [m[i][j] - q * m[r][j] for j in range(cols)]
        r += 1
        if r == rows:
            break
    return [row for row in m[:r] if any(row)]


def hnf_with_transform(mat):
    """HNF plus transform: returns (H, U) with U * mat == H_full (all rows).

    U is unimodular over Z; rows of H beyond the rank are zero.
    """
    m = [list(map(int, row)) for row in mat]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    r = 0
    for c in range(cols):
        pr = None
        for i in range(r, rows):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        u[r], u[pr] = u[pr], u[r]
        for i in range(r + 1, rows):
            while m[i][c] != 0:
                q = m[r][c] // m[i][c]
                m[r] = [m[r][j] - q * m[i][j] for j in range(cols)]
                u[r] = [u[r][j] - q * u[i][j] for j in range(rows)]
                m[r], m[i] = m[i], m[r]
                u[r], u[i] = u[i], u[r]
        if m[r][c] < 0:
            m[r] = [-x for x in m[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            q = m[i][c] // m[r][c]
            if q:
                m[i] = [m[i][j] - q * m[r][j] for j in range(cols)]
                u[i] = [u[i][j] - q * u[r][j] for j in range(rows)]
        r += 1
        if r == rows:
            break
    return m, u


def int_kernel(mat):
    """Z-basis of {x integer row vector : x * mat = 0}."""
    h, u = hnf_with_transform(mat)
    ker = [u[i] for i in range(len(h)) if not any(h[i])]
    return hnf(ker) if ker else []


def _denominator_lcm(rows):
    d = 1
    for row in rows:
        for x in row:
            d = lcm(d, Fraction(x).denominator)
    return d


def hnf_rational(rows):
    """Canonical HNF basis of the lattice spanned by rational rows."""
    d = _denominator_lcm(rows)
    int_rows = [[int(Fraction(x) * d) for x in row] for row in rows]
    h = hnf(int_rows)
    return [[Fraction(x, d) for x in row] for row in h]


def lattice_sum(basis_a, basis_b):
    return hnf_rational(list(basis_a) + list(basis_b))


def lattice_intersection(basis_a, basis_b):
    """Basis of the intersection of two full lattices given by rational rows."""
    d = lcm(_denominator_lcm(basis_a), _denominator_lcm(basis_b))
    a = [[int(Fraction(x) * d) for x in row] for row in basis_a]
    b = [[int(Fraction(x) * d) for x in row] for row in basis_b]
    stacked = a + [[-x for x in row] for row in b]
    ker = int_kernel(stacked)
    na = len(a)
    out = []
    for k in ker:
        vec = [sum(k[i] * a[i][j] for i in range(na)) for j in range(len(a[0]))]
        out.append([Fraction(x, d) for x in vec])
    return hnf_rational(out)


def in_lattice(vec, basis):
    """Is the rational vector in the lattice spanned by the basis rows?"""
    try:
        coords = solve(basis, list(map(Fraction, vec)))
    except ValueError:
        return False
    return all(c.denominator == 1 for c in coords)


def lattice_index(big, small):
    """Index [big : small] for small <= big, as a positive integer."""
    idx = det(small) / det(big)
    idx = abs(idx)
    if idx.denominator != 1:
        raise ValueError("not a sublattice")
    return idx.numerator


def content(values):
    """gcd of numerators / lcm of denominators of a family of rationals."""
    num = 0
    den = 1
    for v in values:
        v = Fraction(v)
        num = gcd(num, v.numerator)
        den = lcm(den, v.denominator)
    if num == 0:
        return Fraction(0)
    return Fraction(num, den)
