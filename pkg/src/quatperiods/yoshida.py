"""Degree-2 Yoshida lift Fourier coefficients and diagonal restriction.

Fourier indices are half-integral matrices [[n1, m2/2], [m2/2, n2]] with the
off-diagonal taken from B(x1, x2)/2 (the theta-series convention; the factor
of 2 ambiguity against the displayed lift matrix is resolved this way and
flagged in the project notes).  Truncation is by trace(T) = n1 + n2.

Coefficient polynomials use the c_{a1 a2} machinery with the proportionality
constants set to 1, so everything here is exact, for vector values too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ._poly import Poly
from .harmonics import c_coeff
from .lattice import short_vectors
from .quatalg import Quaternion


class YoshidaError(ValueError):
    pass


@dataclass(frozen=True)
class HalfIntMatrix:
    """(n1, m2, n2) representing [[n1, m2/2], [m2/2, n2]]."""
    n1: int
    m2: int
    n2: int

    def is_psd(self):
        return self.n1 >= 0 and self.n2 >= 0 and \
            4 * self.n1 * self.n2 - self.m2 * self.m2 >= 0

    @property
    def trace(self):
        return self.n1 + self.n2

    def transform(self, u):
        """U^t T U for an integer 2x2 matrix U given as [[a,b],[c,d]]."""
        (a, b), (c, d) = u
        n1 = self.n1 * a * a + self.m2 * a * c + self.n2 * c * c
        n2 = self.n1 * b * b + self.m2 * b * d + self.n2 * d * d
        m2 = 2 * self.n1 * a * b + self.m2 * (a * d + b * c) \
            + 2 * self.n2 * c * d
        return HalfIntMatrix(n1, m2, n2)

    def as_tuple(self):
        return (self.n1, self.m2, self.n2)


@dataclass
class FourierTable:
    """Fourier coefficients of a degree-2 lift, indexed by HalfIntMatrix.

    Coefficients are Polys in 2 variables (X1, X2), homogeneous of degree
    2*nu2 (degree 0 in the scalar case).
    """
    nu1: int
    nu2: int
    prec: int
    coeffs: dict = field(default_factory=dict)

    def coefficient(self, t):
        if t.trace > self.prec:
            raise YoshidaError(f"index {t} beyond precision {self.prec}")
        return self.coeffs.get(t, Poly.zero(2))

    def indices(self):
        return sorted(self.coeffs, key=lambda t: t.as_tuple())

    def to_json(self):
        return {
            "nu": [self.nu1, self.nu2],
            "prec": self.prec,
            "coeffs": [{"T": list(t.as_tuple()),
                        "poly": self.coeffs[t].serialize()}
                       for t in self.indices()],
        }


def _det_u(u):
    return u[0][0] * u[1][1] - u[0][1] * u[1][0]


def yoshida_lift(phi1, phi2, prec):
    """Fourier table of the degree-2 lift of (phi1, phi2) up to trace prec.

    a(T) = sum_{ij} (1/e_i e_j) sum_{(x1,x2) in I_ij^2, index T}
           Psi(phi1(y_i) x phi2(y_j))(x1, x2),
    with the coefficient polynomials normalized by c-tilde = 1.  The lift is
    computed even when the w_p eigenvalues of the inputs differ (where it
    must come out identically zero).
    """
    cs = phi1.class_set
    if phi2.class_set is not cs:
        raise YoshidaError("forms must live on the same class set")
    nu1, nu2 = phi1.weight, phi2.weight
    if nu1 < nu2 or (nu1 - nu2) % 2:
        raise YoshidaError("need nu1 >= nu2 with nu1 - nu2 even")
    alg = cs.order.algebra
    table = FourierTable(nu1, nu2, prec)
    scalar = (nu1 == 0 and nu2 == 0)

    # all X-slots are stored: odd alpha' components are nonzero per index
    # and only cancel after the m2-summation of the diagonal restriction
    alphas = [(a1, 2 * nu2 - a1) for a1 in range(2 * nu2 + 1)] \
        if not scalar else []

    for i in range(cs.size):
        for j in range(cs.size):
            w = Fraction(1, cs.unit_counts[i] * cs.unit_counts[j])
            if scalar:
                f1 = phi1.values[i].terms.get((0, 0, 0), Fraction(0))
                f2 = phi2.values[j].terms.get((0, 0, 0), Fraction(0))
                coef = w * f1 * f2
                if coef == 0:
                    continue
                cpolys = None
            else:
                q_bip = _tensor_bipoly(phi1.values[i], phi2.values[j])
                if q_bip.is_zero():
                    continue
                family = psi_components(q_bip, nu1, nu2, alg)
                cpolys = {key: family[key] for key in alphas}
            conn = cs.connecting(i, j)
            vecs = short_vectors(conn, prec, include_zero=True)
            for v1, q1 in vecs:
                if q1.denominator != 1:
                    continue
                for v2, q2 in vecs:
                    if q1 + q2 > prec or q2.denominator != 1:
                        continue
                    m2 = conn.bilinear(v1, v2)
                    if m2.denominator != 1:
                        continue
                    t = HalfIntMatrix(int(q1), int(m2), int(q2))
                    if scalar:
                        add = Poly.const(2, coef)
                    else:
                        pt = conn.ambient(v1) + conn.ambient(v2)
                        add = Poly.zero(2)
                        for (a1, a2), cp in cpolys.items():
                            val = cp.eval(pt)
                            if val:
                                add = add + Poly.monomial((a1, a2), val * w)
                        if add.is_zero():
                            continue
                    cur = table.coeffs.get(t)
                    table.coeffs[t] = add if cur is None else cur + add
    table.coeffs = {t: c for t, c in table.coeffs.items() if not c.is_zero()}
    for t in table.coeffs:
        if not t.is_psd():
            raise YoshidaError(f"non-psd index {t} appeared")
    return table


def _tensor_bipoly(p_left, p_right):
    out = Poly.zero(6)
    for m1, c1 in p_left.terms.items():
        for m2, c2 in p_right.terms.items():
            out = out + Poly.monomial(tuple(m1) + tuple(m2), c1 * c2)
    return out


def _raise_x1(c):
    """x1 . grad_{x2}: derivative of x2 -> x2 + t x1 (coordinate free)."""
    out = Poly.zero(8)
    for s in range(4):
        out = out + Poly.variable(8, s) * c.diff(4 + s)
    return out


def psi_components(q_bip, nu1, nu2, alg):
    """Equivariant coefficient family of Psi(Q), one overall constant.

    Seeded by the trilinear construction at the bottom slot (0, 2 nu2), the
    other slots follow from the sl2 transvection, so the relative constants
    between X-monomials are the covariant ones; odd-parity slots are genuine
    polynomials here but cancel in all lattice sums.
    """
    comps = {(0, 2 * nu2): c_coeff(q_bip, 0, 2 * nu2, nu1, nu2, alg)}
    cur = comps[(0, 2 * nu2)]
    for a1 in range(2 * nu2):
        cur = _raise_x1(cur) * Fraction(1, a1 + 1)
        comps[(a1 + 1, 2 * nu2 - a1 - 1)] = cur
    return comps


def diagonal_restriction(table, alpha1, alpha2):
    """Coefficients c(n1, n2) of X1^a1 X2^a2 in the diagonal restriction.

    c(n1, n2) = sum_{m2} [X1^a1 X2^a2] a((n1, m2, n2)); identically zero
    unless both alpha_i' = alpha_i + nu1 - nu2 are even (parity gate).
    """
    if alpha1 + alpha2 != 2 * table.nu2:
        raise YoshidaError("alpha1 + alpha2 must equal 2*nu2")
    out = {}
    shift = table.nu1 - table.nu2
    if (alpha1 + shift) % 2 or (alpha2 + shift) % 2:
        for t in table.coeffs:
            out.setdefault((t.n1, t.n2), Fraction(0))
        return out
    for t, poly in table.coeffs.items():
        val = poly.terms.get((alpha1, alpha2), Fraction(0))
        key = (t.n1, t.n2)
        out[key] = out.get(key, Fraction(0)) + val
    return {k: v for k, v in sorted(out.items())}


def unimodular_check(table, u, t):
    """Check a(U^t T U) = det(U)^{nu1-nu2+2} * a(T)((X1,X2)U).

    Both indices must be within precision, else an error is raised.
    """
    det = _det_u(u)
    if det not in (1, -1):
        raise YoshidaError("U must be unimodular")
    t2 = t.transform(u)
    if t.trace > table.prec or t2.trace > table.prec:
        raise YoshidaError("index out of precision")
    lhs = table.coeffs.get(t2, Poly.zero(2))
    a_t = table.coeffs.get(t, Poly.zero(2))
    # sigma_{2 nu2}(U): substitute (X1, X2) -> (X1, X2) U^t, i.e. slot i
    # receives sum_j U[i][j] X_j (empirically pinned by the shear cases)
    rhs = a_t.subs_linear([[Fraction(u[0][0]), Fraction(u[0][1])],
                           [Fraction(u[1][0]), Fraction(u[1][1])]])
    rhs = rhs * Fraction(det ** (table.nu1 - table.nu2 + 2))
    return lhs == rhs
