"""Harmonic polynomial spaces, Gegenbauer kernels, invariant trilinear forms.

Spaces are parameterized by an exact rational Gram matrix A with
q(x) = x^T A x, so the whole machinery runs in the rational coordinates of a
given algebra (trace-zero 3-space or full 4-space) as well as in standard
coordinates.  Kernels are invariant expressions in q and the pairing
<x,y> = x^T A y, hence exact everywhere; inner products are Fischer pairings
rescaled so the kernels reproduce.

The invariant trilinear couplings are built from iterated Laplacians of
products followed by harmonic projection: T(P,Q,R) = <<proj(Lap^k(P*Q)), R>>.
They are nonzero exactly on balanced triples with even degree sum, and unique
up to scalar; the "delta-contraction/v1" tag records this normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from ._linalg import frac_mat, identity, inverse, mat_mul, rref, vec_mat
from ._poly import Poly, apply_diff_operator, fischer_pairing
from .quatalg import Quaternion


class HarmonicsError(ValueError):
    pass


def _monomials(nvars, degree):
    """All exponent tuples of the given total degree, sorted."""
    if nvars == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in _monomials(nvars - 1, degree - first):
            out.append((first,) + rest)
    return sorted(out)


class HarmonicSpace:
    """Polynomials on an n-space with quadratic form q(x) = x^T A x."""

    _cache = {}

    def __new__(cls, gram):
        key = tuple(tuple(Fraction(x) for x in row) for row in gram)
        if key not in cls._cache:
            obj = super().__new__(cls)
            obj._init(key)
            cls._cache[key] = obj
        return cls._cache[key]

    def _init(self, key):
        self.gram = frac_mat([list(row) for row in key])
        self.dim = len(self.gram)
        self.gram_inv = inverse(self.gram)
        self._proj_solvers = {}
        self._bases = {}
        self._kernel_norms = {}

    # -- basic objects -------------------------------------------------------
    def q_poly(self):
        n = self.dim
        p = Poly.zero(n)
        for i in range(n):
            for j in range(n):
                if self.gram[i][j]:
                    mono = [0] * n
                    mono[i] += 1
                    mono[j] += 1
                    p = p + Poly.monomial(mono, self.gram[i][j])
        return p

    def q_value(self, v):
        v = [Fraction(x) for x in v]
        return sum(v[i] * self.gram[i][j] * v[j]
                   for i in range(self.dim) for j in range(self.dim))

    def pairing_value(self, v, w):
        v = [Fraction(x) for x in v]
        w = [Fraction(x) for x in w]
        return sum(v[i] * self.gram[i][j] * w[j]
                   for i in range(self.dim) for j in range(self.dim))

    def laplacian(self, p):
        return p.laplacian(self.gram_inv)

    def is_harmonic(self, p):
        return self.laplacian(p).is_zero()

    def fischer(self, p, q):
        return fischer_pairing(p, q, self.gram_inv)

    # -- harmonic basis ------------------------------------------------------
    def harmonic_basis(self, degree):
        """Canonical basis of harmonic polynomials of the given degree."""
        if degree not in self._bases:
            monos = _monomials(self.dim, degree)
            if degree < 2:
                basis = [Poly.monomial(m) for m in monos]
            else:
                lower = _monomials(self.dim, degree - 2)
                rows = []
                for m in monos:
                    lap = self.laplacian(Poly.monomial(m))
                    rows.append([lap.terms.get(lm, Fraction(0))
                                 for lm in lower])
                # kernel of mono-coeff vector -> laplacian coeffs
                from ._linalg import nullspace
                ker = nullspace([list(col) for col in zip(*rows)])
                basis = []
                for v in ker:
                    p = Poly.zero(self.dim)
                    for coef, m in zip(v, monos):
                        if coef:
                            p = p + Poly.monomial(m, coef)
                    basis.append(p)
            self._bases[degree] = basis
        return self._bases[degree]

    def harmonic_dim(self, degree):
        return len(self.harmonic_basis(degree))

    def coords_in_basis(self, p, degree):
        """Coordinates of a harmonic polynomial in the canonical basis."""
        basis = self.harmonic_basis(degree)
        gram = self._basis_fischer_gram(degree)
        rhs = [self.fischer(b, p) for b in basis]
        from ._linalg import solve_right
        return solve_right(gram, rhs)

    @lru_cache(maxsize=None)
    def _basis_fischer_gram_cached(self, degree):
        basis = self.harmonic_basis(degree)
        return tuple(tuple(self.fischer(b1, b2) for b2 in basis)
                     for b1 in basis)

    def _basis_fischer_gram(self, degree):
        return [list(row) for row in self._basis_fischer_gram_cached(degree)]

    # -- harmonic projection -------------------------------------------------
    def _projection_solver(self, degree):
        """Inverse of g -> Lap(q*g) on homogeneous degree-(degree-2) polys."""
        if degree not in self._proj_solvers:
            lower = _monomials(self.dim, degree - 2)
            qp = self.q_poly()
            cols = []
            for m in lower:
                img = self.laplacian(qp * Poly.monomial(m))
                cols.append([img.terms.get(lm, Fraction(0)) for lm in lower])
            mat = [list(row) for row in zip(*cols)]
            self._proj_solvers[degree] = (lower, inverse(mat))
        return self._proj_solvers[degree]

    def harmonic_projection(self, p):
        """Fischer-orthogonal projection onto harmonics, degree by degree."""
        out = Poly.zero(self.dim)
        for d in sorted({sum(m) for m in p.terms}):
            comp = p.homogeneous_component(d)
            while d >= 2:
                lap = self.laplacian(comp)
                if lap.is_zero():
                    break
                lower, inv = self._projection_solver(d)
                rhs = [lap.terms.get(lm, Fraction(0)) for lm in lower]
                g_coords = vec_mat(rhs, [list(r) for r in zip(*inv)])
                g = Poly.zero(self.dim)
                for coef, m in zip(g_coords, lower):
                    if coef:
                        g = g + Poly.monomial(m, coef)
                comp = comp - self.q_poly() * g
                break
            out = out + comp
        return out

    # -- kernels -------------------------------------------------------------
    def kernel_bipoly(self, degree):
        """Zonal reproducing kernel K(x, y) as a polynomial in 2*dim vars."""
        n = self.dim
        pair = Poly.zero(2 * n)
        for i in range(n):
            for j in range(n):
                if self.gram[i][j]:
                    mono = [0] * (2 * n)
                    mono[i] += 1
                    mono[n + j] += 1
                    pair = pair + Poly.monomial(mono, self.gram[i][j])
        qx = Poly.zero(2 * n)
        qy = Poly.zero(2 * n)
        for i in range(n):
            for j in range(n):
                if self.gram[i][j]:
                    mx = [0] * (2 * n)
                    mx[i] += 1
                    mx[j] += 1
                    qx = qx + Poly.monomial(mx, self.gram[i][j])
                    my = [0] * (2 * n)
                    my[n + i] += 1
                    my[n + j] += 1
                    qy = qy + Poly.monomial(my, self.gram[i][j])
        return _kernel_from_invariants(self.dim, degree, pair, qx, qy)

    def kernel_at(self, degree, point):
        """K(x, point) as a polynomial in x (dim vars)."""
        bip = self.kernel_bipoly(degree)
        n = self.dim
        assigned = bip.eval_partial({n + i: point[i] for i in range(n)})
        out = Poly.zero(n)
        for m, c in assigned.terms.items():
            out = out + Poly.monomial(m[:n], c)
        return out

    def kernel_normalization(self, degree):
        """c with <K(.,y), Q>_Fischer = c * Q(y) for harmonic Q.

        Asserts consistency over the whole basis at two generic points,
        which is the reproducing-kernel property itself.
        """
        if degree not in self._kernel_norms:
            basis = self.harmonic_basis(degree)
            pts = ([Fraction(k + 1, 1) for k in range(self.dim)],
                   [Fraction(2 * k + 1, 2) for k in range(self.dim)])
            c = None
            for pt in pts:
                ker = self.kernel_at(degree, pt)
                for b in basis:
                    val = b.eval(pt)
                    if val == 0:
                        continue
                    ratio = self.fischer(ker, b) / val
                    if c is None:
                        c = ratio
                    elif c != ratio:
                        raise HarmonicsError(
                            "kernel fails the reproducing property")
            if c is None or c == 0:
                raise HarmonicsError("degenerate kernel normalization")
            self._kernel_norms[degree] = c
        return self._kernel_norms[degree]

    def inner(self, p, q, degree=None):
        """Invariant inner product normalized so the kernel reproduces."""
        if degree is None:
            degree = p.total_degree()
        if degree == 0:
            return self.fischer(p, q)
        return self.fischer(p, q) / self.kernel_normalization(degree)


def _kernel_from_invariants(dim, degree, pair, qx, qy):
    """Zonal harmonic kernel written in <x,y>, q(x), q(y)."""
    out = Poly.zero(pair.nvars)
    if dim == 3:
        # solid Legendre: sum_j (-1)^j C(nu,j) C(2nu-2j,nu) <x,y>^{nu-2j} (qq')^j
        for j in range(degree // 2 + 1):
            c = Fraction((-1) ** j * comb(degree, j) * comb(2 * degree - 2 * j,
                                                            degree))
            out = out + (pair ** (degree - 2 * j)) * (qx * qy) ** j * c
        return out
    if dim == 4:
        # 2^a sum_j (-1)^j ((a-j)!/(j!(a-2j)!)) (qq')^j tr(x conj(y))^{a-2j},
        # with tr(x conj(y)) = 2 <x,y>
        for j in range(degree // 2 + 1):
            c = Fraction((-1) ** j * factorial(degree - j) * 2 ** degree,
                         factorial(j) * factorial(degree - 2 * j))
            c *= Fraction(2) ** (degree - 2 * j)
            out = out + (pair ** (degree - 2 * j)) * (qx * qy) ** j * c
        return out
    raise HarmonicsError(f"no kernel for dimension {dim}")


# ---------------------------------------------------------------------------
# standard spaces and algebra-attached spaces
# ---------------------------------------------------------------------------

def standard_space(dim):
    return HarmonicSpace(identity(dim))


def trace_zero_space(alg):
    g = alg.trace_zero_gram()
    return HarmonicSpace([[x / 2 for x in row] for row in g])


def full_space(alg):
    g = alg.norm_gram()
    return HarmonicSpace([[x / 2 for x in row] for row in g])


@dataclass
class HarmonicPoly:
    """A harmonic polynomial with its domain bookkeeping."""
    domain: str          # "trace_zero" or "full"
    degree: int
    poly: Poly
    space: HarmonicSpace

    def __post_init__(self):
        if not self.space.is_harmonic(self.poly):
            raise HarmonicsError("polynomial is not harmonic for this form")
        if not self.poly.is_zero() and self.poly.total_degree() != self.degree:
            raise HarmonicsError("degree mismatch")


# ---------------------------------------------------------------------------
# Gegenbauer polynomial and kernel values (the 4-space displays)
# ---------------------------------------------------------------------------

def gegenbauer_1d(alpha):
    """One-variable Gegenbauer polynomial with exact rational coefficients."""
    if alpha < 0:
        raise HarmonicsError("alpha must be nonnegative")
    p = Poly.zero(1)
    for j in range(alpha // 2 + 1):
        c = Fraction((-1) ** j * 2 ** alpha * factorial(alpha - j),
                     factorial(j) * factorial(alpha - 2 * j) * 4 ** j)
        p = p + Poly.monomial((alpha - 2 * j,), c)
    return p


def gegenbauer_kernel(alpha, x, x2):
    """Kernel value at two quaternions; exact rational (half powers cancel)."""
    nx, ny = x.norm(), x2.norm()
    t = (x * x2.conj()).trace()
    total = Fraction(0)
    for j in range(alpha // 2 + 1):
        c = Fraction((-1) ** j * 2 ** alpha * factorial(alpha - j),
                     factorial(j) * factorial(alpha - 2 * j))
        total += c * (nx * ny) ** j * t ** (alpha - 2 * j)
    return total


def kernel_normalization(alpha, space=None):
    """Normalization constant and the reproducing inner product on U_alpha."""
    if space is None:
        space = standard_space(4)
    c = space.kernel_normalization(alpha)

    def inner(p, q):
        return space.inner(p, q, alpha)

    return c, inner


# ---------------------------------------------------------------------------
# tau action (conjugation on the trace-zero space)
# ---------------------------------------------------------------------------

def tau_matrix(y):
    """Matrix rows = coordinates of y^{-1} e_t y on the basis i, j, k."""
    if y.is_zero():
        raise HarmonicsError("tau action needs nonzero y")
    alg = y.alg
    n = y.norm()
    rows = []
    for e in alg.gens():
        img = y.conj() * e * y
        coords = [img.x / n, img.y / n, img.z / n]
        if img.w != 0:
            raise HarmonicsError("conjugation left the trace-zero space")
        rows.append(coords)
    return rows


def tau_action(y, p):
    """(tau(y) P)(x) = P(y^{-1} x y) on trace-zero polynomials.

    Group action: tau(y1 y2) = tau(y1) o tau(y2); harmonicity and degree are
    preserved because conjugation is an isometry of the norm form.
    """
    m = tau_matrix(y)
    mt = [[m[j][i] for j in range(3)] for i in range(3)]
    return p.subs_linear(mt)


# ---------------------------------------------------------------------------
# invariant trilinear forms
# ---------------------------------------------------------------------------

def balanced(a, b, c):
    return abs(a - b) <= c <= a + b


def _cross_bilinear(space, p, q):
    """SO(q)-equivariant epsilon coupling: eps(x, A^{-1} grad p, A^{-1} grad q).

    Used for balanced triples with odd degree sum, where the invariant
    coupling is the pseudo-scalar one and cannot be realized by plain
    Laplacian contraction of products.
    """
    n = space.dim
    ginv = space.gram_inv
    raised_p = [sum((p.diff(j) * ginv[b][j] for j in range(n)),
                    Poly.zero(n)) for b in range(n)]
    raised_q = [sum((q.diff(j) * ginv[c][j] for j in range(n)),
                    Poly.zero(n)) for c in range(n)]
    eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
           (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}
    out = Poly.zero(n)
    for (a, b, c), sign in eps.items():
        out = out + Poly.variable(n, a) * raised_p[b] * raised_q[c] * sign
    return out


@dataclass
class TrilinearForm:
    """Invariant coupling on H_a x H_b x H_c for one 3-space."""
    space: HarmonicSpace
    degrees: tuple
    zero: bool
    reason: str = ""
    normalization: str = "delta-contraction/v1"
    _tensor: dict = field(default_factory=dict, repr=False)

    def value(self, p, q, r):
        a, b, c = self.degrees
        if self.zero:
            return Fraction(0)
        if (a + b + c) % 2:
            prod = _cross_bilinear(self.space, p, q)
            k = (a + b - 1 - c) // 2
        else:
            prod = p * q
            k = (a + b - c) // 2
        for _ in range(k):
            prod = self.space.laplacian(prod)
        prod = self.space.harmonic_projection(prod)
        return self.space.inner(prod, r, c)

    def tensor(self):
        """Full coupling tensor on the canonical bases (cached)."""
        if self.zero:
            return {}
        if not self._tensor:
            a, b, c = self.degrees
            ba = self.space.harmonic_basis(a)
            bb = self.space.harmonic_basis(b)
            bc = self.space.harmonic_basis(c)
            for ia, pa in enumerate(ba):
                for ib, pb in enumerate(bb):
                    for ic, pc in enumerate(bc):
                        v = self.value(pa, pb, pc)
                        if v:
                            self._tensor[(ia, ib, ic)] = v
        return self._tensor

    def nonzero_witness(self):
        """A basis triple with nonzero value, or None."""
        if self.zero:
            return None
        a, b, c = self.degrees
        for ia, pa in enumerate(self.space.harmonic_basis(a)):
            for ib, pb in enumerate(self.space.harmonic_basis(b)):
                for ic, pc in enumerate(self.space.harmonic_basis(c)):
                    if self.value(pa, pb, pc):
                        return (ia, ib, ic)
        return None


def trilinear_form(nu, beta1p, beta2p, space=None):
    """Invariant trilinear form on U_nu x U_{beta1p/2} x U_{beta2p/2}.

    beta1p, beta2p must be even.  The form is nonzero iff the half-degree
    triple is balanced (triangle inequalities) with even sum; otherwise the
    zero form is returned, tagged with the reason.
    """
    if beta1p % 2 or beta2p % 2 or beta1p < 0 or beta2p < 0:
        raise HarmonicsError("beta degrees must be even and nonnegative")
    if space is None:
        space = standard_space(3)
    a, b, c = nu, beta1p // 2, beta2p // 2
    if not balanced(a, b, c):
        return TrilinearForm(space, (a, b, c), True, reason="unbalanced")
    if (a + b + c) % 2:
        return TrilinearForm(space, (a, b, c), True, reason="parity")
    return TrilinearForm(space, (a, b, c), False)


def invariant_coupling(nu, beta1p, beta2p, space=None):
    """SO(3)-invariant coupling for every balanced triple (internal).

    Unlike trilinear_form this also realizes the pseudo-scalar coupling on
    balanced triples with odd degree sum (epsilon contraction); those arise
    for coefficient polynomials when nu1 - nu2 is odd.
    """
    if beta1p % 2 or beta2p % 2 or beta1p < 0 or beta2p < 0:
        raise HarmonicsError("beta degrees must be even and nonnegative")
    if space is None:
        space = standard_space(3)
    a, b, c = nu, beta1p // 2, beta2p // 2
    if not balanced(a, b, c):
        return TrilinearForm(space, (a, b, c), True, reason="unbalanced")
    if (a + b + c) % 2:
        return TrilinearForm(space, (a, b, c), False,
                             normalization="epsilon-contraction/v1")
    return TrilinearForm(space, (a, b, c), False)


# ---------------------------------------------------------------------------
# tensor split U_{2m}(4-space) = U_m x U_m (3-space pairs)
# ---------------------------------------------------------------------------

def _poly_quaternion_product(alg, coords1, coords2, nvars):
    """Multiply two quaternions whose coordinates are Polys."""
    a, b = alg.a, alg.b
    w1, x1, y1, z1 = coords1
    w2, x2, y2, z2 = coords2
    return (
        w1 * w2 + x1 * x2 * a + y1 * y2 * b - z1 * z2 * (a * b),
        w1 * x2 + x1 * w2 - y1 * z2 * b + z1 * y2 * b,
        w1 * y2 + y1 * w2 + x1 * z2 * a - z1 * x2 * a,
        w1 * z2 + z1 * w2 + x1 * y2 - y1 * x2,
    )


class SplitIso:
    """The equivariant isomorphism U_m x U_m -> U_{2m}(full space).

    Built from the invariant kernel w(x; u, v) = tr(u x v conj(x)) with u, v
    trace zero: Phi(P x Q)(x) pairs P(u) Q(v) against harmproj_x(w^m).
    Indices: u is the left similitude slot, v the right.
    """

    _cache = {}

    def __new__(cls, alg, m):
        key = (alg, m)
        if key not in cls._cache:
            obj = super().__new__(cls)
            obj._init(alg, m)
            cls._cache[key] = obj
        return cls._cache[key]

    def _init(self, alg, m):
        self.alg = alg
        self.m = m
        self.space3 = trace_zero_space(alg)
        self.space4 = full_space(alg)
        nv = 10  # x:0-3, u:4-6, v:7-9
        zero = Poly.zero(nv)
        xq = tuple(Poly.variable(nv, i) for i in range(4))
        uq = (zero, Poly.variable(nv, 4), Poly.variable(nv, 5),
              Poly.variable(nv, 6))
        vq = (zero, Poly.variable(nv, 7), Poly.variable(nv, 8),
              Poly.variable(nv, 9))
        xbar = (xq[0], -xq[1], -xq[2], -xq[3])
        prod = _poly_quaternion_product(self.alg, uq, xq, nv)
        prod = _poly_quaternion_product(self.alg, prod, vq, nv)
        prod = _poly_quaternion_product(self.alg, prod, xbar, nv)
        w = prod[0] * 2  # reduced trace
        wm = w ** m
        self.kernel = self._harmproj_x(wm)
        self._build_matrix()

    def _harmproj_x(self, p):
        """Harmonic projection in the x-block with u,v symbolic."""
        # group terms by x-monomial, project each x-monomial once
        groups = {}
        for mono, c in p.terms.items():
            xm, rest = mono[:4], mono[4:]
            groups.setdefault(xm, []).append((rest, c))
        proj_cache = {}
        out = Poly.zero(10)
        for xm, items in groups.items():
            if xm not in proj_cache:
                proj_cache[xm] = self.space4.harmonic_projection(
                    Poly.monomial(xm))
            px = proj_cache[xm]
            for rest, c in items:
                for m2, c2 in px.terms.items():
                    out = out + Poly.monomial(tuple(m2) + rest, c * c2)
        return out

    def _build_matrix(self):
        m = self.m
        b3 = self.space3.harmonic_basis(m)
        b4 = self.space4.harmonic_basis(2 * m)
        images = []
        self.pairs = [(r, s) for r in range(len(b3)) for s in range(len(b3))]
        for (r, s) in self.pairs:
            img = _pair_block(self.kernel, b3[r], 4, self.space3.gram_inv)
            img = _pair_block(img, b3[s], 7, self.space3.gram_inv)
            img4 = Poly.zero(4)
            for mono, c in img.terms.items():
                img4 = img4 + Poly.monomial(mono[:4], c)
            images.append(img4)
        mat = [self.space4.coords_in_basis(img, 2 * m) for img in images]
        self.phi_matrix = mat              # rows indexed by (r,s) pairs
        self.phi_inv = inverse(mat)        # columns map basis4 -> pair coords

    def apply(self, p3_left, p3_right):
        """Phi(P x Q) as a harmonic polynomial on the full space."""
        coords_l = self.space3.coords_in_basis(p3_left, self.m)
        coords_r = self.space3.coords_in_basis(p3_right, self.m)
        b4 = self.space4.harmonic_basis(2 * self.m)
        out = Poly.zero(4)
        for idx, (r, s) in enumerate(self.pairs):
            c = coords_l[r] * coords_r[s]
            if c:
                for t, bt in enumerate(b4):
                    if self.phi_matrix[idx][t]:
                        out = out + bt * (c * self.phi_matrix[idx][t])
        return out

    def split_coords(self, coords4):
        """Pair coordinates (r, s) of a 4-space harmonic given in basis4."""
        return vec_mat(coords4, self.phi_inv)


def _pair_block(big, small, offset, gram_inv):
    """Fischer-pair small (3 vars) against the block at offset in big."""
    n = big.nvars
    coeff = [[Fraction(0)] * n for _ in range(n)]
    for i in range(3):
        for j in range(3):
            coeff[offset + i][offset + j] = gram_inv[i][j]
    op = Poly.zero(n)
    for mono, c in small.terms.items():
        mm = [0] * n
        mm[offset], mm[offset + 1], mm[offset + 2] = mono
        op = op + Poly.monomial(mm, c)
    applied = apply_diff_operator(op, big, coeff)
    out = Poly.zero(n)
    for mono, c in applied.terms.items():
        if all(mono[offset + k] == 0 for k in range(3)):
            out = out + Poly.monomial(mono, c)
    return out


# ---------------------------------------------------------------------------
# coefficient polynomials c_{alpha1 alpha2}
# ---------------------------------------------------------------------------

def c_coeff(q_bipoly, alpha1, alpha2, nu1, nu2, alg):
    """Coefficient polynomial c_{a1,a2}((x1,x2), Q) with normalization 1.

    q_bipoly: polynomial in 6 vars (s:0-2, t:3-5), bihomogeneous of degrees
    (nu1, nu2) and harmonic in each block, representing an element of
    U_{nu1} x U_{nu2} on the trace-zero space of alg.

    Output: Poly in 8 vars (x1:0-3, x2:4-7), harmonic of degree
    alpha_i + nu1 - nu2 in x_i.  Raises on parity violation.
    """
    if alpha1 + alpha2 != 2 * nu2:
        raise HarmonicsError("alpha1 + alpha2 must equal 2*nu2")
    a1p = alpha1 + nu1 - nu2
    a2p = alpha2 + nu1 - nu2
    if a1p % 2 or a2p % 2:
        raise HarmonicsError("alpha' degrees must be even (parity gate)")
    if a1p < 0 or a2p < 0:
        raise HarmonicsError("negative harmonic degree")
    m1, m2 = a1p // 2, a2p // 2
    space3 = trace_zero_space(alg)
    space4 = full_space(alg)

    t1 = invariant_coupling(nu1, a1p, a2p, space3)
    t2 = invariant_coupling(nu2, a1p, a2p, space3)
    if t1.zero or t2.zero:
        return Poly.zero(8)

    # Q coordinates on basis(nu1) x basis(nu2)
    b_nu1 = space3.harmonic_basis(nu1)
    b_nu2 = space3.harmonic_basis(nu2)
    q_coords = _bipoly_coords(q_bipoly, space3, nu1, nu2)

    splits = (SplitIso(alg, m1), SplitIso(alg, m2))
    kers = (_kernel_split_components(space4, splits[0], a1p),
            _kernel_split_components(space4, splits[1], a2p))

    ten1 = t1.tensor()
    ten2 = t2.tensor()
    if not ten1 or not ten2:
        return Poly.zero(8)

    n1pairs = splits[0].pairs
    n2pairs = splits[1].pairs
    out = Poly.zero(8)
    for (ia, ib), qc in q_coords.items():
        if not qc:
            continue
        for i1, (r1, s1) in enumerate(n1pairs):
            d1 = kers[0][i1]
            if d1.is_zero():
                continue
            for i2, (r2, s2) in enumerate(n2pairs):
                v1 = ten1.get((ia, r1, r2))
                if not v1:
                    continue
                v2 = ten2.get((ib, s1, s2))
                if not v2:
                    continue
                d2 = kers[1][i2]
                if d2.is_zero():
                    continue
                d2s = _shift_block(d2, 4)
                out = out + d1 * d2s * (qc * v1 * v2)
    return out


def _shift_block(p4, offset):
    out = Poly.zero(8)
    for mono, c in p4.terms.items():
        mm = [0] * 8
        for k in range(4):
            mm[offset + k] = mono[k]
        out = out + Poly.monomial(tuple(mm), c)
    return out


def _kernel_split_components(space4, split, alpha):
    """Split components of the 4-space kernel G^{(alpha)}(x, .).

    Returns, for each (r, s) pair index of the split basis, the x-polynomial
    coefficient (a Poly in 8 vars living on the x1 block 0-3).
    """
    bip = space4.kernel_bipoly(alpha)  # vars x:0-3, y:4-7
    b4 = space4.harmonic_basis(alpha)
    # coordinates of G(x, .) in basis4 of the y-block, coefficients in x
    gram = space4._basis_fischer_gram(alpha)
    ginv = inverse(gram)
    rhs = []
    for b in b4:
        paired = _pair_block4(bip, b, 4, space4.gram_inv)
        px = Poly.zero(8)
        for mono, c in paired.terms.items():
            mm = [0] * 8
            for k in range(4):
                mm[k] = mono[k]
            px = px + Poly.monomial(tuple(mm), c)
        rhs.append(px)
    coords = []
    for i in range(len(b4)):
        acc = Poly.zero(8)
        for j in range(len(b4)):
            if ginv[i][j]:
                acc = acc + rhs[j] * ginv[i][j]
        coords.append(acc)
    # pair coordinates via phi_inv: pair_coord[k] = sum_t coords[t] * phi_inv[t][k]
    out = []
    for kidx in range(len(split.pairs)):
        acc = Poly.zero(8)
        for t in range(len(b4)):
            coef = split.phi_inv[t][kidx]
            if coef:
                acc = acc + coords[t] * coef
        out.append(acc)
    return out


def _pair_block4(big, small, offset, gram_inv):
    """Fischer-pair small (4 vars) against the 4-var block at offset."""
    n = big.nvars
    coeff = [[Fraction(0)] * n for _ in range(n)]
    for i in range(4):
        for j in range(4):
            coeff[offset + i][offset + j] = gram_inv[i][j]
    op = Poly.zero(n)
    for mono, c in small.terms.items():
        mm = [0] * n
        for k in range(4):
            mm[offset + k] = mono[k]
        op = op + Poly.monomial(tuple(mm), c)
    applied = apply_diff_operator(op, big, coeff)
    out = Poly.zero(n)
    for mono, c in applied.terms.items():
        if all(mono[offset + k] == 0 for k in range(4)):
            out = out + Poly.monomial(mono, c)
    return out


def _bipoly_coords(q_bipoly, space3, nu1, nu2):
    """Coordinates of a (nu1, nu2)-bipoly on basis x basis of the 3-space."""
    b1 = space3.harmonic_basis(nu1)
    b2 = space3.harmonic_basis(nu2)
    g1 = inverse(space3._basis_fischer_gram(nu1))
    g2 = inverse(space3._basis_fischer_gram(nu2))
    raw = {}
    for ia, pa in enumerate(b1):
        paired = _pair_block(_embed6(q_bipoly), _as3(pa), 0, space3.gram_inv)
        for ib, pb in enumerate(b2):
            val = _pair_block(paired, _as3(pb), 3, space3.gram_inv)
            raw[(ia, ib)] = val.terms.get(tuple([0] * 6), Fraction(0))
    out = {}
    for ia in range(len(b1)):
        for ib in range(len(b2)):
            acc = Fraction(0)
            for ja in range(len(b1)):
                for jb in range(len(b2)):
                    acc += g1[ia][ja] * g2[ib][jb] * raw[(ja, jb)]
            if acc:
                out[(ia, ib)] = acc
    return out


def _embed6(p):
    if p.nvars == 6:
        return p
    raise HarmonicsError("expected a 6-variable bipolynomial")


def _as3(p):
    return p


def random_harmonic(space, degree, rng, span=5):
    """Deterministic pseudo-random harmonic polynomial (for tests)."""
    basis = space.harmonic_basis(degree)
    out = Poly.zero(space.dim)
    for b in basis:
        out = out + b * Fraction(rng.randint(-span, span))
    return out
