import random
from fractions import Fraction

import pytest

from quatperiods._poly import Poly
from quatperiods.harmonics import (HarmonicsError, SplitIso, TrilinearForm,
                                   balanced, c_coeff, full_space,
                                   gegenbauer_1d, gegenbauer_kernel,
                                   kernel_normalization, random_harmonic,
                                   standard_space, tau_action, tau_matrix,
                                   trace_zero_space, trilinear_form)
from quatperiods.quatalg import Quaternion, algebra_for_discriminant


def _block_laplacian(p, gram_inv, offset, dim):
    out = Poly.zero(p.nvars)
    for i in range(dim):
        di = p.diff(offset + i)
        for j in range(dim):
            g = gram_inv[i][j]
            if g:
                out = out + di.diff(offset + j) * g
    return out


# -- Gegenbauer polynomial and kernel ----------------------------------------

def test_gegenbauer_1d_small():
    assert gegenbauer_1d(0) == Poly.const(1, 1)
    assert gegenbauer_1d(1) == Poly.monomial((1,), 2)
    assert gegenbauer_1d(2) == Poly.monomial((2,), 4) - 1


def test_gegenbauer_kernel_values():
    alg = algebra_for_discriminant(2)
    one = alg.one()
    for x in (one, one + alg.gens()[0]):
        assert gegenbauer_kernel(0, x, one) == 1
    # alpha = 1: kernel is 2 tr(x conj(x')), so at x = x' = 1 it is 4
    assert gegenbauer_kernel(1, one, one) == 4


def test_gegenbauer_kernel_symmetry_and_rationality():
    rng = random.Random(1)
    alg = algebra_for_discriminant(11)
    for _ in range(50):
        x = Quaternion(alg, *[Fraction(rng.randint(-5, 5), rng.randint(1, 3))
                              for _ in range(4)])
        y = Quaternion(alg, *[Fraction(rng.randint(-5, 5), rng.randint(1, 3))
                              for _ in range(4)])
        for alpha in (1, 2, 3):
            v = gegenbauer_kernel(alpha, x, y)
            assert isinstance(v, Fraction)
            assert v == gegenbauer_kernel(alpha, y, x)


def test_kernel_rationality_high_degree():
    alg = algebra_for_discriminant(2)
    x = Quaternion(alg, 1, Fraction(1, 2), 0, 1)
    y = Quaternion(alg, 0, 1, Fraction(1, 3), 1)
    for alpha in range(9):
        assert isinstance(gegenbauer_kernel(alpha, x, y), Fraction)


def test_kernel_bipoly_matches_value_and_harmonic():
    alg = algebra_for_discriminant(11)
    sp = full_space(alg)
    rng = random.Random(2)
    for alpha in (1, 2, 3):
        bip = sp.kernel_bipoly(alpha)
        # harmonic in the x block and in the y block
        assert _block_laplacian(bip, sp.gram_inv, 0, 4).is_zero()
        assert _block_laplacian(bip, sp.gram_inv, 4, 4).is_zero()
        for _ in range(5):
            xc = [Fraction(rng.randint(-4, 4)) for _ in range(4)]
            yc = [Fraction(rng.randint(-4, 4)) for _ in range(4)]
            x = Quaternion(alg, *xc)
            y = Quaternion(alg, *yc)
            assert bip.eval(xc + yc) == gegenbauer_kernel(alpha, x, y)


def test_trace_zero_kernel_harmonic():
    alg = algebra_for_discriminant(11)
    sp = trace_zero_space(alg)
    for nu in (1, 2, 3):
        bip = sp.kernel_bipoly(nu)
        assert _block_laplacian(bip, sp.gram_inv, 0, 3).is_zero()
        assert _block_laplacian(bip, sp.gram_inv, 3, 3).is_zero()


# -- reproducing property ----------------------------------------------------

def test_kernel_normalization_reproduces():
    sp = standard_space(4)
    rng = random.Random(3)
    c0, _ = kernel_normalization(0, sp)
    assert c0 == 1
    _, inner = kernel_normalization(2, sp)
    basis = sp.harmonic_basis(2)
    for _ in range(10):
        pt = [Fraction(rng.randint(-6, 6), rng.randint(1, 2))
              for _ in range(4)]
        ker = sp.kernel_at(2, pt)
        for b in basis:
            assert inner(ker, b) == b.eval(pt)


def test_double_reproduction():
    sp = standard_space(4)
    rng = random.Random(4)
    for alpha in (1, 2, 3):
        _, inner = kernel_normalization(alpha, sp)
        for _ in range(5):
            x = [Fraction(rng.randint(-4, 4)) for _ in range(4)]
            y = [Fraction(rng.randint(-4, 4)) for _ in range(4)]
            kx = sp.kernel_at(alpha, x)
            ky = sp.kernel_at(alpha, y)
            bip = sp.kernel_bipoly(alpha)
            assert inner(kx, ky) == bip.eval(list(x) + list(y))


def test_reproducing_property_full_basis_alpha_up_to_6():
    sp = standard_space(4)
    pt = [Fraction(1), Fraction(2), Fraction(-1), Fraction(3)]
    for alpha in range(7):
        _, inner = kernel_normalization(alpha, sp)
        ker = sp.kernel_at(alpha, pt)
        for b in sp.harmonic_basis(alpha):
            assert inner(ker, b) == b.eval(pt)


# -- tau action ---------------------------------------------------------------

def test_tau_identity_and_central():
    alg = algebra_for_discriminant(11)
    sp = trace_zero_space(alg)
    p = random_harmonic(sp, 2, random.Random(5))
    assert tau_action(alg.one(), p) == p
    assert tau_action(alg.one() * 3, p) == p


def test_tau_group_law():
    alg = algebra_for_discriminant(2)
    sp = trace_zero_space(alg)
    rng = random.Random(6)
    p = random_harmonic(sp, 2, rng)
    y1 = Quaternion(alg, 1, 2, 0, -1)
    y2 = Quaternion(alg, 0, 1, 1, 1)
    assert tau_action(y1 * y2, p) == tau_action(y1, tau_action(y2, p))


def test_tau_rotation_example():
    # conjugation by i rotates by pi about the i axis: j -> -j, k -> -k
    alg = algebra_for_discriminant(2)
    i = alg.gens()[0]
    m = tau_matrix(i)
    assert m == [[Fraction(1), 0, 0], [0, Fraction(-1), 0],
                 [0, 0, Fraction(-1)]]


def test_tau_preserves_inner_product_exact():
    alg = algebra_for_discriminant(11)
    sp = trace_zero_space(alg)
    rng = random.Random(7)
    for _ in range(10):
        y = Quaternion(alg, *[rng.randint(-4, 4) for _ in range(4)])
        if y.is_zero():
            continue
        p = random_harmonic(sp, 2, rng)
        q = random_harmonic(sp, 2, rng)
        assert sp.inner(tau_action(y, p), tau_action(y, q), 2) == \
            sp.inner(p, q, 2)


def test_tau_preserves_inner_product_numeric_oracle():
    # independent numeric check at 100-bit precision
    import mpmath
    mpmath.mp.prec = 100
    alg = algebra_for_discriminant(11)
    sp = trace_zero_space(alg)
    rng = random.Random(8)
    y = Quaternion(alg, 2, -1, 1, 0)
    p = random_harmonic(sp, 2, rng)
    q = random_harmonic(sp, 2, rng)
    lhs = sp.inner(tau_action(y, p), tau_action(y, q), 2)
    rhs = sp.inner(p, q, 2)
    assert abs(mpmath.mpf(float(lhs - rhs))) < mpmath.mpf(2) ** -90
    assert lhs == rhs


def test_tau_preserves_harmonicity():
    alg = algebra_for_discriminant(3)
    sp = trace_zero_space(alg)
    p = random_harmonic(sp, 3, random.Random(9))
    y = Quaternion(alg, 1, 1, -2, 1)
    assert sp.is_harmonic(tau_action(y, p))


# -- trilinear forms ----------------------------------------------------------

def test_trilinear_constants():
    t = trilinear_form(0, 0, 0)
    assert not t.zero
    one = Poly.const(3, 1)
    assert t.value(one, one, one) == 1


def test_trilinear_triangle_violation():
    t = trilinear_form(1, 0, 0)
    assert t.zero and t.reason == "unbalanced"


def test_trilinear_parity_violation():
    t = trilinear_form(1, 2, 2)  # half degrees (1,1,1): sum odd
    assert t.zero and t.reason == "parity"


def test_trilinear_nonzero_and_invariant():
    # (nu, b1p, b2p) = (2, 2, 2): half degrees (2,1,1), sum even, balanced
    alg = algebra_for_discriminant(2)  # standard 3-space
    sp = trace_zero_space(alg)
    t = trilinear_form(2, 2, 2, sp)
    assert not t.zero
    assert t.nonzero_witness() is not None
    rng = random.Random(10)
    p = random_harmonic(sp, 2, rng)
    q = random_harmonic(sp, 1, rng)
    r = random_harmonic(sp, 1, rng)
    base = t.value(p, q, r)
    for _ in range(5):
        y = Quaternion(alg, *[rng.randint(-3, 3) for _ in range(4)])
        if y.is_zero():
            continue
        assert t.value(tau_action(y, p), tau_action(y, q),
                       tau_action(y, r)) == base


def test_trilinear_balance_scan_small():
    sp = standard_space(3)
    for nu in range(4):
        for b1 in range(0, 7, 2):
            for b2 in range(0, 7, 2):
                t = trilinear_form(nu, b1, b2, sp)
                expect_nonzero = balanced(nu, b1 // 2, b2 // 2) and \
                    (nu + b1 // 2 + b2 // 2) % 2 == 0
                if expect_nonzero:
                    assert not t.zero
                    assert t.nonzero_witness() is not None
                else:
                    assert t.zero


def test_trilinear_uniqueness_injectivity():
    # for fixed (b1p, b2p) and Q over a basis, Q -> T(Q, ., .) is injective
    sp = standard_space(3)
    t = trilinear_form(2, 2, 2, sp)
    basis = sp.harmonic_basis(2)
    b1 = sp.harmonic_basis(1)
    rows = []
    for q in basis:
        rows.append([t.value(q, u, v) for u in b1 for v in b1])
    from quatperiods._linalg import rank
    assert rank(rows) == len(basis)


# -- split isomorphism ---------------------------------------------------------

def test_split_iso_invertible():
    for n1 in (2, 11):
        alg = algebra_for_discriminant(n1)
        for m in (0, 1, 2):
            split = SplitIso(alg, m)
            assert len(split.phi_inv) == len(split.pairs)


def test_split_iso_m0_trivial():
    alg = algebra_for_discriminant(2)
    split = SplitIso(alg, 0)
    one3 = Poly.const(3, 1)
    img = split.apply(one3, one3)
    assert img == Poly.const(4, img.terms.get((0, 0, 0, 0), 0)) and \
        not img.is_zero()


def test_split_iso_image_harmonic():
    alg = algebra_for_discriminant(11)
    sp3 = trace_zero_space(alg)
    sp4 = full_space(alg)
    split = SplitIso(alg, 1)
    rng = random.Random(11)
    p = random_harmonic(sp3, 1, rng)
    q = random_harmonic(sp3, 1, rng)
    img = split.apply(p, q)
    assert sp4.is_harmonic(img)
    assert img.total_degree() == 2


# -- coefficient polynomials ---------------------------------------------------

def test_c_coeff_scalar_case():
    alg = algebra_for_discriminant(11)
    q = Poly.const(6, Fraction(7, 3))
    c = c_coeff(q, 0, 0, 0, 0, alg)
    assert c == Poly.const(8, Fraction(7, 3))


def test_c_coeff_parity_rejected():
    alg = algebra_for_discriminant(2)
    q = Poly.const(6, 1)
    with pytest.raises(HarmonicsError):
        c_coeff(q, 1, 1, 3, 1, alg)  # alpha' = 3 odd


def _tensor6(pa, pb):
    q = Poly.zero(6)
    for m1, c1 in pa.terms.items():
        for m2, c2 in pb.terms.items():
            q = q + Poly.monomial(tuple(m1) + tuple(m2), c1 * c2)
    return q


def test_c_coeff_equivariance_exact():
    # c(h x, Q) = c(x, h^{-1} Q) for h = sigma_{y1,y2} with n(y1) = n(y2)
    from quatperiods.quatalg import similitude_action
    alg = algebra_for_discriminant(2)
    sp3 = trace_zero_space(alg)
    rng = random.Random(13)
    nu1, nu2, a1, a2 = 2, 1, 1, 1
    p1 = random_harmonic(sp3, nu1, rng)
    p2 = random_harmonic(sp3, nu2, rng)
    c = c_coeff(_tensor6(p1, p2), a1, a2, nu1, nu2, alg)
    i, j, _ = alg.gens()
    y1 = alg.one() + i  # norm 2
    y2 = alg.one() + j  # norm 2
    m = [similitude_action(y1, y2, e).coords()
         for e in (alg.one(),) + alg.gens()]
    big = [[Fraction(0)] * 8 for _ in range(8)]
    for r in range(4):
        for s in range(4):
            big[r][s] = m[s][r]
            big[4 + r][4 + s] = m[s][r]
    lhs = c.subs_linear(big)
    rhs = c_coeff(_tensor6(tau_action(y1.inverse(), p1),
                           tau_action(y2.inverse(), p2)),
                  a1, a2, nu1, nu2, alg)
    assert lhs == rhs


def test_c_coeff_harmonic_each_variable():
    # (nu1, nu2, alpha1, alpha2) = (2, 1, 1, 1): alpha_i' = 2
    alg = algebra_for_discriminant(2)
    sp3 = trace_zero_space(alg)
    sp4 = full_space(alg)
    rng = random.Random(12)
    p1 = random_harmonic(sp3, 2, rng)
    p2 = random_harmonic(sp3, 1, rng)
    c = c_coeff(_tensor6(p1, p2), 1, 1, 2, 1, alg)
    assert not c.is_zero()
    assert _block_laplacian(c, sp4.gram_inv, 0, 4).is_zero()
    assert _block_laplacian(c, sp4.gram_inv, 4, 4).is_zero()
    assert c.degree_in(range(4)) == 2
    assert c.degree_in(range(4, 8)) == 2
