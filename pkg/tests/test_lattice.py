import itertools
import random
from fractions import Fraction

import pytest

from quatperiods._linalg import (det, hnf, hnf_rational, identity,
                                 lattice_intersection, mat_mul, nullspace,
                                 charpoly)
from quatperiods.lattice import (IntLattice, LatticeError, canonical_basis,
                                 short_vectors, theta_coeffs)
from quatperiods._poly import Poly


def z4():
    return IntLattice(identity(4), [[2 if i == j else 0 for j in range(4)]
                                    for i in range(4)])


def hurwitz_lattice():
    basis = [[Fraction(1, 2)] * 4, [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    gram = [[2 if i == j else 0 for j in range(4)] for i in range(4)]
    return IntLattice(basis, gram)


def d4_lattice():
    basis = [[1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1], [0, 0, 1, 1]]
    gram = [[2 if i == j else 0 for j in range(4)] for i in range(4)]
    return IntLattice(basis, gram)


def random_unimodular(rng, n=4, steps=12):
    m = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.randint(-2, 2)
        for k in range(n):
            m[i][k] += c * m[j][k]
    return m


# -- linalg basics -----------------------------------------------------------

def test_hnf_is_canonical_and_idempotent():
    m = [[2, 4, 4], [-6, 6, 12], [10, 4, 16]]
    h = hnf(m)
    assert hnf(h) == h
    assert det(h) != 0


def test_nullspace_and_charpoly():
    m = [[1, 2], [2, 4]]
    ns = nullspace(m)
    assert len(ns) == 1
    cp = charpoly([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(2)]])
    # x^2 - 4x + 3
    assert cp == [Fraction(1), Fraction(-4), Fraction(3)]


def test_lattice_intersection():
    a = [[2, 0], [0, 1]]
    b = [[1, 0], [0, 3]]
    inter = lattice_intersection(a, b)
    assert inter == [[Fraction(2), Fraction(0)], [Fraction(0), Fraction(3)]]


# -- canonical basis ---------------------------------------------------------

def test_canonical_basis_identity_fixed():
    lat = z4()
    can = canonical_basis(lat)
    assert can.basis == identity(4)
    assert canonical_basis(can).basis == can.basis


def test_canonical_basis_unimodular_invariance():
    rng = random.Random(7)
    lat = d4_lattice()
    can0 = canonical_basis(lat).basis
    for _ in range(5):
        u = random_unimodular(rng)
        transformed = IntLattice(mat_mul([[Fraction(x) for x in r] for r in u],
                                         lat.basis), lat.gram)
        assert canonical_basis(transformed).basis == can0


def test_canonical_basis_d4_vector_sets_agree():
    # oracle: both bases generate identical vector sets up to norm 4,
    # by exhaustive ambient box search
    rng = random.Random(11)
    lat = d4_lattice()
    u = random_unimodular(rng)
    transformed = IntLattice(mat_mul([[Fraction(x) for x in r] for r in u],
                                     lat.basis), lat.gram)
    can = canonical_basis(transformed)

    def ambient_set(lattice, bound):
        out = set()
        for v, q in short_vectors(lattice, bound):
            out.add(tuple(lattice.ambient(v)))
        return out

    box = set()
    for x in itertools.product(range(-2, 3), repeat=4):
        if x == (0, 0, 0, 0):
            continue
        if sum(t * t for t in x) <= 4 and sum(x) % 2 == 0:
            box.add(tuple(map(Fraction, x)))
    assert ambient_set(lat, 4) == box
    assert ambient_set(can, 4) == box


def test_rank_deficient_rejected():
    with pytest.raises(LatticeError):
        IntLattice([[1, 0], [2, 0]], [[2, 0], [0, 2]])


# -- short vectors -----------------------------------------------------------

def test_z4_unit_vectors():
    vecs = short_vectors(z4(), 1)
    assert len(vecs) == 8
    assert all(q == 1 for _, q in vecs)


def test_z4_bound_two_counts():
    vecs = short_vectors(z4(), 2)
    assert len(vecs) == 32
    assert sum(1 for _, q in vecs if q == 1) == 8
    assert sum(1 for _, q in vecs if q == 2) == 24


def test_hurwitz_units():
    lat = hurwitz_lattice()
    vecs = short_vectors(lat, 1)
    assert len(vecs) == 24
    assert all(q == 1 for _, q in vecs)
    # oracle: brute-force box search over half-integer ambient coordinates
    count = 0
    for c in itertools.product(range(-2, 3), repeat=4):
        amb = [Fraction(t, 2) for t in c]
        if all(a == 0 for a in amb):
            continue
        ints = all(a.denominator == 1 for a in amb)
        halves = all(a.denominator == 2 for a in amb)
        if (ints or halves) and sum(a * a for a in amb) == 1:
            count += 1
    assert count == 24


def test_short_vectors_prefix_monotone():
    lat = d4_lattice()
    small = {(tuple(v), q) for v, q in short_vectors(lat, 3)}
    big = {(tuple(v), q) for v, q in short_vectors(lat, 6)}
    assert small <= big
    assert len(small) < len(big)


def test_short_vectors_deterministic_order():
    lat = z4()
    vecs = short_vectors(lat, 2)
    assert vecs == sorted(vecs, key=lambda t: t[0])


def test_short_vectors_unimodular_norm_multiset():
    rng = random.Random(3)
    lat = d4_lattice()
    u = random_unimodular(rng)
    other = IntLattice(mat_mul([[Fraction(x) for x in r] for r in u],
                               lat.basis), lat.gram)
    norms0 = sorted(q for _, q in short_vectors(lat, 8))
    norms1 = sorted(q for _, q in short_vectors(other, 8))
    assert norms0 == norms1


def test_non_positive_definite_rejected():
    lat = IntLattice(identity(2), [[2, 0], [0, -2]])
    with pytest.raises(LatticeError):
        short_vectors(lat, 2)


# -- theta coefficients ------------------------------------------------------

def test_theta_z4():
    assert theta_coeffs(z4(), 2) == {0: 1, 1: 8, 2: 24}


def test_theta_harmonic_weight_kills_zero():
    # x0^2 - x1^2 is harmonic for the standard form; coefficient at 0 must be 0
    w = Poly.monomial((2, 0, 0, 0)) - Poly.monomial((0, 2, 0, 0))
    coeffs = theta_coeffs(z4(), 2, weight=w)
    assert coeffs[0] == 0


def test_theta_counts_match_short_vectors():
    lat = hurwitz_lattice()
    coeffs = theta_coeffs(lat, 3)
    vecs = short_vectors(lat, 3)
    for n in range(1, 4):
        assert coeffs[n] == sum(1 for _, q in vecs if q == n)
    assert coeffs[0] == 1
    assert all(isinstance(v, int) and v >= 0 for v in coeffs.values())
