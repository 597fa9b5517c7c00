from fractions import Fraction

import pytest

from quatperiods._linalg import identity, lattice_index, mat_mul
from quatperiods.orders import (OrderError, class_set_for, eichler_mass,
                                eichler_order, essential_complement,
                                ideals_equivalent, maximal_order,
                                right_ideal_classes, superorders_at,
                                two_sided_prime_ideal)
from quatperiods.quatalg import algebra_for_discriminant


def test_hurwitz_maximal_order():
    alg = algebra_for_discriminant(2)
    order = maximal_order(alg)
    assert order.reduced_discriminant() == 2
    # trace-form determinant oracle: 2^2 = 4
    g = order.norm_lattice().basis_gram()
    from quatperiods._linalg import det
    assert det(g) == 4
    # contains (1+i+j+k)/2
    from quatperiods.quatalg import Quaternion
    omega = Quaternion(alg, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2),
                       Fraction(1, 2))
    assert order.contains(omega)


def test_maximal_order_discriminants():
    for n1 in (2, 3, 5, 7, 11, 13):
        alg = algebra_for_discriminant(n1)
        order = maximal_order(alg)
        assert order.reduced_discriminant() == n1


def test_maximal_order_idempotent():
    alg = algebra_for_discriminant(11)
    order = maximal_order(alg)
    again = right_ideal_classes  # noqa: F841  (no re-maximalization api; HNF is the fixed point)
    from quatperiods.orders import EichlerOrder
    rebuilt = EichlerOrder(alg, order.basis)
    assert rebuilt.basis == order.basis


def test_eichler_order_levels():
    alg = algebra_for_discriminant(2)
    maximal = maximal_order(alg)
    assert eichler_order(maximal, 1) == maximal
    order22 = eichler_order(maximal, 11)
    assert order22.reduced_discriminant() == 22
    assert lattice_index(maximal.basis, order22.basis) == 11


def test_eichler_order_rejects_bad_level():
    alg = algebra_for_discriminant(2)
    maximal = maximal_order(alg)
    with pytest.raises(OrderError):
        eichler_order(maximal, 4)  # not squarefree
    with pytest.raises(OrderError):
        eichler_order(maximal, 2)  # not coprime to discriminant


def test_class_sets_and_masses():
    cs2 = class_set_for(2)
    assert cs2.size == 1 and cs2.unit_counts == [24]
    assert cs2.mass() == Fraction(1, 24)

    cs11 = class_set_for(11)
    assert cs11.size == 2
    assert sorted(cs11.unit_counts) == [4, 6]
    assert cs11.mass() == eichler_mass(11, 1) == Fraction(5, 12)

    cs22 = class_set_for(2, 11)
    assert cs22.mass() == Fraction(1, 2)


def test_unit_counts_admissible():
    for (n1, n2) in [(2, 1), (3, 1), (5, 1), (7, 1), (11, 1), (13, 1),
                     (2, 11), (7, 2)]:
        cs = class_set_for(n1, n2)
        assert all(e in (2, 4, 6, 8, 12, 24) for e in cs.unit_counts)


def test_connecting_lattice_diagonal_is_left_order():
    cs = class_set_for(11)
    for i in range(cs.size):
        conn = cs.connecting(i, i)
        assert conn.key() == cs.left_orders[i].norm_lattice().key()
        # minimum of the scaled norm form is 1 (the identity is in the order)
        from quatperiods.lattice import short_vectors
        assert min(q for _, q in short_vectors(conn, 1)) == 1


def test_class_set_deterministic():
    a = right_ideal_classes(class_set_for(11).order)
    b = right_ideal_classes(class_set_for(11).order)
    assert [tuple(map(tuple, r)) for r in a.reps] == \
        [tuple(map(tuple, r)) for r in b.reps]


def test_ideals_equivalent_reflexive():
    cs = class_set_for(11)
    alg = cs.order.algebra
    assert ideals_equivalent(alg, cs.reps[0], cs.reps[0])
    assert not ideals_equivalent(alg, cs.reps[0], cs.reps[1])


def test_two_sided_ideal_squares_to_p():
    cs = class_set_for(11)
    order = cs.order
    basis = two_sided_prime_ideal(order, 11)
    from quatperiods.orders import product_basis
    alg = order.algebra
    sq = product_basis(alg, basis, basis)
    # P^2 = 11 * R as lattices
    scaled = [[x / 11 for x in row] for row in sq]
    assert scaled == order.basis


def test_superorders_at_level_prime():
    cs = class_set_for(2, 11)
    sups = superorders_at(cs.order, 11)
    assert len(sups) == 2
    assert all(s.level == 2 for s in sups)


def test_essential_projector_maximal_order():
    # maximal order: complement of the constant function
    cs = class_set_for(11)
    proj = essential_complement(cs)
    w = [Fraction(1, e) for e in cs.unit_counts]
    const = [Fraction(1)] * cs.size
    image = [sum(proj[i][j] * const[j] for j in range(cs.size))
             for i in range(cs.size)]
    assert all(v == 0 for v in image)
    # idempotent
    sq = mat_mul(proj, proj)
    assert sq == proj
    # self-adjoint for the weighted inner product: P_ij w_i == P_ji w_j
    for i in range(cs.size):
        for j in range(cs.size):
            assert proj[i][j] * w[i] == proj[j][i] * w[j]


def test_essential_projector_level22_annihilates_everything():
    cs = class_set_for(2, 11)
    proj = essential_complement(cs)
    assert all(all(v == 0 for v in row) for row in proj)


def test_essential_projector_level26_rank_two():
    cs = class_set_for(2, 13)
    proj = essential_complement(cs)
    trace = sum(proj[i][i] for i in range(cs.size))
    assert trace == 2  # the two weight-2 newforms at level 26
