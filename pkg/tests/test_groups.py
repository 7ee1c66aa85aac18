from collections import Counter

import pytest

from gdet import groups


def order_profile(G):
    return Counter(G.element_orders())


def test_cyclic_basics():
    g = groups.make_cyclic(6)
    assert g.order == 6
    assert g.is_abelian() and g.is_cyclic()
    assert not groups.validate(g)
    assert order_profile(g) == Counter({1: 1, 2: 1, 3: 2, 6: 2})


def test_cyclic_trivial():
    g = groups.make_cyclic(1)
    assert g.order == 1
    assert g.mul[0][0] == 0
    assert not groups.validate(g)


def test_dihedral():
    g = groups.make_dihedral(8)
    assert g.order == 8
    assert not g.is_abelian()
    assert not groups.validate(g)
    assert order_profile(g) == Counter({1: 1, 2: 5, 4: 2})


def test_dihedral_4_is_klein():
    g = groups.make_dihedral(4)
    assert g.is_abelian() and not g.is_cyclic()
    assert order_profile(g) == Counter({1: 1, 2: 3})


def test_quaternion():
    g = groups.make_quaternion(8)
    assert g.order == 8
    assert not g.is_abelian()
    assert not groups.validate(g)
    # Q_8 has a unique element of order 2
    assert order_profile(g) == Counter({1: 1, 2: 1, 4: 6})


def test_direct_product():
    g = groups.direct_product(groups.make_cyclic(2), groups.make_cyclic(3))
    assert g.order == 6
    assert g.is_cyclic()  # C_2 x C_3 = C_6
    h = groups.direct_product(groups.make_cyclic(2), groups.make_cyclic(2))
    assert h.is_abelian() and not h.is_cyclic()


def test_validate_catches_broken_table():
    g = groups.make_cyclic(3)
    mul = [list(row) for row in g.mul]
    mul[1][1] = 1  # break the Latin square property
    mul = tuple(tuple(row) for row in mul)
    broken = groups.FiniteGroup(order=3, mul=mul, inv=g.inv,
                                identity=0, name="broken")
    assert groups.validate(broken)


def test_catalog_order16():
    cat = groups.catalog_order16()
    assert len(cat) == 14
    assert all(g.order == 16 for g in cat)
    assert all(not groups.validate(g) for g in cat)
    gap_ids = [g.gap_id for g in cat]
    assert len(set(gap_ids)) == 14
    assert set(gap_ids) == {(16, i) for i in range(1, 15)}
    # abelian count for order 16 is 5
    assert sum(1 for g in cat if g.is_abelian()) == 5
    # distinct up to isomorphism at least by order profile on key cases
    profiles = {g.gap_id: order_profile(g) for g in cat}
    assert profiles[(16, 1)] == Counter({1: 1, 2: 1, 4: 2, 8: 4, 16: 8})
    assert profiles[(16, 14)] == Counter({1: 1, 2: 15})  # C_2^4
    assert profiles[(16, 9)][4] == 10  # generalized quaternion Q_16


def test_resolve_group():
    assert groups.resolve_group("16,7").gap_id == (16, 7)  # D_16
    assert groups.resolve_group("D_16").order == 16
    assert groups.resolve_group("C_5").is_cyclic()
    with pytest.raises((KeyError, ValueError)):
        groups.resolve_group("E_8")


def test_json_round_trip():
    g = groups.make_dihedral(6)
    h = groups.FiniteGroup.from_json(g.to_json())
    assert h.mul == g.mul and h.inv == g.inv and h.name == g.name
