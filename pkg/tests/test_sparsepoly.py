import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdet import sparsepoly as sp
from gdet.sparsepoly import EXACT, CoefficientMode, SparsePoly


def P(n, terms, modulus=None):
    return SparsePoly(n, {bytes(k): c for k, c in terms.items()}, modulus)


@st.composite
def polys(draw, n=4, max_terms=50, max_exp=5, max_coeff=10**6):
    m = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(m):
        key = tuple(draw(st.integers(0, max_exp)) for _ in range(n))
        c = draw(st.integers(-max_coeff, max_coeff))
        if c:
            terms[key] = c
    return P(n, terms)


def test_constructors():
    z = SparsePoly.zero(3)
    assert z.term_count == 0
    one = SparsePoly.constant(3, 7)
    assert one.term_count == 1
    x1 = SparsePoly.variable(3, 1)
    assert x1.evaluate([0, 5, 0]) == 5


def test_canonical_drops_zeros():
    p = P(2, {(1, 0): 3, (0, 1): 0})
    assert p.term_count == 1


def test_add_sub():
    a = P(2, {(1, 0): 2, (0, 1): 1})
    b = P(2, {(1, 0): -2, (2, 0): 5})
    s = a + b
    assert s.terms == P(2, {(0, 1): 1, (2, 0): 5}).terms
    assert (s - s).term_count == 0


def test_mul_small():
    # (x - y)(x + y) = x^2 - y^2
    a = P(2, {(1, 0): 1, (0, 1): -1})
    b = P(2, {(1, 0): 1, (0, 1): 1})
    assert (a * b).terms == P(2, {(2, 0): 1, (0, 2): -1}).terms


def test_pow_binomial():
    a = P(2, {(1, 0): 1, (0, 1): 1})
    p = sp.poly_pow(a, 5)
    assert p.term_count == 6
    assert p.evaluate([1, 1]) == 32


def test_mod_reduction():
    q = sp.DEFAULT_MODPRIME
    a = P(1, {(1,): q + 3}, modulus=q)
    assert a.terms == {bytes((1,)): 3}


def test_incompatible_operands():
    with pytest.raises(ValueError):
        P(2, {(1, 0): 1}) * P(3, {(1, 0, 0): 1})
    with pytest.raises(ValueError):
        P(2, {(1, 0): 1}) * P(2, {(1, 0): 1},
                              modulus=sp.DEFAULT_MODPRIME)


def test_exponent_overflow_guard():
    a = P(1, {(130,): 1})
    with pytest.raises(OverflowError):
        sp.poly_mul(a, a)


def test_substitute_rotation():
    a = P(3, {(2, 1, 0): 4})
    b = a.substitute_rotation(1)
    assert b.terms == P(3, {(0, 2, 1): 4}).terms


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_mul_commutative(a, b):
    assert sp.poly_mul(a, b).terms == sp.poly_mul(b, a).terms


@settings(max_examples=25, deadline=None)
@given(polys(max_terms=12, max_exp=3), polys(max_terms=12, max_exp=3),
       polys(max_terms=12, max_exp=3))
def test_mul_associative(a, b, c):
    assert ((a * b) * c).terms == (a * (b * c)).terms


@settings(max_examples=40, deadline=None)
@given(polys(), polys())
def test_mul_evaluation_homomorphism(a, b):
    pt = [3, -2, 1, 5]
    assert (a * b).evaluate(pt) == a.evaluate(pt) * b.evaluate(pt)


@settings(max_examples=40, deadline=None)
@given(polys())
def test_mod_image_of_exact(a):
    q = sp.DEFAULT_MODPRIME
    am = SparsePoly(a.n_vars, dict(a.terms), q)
    sq_mod = sp.poly_mul(am, am)
    sq = sp.poly_mul(a, a)
    image = {k: c % q for k, c in sq.terms.items() if c % q}
    assert sq_mod.terms == image
    assert sq_mod.term_count <= sq.term_count


@settings(max_examples=40, deadline=None)
@given(polys(max_coeff=10**30))
def test_serialize_round_trip(a):
    data = sp.serialize(a)
    b = sp.deserialize(data)
    assert b.terms == a.terms and b.n_vars == a.n_vars
    assert b.modulus == a.modulus


def test_serialize_corruption_detected():
    a = P(2, {(1, 0): 123456789, (0, 2): -5})
    data = bytearray(sp.serialize(a))
    data[-3] ^= 0xFF  # flip a byte inside the checksummed body
    with pytest.raises(ValueError):
        sp.deserialize(bytes(data))
    with pytest.raises(ValueError):
        sp.deserialize(bytes(data[: len(data) - 4]))  # truncation
    with pytest.raises(ValueError):
        sp.deserialize(b"NOPE" + bytes(data[4:]))  # bad magic
