import random

import numpy as np
import pytest

from gdet import fastpoly as fp
from gdet import sparsepoly as sp
from gdet.sparsepoly import EXACT, CoefficientMode, MemoryBudgetExceeded, SparsePoly


def random_poly(n, m, max_exp, max_coeff, rng):
    terms = {}
    for _ in range(m):
        key = bytes(rng.randrange(max_exp + 1) for _ in range(n))
        terms[key] = rng.randrange(-max_coeff, max_coeff) or 1
    return SparsePoly(n, terms, None)


def test_packing_round_trip():
    p = fp.Packing(5, 12)
    for exps in [(0, 0, 0, 0, 0), (12, 0, 12, 3, 7), (1, 2, 3, 4, 5)]:
        assert p.unpack_key(p.key_of(exps)) == bytes(exps)


def test_packing_order_is_lexicographic():
    p = fp.Packing(3, 7)
    keys = [p.key_of(e) for e in [(0, 1, 7), (0, 2, 0), (1, 0, 0)]]
    assert keys == sorted(keys)


def test_packing_overflow():
    with pytest.raises(ValueError):
        fp.Packing(16, 16)


def test_kernel_matches_dict_exact():
    rng = random.Random(7)
    for _ in range(4):
        a = random_poly(4, 200, 6, 10**9, rng)
        b = random_poly(4, 150, 6, 10**9, rng)
        ref = sp.poly_mul(a, b)
        got = fp.kernel_mul(a, b, EXACT, budget=1 << 28)
        assert got.terms == ref.terms


def test_kernel_chunk_independence():
    rng = random.Random(11)
    a = random_poly(3, 120, 5, 10**6, rng)
    P = fp.Packing(3, 10)
    A = fp.pack_sparse(a, P)
    bk = [int(x) for x in A.keys]
    bc = [int(x) for x in fp._plainify(A).channels[0]]
    results = []
    for budget in (1 << 22, 1 << 24, 1 << 30):
        r = fp.mul_packed(A, bk, bc, budget=budget)
        results.append((r.keys.tolist(), r.coefficient_ints()))
    assert results[0] == results[1] == results[2]


def test_limb_mode_exactness():
    # force multi-limb coefficients with repeated squaring past int64
    a = SparsePoly(2, {bytes((1, 0)): 10**9, bytes((0, 1)): -(10**9 - 7)},
                   None)
    P = fp.Packing(2, 16)
    A = fp.pack_sparse(a, P)
    bk = [int(x) for x in A.keys]
    bc = [int(x) for x in fp._plainify(A).channels[0]]
    cur = A
    ref = a
    for _ in range(3):
        cur = fp.mul_packed(cur, bk, bc, budget=1 << 26)
        ref = sp.poly_mul(ref, a)
    assert cur.to_sparse(None).terms == ref.terms
    assert max(abs(c) for c in ref.terms.values()).bit_length() > 63


def test_mod_kernel_matches_exact_image():
    rng = random.Random(3)
    q = sp.DEFAULT_MODPRIME
    a = random_poly(4, 250, 6, 10**12, rng)
    ref = sp.poly_mul(a, a)
    P = fp.Packing(4, 12)
    am = SparsePoly(4, dict(a.terms), q)
    keys, res = fp.pack_mod(am, P)
    bk = [int(x) for x in keys]
    br = [int(x) for x in res]
    rk, rr = fp.mul_mod(keys, res, bk, br, budget=1 << 24)
    got = {tuple(P.unpack_key(int(k))): int(r) for k, r in zip(rk, rr)}
    image = {tuple(k): c % q for k, c in ref.terms.items() if c % q}
    assert got == image


def test_mulmod61_scalar_agreement():
    q = (1 << 61) - 1
    rng = random.Random(5)
    xs = np.array([rng.randrange(q) for _ in range(100)], dtype=np.uint64)
    for _ in range(20):
        b = rng.randrange(q)
        got = fp._mulmod61(xs, b)
        want = [(int(x) * b) % q for x in xs]
        assert [int(v) % q for v in got] == want


def test_budget_exhaustion_raises():
    rng = random.Random(9)
    a = random_poly(4, 3000, 6, 10**6, rng)
    with pytest.raises(MemoryBudgetExceeded) as exc:
        fp.kernel_mul(a, a, EXACT, budget=1 << 10)
    assert exc.value.budget == 1 << 10
    assert exc.value.watermark > exc.value.budget
