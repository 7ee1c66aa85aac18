"""Exact arithmetic in Z[zeta_d], represented modulo the d-th cyclotomic
polynomial.  Elements are integer vectors of length phi(d) on the power
basis 1, zeta, ..., zeta^(phi(d)-1); multiplication by a fixed power of
zeta is a small integer matrix, which is the only operation the
determinant engine needs."""
from __future__ import annotations

from functools import lru_cache
from typing import List

import numpy as np


def _poly_divmod(num: List[int], den: List[int]) -> List[int]:
    """Quotient of integer polynomials (ascending coefficients); division
    must be exact and den monic."""
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1]
        q[i] = c
        for j, dj in enumerate(den):
            num[i + j] -= c * dj
    if any(num[:len(den) - 1]):
        raise ArithmeticError("non-exact cyclotomic division")
    return q


@lru_cache(maxsize=None)
def cyclotomic_coeffs(d: int) -> tuple:
    """Coefficients of Phi_d, ascending, computed by dividing x^d - 1 by
    the cyclotomic polynomials of the proper divisors."""
    if d == 1:
        return (-1, 1)
    num = [0] * (d + 1)
    num[0], num[d] = -1, 1
    q = num
    for e in range(1, d):
        if d % e == 0:
            q = _poly_divmod(q, list(cyclotomic_coeffs(e)))
    return tuple(q)


@lru_cache(maxsize=None)
def zeta_power_table(d: int) -> tuple:
    """Reductions of zeta_d^t for t = 0..2d-2 as basis vectors (tuples)."""
    phi_coeffs = cyclotomic_coeffs(d)
    r = len(phi_coeffs) - 1  # phi(d)
    rows = []
    cur = [0] * r
    cur[0] = 1
    for t in range(2 * d - 1):
        rows.append(tuple(cur))
        # multiply by zeta: shift up, reduce the overflowing top term
        top = cur[r - 1]
        nxt = [0] + cur[:r - 1]
        if top:
            for j in range(r):
                nxt[j] -= top * phi_coeffs[j]
        cur = nxt
    return tuple(rows)


@lru_cache(maxsize=None)
def zeta_mul_matrix(d: int, e: int) -> np.ndarray:
    """Matrix of multiplication by zeta_d^e on the power basis; applying it
    to a coefficient row vector v gives M @ v."""
    table = zeta_power_table(d)
    r = len(table[0])
    cols = [table[(e + j) % d] for j in range(r)]
    return np.array(cols, dtype=np.int64).T.copy()
