"""Restricted partition counts.

The central object is the set of nondecreasing integer sequences of length
k*n with entries in 1..n and sum divisible by n; its cardinality is
computed exactly by the divisor-sum formula

    (1/n) * sum over d | n of  C(d*k + d - 1, d - 1) * phi(n/d)

and, as an independent oracle, by depth-first enumeration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List

ENUMERATION_CAP = 30  # max k*n the brute-force enumerator accepts


def euler_phi(n: int) -> int:
    """Euler totient by trial-division factorization."""
    if n < 1:
        raise ValueError("totient argument must be >= 1")
    result = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if m > 1:
        result -= result // m
    return result


def binomial_big(a: int, b: int) -> int:
    """Exact binomial coefficient; 0 when b > a or either is negative."""
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)


@dataclass(frozen=True)
class PartitionCount:
    n: int
    k: int
    value: int
    method: str  # "formula" or "enumeration"


def card_lambda(n: int, k: int) -> PartitionCount:
    """Cardinality of the restricted-partition set by the divisor-sum
    formula; the sum is asserted to be divisible by n."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    total = 0
    for d in range(1, n + 1):
        if n % d == 0:
            total += binomial_big(d * k + d - 1, d - 1) * euler_phi(n // d)
    if total % n:
        raise ArithmeticError(
            f"divisor sum {total} not divisible by n={n} (formula bug)")
    return PartitionCount(n, k, total // n, "formula")


def enumerate_lambda(n: int, k: int) -> int:
    """Brute-force count of nondecreasing length-(k*n) sequences over 1..n
    with sum divisible by n.  Deliberately simple: this is the oracle."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    length = k * n
    if length > ENUMERATION_CAP:
        raise ValueError(
            f"enumeration capped at k*n <= {ENUMERATION_CAP} (got {length})")

    def walk(pos: int, low: int, residue: int) -> int:
        if pos == length:
            return 1 if residue == 0 else 0
        total = 0
        for v in range(low, n + 1):
            total += walk(pos + 1, v, (residue + v) % n)
        return total

    return walk(0, 1, 0)


@dataclass(frozen=True)
class PrimePowerCongruence:
    """Residues of the partition count at n = p^l, plus the telescoping
    decomposition that proves the mod-p^2 congruence."""

    p: int
    l: int
    k: int
    value: int
    residue_p2: int
    residue_p3: int
    telescoping_ok: bool
    divisibility_exponents: List[int]  # p-adic valuation of each difference


def prime_power_congruence_report(p: int, l: int, k: int) -> PrimePowerCongruence:
    """Check the partition-count congruence at n = p^l and verify the
    telescoping identity

        p^l * |Lambda| - p^l
            = sum_i (C(k'p^i - 1, p^i - 1) - C(k'p^(i-1) - 1, p^(i-1) - 1))
                    * p^(l-i),    k' = k + 1,

    with each bracketed difference divisible by p^(3i)."""
    from .wolstenholme import is_prime
    if p < 5 or not is_prime(p):
        raise ValueError("p must be a prime >= 5")
    if l < 1 or k < 1:
        raise ValueError("l and k must be >= 1")
    kp = k + 1
    value = card_lambda(p ** l, k).value
    lhs = p ** l * value - p ** l
    rhs = 0
    valuations = []
    ok = True
    for i in range(1, l + 1):
        diff = (binomial_big(kp * p ** i - 1, p ** i - 1)
                - binomial_big(kp * p ** (i - 1) - 1, p ** (i - 1) - 1))
        rhs += diff * p ** (l - i)
        v = 0
        d = diff
        while d and d % p == 0:
            d //= p
            v += 1
        valuations.append(v if diff else 10 ** 9)
        if diff % p ** (3 * i):
            ok = False
    if lhs != rhs:
        ok = False
    return PrimePowerCongruence(p, l, k, value,
                                value % p ** 2, value % p ** 3,
                                ok, valuations)
