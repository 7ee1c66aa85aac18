"""Expansion of group determinants.

Two independent routes:

* subset-DP Laplace expansion over row subsets, which works for any group
  of order <= 16 (2^n memoized minors, level by level so only two levels
  are ever resident);
* the character product for cyclic groups, grouping the linear factors by
  the order d of the character so all intermediate arithmetic happens in
  the smallest cyclotomic ring Z[zeta_d].

Both produce the same canonical polynomial, which is the cross-validation
the test suite relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import cyclotomic, fastpoly
from .fastpoly import DEFAULT_BUDGET, PackedExact, Packing, ProgressFn
from .groups import FiniteGroup, validate
from .sparsepoly import (DEFAULT_MODPRIME, CoefficientMode, EXACT,
                         MemoryBudgetExceeded, SparsePoly)

# Beyond this order the subset DP defaults to ModPrime coefficients: the
# counts are what matters and exact coefficients of order-14+ determinants
# are enormous.
MODPRIME_DEFAULT_ORDER = 14

_DP_HARD_CAP = 16


@dataclass(frozen=True)
class GroupMatrix:
    """Variable-index matrix entry[g][h] = index of x_(g * h^-1)."""

    n: int
    entry: tuple

    def row(self, g: int) -> tuple:
        return self.entry[g]


def group_matrix(G: FiniteGroup) -> GroupMatrix:
    bad = validate(G)
    if bad:
        raise ValueError(f"invalid group {G.name}: {bad[0]}")
    n = G.order
    entry = tuple(tuple(G.mul[g][G.inv[h]] for h in range(n))
                  for g in range(n))
    return GroupMatrix(n, entry)


def det_subset_dp(M: GroupMatrix, mode: CoefficientMode = EXACT,
                  budget: int = DEFAULT_BUDGET,
                  progress: ProgressFn = None) -> SparsePoly:
    """Theta(G) by column-by-column Laplace expansion with memoization over
    row subsets.

    D(S), |S| = m, is the determinant of the minor on rows S and columns
    0..m-1; level m is computed from level m-1 only.  Keys are base-256
    packed exponent integers; signs follow the cofactor rule with a fixed
    left-to-right column order, so runs are reproducible.
    """
    n = M.n
    if n > _DP_HARD_CAP:
        raise ValueError(f"subset DP capped at order {_DP_HARD_CAP}")
    q = mode.modulus
    var_shift = [1 << (8 * (n - 1 - v)) for v in range(n)]
    level = {0: {0: 1}}  # subset bitmask -> {packed key -> coefficient}
    for m in range(1, n + 1):
        col = m - 1
        nxt = {}
        water = 0
        for s_prev, poly_prev in level.items():
            # add one row r not in s_prev; r's position in the new subset
            # determines the cofactor sign
            for r in range(n):
                bit = 1 << r
                if s_prev & bit:
                    continue
                s_new = s_prev | bit
                pos = bin(s_new & (bit - 1)).count("1")
                sign = -1 if (pos + col) & 1 else 1
                shift = var_shift[M.entry[r][col]]
                acc = nxt.setdefault(s_new, {})
                for key, c in poly_prev.items():
                    k2 = key + shift
                    v = acc.get(k2, 0) + sign * c
                    if q is not None:
                        v %= q
                    if v:
                        acc[k2] = v
                    else:
                        acc.pop(k2, None)
        level = nxt
        water = sum(len(p) for p in level.values()) * 100  # rough bytes
        if water > budget:
            raise MemoryBudgetExceeded(budget, water,
                                       f"subset DP level {m} of {n}")
        if progress is not None:
            progress(f"subset DP level {m}/{n}: "
                     f"{sum(len(p) for p in level.values())} stored terms")
    final = level[(1 << n) - 1]
    terms = {key.to_bytes(n, "big"): c for key, c in final.items()}
    return SparsePoly(n, terms, q, _canonical=True)


def theta_cyclic_packed(n: int, budget: int = DEFAULT_BUDGET,
                        progress: ProgressFn = None,
                        packing: Optional[Packing] = None) -> PackedExact:
    """Theta(C_n) as a packed polynomial, by the character product.

    For each divisor d of n, the characters of order d are multiplied
    together in Z[zeta_d]; each such block collapses to a rational-integer
    polynomial, and the blocks are multiplied pairwise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if packing is None:
        packing = Packing(n, n)
    blocks = []
    for d in range(1, n + 1):
        if n % d:
            continue
        idx = [i for i in range(n) if n // math.gcd(i, n) == d]
        r = len(cyclotomic.cyclotomic_coeffs(d)) - 1
        keys = np.zeros(1, np.uint64)
        coeffs = np.zeros((1, r), np.int64)
        coeffs[0, 0] = 1
        bound = 1
        for i in idx:
            g = math.gcd(i, n)
            form = [(packing.shift_of_var(j),
                     cyclotomic.zeta_mul_matrix(d, ((i // g) * j) % d))
                    for j in range(n)]
            keys, coeffs, bound = fastpoly.ring_mul_form(
                packing, keys, coeffs, form, bound, budget,
                label=f"C_{n} block d={d}")
        if r > 1 and np.any(coeffs[:, 1:]):
            raise RuntimeError(
                f"character block d={d} of C_{n} did not collapse to "
                f"rational integers (cyclotomic reduction bug)")
        vals = np.ascontiguousarray(coeffs[:, 0])
        block = PackedExact(packing, keys, [vals], 0,
                            int(np.abs(vals).max()) if len(vals) else 0)
        blocks.append(block)
        if progress is not None:
            progress(f"C_{n} divisor block d={d}: {block.term_count} terms")
    blocks.sort(key=lambda b: b.term_count)
    result = blocks[0]
    for b in blocks[1:]:
        result = fastpoly.mul_packed_pair(result, b, budget, progress,
                                          label=f"C_{n} block product")
    return result


def det_circulant_character(n: int, mode: CoefficientMode = EXACT,
                            budget: int = DEFAULT_BUDGET,
                            progress: ProgressFn = None) -> SparsePoly:
    """Theta(C_n) with dictionary terms; see theta_cyclic_packed."""
    packed = theta_cyclic_packed(n, budget, progress)
    return packed.to_sparse(mode.modulus)


def group_determinant(G: FiniteGroup, mode: Optional[CoefficientMode] = None,
                      budget: int = DEFAULT_BUDGET,
                      progress: ProgressFn = None) -> SparsePoly:
    """Theta(G): character product when G is cyclic, subset DP otherwise.

    When no mode is given, orders >= 14 default to ModPrime on the DP path
    (term counts then carry the Monte Carlo flag)."""
    if G.is_cyclic():
        try:
            return det_circulant_character(G.order, mode or EXACT, budget,
                                           progress)
        except ValueError:
            # monomial keys for n >= 16 overflow the packed kernel; fall
            # through to the generic DP
            pass
    if mode is None:
        mode = (CoefficientMode.mod_prime()
                if G.order >= MODPRIME_DEFAULT_ORDER else EXACT)
    return det_subset_dp(group_matrix(G), mode, budget, progress)


def term_count_power(G: FiniteGroup, k: int,
                     mode: Optional[CoefficientMode] = None,
                     budget: int = DEFAULT_BUDGET,
                     progress: ProgressFn = None) -> List[int]:
    """N(Theta(G)^j) for j = 1..k, by iterated multiplication by the base.

    On budget exhaustion the raised error carries the completed prefix in
    its ``completed_counts`` attribute.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = G.order
    cyclic_packed = False
    if G.is_cyclic() and (mode is None or mode.modulus is None):
        try:
            packing = Packing(n, n * k)
            base = theta_cyclic_packed(n, budget, progress, packing=packing)
            cyclic_packed = True
        except ValueError:
            # degrees n*k overflow the 64-bit key; fall back to the mod-q
            # engine, whose keys only need the base's exponent range times k
            if mode is None or mode.modulus is None:
                mode = CoefficientMode.mod_prime()
    if not cyclic_packed:
        poly = group_determinant(G, mode, budget, progress)
        if poly.modulus is not None:
            return _power_counts_mod(poly, k, budget, progress)
        packing = Packing(n, n * k)
        base = fastpoly.pack_sparse(poly, packing)
    b_keys = [int(x) for x in base.keys]
    b_coeffs = fastpoly._plainify(base).channels[0]
    b_coeffs = [int(x) for x in b_coeffs]
    counts = [base.term_count]
    A = base
    try:
        for j in range(2, k + 1):
            A = fastpoly.mul_packed(A, b_keys, b_coeffs, budget, progress,
                                    label=f"{G.name}^{j}")
            counts.append(A.term_count)
    except MemoryBudgetExceeded as err:
        err.completed_counts = counts
        raise
    return counts


def _power_counts_mod(base: SparsePoly, k: int, budget: int,
                      progress: ProgressFn) -> List[int]:
    max_exp = max((max(key) for key in base.terms), default=0)
    packing = Packing(base.n_vars, max_exp * k)
    A_keys, A_res = fastpoly.pack_mod(base, packing)
    b_keys = [int(x) for x in A_keys]
    b_res = [int(x) for x in A_res]
    counts = [len(A_keys)]
    try:
        for j in range(2, k + 1):
            A_keys, A_res = fastpoly.mul_mod(A_keys, A_res, b_keys, b_res,
                                             budget, progress,
                                             label=f"power k={j} (mod q)")
            counts.append(len(A_keys))
    except MemoryBudgetExceeded as err:
        err.completed_counts = counts
        raise
    return counts
