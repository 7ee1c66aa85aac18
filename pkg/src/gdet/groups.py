"""Finite groups of small order stored as explicit Cayley tables.

Everything downstream (group matrices, determinant expansion) consumes the
``mul`` table directly, so groups are built once, validated, and then treated
as immutable.  Orders up to 64 are supported; the catalog of the 14 groups of
order 16 is the main product of this module.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group given by its multiplication table on indices 0..n-1."""

    order: int
    mul: tuple  # mul[g][h] = index of g*h
    inv: tuple  # inv[g] = index of g^-1
    identity: int
    name: str
    gap_id: Optional[tuple] = None  # (order, catalog number), metadata only

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("group order must be positive")

    def element_orders(self) -> list:
        """Order of every element, computed by iterated multiplication."""
        orders = []
        for g in range(self.order):
            x, k = g, 1
            while x != self.identity:
                x = self.mul[x][g]
                k += 1
            orders.append(k)
        return orders

    def is_abelian(self) -> bool:
        n = self.order
        return all(self.mul[a][b] == self.mul[b][a]
                   for a in range(n) for b in range(n))

    def is_cyclic(self) -> bool:
        return self.order in self.element_orders()

    def to_json(self) -> str:
        return json.dumps({
            "name": self.name,
            "order": self.order,
            "gap_id": list(self.gap_id) if self.gap_id else None,
            "mul": [x for row in self.mul for x in row],
        })

    @staticmethod
    def from_json(text: str) -> "FiniteGroup":
        d = json.loads(text)
        n = d["order"]
        flat = d["mul"]
        if len(flat) != n * n:
            raise ValueError("mul table has wrong length")
        mul = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n))
        return _finish(mul, d["name"],
                       tuple(d["gap_id"]) if d.get("gap_id") else None)


def _finish(mul, name: str, gap_id=None) -> FiniteGroup:
    """Locate identity and inverses and assemble the dataclass."""
    n = len(mul)
    identity = None
    for e in range(n):
        if all(mul[e][g] == g and mul[g][e] == g for g in range(n)):
            identity = e
            break
    if identity is None:
        raise ValueError(f"{name}: no identity element in table")
    inv = []
    for g in range(n):
        ginv = next((h for h in range(n) if mul[g][h] == identity), None)
        if ginv is None or mul[ginv][g] != identity:
            raise ValueError(f"{name}: element {g} has no two-sided inverse")
        inv.append(ginv)
    return FiniteGroup(n, tuple(map(tuple, mul)), tuple(inv), identity, name, gap_id)


def validate(G: FiniteGroup) -> list:
    """Check the group axioms; returns a list of violation strings.

    O(n^3) associativity check included -- fine for n <= 64.
    """
    out = []
    n = G.order
    rng = range(n)
    full = set(rng)
    for g in rng:
        if set(G.mul[g]) != full:
            out.append(f"row {g} is not a permutation")
        if {G.mul[h][g] for h in rng} != full:
            out.append(f"column {g} is not a permutation")
    e = G.identity
    for g in rng:
        if G.mul[e][g] != g or G.mul[g][e] != g:
            out.append(f"identity fails on element {g}")
        if G.mul[g][G.inv[g]] != e or G.mul[G.inv[g]][g] != e:
            out.append(f"inverse fails on element {g}")
    for a in rng:
        for b in rng:
            ab = G.mul[a][b]
            row_a = G.mul[a]
            for c in rng:
                if G.mul[ab][c] != row_a[G.mul[b][c]]:
                    out.append(f"associativity fails at ({a},{b},{c})")
                    break
            else:
                continue
            break
    return out


def make_cyclic(n: int) -> FiniteGroup:
    """Cyclic group C_n with mul[g][h] = (g+h) mod n."""
    if n < 1:
        raise ValueError("cyclic group order must be >= 1")
    mul = tuple(tuple((g + h) % n for h in range(n)) for g in range(n))
    gap = (16, 1) if n == 16 else None
    return _finish(mul, f"C_{n}", gap)


def make_dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order n (so D_16 has 16 elements).

    Elements r^i s^j, indexed i + (n//2)*j, with s r = r^-1 s.
    """
    if n < 4 or n % 2:
        raise ValueError("dihedral order must be even and >= 4")
    m = n // 2

    def idx(i, j):
        return i % m + m * (j % 2)

    mul = []
    for a in range(n):
        i1, j1 = a % m, a // m
        row = []
        for b in range(n):
            i2, j2 = b % m, b // m
            row.append(idx(i1 + (i2 if j1 == 0 else -i2), j1 ^ j2))
        mul.append(tuple(row))
    gap = (16, 7) if n == 16 else None
    return _finish(tuple(mul), f"D_{n}", gap)


def make_quaternion(n: int) -> FiniteGroup:
    """Generalized quaternion group of order n = 2^m >= 8.

    Elements a^i b^j with a of order n/2, b^2 = a^(n/4), b a = a^-1 b.
    """
    if n < 8 or n & (n - 1):
        raise ValueError("quaternion order must be a power of 2, >= 8")
    m = n // 2

    def idx(i, j):
        return i % m + m * (j % 2)

    mul = []
    for a in range(n):
        i1, j1 = a % m, a // m
        row = []
        for b in range(n):
            i2, j2 = b % m, b // m
            i = i1 + (i2 if j1 == 0 else -i2)
            if j1 and j2:
                i += m // 2  # b^2 = a^(m/2)
            row.append(idx(i, j1 ^ j2))
        mul.append(tuple(row))
    gap = (16, 9) if n == 16 else None
    return _finish(tuple(mul), f"Q_{n}", gap)


def direct_product(G: FiniteGroup, H: FiniteGroup,
                   name: Optional[str] = None, gap_id=None) -> FiniteGroup:
    """Componentwise product; element (g, h) gets index g*|H| + h."""
    nG, nH = G.order, H.order
    n = nG * nH
    mul = []
    for a in range(n):
        g1, h1 = divmod(a, nH)
        row = []
        for b in range(n):
            g2, h2 = divmod(b, nH)
            row.append(G.mul[g1][g2] * nH + H.mul[h1][h2])
        mul.append(tuple(row))
    return _finish(tuple(mul), name or f"{G.name}x{H.name}", gap_id)


# The five order-16 presentations that are neither direct products nor one of
# the named families.  Each is polycyclic: a normal form g1^a g2^b (g3^c) with
# exponent ranges, swap rules moving a later generator past an earlier one,
# and power rules rewriting g_i^range as a (possibly nontrivial) tail word.
_PRESENTATIONS = {
    # g1^2 = g2^2 = g3^4 = e, g2 g1 = g1 g2, g3 g1 = g1 g3, g3 g2 = g1 g2 g3
    "C2sq_rtimes_C4": {
        "ranges": (2, 2, 4),
        "swaps": {(1, 0): (0, 1), (2, 0): (0, 2), (2, 1): (0, 1, 2)},
        "tails": {},
        "name": "C_2^2:C_4",
        "gap_id": (16, 3),
    },
    # g1^4 = g2^4 = e, g2 g1 = g1^3 g2
    "C4_rtimes_C4": {
        "ranges": (4, 4),
        "swaps": {(1, 0): (0, 0, 0, 1)},
        "tails": {},
        "name": "C_4:C_4",
        "gap_id": (16, 4),
    },
    # g1^8 = g2^2 = e, g2 g1 = g1^5 g2
    "C8_rtimes5_C2": {
        "ranges": (8, 2),
        "swaps": {(1, 0): (0, 0, 0, 0, 0, 1)},
        "tails": {},
        "name": "C_8:5C_2",
        "gap_id": (16, 6),
    },
    # g1^8 = g2^2 = e, g2 g1 = g1^3 g2
    "C8_rtimes3_C2": {
        "ranges": (8, 2),
        "swaps": {(1, 0): (0, 0, 0, 1)},
        "tails": {},
        "name": "C_8:3C_2",
        "gap_id": (16, 8),
    },
    # g1^4 = g3^2 = e, g1^2 = g2^2, g2 g1 = g1 g2, g3 g2 = g2 g3,
    # g3 g1 = g1^3 g3
    "Q8_rtimes_C2": {
        "ranges": (4, 2, 2),
        "swaps": {(1, 0): (0, 1), (2, 1): (1, 2), (2, 0): (0, 0, 0, 2)},
        "tails": {1: (0, 0)},  # g2^2 -> g1^2
        "name": "Q_8:C_2",
        "gap_id": (16, 13),
    },
}

_REWRITE_STEP_LIMIT = 100_000


def _normalize(word: list, ranges, swaps, tails) -> tuple:
    """Rewrite a generator word to its normal-form exponent tuple."""
    word = list(word)
    for _ in range(_REWRITE_STEP_LIMIT):
        # leftmost inversion g_j g_i with j > i
        for pos in range(len(word) - 1):
            if word[pos] > word[pos + 1]:
                word[pos:pos + 2] = swaps[(word[pos], word[pos + 1])]
                break
        else:
            # sorted; cap exponent runs
            counts = [0] * len(ranges)
            for g in word:
                counts[g] += 1
            for g, c in enumerate(counts):
                if c >= ranges[g]:
                    tail = tails.get(g, ())
                    counts[g] -= ranges[g]
                    for t in tail:
                        counts[t] += 1
                    word = [g2 for g2, c2 in enumerate(counts)
                            for _ in range(c2)]
                    break
            else:
                return tuple(counts)
            continue
    raise RuntimeError("word rewriting did not terminate (presentation bug)")


def make_presented(key: str) -> FiniteGroup:
    """Build one of the five presented order-16 groups by normal-form
    enumeration: all exponent tuples in range, products rewritten to normal
    form via the defining relations."""
    try:
        pres = _PRESENTATIONS[key]
    except KeyError:
        raise ValueError(f"unknown presentation {key!r}") from None
    ranges, swaps, tails = pres["ranges"], pres["swaps"], pres["tails"]

    def letters(exps):
        return [g for g in range(len(ranges)) for _ in range(exps[g])]

    import itertools
    elements = list(itertools.product(*[range(r) for r in ranges]))
    if len(elements) != 16:
        raise RuntimeError("presentation exponent ranges do not give 16 words")
    index = {e: i for i, e in enumerate(elements)}
    mul = []
    for x in elements:
        row = []
        for y in elements:
            nf = _normalize(letters(x) + letters(y), ranges, swaps, tails)
            row.append(index[nf])
        mul.append(tuple(row))
    G = _finish(tuple(mul), pres["name"], pres["gap_id"])
    bad = validate(G)
    if bad:
        raise RuntimeError(f"presentation {key} closed to an invalid table: {bad[:3]}")
    return G


def catalog_order16() -> list:
    """The 14 groups of order 16, in the paper's table order (abelian block
    first), each carrying its GAP small-group id as metadata."""
    C2 = make_cyclic(2)
    C4 = make_cyclic(4)
    C8 = make_cyclic(8)
    return [
        make_cyclic(16),
        direct_product(C8, C2, gap_id=(16, 5)),
        direct_product(C4, C4, gap_id=(16, 2)),
        direct_product(C4, direct_product(C2, C2), name="C_4xC_2^2",
                       gap_id=(16, 10)),
        direct_product(direct_product(C2, C2),
                       direct_product(C2, C2), name="C_2^4", gap_id=(16, 14)),
        direct_product(make_dihedral(8), C2, gap_id=(16, 11)),
        make_presented("Q8_rtimes_C2"),
        make_presented("C2sq_rtimes_C4"),
        make_presented("C4_rtimes_C4"),
        make_presented("C8_rtimes5_C2"),
        direct_product(make_quaternion(8), C2, gap_id=(16, 12)),
        make_presented("C8_rtimes3_C2"),
        make_quaternion(16),
        make_dihedral(16),
    ]


def resolve_group(selector: str) -> FiniteGroup:
    """Find a group by catalog name ('D_16'), family name ('C_7'), or GAP id
    string like '16,9'."""
    sel = selector.strip()
    if "," in sel:
        order, num = (int(x) for x in sel.split(","))
        for G in catalog_order16():
            if G.gap_id == (order, num):
                return G
        raise ValueError(f"no catalog group with GAP id ({order},{num})")
    for G in catalog_order16():
        if G.name == sel:
            return G
    if sel.startswith("C_") and sel[2:].isdigit():
        return make_cyclic(int(sel[2:]))
    if sel.startswith("D_") and sel[2:].isdigit():
        return make_dihedral(int(sel[2:]))
    if sel.startswith("Q_") and sel[2:].isdigit():
        return make_quaternion(int(sel[2:]))
    raise ValueError(f"unknown group selector {selector!r}")
