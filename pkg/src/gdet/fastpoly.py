"""numpy kernel for large sparse-polynomial products.

Monomials are packed into a single uint64 key (a fixed bit field per
variable, lexicographic order = numeric order), so collapsing equal
monomials is a radix sort plus a segmented sum.  Products are computed by
iterating over the smaller operand's terms in chunks: each chunk produces
shifted copies of the big operand, which are merged with the running result
in one stable sort per round.  Results are independent of chunk size.

Exact coefficients are kept either as plain int64 (while a certified bound
proves no overflow is possible) or as base-2^s signed limbs; every switch
point is derived from exact Python-int bounds, so the kernel is exact, not
probabilistic.  ModPrime coefficients use the Mersenne prime 2^61 - 1 with
a split-word modular multiply.
"""
from __future__ import annotations

import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import sparsepoly
from .sparsepoly import (DEFAULT_MODPRIME, CoefficientMode, MemoryBudgetExceeded,
                         SparsePoly)

DEFAULT_BUDGET = 8 << 30
# Transient bytes per concatenated row, as a multiple of row_bytes.  The
# worst moment of a collapse holds the sorted keys, the argsort index (or
# its radix working buffer), one channel's concat + gather copies, and the
# not-yet-consumed pieces of the other channels: about 40 bytes per row at
# two coefficient channels, against row_bytes = 24.
_SAFETY = 2.25

ProgressFn = Optional[Callable[[str], None]]


class Packing:
    """Fixed-width bit packing of exponent vectors into one uint64."""

    def __init__(self, n_vars: int, max_exp: int):
        bits = max(1, max_exp.bit_length())
        if n_vars * bits > 64:
            raise ValueError(
                f"cannot pack {n_vars} variables with exponents up to "
                f"{max_exp} into 64 bits")
        self.n_vars = n_vars
        self.bits = bits
        self.max_exp = (1 << bits) - 1

    def key_of(self, exps: bytes) -> int:
        k = 0
        for e in exps:
            k = (k << self.bits) | e
        return k

    def unpack_key(self, key: int) -> bytes:
        mask = self.max_exp
        out = bytearray(self.n_vars)
        for j in range(self.n_vars - 1, -1, -1):
            out[j] = key & mask
            key >>= self.bits
        return bytes(out)

    def shift_of_var(self, var: int) -> int:
        """Key increment for multiplying by x_var."""
        return 1 << (self.bits * (self.n_vars - 1 - var))


class PackedExact:
    """Sorted packed polynomial with exact integer coefficients.

    ``channels`` is a list of int64 arrays; the coefficient of row i is
    sum(channels[c][i] << (s*c)).  With one channel (s == 0) coefficients
    are plain machine words.  ``bound`` is a certified upper bound on the
    absolute value of every coefficient.
    """

    def __init__(self, packing: Packing, keys: np.ndarray,
                 channels: List[np.ndarray], s: int, bound: int):
        self.packing = packing
        self.keys = keys
        self.channels = channels
        self.s = s
        self.bound = bound

    @property
    def term_count(self) -> int:
        return len(self.keys)

    def nbytes(self) -> int:
        return self.keys.nbytes + sum(c.nbytes for c in self.channels)

    def coefficient_ints(self) -> list:
        """Exact Python-int coefficients, row by row."""
        if len(self.channels) == 1:
            return [int(v) for v in self.channels[0]]
        cols = [[int(v) for v in ch] for ch in self.channels]
        return [sum(col[i] << (self.s * c) for c, col in enumerate(cols))
                for i in range(len(self.keys))]

    def measured_bound(self) -> int:
        """Tight certified bound recomputed from the stored coefficients."""
        if len(self.keys) == 0:
            return 0
        if len(self.channels) == 1:
            return int(np.abs(self.channels[0]).max())
        return sum(int(np.abs(ch).max()) << (self.s * c)
                   for c, ch in enumerate(self.channels))

    def to_sparse(self, modulus: Optional[int] = None) -> SparsePoly:
        unpack = self.packing.unpack_key
        coeffs = self.coefficient_ints()
        terms = {}
        for key, c in zip(self.keys, coeffs):
            if modulus is not None:
                c %= modulus
            if c:
                terms[unpack(int(key))] = c
        return SparsePoly(self.packing.n_vars, terms, modulus, _canonical=True)


def pack_sparse(poly: SparsePoly, packing: Packing) -> PackedExact:
    if poly.modulus is not None:
        raise ValueError("pack_sparse expects exact coefficients")
    items = sorted((packing.key_of(k), c) for k, c in poly.terms.items())
    keys = np.fromiter((k for k, _ in items), dtype=np.uint64, count=len(items))
    bound = max((abs(c) for _, c in items), default=0)
    if bound < (1 << 62):
        vals = np.fromiter((c for _, c in items), dtype=np.int64,
                           count=len(items))
        return PackedExact(packing, keys, [vals], 0, bound)
    raise ValueError("input coefficients exceed the single-word range")


def _to_limbs(P: PackedExact, s: int, n_ch: int) -> PackedExact:
    """Re-represent plain int64 coefficients in base-2^s limbs."""
    assert P.s == 0 and len(P.channels) == 1
    v = P.channels[0]
    mask = np.int64((1 << s) - 1)
    channels = []
    tmp = v.copy()
    for _ in range(n_ch - 1):
        channels.append(tmp & mask)
        tmp = tmp >> s
    channels.append(tmp)
    return PackedExact(P.packing, P.keys, channels, s, P.bound)


def _pad_limbs(P: PackedExact, n_ch: int) -> PackedExact:
    """Grow the channel count, folding the old top limb down to < 2^s."""
    assert P.s > 0
    channels = list(P.channels)
    while len(channels) < n_ch:
        top = channels[-1]
        carry = top >> P.s
        channels[-1] = top & np.int64((1 << P.s) - 1)
        channels.append(carry)
    return PackedExact(P.packing, P.keys, channels, P.s, P.bound)


def _renormalize(channels: List[np.ndarray], s: int) -> None:
    """Carry-propagate so channels 0..L-2 lie in [0, 2^s)."""
    mask = np.int64((1 << s) - 1)
    for i in range(len(channels) - 1):
        carry = channels[i] >> s
        channels[i] = channels[i] & mask
        channels[i + 1] = channels[i + 1] + carry
    # in-place list mutation is the contract; caller keeps the list object


def _chunk_limit(budget: int, resident: int, row_bytes: int, nA: int,
                 nR: int, label: str) -> int:
    """Largest chunk (number of multiplier terms per round) that keeps the
    transient sort arrays within budget."""
    avail = budget - resident
    per_round_rows = lambda c: nR + c * nA
    max_rows = int(avail / (_SAFETY * row_bytes))
    if per_round_rows(1) > max_rows:
        raise MemoryBudgetExceeded(
            budget, resident + int(per_round_rows(1) * _SAFETY * row_bytes),
            label)
    hi = max(1, (max_rows - nR) // max(nA, 1))
    return min(hi, 4096)


def _chunk_limit_merge(budget: int, resident: int, row_bytes: int, nA: int,
                       nR: int, label: str) -> int:
    """Chunk limit for the merge-based rounds of mul_packed.

    A round holds the chunk's collapsed contribution (c*nA rows plus its
    sort transients when c > 1), the scatter target (nR + c*nA rows plus a
    position/flag array), and the old result until the scatter completes.
    """
    avail = budget - resident

    def need(c):
        merge = (nR + c * nA) * (row_bytes + 1) + c * nA * (row_bytes + 8)
        collapse = int(_SAFETY * row_bytes * c * nA) if c > 1 else 0
        return max(merge, collapse)

    if need(1) > avail:
        raise MemoryBudgetExceeded(budget, resident + need(1), label)
    hi = 1
    while hi < 4096 and need(hi + 1) <= avail:
        hi += 1
    return hi


def _merge_into(rk: np.ndarray, rch: List[np.ndarray],
                nk: np.ndarray, nch: List[np.ndarray],
                ) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Merge sorted new rows (nk, nch) into the sorted result (rk, rch).

    Coefficients of keys already present are added in place; genuinely new
    keys are scattered into a freshly allocated merged array.  Both inputs
    must have unique, ascending keys.
    """
    if len(rk) == 0:
        return nk, list(nch)
    idx = np.searchsorted(rk, nk)
    inb = idx < len(rk)
    eq = np.zeros(len(nk), dtype=bool)
    eq[inb] = rk[idx[inb]] == nk[inb]
    if eq.any():
        tgt = idx[eq]  # unique: nk has unique keys
        for c in range(len(rch)):
            rch[c][tgt] += nch[c][eq]
    rest = ~eq
    if not rest.any():
        return rk, rch
    bk = nk[rest]
    pos_b = np.searchsorted(rk, bk) + np.arange(len(bk), dtype=np.int64)
    total = len(rk) + len(bk)
    isb = np.zeros(total, dtype=bool)
    isb[pos_b] = True
    out_keys = np.empty(total, np.uint64)
    out_keys[isb] = bk
    out_keys[~isb] = rk
    out_ch = []
    for c in range(len(rch)):
        oc = np.empty(total, np.int64)
        oc[isb] = nch[c][rest]
        oc[~isb] = rch[c]
        rch[c] = None
        out_ch.append(oc)
    return out_keys, out_ch


def _collapse(key_parts: List[np.ndarray],
              part_channels: List[List[np.ndarray]],
              ) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Sort concatenated rows by key and sum coefficients of equal keys.

    ``part_channels[c]`` is the list of array pieces for channel c, aligned
    with the pieces concatenated from ``key_parts``.  Both lists are
    consumed (cleared) so transient pieces are freed as early as possible;
    peak memory is what bounds the chunk size upstream.
    """
    all_keys = np.concatenate(key_parts)
    key_parts.clear()
    order = np.argsort(all_keys, kind="stable")
    keys_sorted = all_keys[order]
    del all_keys
    boundary = np.empty(len(keys_sorted), dtype=bool)
    boundary[0] = True
    np.not_equal(keys_sorted[1:], keys_sorted[:-1], out=boundary[1:])
    starts = np.flatnonzero(boundary)
    del boundary
    out_channels = []
    for c, pieces in enumerate(part_channels):
        ch = np.concatenate(pieces)
        pieces.clear()
        part_channels[c] = []
        ch = ch[order]
        out_channels.append(np.add.reduceat(ch, starts))
        del ch
    return keys_sorted[starts], out_channels


def mul_packed(A: PackedExact, b_keys: Sequence[int], b_coeffs: Sequence[int],
               budget: int = DEFAULT_BUDGET, progress: ProgressFn = None,
               label: str = "mul") -> PackedExact:
    """Exact product of A with the polynomial given by (b_keys, b_coeffs).

    The multiplier should be the smaller operand; its coefficients must be
    exact Python ints.  Deterministic for any chunking.
    """
    sparsepoly.count_multiplication()
    if len(b_keys) == 0 or A.term_count == 0:
        return PackedExact(A.packing, np.empty(0, np.uint64),
                           [np.empty(0, np.int64)], 0, 0)
    order = sorted(range(len(b_keys)), key=lambda i: b_keys[i])
    b_keys = [int(b_keys[i]) for i in order]
    b_coeffs = [int(b_coeffs[i]) for i in order]
    bmax = max(abs(c) for c in b_coeffs)
    l1b = sum(abs(c) for c in b_coeffs)
    bound_next = A.bound * l1b

    if bound_next < (1 << 61) and A.s == 0:
        s, n_ch = 0, 1
    else:
        s = 62 - bmax.bit_length() - 11  # room for chunks up to 2^10 rows
        if s < 16:
            raise ValueError(
                f"multiplier coefficients too large for the limb kernel "
                f"({bmax.bit_length()} bits)")
        n_ch = max(2, -(-(bound_next.bit_length() + 1) // s))
        if A.s == 0:
            A = _to_limbs(A, s, n_ch)
        elif A.s != s:
            A = _to_limbs(_plainify(A), s, n_ch)  # only hit on mode changes
        elif len(A.channels) < n_ch:
            A = _pad_limbs(A, n_ch)

    row_bytes = 8 + 8 * n_ch
    nA = A.term_count
    r_keys = np.empty(0, np.uint64)
    r_channels = [np.empty(0, np.int64) for _ in range(n_ch)]
    bound_r = 0
    done = 0
    while done < len(b_keys):
        resident = A.nbytes() + len(r_keys) * row_bytes
        chunk = _chunk_limit_merge(budget, resident, row_bytes, nA,
                                   len(r_keys), label)
        if s:
            chunk = min(chunk, 1 << 10)
        batch_k = b_keys[done:done + chunk]
        batch_c = b_coeffs[done:done + chunk]
        # per-round overflow certificate, in exact integer arithmetic
        if s == 0:
            assert bound_r + A.bound * sum(abs(c) for c in batch_c) < (1 << 62)
        else:
            top_a = A.bound // (1 << (s * (n_ch - 1))) + 1
            top_r = bound_r // (1 << (s * (n_ch - 1))) + 1
            worst = max((1 << s), top_a)
            assert top_r + len(batch_c) * worst * bmax < (1 << 63)
        # the chunk's own sorted, collapsed contribution
        if len(batch_k) == 1:
            nk = A.keys + np.uint64(batch_k[0])
            nch = [A.channels[c] * np.int64(batch_c[0])
                   for c in range(n_ch)]
        else:
            key_parts = [A.keys + np.uint64(k) for k in batch_k]
            part_channels = [
                [A.channels[c] * np.int64(b) for b in batch_c]
                for c in range(n_ch)]
            nk, nch = _collapse(key_parts, part_channels)
            del key_parts, part_channels
        r_keys, r_channels = _merge_into(r_keys, r_channels, nk, nch)
        del nk, nch
        if s:
            _renormalize(r_channels, s)
        nz = r_channels[0] != 0
        for ch in r_channels[1:]:
            nz |= ch != 0
        r_keys = r_keys[nz]
        r_channels = [ch[nz] for ch in r_channels]
        bound_r += A.bound * sum(abs(c) for c in batch_c)
        done += chunk
        if progress is not None:
            progress(f"{label}: {done}/{len(b_keys)} multiplier terms, "
                     f"{len(r_keys)} terms so far")
    out = PackedExact(A.packing, r_keys, r_channels, s, min(bound_r, bound_next))
    out.bound = out.measured_bound()
    return out


def _plainify(P: PackedExact) -> PackedExact:
    """Collapse limbs back to plain int64 (requires bound < 2^62)."""
    if P.s == 0:
        return P
    if P.bound >= (1 << 62):
        raise ValueError("coefficients do not fit a single word")
    acc = P.channels[-1].copy()
    for ch in reversed(P.channels[:-1]):
        acc = (acc << P.s) + ch
    return PackedExact(P.packing, P.keys, [acc], 0, P.bound)


def mul_packed_pair(A: PackedExact, B: PackedExact,
                    budget: int = DEFAULT_BUDGET, progress: ProgressFn = None,
                    label: str = "mul") -> PackedExact:
    """Product of two packed polynomials; the smaller becomes the multiplier."""
    if B.term_count > A.term_count:
        A, B = B, A
    Bp = _plainify(B)
    return mul_packed(A, [int(k) for k in Bp.keys],
                      [int(v) for v in Bp.channels[0]],
                      budget, progress, label)


def power_counts(base: SparsePoly, k_max: int, budget: int = DEFAULT_BUDGET,
                 progress: ProgressFn = None,
                 keep_last: bool = False):
    """Term counts of base^k for k = 1..k_max by iterated multiplication.

    Returns (counts, last) where last is the packed base^k_max when
    keep_last is set, else None.
    """
    if base.modulus is not None:
        raise ValueError("power_counts requires exact coefficients")
    max_exp = max((max(k) for k in base.terms), default=0)
    packing = Packing(base.n_vars, max_exp * k_max)
    A = pack_sparse(base, packing)
    b_keys = [int(k) for k in A.keys]
    b_coeffs = [int(v) for v in A.channels[0]]
    counts = [A.term_count]
    for j in range(2, k_max + 1):
        A = mul_packed(A, b_keys, b_coeffs, budget, progress,
                       label=f"power k={j}")
        counts.append(A.term_count)
        if progress is not None:
            progress(f"power k={j}: {A.term_count} terms")
    return counts, (A if keep_last else None)


def kernel_mul(a: SparsePoly, b: SparsePoly, mode: CoefficientMode,
               budget: Optional[int] = None) -> SparsePoly:
    """Large-product backend for poly_mul; same contract, same result."""
    budget = budget or DEFAULT_BUDGET
    if not mode.is_exact and mode.modulus != DEFAULT_MODPRIME:
        raise ValueError("kernel supports only the standard ModPrime modulus")
    max_a = max((max(k) for k in a.terms), default=0)
    max_b = max((max(k) for k in b.terms), default=0)
    packing = Packing(a.n_vars, max_a + max_b)
    if mode.is_exact:
        A, B = pack_sparse(a, packing), pack_sparse(b, packing)
        return mul_packed_pair(A, B, budget).to_sparse()
    A = pack_mod(a, packing)
    if b.term_count > a.term_count:
        A, b = pack_mod(b, packing), a
    b_items = sorted((packing.key_of(k), c % DEFAULT_MODPRIME)
                     for k, c in b.terms.items())
    keys, res = mul_mod(A[0], A[1], [k for k, _ in b_items],
                        [c for _, c in b_items], budget)
    unpack = packing.unpack_key
    terms = {unpack(int(k)): int(v) for k, v in zip(keys, res)}
    return SparsePoly(a.n_vars, terms, DEFAULT_MODPRIME, _canonical=True)


# -- ModPrime engine: arithmetic mod the Mersenne prime 2^61 - 1 ---------

_M61 = np.uint64(DEFAULT_MODPRIME)
_MASK31 = np.uint64((1 << 31) - 1)
_MASK30 = np.uint64((1 << 30) - 1)


def _fold61(x: np.ndarray) -> np.ndarray:
    x = (x & _M61) + (x >> np.uint64(61))
    x = (x & _M61) + (x >> np.uint64(61))
    return np.where(x == _M61, np.uint64(0), x)


def _mulmod61(a: np.ndarray, b: int) -> np.ndarray:
    """a*b mod 2^61-1 for a uint64 array of residues and a scalar residue."""
    b_hi, b_lo = b >> 31, b & ((1 << 31) - 1)
    a_hi = a >> np.uint64(31)
    a_lo = a & _MASK31
    # a*b = a_hi*b_hi*2^62 + (a_hi*b_lo + a_lo*b_hi)*2^31 + a_lo*b_lo
    t = a_hi * np.uint64(b_hi) * np.uint64(2)  # 2^62 == 2 (mod M61)
    mid = a_hi * np.uint64(b_lo) + a_lo * np.uint64(b_hi)
    t = t + (((mid & _MASK30) << np.uint64(31)) + (mid >> np.uint64(30)))
    t = _fold61(t)
    return _fold61(t + _fold61(a_lo * np.uint64(b_lo)))


def pack_mod(poly: SparsePoly, packing: Packing):
    """(keys, residues) with residues in [0, 2^61-1)."""
    items = sorted((packing.key_of(k), c % DEFAULT_MODPRIME)
                   for k, c in poly.terms.items())
    keys = np.fromiter((k for k, _ in items), np.uint64, len(items))
    res = np.fromiter((c for _, c in items), np.uint64, len(items))
    return keys, res


def mul_mod(A_keys: np.ndarray, A_res: np.ndarray,
            b_keys: Sequence[int], b_res: Sequence[int],
            budget: int = DEFAULT_BUDGET, progress: ProgressFn = None,
            label: str = "mulmod"):
    """Product with coefficients mod 2^61-1; returns (keys, residues)."""
    sparsepoly.count_multiplication()
    nA = len(A_keys)
    if nA == 0 or len(b_keys) == 0:
        return np.empty(0, np.uint64), np.empty(0, np.uint64)
    row_bytes = 8 + 16  # key + lo/hi accumulator channels
    r_keys = np.empty(0, np.uint64)
    r_lo = np.empty(0, np.int64)
    r_hi = np.empty(0, np.int64)
    done = 0
    while done < len(b_keys):
        resident = (A_keys.nbytes + A_res.nbytes + len(r_keys) * row_bytes)
        chunk = _chunk_limit(budget, resident, row_bytes, nA, len(r_keys),
                             label)
        chunk = min(chunk, 1 << 30)
        batch = range(done, min(done + chunk, len(b_keys)))
        key_parts = [r_keys] + [A_keys + np.uint64(b_keys[i]) for i in batch]
        lo_parts, hi_parts = [r_lo], [r_hi]
        for i in batch:
            prod = _mulmod61(A_res, b_res[i])
            lo_parts.append((prod & _MASK31).view(np.int64))
            hi_parts.append((prod >> np.uint64(31)).view(np.int64))
        keys, (lo, hi) = _collapse(key_parts, [lo_parts, hi_parts])
        # fold hi*2^31 + lo back to a residue
        hi_u = hi.view(np.uint64)
        lo_u = lo.view(np.uint64)
        t = (((hi_u & _MASK30) << np.uint64(31)) + (hi_u >> np.uint64(30)))
        res = _fold61(_fold61(t) + _fold61((lo_u & _M61) + (lo_u >> np.uint64(61))))
        nz = res != 0
        r_keys = keys[nz]
        res = res[nz]
        r_lo = (res & _MASK31).view(np.int64)
        r_hi = (res >> np.uint64(31)).view(np.int64)
        done += len(batch)
        if progress is not None:
            progress(f"{label}: {done}/{len(b_keys)} multiplier terms, "
                     f"{len(r_keys)} terms so far")
    res = (r_hi.view(np.uint64) << np.uint64(31)) | r_lo.view(np.uint64)
    return r_keys, res


# -- cyclotomic-vector coefficients --------------------------------------

def ring_mul_form(packing: Packing, keys: np.ndarray, coeffs: np.ndarray,
                  form: Sequence[Tuple[int, np.ndarray]], bound: int,
                  budget: int = DEFAULT_BUDGET,
                  label: str = "ring") -> Tuple[np.ndarray, np.ndarray, int]:
    """Multiply a polynomial with ring-vector coefficients by a linear form.

    ``coeffs`` has shape (m, R); each form term is (key shift, R x R integer
    matrix applying multiplication by that term's ring coefficient).  The
    certified bound guarantees int64 never overflows; exceeding it raises.
    """
    m, R = coeffs.shape
    amp = sum(int(np.abs(mat).sum(axis=1).max()) for _, mat in form)
    bound_next = bound * amp
    if bound_next >= (1 << 62):
        raise ValueError("cyclotomic coefficients would overflow int64")
    row_bytes = 8 + 8 * R
    r_keys = np.empty(0, np.uint64)
    r_coeffs = np.empty((0, R), np.int64)
    done = 0
    form = sorted(form, key=lambda t: t[0])
    while done < len(form):
        resident = keys.nbytes + coeffs.nbytes + len(r_keys) * row_bytes
        chunk = _chunk_limit(budget, resident, row_bytes, m, len(r_keys),
                             label)
        batch = form[done:done + chunk]
        all_keys = np.concatenate(
            [r_keys] + [keys + np.uint64(shift) for shift, _ in batch])
        all_coeffs = np.concatenate(
            [r_coeffs] + [coeffs @ mat.T for _, mat in batch])
        order = np.argsort(all_keys, kind="stable")
        all_keys = all_keys[order]
        all_coeffs = all_coeffs[order]
        boundary = np.empty(len(all_keys), dtype=bool)
        boundary[0] = True
        np.not_equal(all_keys[1:], all_keys[:-1], out=boundary[1:])
        starts = np.flatnonzero(boundary)
        sums = np.add.reduceat(all_coeffs, starts, axis=0)
        nz = np.any(sums != 0, axis=1)
        r_keys = all_keys[starts][nz]
        r_coeffs = sums[nz]
        done += len(batch)
    return r_keys, r_coeffs, bound_next
