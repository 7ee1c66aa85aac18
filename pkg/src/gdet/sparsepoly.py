"""Exact sparse multivariate polynomials over arbitrary-precision integers.

Monomials are packed exponent vectors (one byte per variable, so at most 255
per exponent and 255 variables); a polynomial is a map from packed key to a
nonzero integer coefficient.  Canonical form -- no zero coefficients -- is
maintained by every operation.

Coefficients are either exact Python ints or residues modulo a large prime
(ModPrime mode, used to keep order-16 determinant coefficients one word
wide).  Term counts derived from ModPrime polynomials are Monte Carlo: a
genuinely nonzero coefficient divisible by the prime would be dropped.

Large products are routed through the numpy kernel in :mod:`gdet.fastpoly`,
which computes the same exact result with packed integer keys.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

# Default ModPrime modulus: the Mersenne prime 2^61 - 1.
DEFAULT_MODPRIME = (1 << 61) - 1

# Above this many coefficient multiplications, poly_mul switches from the
# dict loop to the numpy kernel.
_KERNEL_CUTOFF = 2_000_000


class MemoryBudgetExceeded(RuntimeError):
    """A polynomial operation would exceed its memory budget."""

    def __init__(self, budget: int, watermark: int, detail: str = ""):
        self.budget = budget
        self.watermark = watermark
        msg = (f"memory budget exceeded: budget {budget} bytes, "
               f"high-water estimate {watermark} bytes")
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


@dataclass(frozen=True)
class CoefficientMode:
    """Exact integer coefficients, or residues mod an odd prime."""

    modulus: Optional[int] = None

    @staticmethod
    def exact() -> "CoefficientMode":
        return CoefficientMode(None)

    @staticmethod
    def mod_prime(q: int = DEFAULT_MODPRIME) -> "CoefficientMode":
        if q < 3 or q % 2 == 0:
            raise ValueError("ModPrime modulus must be an odd prime")
        return CoefficientMode(q)

    @property
    def is_exact(self) -> bool:
        return self.modulus is None

    def reduce(self, c: int) -> int:
        return c if self.modulus is None else c % self.modulus


EXACT = CoefficientMode.exact()


def pack_exponents(exps: Sequence[int]) -> bytes:
    if any(e < 0 or e > 255 for e in exps):
        raise ValueError("exponents must be in 0..255")
    return bytes(exps)


class SparsePoly:
    """Sparse polynomial in ``n_vars`` variables, canonical form."""

    __slots__ = ("n_vars", "terms", "modulus")

    def __init__(self, n_vars: int, terms: Optional[Dict[bytes, int]] = None,
                 modulus: Optional[int] = None, _canonical: bool = False):
        if not 1 <= n_vars <= 255:
            raise ValueError("n_vars must be in 1..255")
        self.n_vars = n_vars
        self.modulus = modulus
        if terms is None:
            self.terms = {}
        elif _canonical:
            self.terms = terms
        else:
            clean = {}
            for key, c in terms.items():
                if len(key) != n_vars:
                    raise ValueError("monomial key length != n_vars")
                if modulus is not None:
                    c %= modulus
                if c:
                    clean[bytes(key)] = c
            self.terms = clean

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(n_vars: int, modulus: Optional[int] = None) -> "SparsePoly":
        return SparsePoly(n_vars, {}, modulus, _canonical=True)

    @staticmethod
    def constant(n_vars: int, c: int, modulus: Optional[int] = None) -> "SparsePoly":
        return SparsePoly(n_vars, {bytes(n_vars): c}, modulus)

    @staticmethod
    def variable(n_vars: int, index: int, modulus: Optional[int] = None) -> "SparsePoly":
        exps = [0] * n_vars
        exps[index] = 1
        return SparsePoly(n_vars, {pack_exponents(exps): 1}, modulus)

    # -- inspection -------------------------------------------------------

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def monte_carlo(self) -> bool:
        """True when the term count is only a lower bound certificate
        (coefficients were reduced mod a prime)."""
        return self.modulus is not None

    def total_degrees(self) -> set:
        return {sum(k) for k in self.terms}

    def __eq__(self, other) -> bool:
        return (isinstance(other, SparsePoly)
                and self.n_vars == other.n_vars
                and self.modulus == other.modulus
                and self.terms == other.terms)

    def __repr__(self) -> str:
        mode = "exact" if self.modulus is None else f"mod {self.modulus}"
        return f"<SparsePoly {self.n_vars} vars, {len(self.terms)} terms, {mode}>"

    # -- arithmetic -------------------------------------------------------

    def _check_compatible(self, other: "SparsePoly"):
        if self.n_vars != other.n_vars:
            raise ValueError(
                f"variable count mismatch: {self.n_vars} vs {other.n_vars}")
        if self.modulus != other.modulus:
            raise ValueError("coefficient mode mismatch")

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        self._check_compatible(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        for key, c in b.items():
            s = out.get(key, 0) + c
            if self.modulus is not None:
                s %= self.modulus
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return SparsePoly(self.n_vars, out, self.modulus, _canonical=True)

    def __neg__(self) -> "SparsePoly":
        m = self.modulus
        terms = {k: (-c if m is None else (m - c) % m)
                 for k, c in self.terms.items()}
        return SparsePoly(self.n_vars, terms, m, _canonical=True)

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def __mul__(self, other: "SparsePoly") -> "SparsePoly":
        return poly_mul(self, other)

    def evaluate(self, point: Sequence[int]) -> int:
        if len(point) != self.n_vars:
            raise ValueError("point length != n_vars")
        total = 0
        for key, c in self.terms.items():
            v = c
            for x, e in zip(point, key):
                if e:
                    v *= x ** e
            total += v
        return total % self.modulus if self.modulus is not None else total

    def substitute_rotation(self, shift: int) -> "SparsePoly":
        """Variable rotation x_j -> x_{(j+shift) mod n_vars}."""
        n = self.n_vars
        out = {}
        for key, c in self.terms.items():
            exps = bytearray(n)
            for j, e in enumerate(key):
                exps[(j + shift) % n] = e
            out[bytes(exps)] = c
        return SparsePoly(n, out, self.modulus, _canonical=True)


def poly_add(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    return a + b


# Global count of polynomial multiplications, so callers can observe that a
# warm cache run did no multiplication work.
_mult_counter = 0


def count_multiplication() -> None:
    global _mult_counter
    _mult_counter += 1


def multiplications() -> int:
    return _mult_counter


def reset_multiplications() -> None:
    global _mult_counter
    _mult_counter = 0


def poly_mul(a: SparsePoly, b: SparsePoly,
             mode: Optional[CoefficientMode] = None,
             budget: Optional[int] = None) -> SparsePoly:
    """Exact (or mod-q) product in canonical form.

    Small products use a plain dict loop; large ones go through the numpy
    kernel, which produces the identical canonical result.
    """
    count_multiplication()
    a._check_compatible(b)
    if mode is None:
        mode = CoefficientMode(a.modulus)
    work = len(a.terms) * len(b.terms)
    if work > _KERNEL_CUTOFF:
        from . import fastpoly
        return fastpoly.kernel_mul(a, b, mode, budget)
    m = mode.modulus
    out: Dict[int, int] = {}
    n = a.n_vars
    # Packed-key addition is carry-free only while exponent sums stay < 256.
    max_a = max((max(k) for k in a.terms), default=0)
    max_b = max((max(k) for k in b.terms), default=0)
    if max_a + max_b > 255:
        raise OverflowError("product exponent would exceed 255")
    for ka, ca in a.terms.items():
        ia = int.from_bytes(ka, "big")
        for kb, cb in b.terms.items():
            key = ia + int.from_bytes(kb, "big")
            out[key] = out.get(key, 0) + ca * cb
    terms = {}
    for ikey, c in out.items():
        if m is not None:
            c %= m
        if c:
            terms[ikey.to_bytes(n, "big")] = c
    return SparsePoly(n, terms, m, _canonical=True)


def poly_pow(a: SparsePoly, k: int,
             mode: Optional[CoefficientMode] = None,
             budget: Optional[int] = None) -> SparsePoly:
    """a^k by iterated multiplication by the base (every intermediate power
    is a smaller working set than binary powering would hold, and callers
    typically want each intermediate anyway)."""
    if k < 1:
        raise ValueError("exponent must be >= 1")
    result = a
    for _ in range(k - 1):
        result = poly_mul(result, a, mode, budget)
    return result


def term_count(a: SparsePoly) -> Tuple[int, bool]:
    """(number of stored terms, monte_carlo flag)."""
    return a.term_count, a.monte_carlo


# -- binary cache format -------------------------------------------------
#
# Little-endian.  Header: magic "GDET", version u16, mode tag u8 (0 exact,
# 1 mod-prime with the package's standard modulus), n_vars u8, term count
# u64.  Terms sorted lexicographically by exponent vector, each n_vars
# exponent bytes + sign byte + u32 magnitude length + magnitude bytes.
# Trailing CRC32 over everything after the magic.

_MAGIC = b"GDET"
_VERSION = 1


def serialize(a: SparsePoly) -> bytes:
    if a.modulus is None:
        tag = 0
    elif a.modulus == DEFAULT_MODPRIME:
        tag = 1
    else:
        raise ValueError("only the standard ModPrime modulus can be serialized")
    body = bytearray()
    body += struct.pack("<HBBQ", _VERSION, tag, a.n_vars, len(a.terms))
    for key in sorted(a.terms):
        c = a.terms[key]
        sign = 1 if c < 0 else 0
        mag = abs(c)
        mag_bytes = mag.to_bytes((mag.bit_length() + 7) // 8 or 1, "little")
        body += key
        body += struct.pack("<BI", sign, len(mag_bytes))
        body += mag_bytes
    crc = zlib.crc32(bytes(body))
    return _MAGIC + bytes(body) + struct.pack("<I", crc)


def deserialize(data: bytes) -> SparsePoly:
    if len(data) < 4 + 12 + 4 or data[:4] != _MAGIC:
        raise ValueError("not a GDET polynomial file")
    body, (crc,) = data[4:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise ValueError("checksum mismatch")
    version, tag, n_vars, count = struct.unpack_from("<HBBQ", body, 0)
    if version != _VERSION:
        raise ValueError(f"unsupported format version {version}")
    if tag not in (0, 1):
        raise ValueError(f"unknown coefficient mode tag {tag}")
    modulus = None if tag == 0 else DEFAULT_MODPRIME
    off = 12
    terms = {}
    prev = None
    for _ in range(count):
        if off + n_vars + 5 > len(body):
            raise ValueError("truncated polynomial file")
        key = body[off:off + n_vars]
        off += n_vars
        sign, mlen = struct.unpack_from("<BI", body, off)
        off += 5
        if off + mlen > len(body):
            raise ValueError("truncated polynomial file")
        mag = int.from_bytes(body[off:off + mlen], "little")
        off += mlen
        if mag == 0:
            raise ValueError("zero coefficient stored in file")
        if prev is not None and key <= prev:
            raise ValueError("terms not sorted")
        prev = key
        terms[bytes(key)] = -mag if sign else mag
    if off != len(body):
        raise ValueError("trailing bytes in polynomial file")
    return SparsePoly(n_vars, terms, modulus, _canonical=True)
