"""Wolstenholme classification of primes.

For a prime p the central quantity is the residue of C(2p-1, p-1) modulo
p^2, p^3, p^4, computed in O(p) multiplications from the product
representation prod_{i=1..p-1} (p+i)/i.  Wolstenholme's theorem says the
mod-p^3 residue is 1 for every p >= 5; a Wolstenholme prime also has
residue 1 mod p^4 (only 16843 and 2124679 are known).  The term count of
the cyclic group determinant enters through the identity
N(Theta(C_p)) = (p - 1 + C(2p-1, p-1)) / p.
"""
from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

_PROD_CHUNK = 64
_HARMONIC_SAMPLE = 500  # cross-check harmonic criterion every N-th prime

# Deterministic Miller-Rabin witnesses, valid below 3.3 * 10^14.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_LIMIT = 3_317_044_064_679_887_385_961_981


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        raise ValueError("deterministic witness set not valid this large")
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _prod_mod(lo: int, hi: int, offset: int, m: int) -> int:
    """prod_{i=lo..hi} (offset + i) mod m, in chunks so the bignum stays
    small between reductions."""
    result = 1
    i = lo
    while i <= hi:
        j = min(i + _PROD_CHUNK, hi + 1)
        result = result * math.prod(range(offset + i, offset + j)) % m
        i = j
    return result


def central_binom_mod(p: int, e: int) -> int:
    """C(2p-1, p-1) mod p^e via prod (p+i) * inv(i), one modular inverse."""
    if not 1 <= e <= 4:
        raise ValueError("exponent e must be 1..4")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    m = p ** e
    num = _prod_mod(1, p - 1, p, m)
    den = _prod_mod(1, p - 1, 0, m)
    return num * pow(den, -1, m) % m


def harmonic_mod(p: int, e: int) -> int:
    """sum_{i=1..p-1} i^-1 mod p^e.  The numerator of H_{p-1} is divisible
    by p^e iff this is 0, the denominator being coprime to p."""
    if not is_prime(p) or p < 5:
        raise ValueError("p must be a prime >= 5")
    m = p ** e
    # batched inversion: one pow(-1) plus O(p) multiplications
    prefix = [1] * p
    for i in range(1, p):
        prefix[i] = prefix[i - 1] * i % m
    inv_running = pow(prefix[p - 1], -1, m)
    total = 0
    for i in range(p - 1, 0, -1):
        total += inv_running * prefix[i - 1]
        inv_running = inv_running * i % m
    return total % m


def n_theta_via_identity(p: int) -> int:
    """(p - 1 + C(2p-1, p-1)) / p exactly; equals N(Theta(C_p))."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    num = p - 1 + math.comb(2 * p - 1, p - 1)
    if num % p:
        raise ArithmeticError("identity numerator not divisible by p")
    return num // p


@dataclass(frozen=True)
class PrimeReport:
    p: int
    residue_p2: int
    residue_p3: int
    residue_p4: int
    n_theta_residue_p3: int
    harmonic_residue_p3: Optional[int]
    is_wolstenholme_prime: bool
    satisfies_wolstenholme_theorem: bool
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "residues": {
                "p2": str(self.residue_p2),
                "p3": str(self.residue_p3),
                "p4": str(self.residue_p4),
                "n_theta_p3": str(self.n_theta_residue_p3),
                "harmonic_p3": (None if self.harmonic_residue_p3 is None
                                else str(self.harmonic_residue_p3)),
            },
            "flags": {
                "wolstenholme_prime": self.is_wolstenholme_prime,
                "wolstenholme_theorem": self.satisfies_wolstenholme_theorem,
            },
            "note": self.note,
        }


def classify_prime(p: int, with_harmonic: bool = True) -> PrimeReport:
    """Full residue report for one prime.

    The mod-p^3 residue of the term count is derived from the binomial
    residue: p - 1 + C(2p-1,p-1) is divisible by p, so its residue mod p^4
    determines the quotient mod p^3.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p < 5:
        n_theta = n_theta_via_identity(p)  # 2 for p=2, 4 for p=3
        return PrimeReport(p, 0, 0, 0, n_theta % p ** 3, None, False, False,
                           note=f"p < 5: N(Theta(C_{p})) = {n_theta}, "
                                f"outside the p >= 5 theorems")
    r4 = central_binom_mod(p, 4)
    r2, r3 = r4 % p ** 2, r4 % p ** 3
    n_theta_p3 = ((p - 1 + r4) // p) % p ** 3
    harm = harmonic_mod(p, 3) if with_harmonic else None
    return PrimeReport(p, r2, r3, r4, n_theta_p3, harm,
                       is_wolstenholme_prime=(r4 == 1),
                       satisfies_wolstenholme_theorem=(r3 == 1))


def primes_in(lo: int, hi: int) -> Iterator[int]:
    """Primes in [lo, hi] by a segmented sieve (fine for hi up to ~10^7)."""
    if hi < lo:
        return
    sieve = bytearray([1]) * (hi + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(hi) + 1):
        if sieve[i]:
            sieve[i * i::i] = b"\x00" * len(sieve[i * i::i])
    for n in range(max(lo, 2), hi + 1):
        if sieve[n]:
            yield n


@dataclass
class ScanResult:
    reports: List[PrimeReport]
    wolstenholme_primes: List[int]
    scanned: int


def _write_checkpoint(path: str, last_prime: int, found: int) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d)
    with os.fdopen(fd, "w") as fh:
        fh.write(f"{last_prime} {found}\n")
    os.replace(tmp, path)


def read_checkpoint(path: str) -> Tuple[int, int]:
    with open(path) as fh:
        a, b = fh.read().split()
    return int(a), int(b)


def scan_range(lo: int, hi: int,
               checkpoint_path: Optional[str] = None,
               checkpoint_every: int = 200,
               progress: Optional[Callable[[str], None]] = None,
               keep_reports: bool = True) -> ScanResult:
    """Classify every prime in [lo, hi], in ascending order.

    The harmonic criterion is evaluated only for Wolstenholme candidates
    and for a sampled subset (it is a cross-check, not the gate).  Resumes
    past a previous checkpoint when one exists.
    """
    if not 2 <= lo <= hi:
        raise ValueError("need 2 <= lo <= hi")
    start = lo
    found_before = 0
    if checkpoint_path and os.path.exists(checkpoint_path):
        last, found_before = read_checkpoint(checkpoint_path)
        start = max(start, last + 1)
    reports: List[PrimeReport] = []
    wols: List[int] = []
    scanned = 0
    for idx, p in enumerate(primes_in(start, hi)):
        if p < 5:
            rep = classify_prime(p)
        else:
            rep = classify_prime(p, with_harmonic=False)
            if rep.is_wolstenholme_prime or idx % _HARMONIC_SAMPLE == 0:
                harm = harmonic_mod(p, 3)
                rep = PrimeReport(rep.p, rep.residue_p2, rep.residue_p3,
                                  rep.residue_p4, rep.n_theta_residue_p3,
                                  harm, rep.is_wolstenholme_prime,
                                  rep.satisfies_wolstenholme_theorem)
        scanned += 1
        if rep.is_wolstenholme_prime:
            wols.append(p)
        if keep_reports:
            reports.append(rep)
        if checkpoint_path and scanned % checkpoint_every == 0:
            _write_checkpoint(checkpoint_path, p, found_before + len(wols))
        if progress is not None and scanned % 200 == 0:
            progress(f"scanned {scanned} primes, at p={p}, "
                     f"{len(wols)} Wolstenholme prime(s)")
    if checkpoint_path and scanned:
        _write_checkpoint(checkpoint_path, hi, found_before + len(wols))
    return ScanResult(reports, wols, scanned)
