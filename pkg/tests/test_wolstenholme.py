import math
import os

import pytest

from gdet import wolstenholme as wh


def test_is_prime_small():
    primes = [p for p in range(2, 100) if wh.is_prime(p)]
    assert primes == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                      47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]
    assert wh.is_prime(16843)
    assert not wh.is_prime(16843 * 3)
    # strong-pseudoprime stress values
    assert not wh.is_prime(3215031751)
    assert wh.is_prime(2147483647)


def test_central_binom_matches_math_comb():
    for p in (5, 7, 11, 13, 17):
        for e in (1, 2, 3, 4):
            want = math.comb(2 * p - 1, p - 1) % p**e
            assert wh.central_binom_mod(p, e) == want


def test_wolstenholme_theorem_range():
    for p in wh.primes_in(5, 499):
        assert wh.central_binom_mod(p, 3) == 1


def test_p5_residue_mod_625():
    assert wh.central_binom_mod(5, 4) == 126


def test_harmonic_matches_fractions():
    from fractions import Fraction
    for p in (7, 11, 13):
        h = sum(Fraction(1, i) for i in range(1, p))
        num = h.numerator % p**3
        # harmonic_mod returns the numerator times inverse denominator mod p^3
        den_inv = pow(h.denominator, -1, p**3)
        assert wh.harmonic_mod(p, 3) == num * den_inv % p**3


def test_n_theta_identity():
    # N(Theta(C_p)) = (p - 1 + C(2p-1, p-1)) / p
    want = {2: 2, 3: 4, 5: 26, 7: 246, 13: 400024}
    for p, v in want.items():
        assert wh.n_theta_via_identity(p) == v


def test_classify_wolstenholme_prime():
    r = wh.classify_prime(16843)
    assert r.is_wolstenholme_prime
    assert r.residue_p4 == 1
    assert r.residue_p3 == 1
    assert r.harmonic_residue_p3 == 0
    assert r.n_theta_residue_p3 == 1
    d = r.to_json_dict()
    assert d["p"] == 16843
    assert d["flags"]["wolstenholme_prime"] is True


def test_classify_ordinary_prime():
    r = wh.classify_prime(17)
    assert not r.is_wolstenholme_prime
    assert r.satisfies_wolstenholme_theorem
    assert r.residue_p3 == 1 and r.residue_p4 != 1


def test_classify_small_primes_note():
    for p in (2, 3):
        r = wh.classify_prime(p)
        assert r.note
    with pytest.raises(ValueError):
        wh.classify_prime(15)


def test_scan_finds_16843(tmp_path):
    ckpt = str(tmp_path / "scan.ckpt")
    res = wh.scan_range(16800, 16900, checkpoint_path=ckpt)
    assert res.wolstenholme_primes == [16843]
    assert res.scanned == 9
    last, found = wh.read_checkpoint(ckpt)
    assert last >= 16843 and found == 1


def test_scan_checkpoint_resume(tmp_path):
    ckpt = str(tmp_path / "scan.ckpt")
    wh.scan_range(16800, 16850, checkpoint_path=ckpt, checkpoint_every=1)
    # resume skips the already scanned prefix but carries the found count
    res = wh.scan_range(16800, 16900, checkpoint_path=ckpt,
                        checkpoint_every=1)
    assert res.wolstenholme_primes == []
    assert all(p > 16850 for r in res.reports for p in [r.p])
    last, found = wh.read_checkpoint(ckpt)
    assert last == 16900 and found == 1
