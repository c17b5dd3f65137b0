import numpy as np
import pytest

from ntrucvp.ntru import (
    Ciphertext,
    NtruParams,
    ParameterError,
    PlaintextError,
    decrypt,
    decryption_margin,
    encrypt,
    is_valid_plaintext,
    keygen,
    load_ciphertext,
    load_keypair,
    load_public_key,
    parse_poly,
    recover_nonce,
    sample_message,
    sample_nonce,
    save_ciphertext,
    save_keypair,
    save_public_key,
)
from ntrucvp.ring import ConvPoly, TernarySpace, reduce_mod


@pytest.fixture
def small():
    return NtruParams(n=107, q=2048, d=5)


def test_keygen_invariants(small):
    kp = keygen(small, np.random.default_rng(0))
    assert small.lf.contains(kp.f) and small.lg.contains(kp.g)
    assert reduce_mod(kp.f * kp.fp, 3) == ConvPoly.one(107)
    assert reduce_mod(kp.f * kp.fq, 2048) == ConvPoly.one(107)
    assert reduce_mod(kp.f * kp.h, 2048) == reduce_mod(kp.g, 2048)


@pytest.mark.parametrize("seed", range(5))
def test_round_trip(small, seed):
    rng = np.random.default_rng(seed)
    kp = keygen(small, rng)
    m, r = sample_message(small, rng), sample_nonce(small, rng)
    assert decryption_margin(kp, m, r, small) < small.q / 2
    assert decrypt(encrypt(kp.h, m, r, small), kp, small) == m


def test_f_one_plus_pg():
    params = NtruParams(n=61, q=256, d=5, f_one_plus_pg=True)
    rng = np.random.default_rng(2)
    kp = keygen(params, rng)
    assert kp.fp == ConvPoly.one(61)
    m, r = sample_message(params, rng), sample_nonce(params, rng)
    assert decrypt(encrypt(kp.h, m, r, params), kp, params) == m


@pytest.mark.parametrize("kw", [
    dict(n=100, q=2048, d=5),  # N not prime
    dict(n=107, q=2000, d=5),  # q not a power of 2
    dict(n=107, q=2048, d=5, p=4),  # p not prime
    dict(n=107, q=2048, d=5, p=2),  # gcd(p, q) != 1
    dict(n=11, q=32, d=6),  # 2d + 1 > N
])
def test_param_validation(kw):
    with pytest.raises(ParameterError):
        NtruParams(**kw)


def test_plaintext_range(small):
    assert is_valid_plaintext(ConvPoly([1, -1] + [0] * 105), small)
    bad = ConvPoly([2] + [0] * 106)
    assert not is_valid_plaintext(bad, small)
    with pytest.raises(PlaintextError):
        encrypt(ConvPoly.one(107), bad, ConvPoly.zero(107), small)


def test_recover_nonce_through_shift(small):
    # g in T(d, d) makes h(1) = 0, so h is never invertible mod 2 and the shifted inverse is needed
    rng = np.random.default_rng(7)
    for _ in range(3):
        kp = keygen(small, rng)
        m, r = sample_message(small, rng), sample_nonce(small, rng)
        ct = encrypt(kp.h, m, r, small)
        assert recover_nonce(ct, m, kp.h, small) == r


def test_serialization_round_trip(tmp_path, small):
    kp = keygen(small, np.random.default_rng(3))
    save_keypair(tmp_path / "k", kp, small)
    kp2, p, q = load_keypair(tmp_path / "k")
    assert kp2 == kp and (p, q) == (3, 2048)
    save_public_key(tmp_path / "h", kp.h, small)
    assert load_public_key(tmp_path / "h") == (kp.h, 2048)
    ct = Ciphertext(reduce_mod(kp.h, 2048))
    save_ciphertext(tmp_path / "c", ct, 2048)
    assert load_ciphertext(tmp_path / "c") == (ct, 2048)


def test_parse_poly_errors():
    with pytest.raises(ValueError):
        parse_poly("3 32 1 2")
    with pytest.raises(ValueError):
        parse_poly("3")
    assert parse_poly("3 32 1 2 3") == (ConvPoly([1, 2, 3]), 32)


def test_custom_spaces():
    params = NtruParams(n=11, q=64, d=2, lr=TernarySpace(3, 1, 11))
    assert params.nonce_sum == 2
    rng = np.random.default_rng(5)
    kp = keygen(params, rng)
    m, r = sample_message(params, rng), sample_nonce(params, rng)
    assert recover_nonce(encrypt(kp.h, m, r, params), m, kp.h, params) == r
