import numpy as np
import pytest

from dqpsk_jdd import oracle
from dqpsk_jdd.baselines import (
    differential_symbol_posterior,
    qpsk_decode,
    qpsk_optimal_demap,
    sca_decode,
    sca_demap,
)
from dqpsk_jdd.ldpc import ParityCheckMatrix, encode, generate_regular_code
from dqpsk_jdd.modem import demap_gray, differential_encode, map_gray, modulate


def test_sca_noise_free_gives_transmitted_bits():
    c = np.random.default_rng(0).integers(0, 2, 40, dtype=np.uint8)
    r = modulate(differential_encode(map_gray(c)))
    msgs = sca_demap(r, 0.01)
    np.testing.assert_array_equal(np.argmax(msgs, axis=1), c)
    assert np.min(np.max(msgs, axis=1)) > 1 - 1e-12


def test_sca_zero_rotation():
    q = differential_symbol_posterior(np.array([1.0, 1.0]), 0.05)
    assert np.argmax(q[1]) == 0
    np.testing.assert_array_equal(np.argmax(sca_demap([1.0, 1.0], 0.05), axis=1), [0, 0, 0, 0])


def test_sca_matches_pairwise_enumeration():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(250):
        n0 = rng.uniform(0.1, 2.0)
        r = rng.normal(size=4) + 1j * rng.normal(size=4)
        got = sca_demap(r, n0).reshape(4, 2, 2)
        for k in range(4):
            ref = oracle.exact_differential_bits(r[k - 1] if k else None, r[k], n0)
            worst = max(worst, np.max(np.abs(got[k] - ref)))
    assert worst < 1e-12


def test_qpsk_demap_matches_enumeration():
    rng = np.random.default_rng(2)
    r = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    n0 = 0.6
    got = qpsk_optimal_demap(r, n0).reshape(-1, 2, 2)
    ref = np.array([oracle.exact_coherent_bits(x, n0) for x in r])
    assert np.max(np.abs(got - ref)) < 1e-12


def test_qpsk_demap_limits():
    np.testing.assert_allclose(qpsk_optimal_demap([0j], 1.0), 0.5)
    msgs = qpsk_optimal_demap([-1.0 + 0j], 1e-3)
    np.testing.assert_allclose(msgs, [[0, 1], [0, 1]], atol=1e-12)


def test_uncoded_sca_equals_pairwise_map():
    rng = np.random.default_rng(3)
    r = rng.normal(size=50) + 1j * rng.normal(size=50)
    res = sca_decode(r, 0.8, ParityCheckMatrix.uncoded(100))
    q = differential_symbol_posterior(r, 0.8)
    bits_from_map = demap_gray(np.argmax(q, axis=1)).ravel()
    # bitwise and symbolwise MAP coincide for Gray labels except on near-ties
    msgs = sca_demap(r, 0.8)
    np.testing.assert_array_equal(res.hard_bits, np.argmax(msgs, axis=1))
    assert np.mean(res.hard_bits == bits_from_map) > 0.9


@pytest.mark.parametrize("decode, differential", [(sca_decode, True), (qpsk_decode, False)])
def test_noise_free_decoding(decode, differential):
    code = generate_regular_code(96, 3, 6, seed=0)
    c = encode(code, np.random.default_rng(4).integers(0, 2, code.k, dtype=np.uint8))
    s = map_gray(c)
    r = modulate(differential_encode(s) if differential else s)
    res = decode(r, 0.05, code)
    assert res.converged and res.iterations == 1
    np.testing.assert_array_equal(res.hard_bits, c)
