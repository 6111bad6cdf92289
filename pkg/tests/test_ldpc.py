import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqpsk_jdd import oracle
from dqpsk_jdd.ldpc import (
    AlistError,
    DecoderConfig,
    ParityCheckMatrix,
    SpaStats,
    check_node_update,
    emit_alist,
    encode,
    generate_regular_code,
    load_alist,
    read_alist,
    spa_decode,
    syndrome,
    variable_node_update,
)

HAMMING = np.array([
    [1, 0, 1, 0, 1, 0, 1],
    [0, 1, 1, 0, 0, 1, 1],
    [0, 0, 0, 1, 1, 1, 1],
])

SMALL_ALIST = """3 2
2 2
1 2 1
2 2
1
1 2
2
1 2
2 3
"""


@pytest.fixture(scope="module")
def code_24():
    return generate_regular_code(24, 3, 9, seed=5)


# --- alist ---------------------------------------------------------------


def test_alist_small_matrix():
    h = load_alist(SMALL_ALIST)
    assert h.n_cols == 3 and h.n_rows == 2
    assert h.rows == ((0, 1), (1, 2))
    np.testing.assert_array_equal(h.to_dense(), [[1, 1, 0], [0, 1, 1]])


def test_alist_degree_mismatch_is_rejected():
    # column 2 declares degree 2 but lists three rows
    text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2 2\n2\n1 2\n2 3\n"
    with pytest.raises(AlistError):
        load_alist(text)


def test_alist_zero_padding_is_ignored():
    padded = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n"
    assert load_alist(padded).rows == ((0, 1), (1, 2))


def test_alist_round_trip(tmp_path, code_24):
    path = tmp_path / "c.alist"
    path.write_text(emit_alist(code_24))
    again = read_alist(path)
    assert again.rows == code_24.rows
    assert again.fingerprint == code_24.fingerprint


@pytest.mark.parametrize("text", ["", "3 2\n", "3 x\n2 2\n", "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 4\n"])
def test_alist_malformed(text):
    with pytest.raises(AlistError):
        load_alist(text)


# --- generator -----------------------------------------------------------


def test_generator_degrees(code_24):
    assert code_24.n_rows == 8
    assert np.all(code_24.column_degrees() == 3)
    assert np.all(code_24.row_degrees() == 9)


def test_generator_is_deterministic():
    a = generate_regular_code(48, 3, 6, seed=11)
    b = generate_regular_code(48, 3, 6, seed=11)
    assert a.rows == b.rows
    assert generate_regular_code(48, 3, 6, seed=12).rows != a.rows


def test_generator_rejects_indivisible_degrees():
    with pytest.raises(ValueError):
        generate_regular_code(10, 3, 4, seed=0)


def test_balanced_generator_for_indivisible_length():
    h = generate_regular_code(4096, 3, 18, seed=7, balanced=True)
    assert h.n_rows == 683
    assert np.all(h.column_degrees() == 3)
    assert set(h.row_degrees().tolist()) <= {17, 18}
    assert abs(h.rate - 5 / 6) < 1e-3


def test_generator_has_no_four_cycles():
    h = generate_regular_code(240, 3, 6, seed=3).to_dense().astype(np.int64)
    overlap = h @ h.T
    np.fill_diagonal(overlap, 0)
    assert overlap.max() <= 1


# --- encoder / syndrome --------------------------------------------------


def test_hamming_encoding_matches_enumeration():
    h = ParityCheckMatrix.from_dense(HAMMING)
    enc = h.encoder
    assert enc.k == 4
    b = np.array([1, 0, 1, 1], dtype=np.uint8)
    words = [np.array(w) for w in itertools.product((0, 1), repeat=7) if not (HAMMING @ w % 2).any()]
    assert len(words) == 16
    match = [w for w in words if np.array_equal(w[enc.info_cols], b)]
    assert len(match) == 1
    c = encode(h, b)
    np.testing.assert_array_equal(c, match[0])
    np.testing.assert_array_equal(enc.extract(c), b)


def test_all_zero_encodes_to_all_zero(code_24):
    c = encode(code_24, np.zeros(code_24.k, dtype=np.uint8))
    assert not c.any()
    assert syndrome(code_24, c) == (True, 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_codewords_have_zero_syndrome(seed):
    h = generate_regular_code(60, 3, 6, seed=1)
    b = np.random.default_rng(seed).integers(0, 2, h.k, dtype=np.uint8)
    ok, failing = syndrome(h, encode(h, b))
    assert ok and failing == 0


def test_batch_encoding(code_24):
    b = np.random.default_rng(0).integers(0, 2, (5, code_24.k), dtype=np.uint8)
    c = code_24.encoder.encode(b)
    assert c.shape == (5, 24)
    assert not (c.astype(np.int64) @ code_24.to_dense().T % 2).any()


def test_single_flip_fails_column_weight_rows(code_24):
    c = encode(code_24, np.random.default_rng(1).integers(0, 2, code_24.k, dtype=np.uint8))
    for j in (0, 7, 23):
        flipped = c.copy()
        flipped[j] ^= 1
        assert syndrome(code_24, flipped) == (False, 3)


def test_rank_deficient_matrix_reports_effective_k():
    dense = np.vstack([HAMMING, HAMMING[0] ^ HAMMING[1]])
    h = ParityCheckMatrix.from_dense(dense)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        assert h.k == 4
    assert syndrome(h, encode(h, np.array([0, 1, 1, 0], dtype=np.uint8)))[0]


# --- node updates --------------------------------------------------------


def test_check_node_example():
    out = check_node_update([(0.1, 0.9), (0.2, 0.8), (0.5, 0.5)])
    assert out[2, 1] == pytest.approx(0.26, abs=1e-12)


def test_check_node_erasure_and_zeros():
    out = check_node_update([(0.5, 0.5), (0.3, 0.7), (0.9, 0.1)])
    assert out[1, 1] == pytest.approx(0.5) and out[2, 1] == pytest.approx(0.5)
    out = check_node_update([(1.0, 0.0)] * 4)
    assert np.all(out[:, 1] < 1e-10)


@pytest.mark.parametrize("degree", range(2, 11))
def test_check_node_matches_enumeration(degree):
    rng = np.random.default_rng(degree)
    for _ in range(20):
        p1 = rng.uniform(0.001, 0.999, degree)
        out = check_node_update(np.stack([1 - p1, p1], axis=1))
        ref = [oracle.exact_check_marginal(p1, e) for e in range(degree)]
        assert np.max(np.abs(out[:, 1] - ref)) < 1e-12
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-15)


def test_check_node_needs_two_edges():
    with pytest.raises(ValueError):
        check_node_update([(0.5, 0.5)])


def test_variable_node_examples():
    _, app = variable_node_update((0.5, 0.5), [(0.3, 0.7)])
    np.testing.assert_allclose(app, (0.3, 0.7), atol=1e-12)
    out, _ = variable_node_update((0.8, 0.2), [(0.5, 0.5), (0.6, 0.4)])
    np.testing.assert_allclose(out[1], (0.8, 0.2), atol=1e-12)
    _, app = variable_node_update((0.9, 0.1), [(0.9, 0.1)])
    np.testing.assert_allclose(app, (0.81 / 0.82, 0.01 / 0.82), atol=1e-12)


def test_variable_node_conflict_is_clamped_not_zero():
    stats = SpaStats()
    out, app = variable_node_update((1.0, 0.0), [(0.0, 1.0), (0.0, 1.0)], stats)
    assert np.all(np.isfinite(out)) and np.all(np.isfinite(app))
    np.testing.assert_allclose(app.sum(), 1.0)


# --- standalone SPA ------------------------------------------------------


def test_spa_noise_free_decodes_in_one_iteration(code_24):
    c = encode(code_24, np.random.default_rng(2).integers(0, 2, code_24.k, dtype=np.uint8))
    priors = np.where(c[:, None] == np.array([0, 1]), 0.99, 0.01)
    res = spa_decode(code_24, priors)
    assert res.converged and res.iterations == 1
    np.testing.assert_array_equal(res.hard_bits, c)


def test_spa_corrects_a_weak_error():
    h = generate_regular_code(120, 3, 6, seed=4)
    priors = np.tile([0.9, 0.1], (120, 1))
    priors[17] = (0.4, 0.6)
    res = spa_decode(h, priors, DecoderConfig(max_iterations=10))
    assert res.converged and not res.hard_bits.any()


def test_spa_rejects_wrong_shape(code_24):
    with pytest.raises(ValueError):
        spa_decode(code_24, np.full((23, 2), 0.5))


def test_decoder_config_validation():
    with pytest.raises(ValueError):
        DecoderConfig(max_iterations=0)
    with pytest.raises(ValueError):
        DecoderConfig(schedule="layered")
