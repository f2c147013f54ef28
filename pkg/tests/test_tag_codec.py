import hashlib
import hmac
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from phyauth import CapabilityError, ParameterError, SystemParams
from phyauth.tag_codec import (
    KeyedHash,
    SeededRandomCodebook,
    TableCodebook,
    all_keys,
    code_rate,
    encode,
    ensemble_min_distance,
    hamming_distance,
    key_from_index,
    key_index,
    pack_bits,
    unpack_bits,
)


def _naive_pack(bits):
    """Independent MSB-first packing with a bit-count prefix."""
    out = bytearray(len(bits).to_bytes(4, "big"))
    for start in range(0, len(bits), 8):
        byte = 0
        for j in range(8):
            byte <<= 1
            if start + j < len(bits):
                byte |= int(bits[start + j])
        out.append(byte)
    return bytes(out)


def _naive_bits(data, n):
    return [(data[i // 8] >> (7 - i % 8)) & 1 for i in range(n)]


def _oracle_codebook_tag(seed, s, k, l_t):
    material = seed.to_bytes(8, "big") + _naive_pack(s) + _naive_pack(k)
    stream = b""
    ctr = 0
    while len(stream) * 8 < l_t:
        stream += hashlib.sha256(material + ctr.to_bytes(4, "big")).digest()
        ctr += 1
    return _naive_bits(stream, l_t)


def _padded_key_table(l):
    return all_keys(l)


@pytest.fixture
def small_params():
    return SystemParams.make(l_k=4, l_t=8)


def test_params_invariants():
    p = SystemParams.make(l_k=128, l_t=256, q=4, rho_t=0.3, gamma_t=0.5)
    assert p.l_s == 1024
    assert abs(p.rho_s**2 + p.rho_t**2 - 1) < 1e-12
    with pytest.raises(ParameterError):
        SystemParams(l_s=10, l_k=4, l_t=8, q=1, rho_s=0.6, rho_t=0.8, gamma_t=1.0)
    with pytest.raises(ParameterError):
        SystemParams(l_s=8, l_k=4, l_t=8, q=1, rho_s=0.6, rho_t=0.7, gamma_t=1.0)
    with pytest.raises(ParameterError):
        SystemParams.make(l_k=4, l_t=8, gamma_t=0.0)


def test_pack_roundtrip_and_layout():
    bits = np.array([1, 0, 1, 1, 0, 0, 0, 0, 1], dtype=np.uint8)
    data = pack_bits(bits)
    assert data == bytes([0, 0, 0, 9, 0b10110000, 0b10000000])
    assert data == _naive_pack(bits)
    np.testing.assert_array_equal(unpack_bits(data), bits)


def test_key_index_roundtrip():
    for i in (0, 1, 5, 200, 255):
        assert key_index(key_from_index(i, 8)) == i
    np.testing.assert_array_equal(key_from_index(6, 4), [0, 1, 1, 0])
    np.testing.assert_array_equal(all_keys(3)[5], [1, 0, 1])


def test_encode_is_deterministic(small_params):
    rng = np.random.default_rng(0)
    s = rng.integers(0, 2, 8).astype(np.uint8)
    k = rng.integers(0, 2, 4).astype(np.uint8)
    for tf in (SeededRandomCodebook(small_params, 3), KeyedHash(small_params)):
        np.testing.assert_array_equal(encode(tf, s, k), encode(tf, s, k))


def test_codebook_matches_independent_derivation(small_params):
    tf = SeededRandomCodebook(small_params, seed=1)
    s = np.array([1, 0, 0, 1, 1, 1, 0, 1], dtype=np.uint8)
    cb = tf.codebook(s)
    for i in range(16):
        k = [(i >> (3 - j)) & 1 for j in range(4)]
        expected = _oracle_codebook_tag(1, list(s), k, 8)
        np.testing.assert_array_equal(tf.encode(s, k), expected)
        np.testing.assert_array_equal(cb[i], expected)


def test_multi_block_derivation():
    p = SystemParams.make(l_k=3, l_t=300)
    tf = SeededRandomCodebook(p, seed=99)
    s = np.zeros(300, dtype=np.uint8)
    k = [1, 1, 0]
    np.testing.assert_array_equal(tf.encode(s, k), _oracle_codebook_tag(99, list(s), k, 300))
    np.testing.assert_array_equal(tf.codebook(s)[6], tf.encode(s, k))


def test_keyed_hash_matches_hmac_and_lengths():
    p = SystemParams.make(l_k=128, l_t=256)
    tf = KeyedHash(p)
    rng = np.random.default_rng(5)
    s = rng.integers(0, 2, 256).astype(np.uint8)
    k = rng.integers(0, 2, 128).astype(np.uint8)
    t = tf.encode(s, k)
    assert t.shape == (256,)
    digest = hmac.new(_naive_pack(k), (0).to_bytes(4, "big") + _naive_pack(s), hashlib.sha256).digest()
    np.testing.assert_array_equal(t, _naive_bits(digest, 256))


def test_keyed_hash_codebook_rows():
    p = SystemParams.make(l_k=5, l_t=40)
    tf = KeyedHash(p)
    s = np.ones(40, dtype=np.uint8)
    cb = tf.codebook(s)
    for i in (0, 7, 31):
        np.testing.assert_array_equal(cb[i], tf.encode(s, key_from_index(i, 5)))


def test_length_mismatch_raises(small_params):
    tf = KeyedHash(small_params)
    with pytest.raises(ParameterError):
        tf.encode(np.zeros(7, dtype=np.uint8), np.zeros(4, dtype=np.uint8))
    with pytest.raises(ParameterError):
        tf.encode(np.zeros(8, dtype=np.uint8), np.zeros(5, dtype=np.uint8))
    with pytest.raises(ParameterError):
        tf.encode(np.full(8, 2), np.zeros(4, dtype=np.uint8))


def test_code_rate():
    assert code_rate(SystemParams.make(128, 256)) == 0.5
    assert code_rate(SystemParams.make(16, 16)) == 1.0
    assert code_rate(SystemParams.make(8, 16)) == 0.5


def test_hamming_distance_examples():
    rng = np.random.default_rng(1)
    t = rng.integers(0, 2, 16).astype(np.uint8)
    assert hamming_distance(t, t) == 0
    assert hamming_distance(t, 1 - t) == 16
    for _ in range(20):
        a = rng.integers(0, 2, 16)
        b = rng.integers(0, 2, 16)
        naive = sum(1 for x, y in zip(a, b) if x != y)
        assert hamming_distance(a, b) == naive
    with pytest.raises(ParameterError):
        hamming_distance(t, t[:-1])


bitvec16 = st.lists(st.integers(0, 1), min_size=16, max_size=16)


@given(bitvec16, bitvec16, bitvec16)
def test_hamming_is_a_metric(a, b, c):
    dab = hamming_distance(a, b)
    assert dab >= 0
    assert dab == hamming_distance(b, a)
    assert (dab == 0) == (a == b)
    assert hamming_distance(a, c) <= dab + hamming_distance(b, c)


def _brute_min_distance(tf, messages):
    best = None
    n = 2**tf.params.l_k
    for s in messages:
        for i, j in itertools.combinations(range(n), 2):
            a = tf.encode(s, key_from_index(i, tf.params.l_k))
            b = tf.encode(s, key_from_index(j, tf.params.l_k))
            d = sum(int(x != y) for x, y in zip(a, b))
            if best is None or d < best:
                best = d
    return best


def test_min_distance_duplicate_codeword():
    p = SystemParams.make(l_k=2, l_t=6)
    table = np.array([[0, 0, 0, 0, 0, 0], [1, 1, 1, 0, 0, 0], [0, 0, 0, 1, 1, 1], [0, 0, 0, 0, 0, 0]])
    d, s, k, k2 = ensemble_min_distance(TableCodebook(p, table), [np.zeros(6, dtype=np.uint8)])
    assert d == 0
    assert (key_index(k), key_index(k2)) == (0, 3)


def test_min_distance_padded_keys():
    p = SystemParams.make(l_k=4, l_t=4)
    tf = TableCodebook(p, _padded_key_table(4))
    d, *_ = ensemble_min_distance(tf, [np.zeros(4, dtype=np.uint8)])
    assert d == 1


def test_min_distance_random_codebook_vs_triple_loop():
    p = SystemParams.make(l_k=4, l_t=16)
    tf = SeededRandomCodebook(p, seed=7)
    rng = np.random.default_rng(7)
    messages = [rng.integers(0, 2, 16).astype(np.uint8) for _ in range(4)]
    d, s, k, k2 = ensemble_min_distance(tf, messages)
    assert d == _brute_min_distance(tf, messages)
    assert hamming_distance(tf.encode(s, k), tf.encode(s, k2)) == d
    assert key_index(k) < key_index(k2)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 6), st.integers(2, 12), st.integers(1, 8), st.integers(0, 2**32))
def test_min_distance_exhaustive_property(l_k, l_t, n_msg, seed):
    p = SystemParams.make(l_k=l_k, l_t=l_t)
    tf = SeededRandomCodebook(p, seed=seed)
    rng = np.random.default_rng(seed)
    messages = [rng.integers(0, 2, l_t).astype(np.uint8) for _ in range(n_msg)]
    assert ensemble_min_distance(tf, messages)[0] == _brute_min_distance(tf, messages)


def test_min_distance_errors():
    p = SystemParams.make(l_k=4, l_t=8)
    tf = SeededRandomCodebook(p, seed=1)
    with pytest.raises(ParameterError):
        ensemble_min_distance(tf, [])
    big = KeyedHash(SystemParams.make(l_k=25, l_t=32))
    with pytest.raises(CapabilityError):
        ensemble_min_distance(big, [np.zeros(32, dtype=np.uint8)])
    with pytest.raises(CapabilityError):
        SeededRandomCodebook(SystemParams.make(l_k=25, l_t=32), seed=0)


def test_random_codebook_distances_are_binomial():
    p = SystemParams.make(l_k=3, l_t=16)
    s = np.zeros(16, dtype=np.uint8)
    counts = np.zeros(17, dtype=int)
    for seed in range(400):
        cb = SeededRandomCodebook(p, seed).codebook(s)
        for i, j in itertools.combinations(range(8), 2):
            counts[np.count_nonzero(cb[i] != cb[j])] += 1
    n = counts.sum()
    expected = stats.binom.pmf(np.arange(17), 16, 0.5) * n
    # pool sparse tails so every cell expects at least 5
    lo = np.argmax(np.cumsum(expected) >= 5)
    hi = 16 - np.argmax(np.cumsum(expected[::-1]) >= 5)
    obs = np.concatenate([[counts[:lo + 1].sum()], counts[lo + 1:hi], [counts[hi:].sum()]])
    exp = np.concatenate([[expected[:lo + 1].sum()], expected[lo + 1:hi], [expected[hi:].sum()]])
    assert stats.chisquare(obs, exp).pvalue > 0.001


def test_keyed_hash_avalanche():
    p = SystemParams.make(l_k=128, l_t=256)
    tf = KeyedHash(p)
    rng = np.random.default_rng(11)
    flips = []
    for _ in range(1000):
        s = rng.integers(0, 2, 256).astype(np.uint8)
        k = rng.integers(0, 2, 128).astype(np.uint8)
        k2 = k.copy()
        k2[rng.integers(128)] ^= 1
        flips.append(hamming_distance(tf.encode(s, k), tf.encode(s, k2)))
    assert 0.40 * 256 <= np.mean(flips) <= 0.60 * 256


def test_table_codebook_validation():
    p = SystemParams.make(l_k=2, l_t=4)
    with pytest.raises(ParameterError):
        TableCodebook(p, np.zeros((3, 4)))
    with pytest.raises(ParameterError):
        TableCodebook(p, np.full((4, 4), 3))
