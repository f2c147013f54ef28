"""Tag generation as encoding into a message-indexed code ensemble.

For a fixed message ``s`` the map ``k -> tau(s, k)`` is an encoder whose
codebook ``C(s)`` holds one L_t-bit codeword per key. Keys are ordered by
their integer value read most-significant-bit first, so key index ``i`` is
the codeword row ``i`` of :func:`TagFunction.codebook`.

Bit vectors are ``numpy.uint8`` arrays of 0/1. Their canonical byte form is a
4-byte big-endian bit count followed by the bits packed MSB-first, zero
padded to a whole byte (:func:`pack_bits`).

Tag functions
-------------
``SeededRandomCodebook(params, seed)``
    Ideal random-code model. The tag for ``(s, k)`` is the first L_t bits of
    ``SHA256(M || c0) || SHA256(M || c1) || ...`` with
    ``M = seed.to_bytes(8, "big") || pack_bits(s) || pack_bits(k)`` and
    ``c_j = j.to_bytes(4, "big")``; bits are taken MSB-first from each byte.
``KeyedHash(params)``
    Realistic MAC. The tag is the first L_t bits of
    ``HMAC_SHA256(pack_bits(k), c0 || pack_bits(s)) || HMAC_SHA256(pack_bits(k), c1 || pack_bits(s)) || ...``.
``TableCodebook(params, codewords)``
    Explicit codebook shared by every message, for constructed ensembles.
"""

from __future__ import annotations

import hashlib
import hmac
from typing import Sequence

import numpy as np

from .errors import CapabilityError, ParameterError
from .params import SystemParams

ENUMERABLE_MAX_LK = 24
_BLOCK_BITS = 256


def as_bits(x, length: int | None = None, name: str = "bits") -> np.ndarray:
    """Validate and convert to a 1-D uint8 array of 0/1 values."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.dtype == np.uint8:
        valid = arr.max(initial=0) <= 1
    else:
        valid = ((arr == 0) | (arr == 1)).all()
        arr = arr.astype(np.uint8)
    if not valid:
        raise ParameterError(f"{name} must contain only 0/1 values")
    if length is not None and arr.size != length:
        raise ParameterError(f"{name} has length {arr.size}, expected {length}")
    return arr


def pack_bits(bits) -> bytes:
    """Canonical serialization: 32-bit big-endian length prefix, MSB-first packing."""
    b = as_bits(bits)
    return len(b).to_bytes(4, "big") + np.packbits(b).tobytes()


def unpack_bits(data: bytes) -> np.ndarray:
    if len(data) < 4:
        raise ParameterError("serialized bit vector is shorter than its length prefix")
    n = int.from_bytes(data[:4], "big")
    body = np.frombuffer(data[4:], dtype=np.uint8)
    if body.size != (n + 7) // 8:
        raise ParameterError(f"payload holds {body.size} bytes, length prefix needs {(n + 7) // 8}")
    return np.unpackbits(body)[:n].copy()


def key_from_index(index: int, l_k: int) -> np.ndarray:
    if not (0 <= index < 2**l_k):
        raise ParameterError(f"key index {index} out of range for l_k={l_k}")
    return np.array([(index >> (l_k - 1 - j)) & 1 for j in range(l_k)], dtype=np.uint8)


def key_index(k) -> int:
    out = 0
    for b in as_bits(k, name="key"):
        out = (out << 1) | int(b)
    return out


def all_keys(l_k: int) -> np.ndarray:
    """Every key of length l_k as rows, in lexicographic order."""
    idx = np.arange(2**l_k, dtype=np.uint64)
    shifts = np.arange(l_k - 1, -1, -1, dtype=np.uint64)
    return ((idx[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)


def _bits_from_digests(digests: bytes, l_t: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(digests, dtype=np.uint8))[:l_t]


def packed_keys(l_k: int) -> list[bytes]:
    """pack_bits of every key of length l_k, in lexicographic order."""
    nbytes = (l_k + 7) // 8
    shift = 8 * nbytes - l_k
    prefix = l_k.to_bytes(4, "big")
    return [prefix + (i << shift).to_bytes(nbytes, "big") for i in range(2**l_k)]


class TagFunction:
    """Base class of the deterministic map (message, key) -> tag."""

    kind = "abstract"

    def __init__(self, params: SystemParams):
        self.params = params

    @property
    def enumerable(self) -> bool:
        return self.params.l_k <= ENUMERABLE_MAX_LK

    def require_enumerable(self, what: str = "operation"):
        if not self.enumerable:
            raise CapabilityError(
                f"{what} needs an exhaustive key scan; l_k={self.params.l_k} exceeds "
                f"the cap of {ENUMERABLE_MAX_LK}"
            )

    def _check(self, s, k):
        s = as_bits(s, self.params.l_s, "message")
        k = as_bits(k, self.params.l_k, "key")
        return s, k

    def encode(self, s, k) -> np.ndarray:
        s, k = self._check(s, k)
        return self._encode(s, k)

    def codebook(self, s) -> np.ndarray:
        """All 2^l_k codewords of C(s), one row per key in lexicographic order."""
        self.require_enumerable("codebook enumeration")
        s = as_bits(s, self.params.l_s, "message")
        return self._codebook(s)

    def _encode(self, s, k):
        raise NotImplementedError

    def _codebook(self, s):
        return np.stack([self._encode(s, k) for k in all_keys(self.params.l_k)])

    def __call__(self, s, k):
        return self.encode(s, k)


class SeededRandomCodebook(TagFunction):
    kind = "seeded_random_codebook"

    def __init__(self, params: SystemParams, seed: int):
        super().__init__(params)
        if params.l_k > ENUMERABLE_MAX_LK:
            raise CapabilityError(
                f"SeededRandomCodebook requires l_k <= {ENUMERABLE_MAX_LK}, got {params.l_k}"
            )
        if not (0 <= seed < 2**64):
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._n_blocks = -(-params.l_t // _BLOCK_BITS)

    def _prefix(self, s):
        return hashlib.sha256(self.seed.to_bytes(8, "big") + pack_bits(s))

    def _digest(self, prefix, packed_key: bytes) -> bytes:
        h = prefix.copy()
        h.update(packed_key)
        if self._n_blocks == 1:
            h.update(b"\x00\x00\x00\x00")
            return h.digest()
        out = bytearray()
        for j in range(self._n_blocks):
            hj = h.copy()
            hj.update(j.to_bytes(4, "big"))
            out += hj.digest()
        return bytes(out)

    def _encode(self, s, k):
        return _bits_from_digests(self._digest(self._prefix(s), pack_bits(k)), self.params.l_t)

    def _codebook(self, s):
        prefix = self._prefix(s)
        raw = b"".join(self._digest(prefix, pk) for pk in packed_keys(self.params.l_k))
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
        return bits.reshape(2**self.params.l_k, -1)[:, :self.params.l_t].copy()

    def __repr__(self):
        return f"SeededRandomCodebook(seed={self.seed}, l_k={self.params.l_k}, l_t={self.params.l_t})"


class KeyedHash(TagFunction):
    kind = "keyed_hash"

    def __init__(self, params: SystemParams):
        super().__init__(params)
        self._n_blocks = -(-params.l_t // _BLOCK_BITS)

    def _digest(self, packed_key: bytes, body: bytes) -> bytes:
        return b"".join(
            hmac.digest(packed_key, j.to_bytes(4, "big") + body, "sha256")
            for j in range(self._n_blocks)
        )

    def _encode(self, s, k):
        return _bits_from_digests(self._digest(pack_bits(k), pack_bits(s)), self.params.l_t)

    def _codebook(self, s):
        body = pack_bits(s)
        raw = b"".join(self._digest(pk, body) for pk in packed_keys(self.params.l_k))
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
        return bits.reshape(2**self.params.l_k, -1)[:, :self.params.l_t].copy()

    def __repr__(self):
        return f"KeyedHash(l_k={self.params.l_k}, l_t={self.params.l_t})"


class TableCodebook(TagFunction):
    """Message-independent explicit codebook; row i is the tag of key index i."""

    kind = "table"

    def __init__(self, params: SystemParams, codewords):
        super().__init__(params)
        self.require_enumerable("TableCodebook")
        table = np.asarray(codewords, dtype=np.uint8)
        if table.shape != (2**params.l_k, params.l_t):
            raise ParameterError(
                f"codeword table must have shape {(2**params.l_k, params.l_t)}, got {table.shape}"
            )
        if not np.isin(table, (0, 1)).all():
            raise ParameterError("codeword table must contain only 0/1 values")
        self.table = table
        self.table.setflags(write=False)

    def _encode(self, s, k):
        return self.table[key_index(k)].copy()

    def _codebook(self, s):
        return self.table.copy()


def encode(tf: TagFunction, s, k) -> np.ndarray:
    return tf.encode(s, k)


def code_rate(params: SystemParams) -> float:
    return params.l_k / params.l_t


def hamming_distance(a, b) -> int:
    a = as_bits(a, name="tag a")
    b = as_bits(b, len(a), "tag b")
    return int(np.count_nonzero(a != b))


def pairwise_distances(rows_a: np.ndarray, rows_b: np.ndarray) -> np.ndarray:
    """Hamming distance matrix between two stacks of bit rows."""
    xa = 1.0 - 2.0 * rows_a.astype(float)
    xb = 1.0 - 2.0 * rows_b.astype(float)
    return np.rint((rows_a.shape[1] - xa @ xb.T) / 2.0).astype(np.int64)


def ensemble_min_distance(tf: TagFunction, messages: Sequence, block: int = 2048):
    """Minimum Hamming distance of the ensemble over the given messages.

    Returns ``(d_min, s, k, k_prime)`` for the first achieving triple in
    (message order, k, k') lexicographic order with ``k < k'``. Cost is
    quadratic in the codebook size.
    """
    tf.require_enumerable("ensemble_min_distance")
    if len(messages) == 0:
        raise ParameterError("ensemble_min_distance needs at least one message")
    n = 2**tf.params.l_k
    if n < 2:
        raise ParameterError("ensemble needs at least two keys")
    best = None
    for s in messages:
        cb = tf.codebook(s)
        for lo in range(0, n, block):
            d = pairwise_distances(cb[lo:lo + block], cb)
            rows = np.arange(lo, min(lo + block, n))
            # keep only k < k'
            d = np.where(np.arange(n)[None, :] > rows[:, None], d, np.iinfo(np.int64).max)
            flat = int(np.argmin(d))
            i, j = divmod(flat, n)
            val = int(d[i, j])
            if best is None or val < best[0]:
                best = (val, as_bits(s), rows[i], j)
            if best[0] == 0:
                break
        if best[0] == 0:
            break
    d, s, i, j = best
    l_k = tf.params.l_k
    return d, s, key_from_index(int(i), l_k), key_from_index(int(j), l_k)
