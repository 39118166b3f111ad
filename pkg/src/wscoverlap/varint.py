"""LEB128-style unsigned varints, vectorized with numpy.

Each value is written in 7-bit groups, least significant group first; the
high bit of a byte is set when more bytes follow.
"""

from __future__ import annotations

import numpy as np


class VarintError(ValueError):
    pass


CHUNK = 1 << 21


def encode(values) -> bytes:
    v = np.ascontiguousarray(values, dtype=np.uint64).reshape(-1)
    # chunked so temporaries stay small for very long streams
    return b"".join(_encode_chunk(v[i : i + CHUNK]) for i in range(0, v.size, CHUNK))


def _encode_chunk(v: np.ndarray) -> bytes:
    nbytes = encoded_sizes(v)
    ends = np.cumsum(nbytes, dtype=np.int64)
    starts = ends - nbytes
    out = np.zeros(int(ends[-1]), dtype=np.uint8)
    for k in range(int(nbytes.max())):
        sel = np.flatnonzero(nbytes > k)
        group = (v[sel] >> np.uint64(7 * k)) & np.uint64(0x7F)
        more = (nbytes[sel] > k + 1).astype(np.uint8) << np.uint8(7)
        out[starts[sel] + k] = group.astype(np.uint8) | more
    return out.tobytes()


def encoded_sizes(values) -> np.ndarray:
    v = np.ascontiguousarray(values, dtype=np.uint64)
    nbytes = np.ones(v.shape, dtype=np.uint8)
    for k in range(1, 10):
        nbytes += v >= np.uint64(1 << (7 * k))
    return nbytes


def decode(buf, expected: int | None = None) -> np.ndarray:
    b = np.frombuffer(buf, dtype=np.uint8)
    if b.size == 0:
        out = np.zeros(0, dtype=np.int64)
    else:
        if b[-1] & 0x80:
            raise VarintError("truncated varint stream")
        ends = np.flatnonzero(b < 0x80)
        starts = np.empty_like(ends)
        starts[0] = 0
        starts[1:] = ends[:-1] + 1
        if int((ends - starts).max()) >= 10:
            raise VarintError("varint longer than 10 bytes")
        lens = ends - starts + 1
        shift = (np.arange(b.size, dtype=np.int64) - np.repeat(starts, lens)) * 7
        parts = (b & 0x7F).astype(np.uint64) << shift.astype(np.uint64)
        out = np.bitwise_or.reduceat(parts, starts).astype(np.int64)
    if expected is not None and out.size != expected:
        raise VarintError(f"expected {expected} varints, found {out.size}")
    return out
