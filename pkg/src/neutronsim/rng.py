"""Seedable, splittable uniform streams.

Generator: xoshiro256** (Blackman & Vigna), 256-bit state, seeded through
splitmix64.  Every operation is explicit 64-bit integer arithmetic, so a
given ``(seed, stream_id)`` produces the same sequence on every platform.

A stream's identity is the pair ``(seed, stream_id)``.  ``fork`` derives
the child id from the parent's id and the child index only, never from
the parent's current position, so forking is order independent.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0


def splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step: returns ``(next_state, output)``."""
    x = (x + GOLDEN) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def mix64(x: int) -> int:
    return splitmix64(x & MASK64)[1]


def _derive_state(seed: int, stream_id: int) -> np.ndarray:
    x = mix64(seed) ^ mix64(mix64(stream_id) + 0x632BE59BD9B4E019)
    words = []
    while len(words) < 4:
        x, out = splitmix64(x)
        words.append(out)
    if not any(words):  # all-zero state is a fixed point of xoshiro
        words[0] = GOLDEN
    return np.array(words, dtype=np.uint64)


@njit(cache=True, nogil=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True, nogil=True)
def next_u64(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    result = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True, nogil=True)
def uniform_open(state):
    """Uniform draw in the open interval (0, 1); zero is resampled."""
    while True:
        r = (next_u64(state) >> np.uint64(11)) * _INV_2_53
        if r > 0.0:
            return r


@njit(cache=True, nogil=True)
def _fill_uniform(state, out):
    for i in range(out.shape[0]):
        out[i] = uniform_open(state)


class RngStream:
    """Single-owner uniform stream; do not share one instance across threads."""

    __slots__ = ("seed", "stream_id", "state")

    def __init__(self, seed: int, stream_id: int = 0):
        if not 0 <= seed <= MASK64 or not 0 <= stream_id <= MASK64:
            raise ValueError("seed and stream_id must fit in an unsigned 64-bit integer")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.state = _derive_state(self.seed, self.stream_id)

    def next_uniform(self) -> float:
        return uniform_open(self.state)

    def uniforms(self, n: int) -> np.ndarray:
        out = np.empty(int(n), dtype=np.float64)
        _fill_uniform(self.state, out)
        return out

    def fork(self, child_id: int) -> "RngStream":
        child = mix64(self.stream_id ^ mix64((int(child_id) + 1) & MASK64))
        return RngStream(self.seed, child)

    def snapshot(self) -> tuple[int, int, tuple[int, ...]]:
        return self.seed, self.stream_id, tuple(int(w) for w in self.state)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def next_uniform(stream: RngStream) -> float:
    return stream.next_uniform()


def fork(stream: RngStream, child_id: int) -> RngStream:
    return stream.fork(child_id)
