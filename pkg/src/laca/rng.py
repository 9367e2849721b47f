"""Portable seeded randomness for reproducible sampling.

Sampling must give identical results for the same seed in any
reimplementation, so the generator is pinned here rather than borrowed
from a runtime library whose stream may change between versions.

Algorithm (all arithmetic modulo 2**64):

* Seeding: the 64-bit seed is expanded with SplitMix64. Each step adds the
  constant 0x9E3779B97F4A7C15 to the state, then mixes the state with
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31``. Four consecutive outputs become
  the xoshiro256** state (a zero state is unreachable this way).
* Stream: xoshiro256** emits ``rotl(s1 * 5, 7) * 9`` and updates the state
  with ``t = s1 << 17; s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t;
  s3 = rotl(s3, 45)``.
* Bounded draws use rejection sampling (discard values above the largest
  multiple of the bound) so every residue is equally likely.
* Sampling without replacement is a partial Fisher-Yates shuffle: for
  ``i in 0..n-1`` swap position ``i`` with position ``i + below(size - i)``
  and keep the first ``n`` positions, in draw order.

Reports record the generator as :data:`GENERATOR_NAME` together with the
seed, which is enough to replay any draw.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1

GENERATOR_NAME = "xoshiro256** seeded by splitmix64"

T = TypeVar("T")


def _splitmix64(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state once, returning (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** stream seeded from a 64-bit integer via SplitMix64."""

    def __init__(self, seed: int):
        state = seed & _MASK64
        s = []
        for _ in range(4):
            state, out = _splitmix64(state)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) without modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound


def sample_without_replacement(items: Sequence[T], n: int, seed: int) -> list[T]:
    """Draw ``n`` distinct items, uniformly, in draw order.

    Partial Fisher-Yates over the stored order of ``items``; the result is
    a pure function of (items order, n, seed).
    """
    size = len(items)
    if not 0 < n <= size:
        raise ValueError(f"cannot draw {n} items from {size}")
    rng = Xoshiro256StarStar(seed)
    positions = list(range(size))
    for i in range(n):
        j = i + rng.below(size - i)
        positions[i], positions[j] = positions[j], positions[i]
    return [items[positions[i]] for i in range(n)]
