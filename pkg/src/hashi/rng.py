"""Small deterministic PRNG used by the instance generator.

SplitMix64: one 64-bit additive state step plus an output mix. Used instead
of ``random.Random`` so that generated instances are bit-identical across
platforms and Python versions. Bounded integer draws use rejection
sampling and are exactly uniform; probability draws always consume exactly
one variate so streams stay aligned regardless of the probability value.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """Scramble a 64-bit value (the SplitMix64 output permutation)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *indices: int) -> int:
    """Fold integer indices into ``base``, yielding an independent stream seed."""
    s = mix64(base & _MASK64)
    for x in indices:
        s = mix64(((s + _GOLDEN) & _MASK64) ^ mix64(x & _MASK64))
    return s


class SplitMix64:
    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        # Reject the tail that would introduce modulo bias.
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def chance(self, p: float) -> bool:
        """True with probability ``p``. Always consumes one variate."""
        v = self.next_u64()
        if p <= 0.0:
            return False
        if p >= 1.0:
            return True
        return v < round(p * (_MASK64 + 1))
