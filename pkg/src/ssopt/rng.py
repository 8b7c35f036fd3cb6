"""Portable pseudo-random stream: SplitMix64 seeding a xoshiro256** generator.

The exact bit sequence is part of the contract (search traces must be
reproducible across backends), so nothing here may delegate to ``random``
or ``numpy.random``.
"""

MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / (1 << 53)


def splitmix64(state):
    """Advance a SplitMix64 state; return ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** seeded from a 64-bit integer via SplitMix64."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed):
        st = int(seed) & MASK64
        st, self.s0 = splitmix64(st)
        st, self.s1 = splitmix64(st)
        st, self.s2 = splitmix64(st)
        st, self.s3 = splitmix64(st)

    def next_u64(self):
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def uniform(self):
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def below(self, n):
        """Integer in [0, n): ``floor(u53 * n / 2**53)`` in exact integer arithmetic."""
        return ((self.next_u64() >> 11) * n) >> 53

    def state(self):
        return (self.s0, self.s1, self.s2, self.s3)


def derive_seed(base_seed, row, replicate):
    """Per-run seed for batch experiments: ``base_seed XOR splitmix64(row << 32 | replicate)``."""
    _, mixed = splitmix64(((int(row) & 0xFFFFFFFF) << 32) | (int(replicate) & 0xFFFFFFFF))
    return (int(base_seed) ^ mixed) & MASK64
