"""Small deterministic PRNG so runs replay identically on any platform.

The generator is xorshift64* (Marsaglia xorshift with the Vigna output
multiplier): 64-bit state, period 2**64 - 1, three shifts and one multiply
per draw. The seed is passed through one splitmix64 step before use so that
nearby seeds (0, 1, 2, ...) still produce unrelated streams.
"""

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _SPLITMIX_GAMMA) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class Xorshift64Star:
    """xorshift64* stream; state must never be zero, splitmix seeding avoids it."""

    __slots__ = ("state",)

    _MULTIPLIER = 0x2545F4914F6CDD1D

    def __init__(self, seed: int):
        self.state = _splitmix64(seed & _MASK64) or _SPLITMIX_GAMMA

    def next_u64(self) -> int:
        s = self.state
        s ^= s >> 12
        s = (s ^ (s << 25)) & _MASK64
        s ^= s >> 27
        self.state = s
        return (s * self._MULTIPLIER) & _MASK64

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) via next_u64() % n.

        The modulo bias is below n / 2**64, which is negligible for every
        range this package draws from (core counts, address spans).
        """
        if n < 1:
            raise ValueError(f"randrange needs n >= 1, got {n}")
        return self.next_u64() % n
