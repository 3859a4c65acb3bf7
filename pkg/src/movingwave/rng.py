"""SplitMix64 random numbers.

The generator is fully specified by three constants so that any
implementation can reproduce trial data bit for bit::

    state  <- state + 0x9E3779B97F4A7C15            (mod 2**64)
    z      <- state
    z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2**64)
    z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2**64)
    output <- z ^ (z >> 31)

Uniform doubles use the top 53 bits: ``(output >> 11) * 2**-53``.
Normals use Box-Muller on consecutive uniform pairs ``(u1, u2)`` with
``sqrt(-2 log(1 - u1)) * cos(2 pi u2)``.
"""
import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1


def splitmix64(state):
    """Advance a scalar state; returns ``(new_state, output)``."""
    state = (state + GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return state, z ^ (z >> 31)


class SplitMix64:
    """Stateful generator; array draws are vectorised but bit-identical
    to repeated scalar calls."""

    def __init__(self, seed=0):
        self.state = int(seed) & MASK64

    def next_u64(self, size=None):
        if size is None:
            self.state, out = splitmix64(self.state)
            return out
        size = int(size)
        with np.errstate(over="ignore"):
            steps = np.arange(1, size + 1, dtype=np.uint64)
            z = np.uint64(self.state) + steps * np.uint64(GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + size * GOLDEN) & MASK64
        return z

    def uniform(self, size=None, low=0.0, high=1.0):
        if size is None:
            u = (self.next_u64() >> 11) * 2.0**-53
        else:
            u = (self.next_u64(size) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return low + (high - low) * u

    def normal(self, size=None):
        n = 1 if size is None else int(size)
        u = self.uniform(2 * n)
        u1, u2 = u[0::2], u[1::2]
        z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
        return float(z[0]) if size is None else z
