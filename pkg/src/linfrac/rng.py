"""Deterministic counter-based randomness.

Every randomized routine in the package draws from SplitMix64 seeded with a
single 64-bit value, so identical seeds reproduce identical runs.  The
generator is the standard SplitMix64 step: state advances by the constant
0x9E3779B97F4A7C15 and the output is a bit-mixed copy of the state.  Child
streams are derived by hashing a label into the parent seed, which keeps
independent sampling sites decoupled under one top-level seed.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Counter-based 64-bit generator; state is just the counter."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        return _mix(self.state)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (inclusive); hi - lo + 1 need not divide 2^64 evenly, bias is negligible for our ranges."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.next_u64() % (hi - lo + 1)

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]


def derive(seed: int, label: str) -> int:
    """Child seed for an independent stream identified by a text label."""
    h = seed & _MASK
    for ch in label.encode():
        h = _mix((h + ch) & _MASK)
    return h
