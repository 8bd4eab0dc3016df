"""Deterministic random streams shared by the reference and fast simulators.

SplitMix64 generates the raw 64-bit sequence; every simulation replication
owns its own stream whose initial state is derived from (seed, replication
index) through the same finaliser, so streams are mutually independent and
a (config, seed) pair always reproduces the identical run bit for bit.
The compiled simulation kernel re-implements the identical arithmetic.
"""

from __future__ import annotations

__all__ = ["SplitMix64", "mix64", "stream_state"]

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


def mix64(z: int) -> int:
    """SplitMix64 finaliser (Steele/Lea/Flood variant)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_state(seed: int, replication: int) -> int:
    """Initial generator state for one replication's independent stream."""
    return mix64(mix64(seed) + replication * GOLDEN)


class SplitMix64:
    """Sequential SplitMix64 stream over [0, 1) doubles.

    next_float() returns (next_u64 >> 11) * 2^-53, i.e. 53 uniform bits,
    always strictly below 1 so log1p(-u) style inversions are safe.
    """

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & _MASK

    @classmethod
    def for_replication(cls, seed: int, replication: int) -> "SplitMix64":
        return cls(stream_state(seed, replication))

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & _MASK
        return mix64(self.state)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) via truncation of a 53-bit uniform."""
        return int(self.next_float() * n)
