"""Capture effect: analytic probabilities and the per-collision resolver.

When several stations transmit in the same slot, the access point can
still decode the frame whose signal-to-interference ratio exceeds
z0 * g(S_f), where z0 is the capture ratio and g(S_f) = 2/(3*S_f) is the
inverse processing gain of the DSSS correlation receiver.  The closed
forms here assume power-controlled stations (equal mean received power,
i.i.d. exponential instantaneous power); the resolver works on any set
of drawn powers and is what the simulator calls on every collision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from scipy.special import gammaln

__all__ = [
    "CaptureMode",
    "CaptureParams",
    "CollisionDraw",
    "capture_conditional",
    "capture_total",
    "capture_candidates",
    "resolve_collision",
    "mean_power",
    "draw_station_power",
]

# Exact binomial sums are kept up to this station count; beyond it the
# binomial coefficients overflow doubles and the sum moves to log space.
_LOG_DOMAIN_N = 50


class CaptureMode(Enum):
    # Equal mean received power at the AP (uplink power control): the
    # hypothesis behind the closed-form capture probability.
    POWER_CONTROLLED = "power_controlled"
    # Mean power set by each station's distance through the path-loss law.
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class CaptureParams:
    """Capture threshold, receiver gain and placement geometry.

    z0 is linear (use :meth:`from_db` for dB input).  path_const and
    tx_power cancel in every power ratio, so their defaults of 1 only
    matter if absolute powers are inspected.
    """

    z0: float
    spreading_factor: int = 11
    mode: CaptureMode = CaptureMode.POWER_CONTROLLED
    radius_m: float = 50.0
    path_loss_exp: float = 3.5
    path_const: float = 1.0
    tx_power: float = 1.0
    r_min_m: float = 1.0

    def __post_init__(self) -> None:
        if not self.z0 > 0:
            raise ValueError("z0 must be positive")
        if self.spreading_factor < 1:
            raise ValueError("spreading_factor must be >= 1")
        if not self.radius_m > 0:
            raise ValueError("radius_m must be positive")
        if self.path_loss_exp < 2:
            raise ValueError("path_loss_exp must be >= 2")

    @property
    def g(self) -> float:
        """Inverse processing gain of the correlation receiver, 2/(3*S_f)."""
        return 2.0 / (3.0 * self.spreading_factor)

    @property
    def threshold(self) -> float:
        """SIR a frame must exceed to be captured: z0 * g(S_f)."""
        return self.z0 * self.g

    @classmethod
    def from_db(cls, z0_db: float, **kwargs) -> "CaptureParams":
        return cls(z0=10.0 ** (z0_db / 10.0), **kwargs)

    @classmethod
    def disabled(cls) -> "CaptureParams":
        """No-capture sentinel (infinite threshold)."""
        return cls(z0=math.inf)


@dataclass(frozen=True)
class CollisionDraw:
    """Instantaneous received powers of the stations colliding in one slot."""

    powers: Sequence[float]
    station_ids: Sequence[int] = field(default=())

    def __post_init__(self) -> None:
        ids = self.station_ids if self.station_ids else tuple(range(len(self.powers)))
        object.__setattr__(self, "powers", tuple(float(p) for p in self.powers))
        object.__setattr__(self, "station_ids", tuple(ids))
        if len(self.station_ids) != len(self.powers):
            raise ValueError("station_ids and powers must have equal length")
        if any(p <= 0 for p in self.powers):
            raise ValueError("all powers must be positive")


def capture_conditional(i: int, cp: CaptureParams) -> float:
    """Probability that a frame survives `i` interferers: (1 + z0*g)^-i."""
    if i < 0:
        raise ValueError("interferer count must be >= 0")
    if i == 0:
        return 1.0
    if math.isinf(cp.threshold):
        return 0.0
    return (1.0 + cp.threshold) ** (-i)


def capture_total(n: int, tau: float, cp: CaptureParams) -> float:
    """Per-slot frame capture probability with n stations transmitting w.p. tau.

    Sums, over the number i of interferers, the probability that exactly
    i+1 of the n stations transmit together times the conditional capture
    probability.  For n > 50 the binomial terms are evaluated in log space
    to avoid overflow.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    if n == 1 or tau == 0.0 or math.isinf(cp.threshold):
        return 0.0
    one_plus = 1.0 + cp.threshold
    if tau == 1.0:
        # Only the i = n-1 term survives ((1-tau)^0 = 1 by convention).
        return one_plus ** (-(n - 1))
    if n <= _LOG_DOMAIN_N:
        total = 0.0
        for i in range(1, n):
            total += (
                math.comb(n, i + 1)
                * tau ** (i + 1)
                * (1.0 - tau) ** (n - i - 1)
                * one_plus ** (-i)
            )
        return total
    log_tau = math.log(tau)
    log_1mt = math.log1p(-tau)
    log_1pz = math.log(one_plus)
    total = 0.0
    for i in range(1, n):
        log_term = (
            gammaln(n + 1)
            - gammaln(i + 2)
            - gammaln(n - i)
            + (i + 1) * log_tau
            + (n - i - 1) * log_1mt
            - i * log_1pz
        )
        total += math.exp(log_term)
    return total


def capture_candidates(draw: CollisionDraw, cp: CaptureParams) -> list[int]:
    """Station ids whose SIR exceeds the capture threshold in this draw."""
    if len(draw.powers) < 2:
        raise ValueError("a collision needs at least 2 transmitters")
    total = sum(draw.powers)
    thr = cp.threshold
    out = []
    for sid, p in zip(draw.station_ids, draw.powers):
        interference = total - p
        if p > thr * interference:
            out.append(sid)
    return out


def resolve_collision(draw: CollisionDraw, cp: CaptureParams) -> Optional[int]:
    """Station id that captures the channel, or None for a pure collision.

    Each colliding station's SIR is its own power over the sum of the
    others'.  A single station above threshold wins outright; if the
    threshold is below 1, several stations can clear it simultaneously,
    in which case the strongest signal (max SIR) is the one the receiver
    locks onto.  Deterministic given the draw.
    """
    candidates = capture_candidates(draw, cp)
    if not candidates:
        return None
    if len(candidates) == 1:
        return candidates[0]
    by_id = dict(zip(draw.station_ids, draw.powers))
    # Max SIR equals max power among candidates (same interference total).
    return max(candidates, key=lambda sid: by_id[sid])


def mean_power(r_m: float, cp: CaptureParams) -> float:
    """Local mean received power at the AP for a station at distance r_m.

    Power-controlled mode ignores the distance.  Distances below r_min_m
    are clamped there so the path-loss law stays bounded.
    """
    if cp.mode is CaptureMode.POWER_CONTROLLED:
        return cp.path_const * cp.tx_power
    if r_m < 0:
        raise ValueError("distance must be >= 0")
    r_eff = max(r_m, cp.r_min_m)
    return cp.path_const * r_eff ** (-cp.path_loss_exp) * cp.tx_power


def draw_station_power(r_m: float, cp: CaptureParams, u: float) -> float:
    """One Rayleigh-faded instantaneous power sample: Exp with mean p_o(r).

    `u` is a unit uniform from the caller's stream; inversion keeps the
    draw reproducible across implementations.
    """
    if not 0.0 <= u < 1.0:
        raise ValueError("u must be in [0, 1)")
    return -mean_power(r_m, cp) * math.log1p(-u)
