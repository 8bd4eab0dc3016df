"""MAC/PHY timing constants and per-event channel-busy durations.

All durations are microseconds; rates are bits per microsecond (= Mbps),
so byte counts convert as bytes*8/rate.  Defaults are the classic 1 Mbps
DSSS parameter set used throughout the reference experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

__all__ = ["AccessMode", "MacParams", "SlotDurations", "slot_durations"]


class AccessMode(Enum):
    TWO_WAY = "two_way"    # DATA + ACK
    FOUR_WAY = "four_way"  # RTS + CTS + DATA + ACK

    @classmethod
    def parse(cls, text: str) -> "AccessMode":
        key = text.strip().lower().replace("-", "_")
        aliases = {
            "2way": cls.TWO_WAY, "2_way": cls.TWO_WAY, "two_way": cls.TWO_WAY,
            "basic": cls.TWO_WAY,
            "4way": cls.FOUR_WAY, "4_way": cls.FOUR_WAY, "four_way": cls.FOUR_WAY,
            "rts_cts": cls.FOUR_WAY, "rtscts": cls.FOUR_WAY,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown access mode: {text!r}") from None


@dataclass(frozen=True)
class MacParams:
    """Contention window settings plus the timing/size constants.

    w_min is the stage-0 contention window; stage i draws its counter
    uniformly from [0, 2^i * w_min - 1] up to max_stage, after which the
    window stops doubling.
    """

    w_min: int = 32
    max_stage: int = 5
    slot_us: float = 20.0
    sifs_us: float = 10.0
    difs_us: float = 50.0
    eifs_us: float = 300.0
    prop_delay_us: float = 1.0
    ack_timeout_us: float = 300.0
    cts_timeout_us: float = 300.0
    ack_bytes: int = 14
    rts_bytes: int = 20
    cts_bytes: int = 14
    mac_header_bytes: int = 24
    phy_header_bytes: int = 16
    data_rate_mbps: float = 1.0
    ctrl_rate_mbps: float = 1.0

    def __post_init__(self) -> None:
        if self.w_min < 1:
            raise ValueError("w_min must be >= 1")
        if self.max_stage < 0:
            raise ValueError("max_stage must be >= 0")
        for name in ("slot_us", "sifs_us", "difs_us", "prop_delay_us",
                     "ack_timeout_us", "cts_timeout_us", "data_rate_mbps",
                     "ctrl_rate_mbps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def window(self, stage: int) -> int:
        """Contention window size at backoff stage `stage` (capped at max_stage)."""
        if stage < 0:
            raise ValueError("stage must be >= 0")
        return (1 << min(stage, self.max_stage)) * self.w_min

    @property
    def cw_max(self) -> int:
        return self.window(self.max_stage)

    # Frame airtimes.  Control frames and the PHY preamble go out at the
    # basic (control) rate; the MAC header travels with the payload.
    def _ctrl_us(self, nbytes: int) -> float:
        return nbytes * 8.0 / self.ctrl_rate_mbps

    def header_us(self) -> float:
        return self._ctrl_us(self.phy_header_bytes) + self.mac_header_bytes * 8.0 / self.data_rate_mbps

    def payload_us(self, payload_bytes: int) -> float:
        return payload_bytes * 8.0 / self.data_rate_mbps

    @property
    def ack_us(self) -> float:
        return self._ctrl_us(self.ack_bytes)

    @property
    def rts_us(self) -> float:
        return self._ctrl_us(self.rts_bytes)

    @property
    def cts_us(self) -> float:
        return self._ctrl_us(self.cts_bytes)


@dataclass(frozen=True)
class SlotDurations:
    """Channel occupancy of each slot outcome, microseconds.

    t_s: successful exchange; t_c: collision; t_e: data frame hit by a
    channel error; sigma: empty slot.  e_pl_bits is the payload delivered
    by one success.
    """

    t_s: float
    t_c: float
    t_e: float
    sigma: float
    e_pl_bits: float

    def __post_init__(self) -> None:
        for name in ("t_s", "t_c", "t_e", "sigma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def slot_durations(mac: MacParams, mode: AccessMode, payload_bytes: int) -> SlotDurations:
    """Busy-period durations for the given handshake and payload size.

    Four-way: a collision burns only the RTS plus the CTS timeout, an
    error burns the whole exchange up to the ACK timeout, and a success
    runs RTS/CTS/DATA/ACK with their interframe spaces and propagation
    delays.  Two-way: collisions and channel errors are indistinguishable
    on air (data frame followed by a silent ACK timeout).
    """
    if payload_bytes < 0:
        raise ValueError("payload_bytes must be >= 0")
    h = mac.header_us()
    pl = mac.payload_us(payload_bytes)
    d = mac.prop_delay_us
    if mode is AccessMode.FOUR_WAY:
        t_c = mac.rts_us + mac.cts_timeout_us
        t_e = (mac.rts_us + mac.sifs_us + d + mac.cts_us + mac.sifs_us + d
               + h + pl + mac.ack_timeout_us)
        t_s = (mac.rts_us + mac.sifs_us + d + mac.cts_us + mac.sifs_us + d
               + h + pl + mac.sifs_us + d + mac.ack_us + mac.difs_us + d)
        if not t_c < t_s:
            raise ValueError("four-way collision must be cheaper than a success")
    else:
        t_c = h + pl + mac.ack_timeout_us
        t_e = h + pl + mac.ack_timeout_us
        t_s = h + pl + mac.sifs_us + d + mac.ack_us + mac.difs_us + d
    return SlotDurations(t_s=t_s, t_c=t_c, t_e=t_e, sigma=mac.slot_us,
                         e_pl_bits=payload_bytes * 8.0)
