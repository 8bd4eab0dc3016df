"""Slot-synchronous simulator of N saturated DCF stations.

The simulator advances on the backoff-slot timescale: one step is either
an idle slot or a whole busy period (success, collision, or errored data
frame), whose air time is taken from the per-mode slot durations.
Counters of non-transmitting stations freeze during busy periods.  On a
collision the capture resolver decides whether one frame survives; a
surviving frame is still exposed to the per-station frame error rate.

step_slot is the readable reference implementation of one step; run()
executes replications through the compiled kernel, which consumes the
identical random stream (asserted equivalent in the tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import _kernel
from .capture import CaptureParams, CollisionDraw, mean_power, resolve_collision
from .link import LinkModel, fer
from .params import AccessMode, MacParams, SlotDurations, slot_durations
from .rng import SplitMix64

__all__ = [
    "StationState",
    "SimConfig",
    "RepStats",
    "SimResult",
    "SlotOutcome",
    "OutcomeKind",
    "place_stations",
    "step_slot",
    "run",
    "heterogeneous_fer_experiment",
]

WARMUP_FRACTION = 0.05


@dataclass
class StationState:
    """One contending station: backoff stage/counter plus its link quality."""

    id: int
    position_r: float
    stage: int = 0
    counter: int = 0
    fer: float = 0.0


class OutcomeKind(Enum):
    IDLE = "idle"
    SUCCESS = "success"
    COLLISION = "collision"
    CHANNEL_ERROR = "channel_error"


@dataclass(frozen=True)
class SlotOutcome:
    kind: OutcomeKind
    duration_us: float
    station: Optional[int] = None
    captured: bool = False
    n_transmitters: int = 0


@dataclass(frozen=True)
class SimConfig:
    """Full description of one simulation campaign.

    Per-station frame error rates resolve in this order: fer_per_station
    if given, else fer_override, else the FER computed from link.  The
    (config, seed) pair fully determines the result.
    """

    n_stations: int
    mac: MacParams
    mode: AccessMode
    cp: CaptureParams
    link: Optional[LinkModel] = None
    payload_bytes: int = 1024
    fer_override: Optional[float] = None
    fer_per_station: Optional[tuple[float, ...]] = None
    replications: int = 100
    slots_per_rep: int = 2_000_000
    seed: int = 1

    def __post_init__(self) -> None:
        if self.n_stations < 1:
            raise ValueError("n_stations must be >= 1")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.slots_per_rep < 20:
            raise ValueError("slots_per_rep must be >= 20")
        if self.fer_per_station is not None and len(self.fer_per_station) != self.n_stations:
            raise ValueError("fer_per_station must list one FER per station")

    def station_fers(self) -> np.ndarray:
        if self.fer_per_station is not None:
            fers = np.asarray(self.fer_per_station, dtype=np.float64)
        elif self.fer_override is not None:
            fers = np.full(self.n_stations, float(self.fer_override))
        elif self.link is not None:
            fers = np.full(self.n_stations, fer(self.link))
        else:
            raise ValueError("no frame error rate: give link, fer_override or fer_per_station")
        if np.any((fers < 0.0) | (fers > 1.0)):
            raise ValueError("frame error rates must lie in [0, 1]")
        return fers

    def durations(self) -> SlotDurations:
        payload = self.link.payload_bytes if self.link is not None else self.payload_bytes
        return slot_durations(self.mac, self.mode, payload)


@dataclass(frozen=True)
class RepStats:
    """Counters of the measured (post-warm-up) part of one replication.

    clock_us is reconstructed from the counters, so the time-conservation
    identity idle*sigma + (successes+captures)*t_s + collisions*t_c +
    channel_errors*t_e == clock_us holds exactly.
    """

    throughput_mbps: float
    clock_us: float
    delivered_bits: float
    idle_slots: int
    successes: int
    captures: int
    collisions: int
    channel_errors: int

    @property
    def slots(self) -> int:
        return (self.idle_slots + self.successes + self.captures
                + self.collisions + self.channel_errors)


@dataclass(frozen=True)
class SimResult:
    throughput_mbps: float
    ci95: float
    per_rep: tuple[RepStats, ...]
    successes: int
    captures: int
    collisions: int
    channel_errors: int
    idle_slots: int


def place_stations(n: int, cp: CaptureParams, rng: SplitMix64) -> list[float]:
    """Distances from the AP of n stations dropped uniformly on the disk.

    Area-uniform placement needs r = R*sqrt(u); only the radius matters
    because path loss is isotropic.  Radii are floored at r_min_m to keep
    the path-loss law bounded.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return [max(cp.radius_m * math.sqrt(rng.next_float()), cp.r_min_m) for _ in range(n)]


def _init_stations(config: SimConfig, rng: SplitMix64) -> list[StationState]:
    radii = place_stations(config.n_stations, config.cp, rng)
    fers = config.station_fers()
    stations = []
    for sid, r in enumerate(radii):
        counter = rng.next_below(config.mac.window(0))
        stations.append(StationState(id=sid, position_r=r, stage=0,
                                     counter=counter, fer=float(fers[sid])))
    return stations


def step_slot(
    stations: Sequence[StationState],
    mac: MacParams,
    sd: SlotDurations,
    cp: CaptureParams,
    rng: SplitMix64,
) -> SlotOutcome:
    """Advance the chain by one slot, mutating station states.

    Draw order (the contract the compiled kernel reproduces): collision
    powers by ascending station id, then one uniform for the surviving
    frame's channel error, then backoff redraws by ascending id.
    """
    transmitters = [s for s in stations if s.counter == 0]
    if not transmitters:
        for s in stations:
            s.counter -= 1
        return SlotOutcome(OutcomeKind.IDLE, sd.sigma)

    captured = False
    if len(transmitters) == 1:
        winner: Optional[int] = transmitters[0].id
    else:
        powers = [
            -mean_power(s.position_r, cp) * math.log1p(-rng.next_float())
            for s in transmitters
        ]
        draw = CollisionDraw(powers=powers, station_ids=[s.id for s in transmitters])
        winner = resolve_collision(draw, cp)
        captured = winner is not None

    delivered = False
    if winner is not None:
        by_id = {s.id: s for s in transmitters}
        if rng.next_float() < by_id[winner].fer:
            outcome = SlotOutcome(OutcomeKind.CHANNEL_ERROR, sd.t_e, station=winner,
                                  captured=captured, n_transmitters=len(transmitters))
        else:
            delivered = True
            outcome = SlotOutcome(OutcomeKind.SUCCESS, sd.t_s, station=winner,
                                  captured=captured, n_transmitters=len(transmitters))
    else:
        outcome = SlotOutcome(OutcomeKind.COLLISION, sd.t_c,
                              n_transmitters=len(transmitters))

    for s in transmitters:
        if delivered and s.id == winner:
            s.stage = 0
        else:
            s.stage = min(s.stage + 1, mac.max_stage)
        s.counter = rng.next_below(mac.window(s.stage))
    return outcome


def _run_replication(config: SimConfig, rep: int) -> RepStats:
    rng = SplitMix64.for_replication(config.seed, rep)
    stations = _init_stations(config, rng)
    sd = config.durations()
    stages = np.array([s.stage for s in stations], dtype=np.int64)
    counters = np.array([s.counter for s in stations], dtype=np.int64)
    powers = np.array([mean_power(s.position_r, config.cp) for s in stations])
    fers = np.array([s.fer for s in stations])
    threshold = config.cp.threshold

    warmup = int(WARMUP_FRACTION * config.slots_per_rep)
    state = np.uint64(rng.state)
    if warmup:
        out = _kernel.run_slots(state, stages, counters, powers, fers,
                                config.mac.w_min, config.mac.max_stage, threshold,
                                sd.t_s, sd.t_c, sd.t_e, sd.sigma,
                                warmup)
        state = np.uint64(out[0])
    out = _kernel.run_slots(state, stages, counters, powers, fers,
                            config.mac.w_min, config.mac.max_stage, threshold,
                            sd.t_s, sd.t_c, sd.t_e, sd.sigma,
                            config.slots_per_rep - warmup)
    _, idle, successes, captures, collisions, channel_errors = out
    clock = (idle * sd.sigma + (successes + captures) * sd.t_s
             + collisions * sd.t_c + channel_errors * sd.t_e)
    delivered = (successes + captures) * sd.e_pl_bits
    return RepStats(
        throughput_mbps=delivered / clock,
        clock_us=clock,
        delivered_bits=delivered,
        idle_slots=int(idle),
        successes=int(successes),
        captures=int(captures),
        collisions=int(collisions),
        channel_errors=int(channel_errors),
    )


def run(config: SimConfig) -> SimResult:
    """Simulate all replications and aggregate (fixed replication order)."""
    reps = [_run_replication(config, rep) for rep in range(config.replications)]
    values = np.array([r.throughput_mbps for r in reps])
    mean = float(values.mean())
    if len(values) > 1:
        ci95 = float(1.96 * values.std(ddof=1) / math.sqrt(len(values)))
    else:
        ci95 = 0.0
    return SimResult(
        throughput_mbps=mean,
        ci95=ci95,
        per_rep=tuple(reps),
        successes=sum(r.successes for r in reps),
        captures=sum(r.captures for r in reps),
        collisions=sum(r.collisions for r in reps),
        channel_errors=sum(r.channel_errors for r in reps),
        idle_slots=sum(r.idle_slots for r in reps),
    )


def heterogeneous_fer_experiment(
    groups: Sequence[tuple[int, float]],
    mac: MacParams,
    mode: AccessMode,
    cp: CaptureParams,
    payload_bytes: int = 1024,
    replications: int = 100,
    slots_per_rep: int = 200_000,
    seed: int = 1,
) -> SimResult:
    """Simulate stations split into groups of identical frame error rate.

    `groups` lists (station count, fer) pairs; counts must sum to the
    total station count.  Stations take group FERs in listed order, so a
    degenerate grouping with equal FERs matches the homogeneous run of
    the same seed exactly.
    """
    if any(count < 1 for count, _ in groups):
        raise ValueError("each group needs at least one station")
    fers: list[float] = []
    for count, group_fer in groups:
        fers.extend([float(group_fer)] * count)
    config = SimConfig(
        n_stations=len(fers), mac=mac, mode=mode, cp=cp,
        payload_bytes=payload_bytes, fer_per_station=tuple(fers),
        replications=replications, slots_per_rep=slots_per_rep, seed=seed,
    )
    return run(config)
