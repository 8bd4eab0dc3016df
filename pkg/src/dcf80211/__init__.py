"""DCF saturation throughput with channel errors and Rayleigh-fading capture.

Analytic backoff-chain model (two-way and four-way handshakes), exact
chain oracle, slot-synchronous simulator, and an experiment harness that
pairs the two.
"""

from .analytic import (
    ModelSolution,
    SolverError,
    bianchi_baseline,
    bianchi_s_max,
    solve_system,
    tau_four_way,
    tau_two_way,
    throughput,
)
from .capture import (
    CaptureMode,
    CaptureParams,
    CollisionDraw,
    capture_conditional,
    capture_total,
    draw_station_power,
    resolve_collision,
)
from .chain import stationary_chain_oracle
from .link import LinkModel, Modulation, UnsupportedModulationError, ber_rayleigh, fer
from .params import AccessMode, MacParams, SlotDurations, slot_durations
from .sim import SimConfig, SimResult, heterogeneous_fer_experiment, place_stations, run, step_slot

__all__ = [
    "AccessMode",
    "CaptureMode",
    "CaptureParams",
    "CollisionDraw",
    "LinkModel",
    "MacParams",
    "ModelSolution",
    "Modulation",
    "SimConfig",
    "SimResult",
    "SlotDurations",
    "SolverError",
    "UnsupportedModulationError",
    "ber_rayleigh",
    "bianchi_baseline",
    "bianchi_s_max",
    "capture_conditional",
    "capture_total",
    "draw_station_power",
    "fer",
    "heterogeneous_fer_experiment",
    "place_stations",
    "resolve_collision",
    "run",
    "slot_durations",
    "solve_system",
    "stationary_chain_oracle",
    "step_slot",
    "tau_four_way",
    "tau_two_way",
    "throughput",
]

__version__ = "0.1.0"
