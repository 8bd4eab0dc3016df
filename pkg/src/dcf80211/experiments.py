"""Sweep runner, canned reproduction targets, CSV output and self-validation.

A sweep pairs the analytic solution (always) with simulation (optional)
over the cartesian product of its axes, emitting rows in a fixed order so
identical (spec, seed) inputs give byte-identical CSV files.  reproduce()
drives the sweeps declared under configs/, one directory of CSVs per
target; validate() runs the cross-checks that gate a healthy build
(quadrature vs closed form, chain oracle vs closed form, Monte-Carlo
capture consistency, ideal-channel reduction, simulator conservation).
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from .analytic import (
    SolverError,
    bianchi_baseline,
    bianchi_s_max,
    solve_system,
    tau_four_way,
    tau_four_way_transcribed,
    tau_two_way,
)
from .capture import CaptureMode, CaptureParams, capture_conditional, capture_total
from .chain import stationary_chain_oracle
from .link import LinkModel, Modulation, ber_rayleigh, fer
from .params import AccessMode, MacParams
from .rng import stream_state
from .sim import SimConfig, heterogeneous_fer_experiment, run

__all__ = [
    "ExperimentSpec",
    "Table2Spec",
    "ResultRow",
    "CSV_COLUMNS",
    "run_experiment",
    "write_rows",
    "load_config",
    "reproduce",
    "validate",
    "REPRODUCE_TARGETS",
]

MAX_SWEEP_POINTS = 10_000
_WORKERS_ENV = "DCF80211_WORKERS"
CSV_COLUMNS = [
    "mode", "n", "snr_db", "z0_db", "payload_bytes",
    "p_e", "tau", "p_col", "p_cap", "p_eq",
    "s_theory_mbps", "s_sim_mbps", "ci95",
    "s_bianchi_mbps", "s_max_mbps", "flag",
]
REPRODUCE_TARGETS = (
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "table2",
)


def _workers() -> int:
    env = os.environ.get(_WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, min(4, os.cpu_count() or 1))


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: fixed parameters plus up to four axes.

    Axes are non-empty tuples; a scalar setting is a one-point axis, so an
    "empty" sweep still yields a single row.  The cartesian product is
    capped at 10^4 points.
    """

    name: str
    mode: AccessMode
    n: tuple[int, ...] = (10,)
    snr_db: tuple[float, ...] = (math.inf,)
    z0_db: tuple[float, ...] = (math.inf,)
    payload_bytes: tuple[int, ...] = (1024,)
    mac: MacParams = field(default_factory=MacParams)
    capture_mode: CaptureMode = CaptureMode.POWER_CONTROLLED
    modulation: Modulation = Modulation.DBPSK
    run_sim: bool = False
    replications: int = 20
    slots_per_rep: int = 200_000
    seed: int = 1

    def __post_init__(self) -> None:
        for axis in ("n", "snr_db", "z0_db", "payload_bytes"):
            if not getattr(self, axis):
                raise ValueError(f"axis {axis} must hold at least one value")
        if self.point_count() > MAX_SWEEP_POINTS:
            raise ValueError(f"sweep too large: {self.point_count()} points")

    def point_count(self) -> int:
        return len(self.n) * len(self.snr_db) * len(self.z0_db) * len(self.payload_bytes)

    def points(self):
        """Deterministic sweep order: n, then snr, then z0, then payload."""
        return itertools.product(self.n, self.snr_db, self.z0_db, self.payload_bytes)


@dataclass(frozen=True)
class Table2Spec:
    """Heterogeneous-FER reference experiment: groups of equal-FER stations."""

    name: str
    mode: AccessMode
    configurations: tuple[tuple[float, ...], ...]
    reference_mbps: tuple[float, ...]
    stations_per_group: int = 3
    payload_bytes: int = 1024
    mac: MacParams = field(default_factory=MacParams)
    replications: int = 100
    slots_per_rep: int = 200_000
    seed: int = 20250810


@dataclass
class ResultRow:
    mode: str
    n: int
    snr_db: float
    z0_db: float
    payload_bytes: int
    p_e: float
    tau: float
    p_col: float
    p_cap: float
    p_eq: float
    s_theory_mbps: float
    s_sim_mbps: Optional[float]
    ci95: Optional[float]
    s_bianchi_mbps: float
    s_max_mbps: float
    flag: str = ""


def p_e_of(snr_db: float, payload_bytes: int,
           modulation: Modulation = Modulation.DBPSK) -> float:
    """Frame error rate for a sweep point; the inf sentinel means ideal."""
    if math.isinf(snr_db):
        return 0.0
    link = LinkModel.from_db(snr_db, modulation=modulation, payload_bytes=payload_bytes)
    return fer(link)


def capture_params_of(z0_db: float, capture_mode: CaptureMode) -> CaptureParams:
    """Capture settings for a sweep point; the inf sentinel disables capture."""
    if math.isinf(z0_db):
        return CaptureParams(z0=math.inf, mode=capture_mode)
    return CaptureParams.from_db(z0_db, mode=capture_mode)


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """Analytic row per sweep point, with simulation attached when requested.

    Simulations for different points run on a worker pool (size from
    DCF80211_WORKERS); results are gathered by point index so row order
    and content stay deterministic.  A solver failure flags its row and
    the sweep continues.
    """
    points = list(spec.points())
    rows: list[ResultRow] = []
    for n, snr_db, z0_db, payload in points:
        p_e = p_e_of(snr_db, payload, spec.modulation)
        cp = capture_params_of(z0_db, spec.capture_mode)
        flag = ""
        try:
            sol = solve_system(n, spec.mac, spec.mode, p_e, cp, payload)
            tau, p_col, p_cap, p_eq = sol.tau, sol.p_col, sol.p_cap, sol.p_eq
            s_theory = sol.s_mbps
        except SolverError:
            flag = "solver_error"
            tau = p_col = p_cap = p_eq = s_theory = math.nan
        rows.append(ResultRow(
            mode=spec.mode.value, n=n, snr_db=snr_db, z0_db=z0_db,
            payload_bytes=payload, p_e=p_e, tau=tau, p_col=p_col,
            p_cap=p_cap, p_eq=p_eq, s_theory_mbps=s_theory,
            s_sim_mbps=None, ci95=None,
            s_bianchi_mbps=bianchi_baseline(n, spec.mac, spec.mode, payload)[2],
            s_max_mbps=bianchi_s_max(spec.mac, spec.mode, payload),
            flag=flag,
        ))

    if spec.run_sim:
        def simulate(item):
            index, (n, snr_db, z0_db, payload) = item
            config = SimConfig(
                n_stations=n, mac=spec.mac, mode=spec.mode,
                cp=capture_params_of(z0_db, spec.capture_mode),
                payload_bytes=payload,
                fer_override=p_e_of(snr_db, payload, spec.modulation),
                replications=spec.replications,
                slots_per_rep=spec.slots_per_rep,
                seed=stream_state(spec.seed, index),
            )
            return index, run(config)

        with ThreadPoolExecutor(max_workers=_workers()) as pool:
            for index, result in pool.map(simulate, enumerate(points)):
                rows[index].s_sim_mbps = result.throughput_mbps
                rows[index].ci95 = result.ci95
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.9g" % value
    return str(value)


def write_rows(path: Path, rows: Sequence[ResultRow]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, column)) for column in CSV_COLUMNS])


def run_table2(spec: Table2Spec) -> list[dict]:
    """Simulate every FER configuration; one dict per table row."""
    out = []
    for index, fers in enumerate(spec.configurations):
        groups = [(spec.stations_per_group, f) for f in fers]
        result = heterogeneous_fer_experiment(
            groups, spec.mac, spec.mode, CaptureParams(z0=math.inf),
            payload_bytes=spec.payload_bytes,
            replications=spec.replications,
            slots_per_rep=spec.slots_per_rep,
            seed=stream_state(spec.seed, index),
        )
        out.append({
            "config": index + 1,
            "group_fers": ";".join("%.9g" % f for f in fers),
            "s_sim_mbps": result.throughput_mbps,
            "ci95": result.ci95,
            "s_ref_mbps": spec.reference_mbps[index],
        })
    return out


def write_table2(path: Path, rows: Sequence[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        header = ["config", "group_fers", "s_sim_mbps", "ci95", "s_ref_mbps"]
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[key]) for key in header])


# -- configuration files -----------------------------------------------------

def _axis(raw) -> tuple:
    if raw is None:
        return ()
    if isinstance(raw, (list, tuple)):
        return tuple(_parse_scalar(v) for v in raw)
    return (_parse_scalar(raw),)


def _parse_scalar(value):
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    return value


def _spec_from_mapping(data: dict, defaults: dict) -> ExperimentSpec:
    merged = dict(defaults)
    merged.update(data)
    axes = merged.get("axes", {}) or {}
    fixed = merged.get("fixed", {}) or {}

    def axis_of(key, fallback):
        values = _axis(axes.get(key)) or _axis(fixed.get(key)) or (fallback,)
        return values

    mac = MacParams(**(merged.get("mac") or {}))
    sim_cfg = merged.get("sim") or {}
    return ExperimentSpec(
        name=merged["name"],
        mode=AccessMode.parse(merged["mode"]),
        n=tuple(int(v) for v in axis_of("n", 10)),
        snr_db=tuple(float(v) for v in axis_of("snr_db", math.inf)),
        z0_db=tuple(float(v) for v in axis_of("z0_db", math.inf)),
        payload_bytes=tuple(int(v) for v in axis_of("payload_bytes", 1024)),
        mac=mac,
        capture_mode=CaptureMode(merged.get("capture_mode", "power_controlled")),
        modulation=Modulation(merged.get("modulation", "dbpsk")),
        run_sim=bool(sim_cfg.get("run", False)),
        replications=int(sim_cfg.get("replications", 20)),
        slots_per_rep=int(sim_cfg.get("slots_per_rep", 200_000)),
        seed=int(sim_cfg.get("seed", 1)),
    )


def load_config(path: Path):
    """Parse a YAML experiment file into ExperimentSpec list or Table2Spec."""
    with open(path) as handle:
        data = yaml.safe_load(handle)
    if data.get("kind") == "table2":
        sim_cfg = data.get("sim") or {}
        return Table2Spec(
            name=data["name"],
            mode=AccessMode.parse(data["mode"]),
            configurations=tuple(tuple(float(f) for f in cfg) for cfg in data["configurations"]),
            reference_mbps=tuple(float(v) for v in data["reference_mbps"]),
            stations_per_group=int(data.get("stations_per_group", 3)),
            payload_bytes=int(data.get("payload_bytes", 1024)),
            mac=MacParams(**(data.get("mac") or {})),
            replications=int(sim_cfg.get("replications", 100)),
            slots_per_rep=int(sim_cfg.get("slots_per_rep", 200_000)),
            seed=int(sim_cfg.get("seed", 20250810)),
        )
    defaults = {key: value for key, value in data.items() if key != "sweeps"}
    sweeps = data.get("sweeps") or [{}]
    return [_spec_from_mapping(sweep, defaults) for sweep in sweeps]


def default_configs_dir() -> Path:
    env = os.environ.get("DCF80211_CONFIGS")
    if env:
        return Path(env)
    local = Path.cwd() / "configs"
    if local.is_dir():
        return local
    return Path(__file__).resolve().parents[2] / "configs"


def reproduce(target: str, out_dir: Path = Path("results"),
              configs_dir: Optional[Path] = None,
              overrides: Optional[dict] = None) -> list[Path]:
    """Run one canned target and write its CSV files; returns the paths.

    `overrides` may thin out simulation effort (replications,
    slots_per_rep) for smoke runs; analytic columns are unaffected.
    """
    if target not in REPRODUCE_TARGETS:
        raise ValueError(f"unknown target {target!r}; choose from {REPRODUCE_TARGETS}")
    configs_dir = configs_dir or default_configs_dir()
    config_path = configs_dir / f"{target}.yaml"
    loaded = load_config(config_path)
    out_paths: list[Path] = []
    if isinstance(loaded, Table2Spec):
        if overrides:
            loaded = dataclasses.replace(loaded, **overrides)
        rows = run_table2(loaded)
        path = out_dir / target / f"{loaded.name}.csv"
        write_table2(path, rows)
        out_paths.append(path)
        return out_paths
    for spec in loaded:
        if overrides:
            spec = dataclasses.replace(spec, **overrides)
        rows = run_experiment(spec)
        path = out_dir / target / f"{spec.name}.csv"
        write_rows(path, rows)
        out_paths.append(path)
    return out_paths


# -- validation gate ----------------------------------------------------------

def _check(name: str, passed: bool, **details) -> dict:
    return {"name": name, "passed": bool(passed), **details}


def validate(mc_draws: int = 1_000_000, seed: int = 1234) -> dict:
    """Cross-check the independent computation routes; machine-readable report.

    Covers: quadrature vs closed-form BER, closed-form tau vs the
    enumerated chain (both handshakes, plus the literal transcribed
    four-way form), stationary-pmf normalisation, the ideal-channel
    reduction against the reference implementation, fixed-point
    self-consistency, Monte-Carlo capture consistency, and simulator
    slot/time conservation.
    """
    checks: list[dict] = []

    gammas = [0.1, 1.0, 10.0, 100.0, 1e4]
    worst = max(
        abs(ber_rayleigh(Modulation.DBPSK, g) - 0.5 * (1 - math.sqrt(g / (1 + g))))
        for g in gammas
    )
    checks.append(_check("ber_quadrature_vs_closed_form", worst <= 1e-9,
                         max_abs_error=worst, tolerance=1e-9))

    grid = [0.05, 0.25, 0.45, 0.65, 0.85]
    worst2 = worst4 = worst4t = worst_norm = 0.0
    for w_min, max_stage in ((4, 2), (8, 3), (16, 4)):
        mac = MacParams(w_min=w_min, max_stage=max_stage)
        for p_col in grid:
            for p_e in grid:
                p_eq = p_col + p_e - p_col * p_e
                tau2, pmf2 = stationary_chain_oracle(mac, AccessMode.TWO_WAY, p_col, p_e)
                tau4, pmf4 = stationary_chain_oracle(mac, AccessMode.FOUR_WAY, p_col, p_e)
                worst2 = max(worst2, abs(tau2 - tau_two_way(p_eq, mac)))
                worst4 = max(worst4, abs(tau4 - tau_four_way(p_eq, p_col, p_e, mac)))
                worst4t = max(worst4t, abs(tau4 - tau_four_way_transcribed(p_eq, p_col, p_e, mac)))
                worst_norm = max(worst_norm,
                                 abs(sum(pmf2.values()) - 1.0),
                                 abs(sum(pmf4.values()) - 1.0))
    checks.append(_check("two_way_tau_vs_chain_oracle", worst2 <= 1e-8,
                         max_abs_error=worst2, tolerance=1e-8))
    checks.append(_check("four_way_tau_vs_chain_oracle", worst4 <= 1e-8,
                         max_abs_error=worst4, tolerance=1e-8,
                         transcribed_form_deviation=worst4t))
    checks.append(_check("stationary_pmf_normalisation", worst_norm <= 1e-12,
                         max_abs_error=worst_norm, tolerance=1e-12))

    mac = MacParams()
    nocap = CaptureParams(z0=math.inf)
    worst_tau = worst_s = 0.0
    for n in (2, 5, 9, 20, 50):
        tau_ref, _, s_ref = bianchi_baseline(n, mac, AccessMode.TWO_WAY, 1024)
        sol = solve_system(n, mac, AccessMode.TWO_WAY, 0.0, nocap, 1024)
        worst_tau = max(worst_tau, abs(sol.tau - tau_ref))
        worst_s = max(worst_s, abs(sol.s_mbps - s_ref))
    checks.append(_check("ideal_channel_reduction", worst_tau <= 1e-9 and worst_s <= 1e-9,
                         max_tau_error=worst_tau, max_s_error=worst_s, tolerance=1e-9))

    worst_fp = 0.0
    for mode in AccessMode:
        for n in (1, 5, 20):
            for p_e in (0.0, 0.01, 0.3):
                for z0_db in (math.inf, 6.0):
                    cp = capture_params_of(z0_db, CaptureMode.POWER_CONTROLLED)
                    sol = solve_system(n, mac, mode, p_e, cp, 1024)
                    p_cap = capture_total(n, sol.tau, cp)
                    p_col = min(max(1.0 - (1.0 - sol.tau) ** (n - 1) - p_cap, 0.0), 1.0)
                    p_eq = p_col + p_e - p_e * p_col
                    if mode is AccessMode.FOUR_WAY:
                        tau_back = tau_four_way(p_eq, p_col, p_e, mac)
                    else:
                        tau_back = tau_two_way(p_eq, mac)
                    worst_fp = max(worst_fp, abs(p_cap - sol.p_cap), abs(p_col - sol.p_col),
                                   abs(p_eq - sol.p_eq), abs(tau_back - sol.tau))
    checks.append(_check("fixed_point_self_consistency", worst_fp <= 1e-9,
                         max_abs_error=worst_fp, tolerance=1e-9))

    rng = np.random.default_rng(seed)
    capture_details = []
    capture_ok = True
    for i in (1, 2, 4):
        for z0_db in (1.0, 6.0, 24.0):
            cp = CaptureParams.from_db(z0_db)
            tagged = rng.exponential(size=mc_draws)
            interference = rng.exponential(size=(mc_draws, i)).sum(axis=1)
            hits = tagged > cp.threshold * interference
            freq = float(hits.mean())
            expected = capture_conditional(i, cp)
            se = math.sqrt(max(expected * (1 - expected), 1e-12) / mc_draws)
            ok = abs(freq - expected) <= 3.0 * se
            capture_ok &= ok
            capture_details.append({"i": i, "z0_db": z0_db, "freq": freq,
                                    "expected": expected, "std_error": se, "passed": ok})
    checks.append(_check("capture_monte_carlo_consistency", capture_ok,
                         draws=mc_draws, cells=capture_details))

    config = SimConfig(n_stations=5, mac=mac, mode=AccessMode.TWO_WAY,
                       cp=CaptureParams.from_db(6.0), fer_override=0.05,
                       replications=2, slots_per_rep=50_000, seed=99)
    result = run(config)
    sd = config.durations()
    conserved = True
    for rep in result.per_rep:
        slots_measured = config.slots_per_rep - int(0.05 * config.slots_per_rep)
        conserved &= rep.slots == slots_measured
        lhs = (rep.idle_slots * sd.sigma + (rep.successes + rep.captures) * sd.t_s
               + rep.collisions * sd.t_c + rep.channel_errors * sd.t_e)
        conserved &= lhs == rep.clock_us
    checks.append(_check("simulator_conservation", conserved))

    sol1 = solve_system(1, mac, AccessMode.TWO_WAY, 0.0, nocap, 1024)
    cfg1 = SimConfig(n_stations=1, mac=mac, mode=AccessMode.TWO_WAY, cp=nocap,
                     fer_override=0.0, replications=8, slots_per_rep=100_000, seed=5)
    res1 = run(cfg1)
    margin = 3.0 * max(res1.ci95, 1e-4)
    ok1 = abs(res1.throughput_mbps - sol1.s_mbps) <= margin
    checks.append(_check("single_station_sim_vs_model", ok1,
                         sim=res1.throughput_mbps, model=sol1.s_mbps,
                         ci95=res1.ci95, margin=margin))

    return {"passed": all(c["passed"] for c in checks), "checks": checks}


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False)
