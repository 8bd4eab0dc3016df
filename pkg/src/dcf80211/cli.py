"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 solver
failure.  Worker-pool size for sweeps comes from DCF80211_WORKERS.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from .analytic import SolverError, bianchi_baseline, bianchi_s_max, solve_system
from .experiments import (
    REPRODUCE_TARGETS,
    capture_params_of,
    load_config,
    p_e_of,
    reproduce,
    report_to_json,
    run_experiment,
    validate,
    write_rows,
    write_table2,
    run_table2,
    Table2Spec,
)
from .capture import CaptureMode
from .link import Modulation
from .params import AccessMode, MacParams
from .sim import SimConfig, heterogeneous_fer_experiment, run as run_sim

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this tool reserves 2 for
    # validation failures, so remap usage errors to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _add_model_args(parser) -> None:
    parser.add_argument("--mode", default="two_way",
                        help="access mode: two_way (basic) or four_way (RTS/CTS)")
    parser.add_argument("--n", type=int, default=10, help="number of stations")
    parser.add_argument("--snr-db", type=float, default=math.inf,
                        help="mean SNR in dB (inf = ideal channel)")
    parser.add_argument("--fer", type=float, default=None,
                        help="frame error rate override (bypasses the SNR model)")
    parser.add_argument("--z0-db", type=float, default=math.inf,
                        help="capture ratio in dB (inf = no capture)")
    parser.add_argument("--payload-bytes", type=int, default=1024)
    parser.add_argument("--w-min", type=int, default=32)
    parser.add_argument("--max-stage", type=int, default=5)
    parser.add_argument("--modulation", default="dbpsk",
                        choices=[m.value for m in Modulation])
    parser.add_argument("--capture-mode", default="power_controlled",
                        choices=[m.value for m in CaptureMode])


def _mac_of(args) -> MacParams:
    return MacParams(w_min=args.w_min, max_stage=args.max_stage)


def _p_e(args, payload: int) -> float:
    if args.fer is not None:
        return args.fer
    return p_e_of(args.snr_db, payload, Modulation(args.modulation))


def _cmd_solve(args) -> int:
    mac = _mac_of(args)
    mode = AccessMode.parse(args.mode)
    cp = capture_params_of(args.z0_db, CaptureMode(args.capture_mode))
    p_e = _p_e(args, args.payload_bytes)
    sol = solve_system(args.n, mac, mode, p_e, cp, args.payload_bytes)
    out = dataclasses.asdict(sol)
    out["s_bianchi_mbps"] = bianchi_baseline(args.n, mac, mode, args.payload_bytes)[2]
    out["s_max_mbps"] = bianchi_s_max(mac, mode, args.payload_bytes)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _parse_groups(text: str) -> list[tuple[int, float]]:
    groups = []
    for chunk in text.split(","):
        count, _, fer_text = chunk.partition(":")
        groups.append((int(count), float(fer_text)))
    return groups


def _cmd_simulate(args) -> int:
    mac = _mac_of(args)
    mode = AccessMode.parse(args.mode)
    cp = capture_params_of(args.z0_db, CaptureMode(args.capture_mode))
    if args.fer_groups:
        result = heterogeneous_fer_experiment(
            _parse_groups(args.fer_groups), mac, mode, cp,
            payload_bytes=args.payload_bytes, replications=args.replications,
            slots_per_rep=args.slots, seed=args.seed)
    else:
        config = SimConfig(
            n_stations=args.n, mac=mac, mode=mode, cp=cp,
            payload_bytes=args.payload_bytes, fer_override=_p_e(args, args.payload_bytes),
            replications=args.replications, slots_per_rep=args.slots, seed=args.seed)
        result = run_sim(config)
    print(json.dumps({
        "throughput_mbps": result.throughput_mbps,
        "ci95": result.ci95,
        "replications": len(result.per_rep),
        "successes": result.successes,
        "captures": result.captures,
        "collisions": result.collisions,
        "channel_errors": result.channel_errors,
        "idle_slots": result.idle_slots,
    }, indent=2))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    loaded = load_config(Path(args.spec))
    out_dir = Path(args.out)
    if isinstance(loaded, Table2Spec):
        rows = run_table2(loaded)
        path = out_dir / f"{loaded.name}.csv"
        write_table2(path, rows)
        print(path)
        return EXIT_OK
    for spec in loaded:
        if args.no_sim:
            spec = dataclasses.replace(spec, run_sim=False)
        rows = run_experiment(spec)
        path = out_dir / f"{spec.name}.csv"
        write_rows(path, rows)
        print(path)
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    overrides = {}
    if args.fast:
        overrides = {"replications": 8, "slots_per_rep": 50_000}
    for path in reproduce(args.target, out_dir=Path(args.out),
                          configs_dir=Path(args.configs) if args.configs else None,
                          overrides=overrides or None):
        print(path)
    return EXIT_OK


def _cmd_validate(args) -> int:
    report = validate(mc_draws=args.draws)
    text = report_to_json(report)
    if args.json:
        Path(args.json).write_text(text)
    print(text)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dcf80211",
                     description="DCF saturation throughput: analytic model and simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_solve = sub.add_parser("solve", help="solve the analytic fixed point at one point")
    _add_model_args(p_solve)
    p_solve.set_defaults(func=_cmd_solve)

    p_sim = sub.add_parser("simulate", help="run the slot simulator at one point")
    _add_model_args(p_sim)
    p_sim.add_argument("--replications", type=int, default=100)
    p_sim.add_argument("--slots", type=int, default=2_000_000)
    p_sim.add_argument("--seed", type=int, default=1)
    p_sim.add_argument("--fer-groups", default=None,
                       help="heterogeneous FER groups, e.g. '3:1e-2,3:1e-3,3:1e-4'")
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a sweep described by a YAML file")
    p_sweep.add_argument("spec", help="path to the sweep YAML")
    p_sweep.add_argument("--out", default="results")
    p_sweep.add_argument("--no-sim", action="store_true",
                         help="skip simulations, keep analytic columns")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="run a canned reference target")
    p_rep.add_argument("target", choices=list(REPRODUCE_TARGETS))
    p_rep.add_argument("--out", default="results")
    p_rep.add_argument("--configs", default=None, help="directory of target YAMLs")
    p_rep.add_argument("--fast", action="store_true",
                       help="reduced replication count for smoke runs")
    p_rep.set_defaults(func=_cmd_reproduce)

    p_val = sub.add_parser("validate", help="run the self-validation suite")
    p_val.add_argument("--json", default=None, help="also write the report here")
    p_val.add_argument("--draws", type=int, default=1_000_000,
                       help="Monte-Carlo draws for the capture consistency check")
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
