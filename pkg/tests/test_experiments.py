"""Sweep runner, CSV reproducibility, config parsing, CLI contract."""

import csv
import json
import math
from pathlib import Path

import pytest

from dcf80211.cli import main
from dcf80211.experiments import (
    CSV_COLUMNS,
    ExperimentSpec,
    Table2Spec,
    load_config,
    reproduce,
    run_experiment,
    validate,
    write_rows,
)
from dcf80211.params import AccessMode

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


class TestRunExperiment:
    def test_single_point_analytic_row(self):
        spec = ExperimentSpec(name="one", mode=AccessMode.TWO_WAY,
                              n=(9,), snr_db=(math.inf,), z0_db=(math.inf,),
                              payload_bytes=(1024,))
        rows = run_experiment(spec)
        assert len(rows) == 1
        row = rows[0]
        assert row.s_sim_mbps is None and row.ci95 is None
        assert row.p_e == 0.0
        assert row.flag == ""
        assert row.s_theory_mbps == pytest.approx(row.s_bianchi_mbps, abs=1e-9)

    def test_rows_in_deterministic_sweep_order(self):
        spec = ExperimentSpec(name="grid", mode=AccessMode.TWO_WAY,
                              n=(5, 10), snr_db=(30.0, 40.0), z0_db=(6.0,),
                              payload_bytes=(128, 1024))
        rows = run_experiment(spec)
        keys = [(r.n, r.snr_db, r.payload_bytes) for r in rows]
        assert keys == [(5, 30.0, 128), (5, 30.0, 1024), (5, 40.0, 128),
                        (5, 40.0, 1024), (10, 30.0, 128), (10, 30.0, 1024),
                        (10, 40.0, 128), (10, 40.0, 1024)]

    def test_p_eq_identity_on_every_row(self):
        spec = ExperimentSpec(name="grid", mode=AccessMode.FOUR_WAY,
                              n=(5, 20), snr_db=(35.0, math.inf), z0_db=(6.0, math.inf))
        for row in run_experiment(spec):
            assert row.p_eq == pytest.approx(
                row.p_col + row.p_e - row.p_e * row.p_col, abs=1e-12)

    def test_sim_toggle_changes_only_sim_columns(self):
        base = dict(name="t", mode=AccessMode.TWO_WAY, n=(5,), snr_db=(40.0,),
                    z0_db=(6.0,), payload_bytes=(1024,),
                    replications=2, slots_per_rep=20_000, seed=5)
        without = run_experiment(ExperimentSpec(run_sim=False, **base))[0]
        with_sim = run_experiment(ExperimentSpec(run_sim=True, **base))[0]
        assert with_sim.s_sim_mbps is not None and with_sim.ci95 is not None
        for column in CSV_COLUMNS:
            if column in ("s_sim_mbps", "ci95"):
                continue
            assert getattr(without, column) == getattr(with_sim, column)

    def test_oversized_sweep_rejected(self):
        with pytest.raises(ValueError):
            ExperimentSpec(name="big", mode=AccessMode.TWO_WAY,
                           n=tuple(range(1, 120)), snr_db=tuple(range(100)))


class TestCsv:
    def test_byte_identical_reproduction(self, tmp_path):
        spec = ExperimentSpec(name="repro", mode=AccessMode.TWO_WAY,
                              n=(4,), snr_db=(45.0,), z0_db=(6.0,),
                              run_sim=True, replications=3, slots_per_rep=20_000,
                              seed=99)
        paths = []
        for tag in ("a", "b"):
            rows = run_experiment(spec)
            path = tmp_path / f"{tag}.csv"
            write_rows(path, rows)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_header_and_sentinels(self, tmp_path):
        spec = ExperimentSpec(name="s", mode=AccessMode.TWO_WAY,
                              n=(3,), snr_db=(math.inf,), z0_db=(math.inf,))
        path = tmp_path / "s.csv"
        write_rows(path, run_experiment(spec))
        with open(path) as handle:
            reader = csv.reader(handle)
            header = next(reader)
            row = next(reader)
        assert header == CSV_COLUMNS
        record = dict(zip(header, row))
        assert record["snr_db"] == "inf" and record["z0_db"] == "inf"
        assert record["s_sim_mbps"] == "" and record["flag"] == ""


class TestConfigs:
    def test_all_targets_parse(self):
        for target in ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"):
            specs = load_config(CONFIGS / f"{target}.yaml")
            assert isinstance(specs, list) and specs
            for spec in specs:
                assert isinstance(spec, ExperimentSpec)
                assert spec.point_count() >= 1

    def test_table2_config(self):
        spec = load_config(CONFIGS / "table2.yaml")
        assert isinstance(spec, Table2Spec)
        assert len(spec.configurations) == 6
        assert spec.reference_mbps == (0.777, 0.781, 0.781, 0.784, 0.786, 0.785)
        assert spec.stations_per_group == 3

    def test_inf_sentinels_parse(self):
        specs = load_config(CONFIGS / "fig8.yaml")
        ideal = [s for s in specs if s.name == "fig8_snr_inf_z0_inf"]
        assert len(ideal) == 1
        assert math.isinf(ideal[0].snr_db[0]) and math.isinf(ideal[0].z0_db[0])

    def test_reproduce_unknown_target(self):
        with pytest.raises(ValueError):
            reproduce("fig99")

    def test_reproduce_fig2_analytic(self, tmp_path):
        paths = reproduce("fig2", out_dir=tmp_path, configs_dir=CONFIGS)
        assert {p.name for p in paths} == {"fig2_two_way.csv", "fig2_four_way.csv"}
        for path in paths:
            with open(path) as handle:
                rows = list(csv.DictReader(handle))
            assert len(rows) == 11 * 3
            taus = [float(r["tau"]) for r in rows]
            assert all(0.0 < t < 1.0 for t in taus)

    def test_reproduce_table2_smoke(self, tmp_path):
        paths = reproduce("table2", out_dir=tmp_path, configs_dir=CONFIGS,
                          overrides={"replications": 3, "slots_per_rep": 30_000})
        (path,) = paths
        with open(path) as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 6
        for row in rows:
            assert 0.5 < float(row["s_sim_mbps"]) < 1.0


class TestValidate:
    def test_validation_report_passes(self):
        report = validate(mc_draws=100_000)
        names = {check["name"] for check in report["checks"]}
        assert {"ber_quadrature_vs_closed_form", "two_way_tau_vs_chain_oracle",
                "four_way_tau_vs_chain_oracle", "stationary_pmf_normalisation",
                "ideal_channel_reduction", "fixed_point_self_consistency",
                "capture_monte_carlo_consistency", "simulator_conservation",
                "single_station_sim_vs_model"} <= names
        assert report["passed"], report


class TestCli:
    def test_solve_json(self, capsys):
        code = main(["solve", "--mode", "2way", "--n", "9", "--fer", "0.01"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["s_mbps"] == pytest.approx(0.7876, abs=2e-4)

    def test_simulate_json(self, capsys):
        code = main(["simulate", "--mode", "2way", "--n", "3", "--fer", "0.0",
                     "--replications", "2", "--slots", "20000", "--seed", "3"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["collisions"] > 0 or out["successes"] > 0

    def test_simulate_fer_groups(self, capsys):
        code = main(["simulate", "--fer-groups", "2:0.01,2:0.001",
                     "--replications", "2", "--slots", "20000"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["throughput_mbps"] > 0

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["solve", "--mode"])
        assert excinfo.value.code == 1

    def test_unknown_command_exit_code(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 1

    def test_sweep_writes_csv(self, tmp_path, capsys):
        spec_file = tmp_path / "mini.yaml"
        spec_file.write_text(
            "name: mini\nmode: two_way\n"
            "axes:\n  n: [2, 3]\n"
            "fixed:\n  snr_db: inf\n  z0_db: inf\n  payload_bytes: 1024\n"
            "sweeps:\n  - name: mini\n")
        code = main(["sweep", str(spec_file), "--out", str(tmp_path / "out")])
        assert code == 0
        assert (tmp_path / "out" / "mini.csv").exists()

    def test_bad_spec_file_exit_code(self, tmp_path):
        assert main(["sweep", str(tmp_path / "missing.yaml")]) == 1
