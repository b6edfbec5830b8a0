import json

import numpy as np
import pytest

from gafocus import cli, harness, metrics

SMALL = {
    "seed": 7,
    "n_modes": 64,
    "population_size": 8,
    "offspring_per_iteration": 4,
    "max_iterations": 12,
    "baseline_samples": 200,
}

SMALL_SET_ARGS = [f"--set={k}={v}" for k, v in SMALL.items()]


def small_config(**extra):
    return harness.build_config(overrides={**SMALL, **extra})


class TestConfigParsing:
    def test_file_with_comments(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "# comment\n"
            "\n"
            "seed = 13\n"
            "d=400\n"
            "sweep_d = 80, 1000\n"
            "gain = none\n"
            "emit_svg = yes\n"
        )
        values = harness.parse_config_file(str(path))
        assert values == {
            "seed": 13,
            "d": 400.0,
            "sweep_d": (80.0, 1000.0),
            "gain": None,
            "emit_svg": True,
        }

    def test_unknown_key_names_line(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("seed=1\nvoltage=3.3\n")
        with pytest.raises(harness.ConfigError, match=":2:"):
            harness.parse_config_file(str(path))

    def test_bad_value_names_line(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("seed=twelve\n")
        with pytest.raises(harness.ConfigError, match=":1:"):
            harness.parse_config_file(str(path))

    def test_missing_equals(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("just a line\n")
        with pytest.raises(harness.ConfigError, match="key=value"):
            harness.parse_config_file(str(path))

    def test_missing_file(self):
        with pytest.raises(harness.ConfigError):
            harness.parse_config_file("/nonexistent/exp.cfg")

    def test_overrides_win(self):
        config = harness.build_config({"seed": 3, "d": 400.0}, {"seed": 9})
        assert config.seed == 9
        assert config.d == 400.0

    def test_override_strings_coerced(self):
        config = harness.build_config(overrides={"seed": "12", "sweep_d": "80,400"})
        assert config.seed == 12
        assert config.sweep_d == (80.0, 400.0)

    def test_unknown_override(self):
        with pytest.raises(harness.ConfigError):
            harness.build_config(overrides={"bogus": 1})

    @pytest.mark.parametrize(
        "overrides",
        [
            {"seed": -1},
            {"schedule": "geometric"},
            {"gain": 0.0},
            {"gain_fraction": 0.0},
            {"noise_sigma_rel": -0.1},
            {"n_repeats": 0},
            {"decorrelate_alpha": 1.5},
            {"n_workers": 0},
        ],
    )
    def test_validation_rejects(self, overrides):
        with pytest.raises(harness.ConfigError):
            harness.build_config(overrides=overrides)

    def test_make_schedule_override(self):
        config = small_config()
        assert harness.make_schedule(config, 400.0).D == 400.0
        assert harness.make_schedule(config).D == config.d

    def test_sweep_needs_exponential(self):
        config = small_config(schedule="constant")
        with pytest.raises(harness.ConfigError):
            harness.make_schedule(config, 400.0)
        with pytest.raises(harness.ConfigError):
            harness.compute_sweep(config)


class TestSeedPolicy:
    def test_run_index_xor(self):
        assert harness.ga_seed(7, 0) == 6
        assert harness.ga_seed(7, 1) == 5
        assert harness.ga_seed(0, 0) == 1

    def test_stays_in_64_bits(self):
        assert harness.ga_seed((1 << 64) - 1, 0) == (1 << 64) - 2


class TestBench:
    def test_gain_calibration(self):
        config = small_config()
        bench = harness.prepare_bench(config)
        assert bench.detector.gain * bench.baseline == pytest.approx(0.005 * 3.3)

    def test_explicit_gain(self):
        bench = harness.prepare_bench(small_config(gain=2.5))
        assert bench.detector.gain == 2.5

    def test_relative_noise(self):
        bench = harness.prepare_bench(small_config(noise_sigma_rel=0.1))
        assert bench.detector.noise_sigma == pytest.approx(0.1 * 0.005 * 3.3)

    def test_absolute_noise_wins(self):
        bench = harness.prepare_bench(small_config(noise_sigma_rel=0.1, noise_sigma_volts=0.02))
        assert bench.detector.noise_sigma == 0.02

    def test_deterministic(self):
        a = harness.prepare_bench(small_config())
        b = harness.prepare_bench(small_config())
        assert a.baseline == b.baseline
        assert np.array_equal(a.medium.entries, b.medium.entries)


class TestTraceCsv:
    def test_round_trip_preserves_metrics(self, tmp_path):
        config = small_config()
        trace, summary = harness.compute_run(config)
        path = tmp_path / "trace.csv"
        harness.write_trace_csv(trace, str(path))

        lines = path.read_text().splitlines()
        assert lines[0] == harness.TRACE_HEADER
        assert lines[1].startswith("0,")  # ranked initial population
        assert len(lines) == 2 + config.max_iterations

        loaded = harness.read_trace_csv(str(path))
        assert loaded.init_record is not None
        again = harness.summarize(loaded)
        for key, value in summary.items():
            if key in ("config_seed", "ga_seed"):
                continue
            assert again[key] == value, key

    def test_floats_shortest_repr(self, tmp_path):
        trace, _ = harness.compute_run(small_config())
        path = tmp_path / "trace.csv"
        harness.write_trace_csv(trace, str(path))
        row = path.read_text().splitlines()[2].split(",")
        assert float(row[3]) == trace.records[0].best_intensity / trace.baseline

    def test_header_required(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match=":1:"):
            harness.read_trace_csv(str(path))

    def test_bad_row_named(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text(harness.TRACE_HEADER + "\n1,2,3\n")
        with pytest.raises(ValueError, match=":2:"):
            harness.read_trace_csv(str(path))

    def test_non_numeric_cell_named(self, tmp_path):
        path = tmp_path / "trace.csv"
        good = "1,5,2.0,2.0,100,16,43.0"
        path.write_text(harness.TRACE_HEADER + f"\n{good}\n2,x,2.0,2.0,100,20,50.0\n")
        with pytest.raises(ValueError, match=":3:"):
            harness.read_trace_csv(str(path))

    def test_no_rows(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text(harness.TRACE_HEADER + "\n")
        with pytest.raises(ValueError, match="no iteration rows"):
            harness.read_trace_csv(str(path))


class TestRunExperiment:
    def test_writes_outputs(self, tmp_path):
        summary = harness.run_experiment(small_config(), str(tmp_path))
        assert (tmp_path / "trace.csv").exists()
        stored = json.loads((tmp_path / "summary.json").read_text())
        assert stored == summary
        assert summary["config_seed"] == 7
        assert summary["ga_seed"] == 6
        assert summary["total_measurements"] == 8 + 12 * 4

    def test_byte_identical_rerun(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        harness.run_experiment(small_config(), str(a))
        harness.run_experiment(small_config(), str(b))
        assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()
        assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()

    def test_svg_emission_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        harness.run_experiment(small_config(emit_svg=True), str(a))
        harness.run_experiment(small_config(emit_svg=True), str(b))
        for name in ("enhancement.svg", "eta.svg"):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestAnalyze:
    def test_matches_run_summary(self, tmp_path):
        summary = harness.run_experiment(small_config(), str(tmp_path))
        recomputed = harness.analyze(str(tmp_path / "trace.csv"))
        assert recomputed == summary  # seeds come from the sidecar summary.json

    def test_without_sidecar(self, tmp_path):
        trace, summary = harness.compute_run(small_config())
        path = tmp_path / "trace.csv"
        harness.write_trace_csv(trace, str(path))
        recomputed = harness.analyze(str(path))
        assert recomputed["config_seed"] is None
        assert recomputed["final_zeta"] == summary["final_zeta"]

    def test_malformed_trace(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("not,a,trace\n")
        with pytest.raises(ValueError):
            harness.analyze(str(path))


class TestSweep:
    def test_singleton_equals_plain_run(self, tmp_path):
        run_dir, sweep_dir = tmp_path / "run", tmp_path / "sweep"
        harness.run_experiment(small_config(d=80.0), str(run_dir))
        harness.sweep(small_config(), d_values=(80.0,), out_dir=str(sweep_dir))
        assert (run_dir / "trace.csv").read_bytes() == (
            sweep_dir / "run0_D80" / "trace.csv"
        ).read_bytes()

    def test_same_decay_twice_is_bit_identical(self, tmp_path):
        harness.sweep(small_config(), d_values=(80.0, 80.0), out_dir=str(tmp_path))
        assert (tmp_path / "run0_D80" / "trace.csv").read_bytes() == (
            tmp_path / "run1_D80" / "trace.csv"
        ).read_bytes()

    def test_csv_layout_and_normalization(self, tmp_path):
        result = harness.sweep(small_config(), d_values=(80.0, 400.0), out_dir=str(tmp_path))
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[0] == (
            "iteration,zeta_run0_D80,f_xi_run0_D80,eta_run0_D80,"
            "zeta_run1_D400,f_xi_run1_D400,eta_run1_D400"
        )
        assert len(lines) == 1 + SMALL["max_iterations"]
        rows = [line.split(",") for line in lines[1:]]
        assert [r[0] for r in rows] == [str(k) for k in range(1, 13)]

        # f_xi is normalized by the sweep-wide best, so exactly one run ends at 1.0
        last = rows[-1]
        f_values = (float(last[2]), float(last[5]))
        z_values = (float(last[1]), float(last[4]))
        assert max(f_values) == 1.0
        assert result["sweep_max_zeta"] == max(z_values)
        winner = f_values.index(max(f_values))
        assert z_values[winner] == max(z_values)

    def test_summary_file(self, tmp_path):
        result = harness.sweep(small_config(), d_values=(80.0, 400.0), out_dir=str(tmp_path))
        stored = json.loads((tmp_path / "sweep_summary.json").read_text())
        assert stored == result
        assert stored["d_values"] == [80.0, 400.0]
        assert set(stored["runs"]) == {"run0_D80", "run1_D400"}
        # every element reuses run index 0: same GA stream on the same medium
        assert {r["ga_seed"] for r in stored["runs"].values()} == {harness.ga_seed(7, 0)}


class TestRepeat:
    def test_stats_and_files(self, tmp_path):
        config = small_config(n_repeats=3, iterations_per_repeat=6)
        stats = harness.repeat(config, str(tmp_path))
        lines = (tmp_path / "repeats.csv").read_text().splitlines()
        assert lines[0] == "repeat,ga_seed,final_zeta,max_eta,optimal_stop_k"
        assert len(lines) == 4
        finals = stats["final_zetas"]
        assert len(finals) == 3
        assert stats["mean_final_zeta"] == pytest.approx(np.mean(finals))
        assert stats["std_final_zeta"] == pytest.approx(np.std(finals, ddof=1))
        assert stats["cv_final_zeta"] == pytest.approx(
            stats["std_final_zeta"] / stats["mean_final_zeta"]
        )
        seeds = [
            json.loads((tmp_path / f"repeat{i}" / "summary.json").read_text())["ga_seed"]
            for i in range(3)
        ]
        assert seeds == [harness.ga_seed(7, i) for i in range(3)]

    def test_single_repeat_zero_spread(self, tmp_path):
        stats = harness.repeat(small_config(n_repeats=1, iterations_per_repeat=5), str(tmp_path))
        assert stats["std_final_zeta"] == 0.0
        assert stats["cv_final_zeta"] == 0.0

    def test_decorrelation_changes_later_repeats(self, tmp_path):
        frozen = harness.compute_repeat(small_config(n_repeats=2, iterations_per_repeat=6))
        drifting = harness.compute_repeat(
            small_config(n_repeats=2, iterations_per_repeat=6, decorrelate_alpha=1.0)
        )
        assert frozen[0][1]["final_zeta"] == drifting[0][1]["final_zeta"]
        assert frozen[1][1]["final_zeta"] != drifting[1][1]["final_zeta"]


class TestTimingReport:
    def test_virtex5_speedup(self):
        payload = harness.timing_report("virtex5", 2000)
        assert payload["speedup_vs_pc_matlab"] == 150.0
        assert "chunk_speedup_vs_virtex5" not in payload

    def test_ultrascale_chunk_speedup(self):
        payload = harness.timing_report("ultrascale-plus", 100)
        assert payload["chunk_speedup_vs_virtex5"] == 8.0
        assert payload["mask_generation_us"] == pytest.approx(61.44)

    def test_pc_matlab(self):
        payload = harness.timing_report("pc-matlab", 10)
        assert "speedup_vs_pc_matlab" not in payload
        assert payload["per_iteration_ms"] == 1200.0

    def test_unknown_profile(self):
        with pytest.raises(harness.ConfigError):
            harness.timing_report("zynq", 10)


class TestCli:
    def run_cli(self, *argv):
        return cli.main(list(argv))

    def test_run_success(self, tmp_path, capsys):
        code = self.run_cli("run", "--out", str(tmp_path), *SMALL_SET_ARGS)
        assert code == 0
        printed = json.loads(capsys.readouterr().out)
        stored = json.loads((tmp_path / "summary.json").read_text())
        assert printed == stored

    def test_set_overrides_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("".join(f"{k}={v}\n" for k, v in SMALL.items()))
        code = self.run_cli(
            "run", "--config", str(cfg), "--out", str(tmp_path / "out"), "--set", "seed=9"
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["config_seed"] == 9

    def test_seed_flag(self, tmp_path, capsys):
        code = self.run_cli("run", "--out", str(tmp_path), "--seed", "21", *SMALL_SET_ARGS[1:])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["config_seed"] == 21

    def test_sweep_and_analyze(self, tmp_path, capsys):
        out = tmp_path / "sweep"
        assert self.run_cli("sweep", "--out", str(out), "--d", "80,400", *SMALL_SET_ARGS) == 0
        capsys.readouterr()
        trace = out / "run0_D80" / "trace.csv"
        report = tmp_path / "report.json"
        assert self.run_cli("analyze", str(trace), "--out", str(report)) == 0
        printed = json.loads(capsys.readouterr().out)
        assert json.loads(report.read_text()) == printed
        assert printed["ga_seed"] == harness.ga_seed(SMALL["seed"], 0)

    def test_repeat_command(self, tmp_path, capsys):
        code = self.run_cli(
            "repeat", "--out", str(tmp_path), "--repeats", "2", "--iterations", "5", *SMALL_SET_ARGS
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["n_repeats"] == 2

    def test_timing_table(self, capsys, tmp_path):
        report = tmp_path / "timing.json"
        assert self.run_cli("timing", "--out", str(report)) == 0
        out = capsys.readouterr().out
        assert "per iteration, nominal [ms]" in out and "8.0" in out
        assert "speedup vs pc-matlab" in out and "150.0" in out
        assert json.loads(report.read_text())["profile"] == "virtex5"

    def test_exit_2_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("voltage=3.3\n")
        assert self.run_cli("run", "--config", str(cfg)) == 2
        assert self.run_cli("run", "--set", "bogus=1") == 2
        assert self.run_cli("run", "--set", "seed") == 2
        assert self.run_cli("run", "--profile", "zynq", *SMALL_SET_ARGS) == 2
        capsys.readouterr()

    def test_exit_3_io_error(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        assert self.run_cli("run", "--out", str(blocker / "sub"), *SMALL_SET_ARGS) == 3
        assert self.run_cli("analyze", str(tmp_path / "missing.csv")) == 3
        capsys.readouterr()

    def test_exit_4_malformed_trace(self, tmp_path, capsys):
        path = tmp_path / "trace.csv"
        path.write_text("not,a,trace\n")
        assert self.run_cli("analyze", str(path)) == 4
        capsys.readouterr()
