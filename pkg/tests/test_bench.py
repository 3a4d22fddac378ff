"""Benchmark harness and CLI: configs, truth, reports, determinism."""

import json

import numpy as np
import pytest

from manifold_ukf.bench import (
    DEFAULT_FILTERS,
    SatelliteConfig,
    angular_rate,
    generate_truth,
    load_config,
    make_attitude_system,
    parse_config,
    run_satellite,
    run_scalar,
    write_satellite_report,
    write_scalar_report,
)
from manifold_ukf.cli import main
from manifold_ukf.errors import ContractViolationError
from manifold_ukf.manifolds import ManifoldPoint, Sphere
from manifold_ukf.systems import NoiseSpec, simulate

TINY = SatelliteConfig(duration=1.0, num_runs=2, seed=11)


class TestAngularRate:
    def test_degree_mode_oracle(self):
        # At t = 0 the three sine arguments are 0, -300 and -600 degrees.
        want = 0.03 * np.sin(np.radians([0.0, -300.0, -600.0]))
        assert np.allclose(angular_rate(0.0), want, atol=1e-15)

    def test_radian_mode_differs(self):
        assert not np.allclose(angular_rate(10.0, "rad"), angular_rate(10.0, "deg"))

    def test_bad_unit(self):
        with pytest.raises(ContractViolationError):
            angular_rate(0.0, "grad")


class TestConfig:
    def test_defaults(self):
        cfg = SatelliteConfig()
        assert cfg.steps == 200
        assert len(cfg.filters) == 9
        assert np.linalg.norm(cfg.q0()) == pytest.approx(1.0, abs=1e-15)
        assert np.allclose(cfg.process_cov(), cfg.process_noise_std**2 * np.eye(3))
        assert np.allclose(cfg.initial_cov(), 1e-6 * np.eye(3))

    def test_validation(self):
        with pytest.raises(ContractViolationError):
            SatelliteConfig(dt=0.0)
        with pytest.raises(ContractViolationError):
            SatelliteConfig(duration=0.01)
        with pytest.raises(ContractViolationError):
            SatelliteConfig(num_runs=0)
        with pytest.raises(ContractViolationError):
            SatelliteConfig(rate_unit="x")
        with pytest.raises(ContractViolationError):
            SatelliteConfig(filters=("additive:unknown",))
        with pytest.raises(ContractViolationError):
            SatelliteConfig(filters=("kalman",))
        with pytest.raises(ContractViolationError):
            SatelliteConfig(initial_attitude=(1.0, 1.0, 0.0, 0.0))

    def test_parse_config(self):
        text = """
        # comment
        dt = 0.2
        duration=2.0   # trailing comment
        num_runs = 3
        filters = additive:minimum, noise-blind
        initial_attitude = 1, 0, 0, 0
        """
        cfg = parse_config(text)
        assert cfg.dt == 0.2
        assert cfg.steps == 10
        assert cfg.num_runs == 3
        assert cfg.filters == ("additive:minimum", "noise-blind")
        assert cfg.initial_attitude == (1.0, 0.0, 0.0, 0.0)

    def test_parse_config_errors(self):
        with pytest.raises(ContractViolationError, match="line 1"):
            parse_config("volume=11")
        with pytest.raises(ContractViolationError, match="line 2"):
            parse_config("dt=0.1\nnum_runs=three")
        with pytest.raises(ContractViolationError):
            parse_config("just some words")

    def test_load_config(self, tmp_path):
        path = tmp_path / "bench.cfg"
        path.write_text("seed=5\nnum_runs=1\n")
        cfg = load_config(path)
        assert cfg.seed == 5 and cfg.num_runs == 1


class TestTruthAndSystem:
    def test_truth_shape_and_norms(self):
        truth = generate_truth(TINY)
        assert truth.shape == (11, 4)
        assert np.allclose(np.linalg.norm(truth, axis=1), 1.0, atol=1e-12)
        assert np.allclose(truth[0], TINY.q0())

    def test_propagator_is_isometry(self):
        man = Sphere(3)
        system = make_attitude_system(TINY)
        rng = np.random.default_rng(8)
        a = rng.standard_normal(4)
        a /= np.linalg.norm(a)
        b = rng.standard_normal(4)
        b /= np.linalg.norm(b)
        pa, pb = ManifoldPoint(man, a), ManifoldPoint(man, b)
        d_before = man.dist(a, b)
        fa, fb = system.f(pa, 3), system.f(pb, 3)
        assert man.dist(fa.coords, fb.coords) == pytest.approx(d_before, abs=1e-13)
        assert system.h(pa, 1) is pa

    def test_zero_noise_simulation_tracks_rk4_truth(self):
        # The filter propagator holds each step's initial rate for the whole
        # step; over 10 s the drift against the RK4 truth stays tiny because
        # the rate profile varies slowly.
        cfg = SatelliteConfig(
            duration=10.0, num_runs=1,
            process_noise_std=0.0, measurement_noise_std=0.0,
        )
        system = make_attitude_system(cfg)
        x0 = ManifoldPoint(Sphere(3), cfg.q0())
        res = simulate(system, x0, cfg.steps, seed=0)
        truth = generate_truth(cfg)
        man = Sphere(3)
        final = res.truth[-1].coords
        assert man.dist(final, truth[-1]) < 1e-4


class TestRunSatellite:
    def test_tiny_run_structure(self):
        report = run_satellite(TINY)
        assert len(report.traces) == TINY.num_runs * len(DEFAULT_FILTERS)
        by_name = {}
        for t in report.traces:
            by_name.setdefault(t.name, []).append(t)
        # Noise-aware variants finish every step; the noise-blind baseline
        # collapses at step 2 in every run.
        for name in DEFAULT_FILTERS:
            for t in by_name[name]:
                if name == "noise-blind":
                    assert t.failed_at == 2
                    assert t.completed == 1
                else:
                    assert t.failed_at is None
                    assert t.completed == TINY.steps
                    assert np.all(np.isfinite(t.errors))
        summary = {s.name: s for s in report.summaries}
        assert summary["noise-blind"].failed_runs == TINY.num_runs
        assert np.isnan(summary["noise-blind"].rmse)
        assert summary["additive:minimum"].failed_runs == 0
        assert summary["additive:minimum"].rmse > 0.0

    def test_deterministic_given_seed(self):
        a = run_satellite(TINY)
        b = run_satellite(TINY)
        for ta, tb in zip(a.traces, b.traces):
            assert ta.name == tb.name
            assert np.array_equal(ta.estimates, tb.estimates)
            assert np.array_equal(ta.errors, tb.errors)


class TestRunScalar:
    def test_matches_kf_and_flags_baseline(self):
        report = run_scalar(12)
        kf = report.estimates["kf"]
        add = report.estimates["additive:minimum"]
        assert kf.shape == add.shape == (12,)
        assert np.max(np.abs(kf - add)) <= 1e-10
        assert kf[0] == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert report.variances["kf"][0] == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert report.failures == (("noise-blind", 2),)
        assert report.estimates["noise-blind"].shape == (1,)

    def test_validation(self):
        with pytest.raises(ContractViolationError):
            run_scalar(0)


class TestReportsAndCli:
    def test_satellite_report_files(self, tmp_path):
        report = run_satellite(TINY)
        paths = write_satellite_report(report, tmp_path / "out", wall_time_s=1.5)
        traj = paths["trajectory"].read_text().splitlines()
        assert traj[0] == "run_id,step,filter,truth,estimate,geodesic_error,min_cov_eig"
        assert len(traj) == 1 + sum(t.completed for t in report.traces)
        summary = paths["summary"].read_text().splitlines()
        assert summary[0] == "filter,rmse,rmse_x1e6,failed_runs,total_runs"
        assert len(summary) == 1 + len(DEFAULT_FILTERS)
        failures = paths["failures"].read_text().splitlines()
        assert failures[0] == "run_id,filter,step"
        assert len(failures) == 1 + TINY.num_runs  # noise-blind rows only
        manifest = json.loads(paths["manifest"].read_text())
        assert manifest["command"] == "bench satellite"
        assert manifest["wall_time_s"] == 1.5
        assert manifest["config"]["num_runs"] == TINY.num_runs

    def test_scalar_report_files(self, tmp_path):
        report = run_scalar(5)
        paths = write_scalar_report(report, tmp_path / "out")
        lines = paths["estimates"].read_text().splitlines()
        assert lines[0] == "step,filter,estimate,variance"
        manifest = json.loads(paths["manifest"].read_text())
        assert manifest["command"] == "bench scalar"
        assert manifest["wall_time_s"] is None

    def test_cli_bench_satellite_deterministic(self, tmp_path):
        cfg = tmp_path / "tiny.cfg"
        cfg.write_text("duration=1.0\nnum_runs=2\nseed=11\n")
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["bench", "satellite", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["bench", "satellite", "--config", str(cfg), "--out", str(out2)]) == 0
        for name in ("trajectory.csv", "summary.csv", "failures.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_cli_bench_scalar(self, tmp_path):
        out = tmp_path / "scalar"
        assert main(["bench", "scalar", "--steps", "8", "--out", str(out)]) == 0
        assert (out / "estimates.csv").exists()
        assert (out / "manifest.json").exists()

    def test_cli_simulate_stdout_and_file(self, tmp_path, capsys):
        cfg = tmp_path / "sim.cfg"
        cfg.write_text("duration=0.5\nnum_runs=1\n")
        assert main(["simulate", "--config", str(cfg)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "step,state,measurement"
        assert len(lines) == 6
        out = tmp_path / "sim_out"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "simulation.csv").read_text().splitlines()[0] == lines[0]

    def test_cli_rejects_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("filters=warp-drive\n")
        assert main(["bench", "satellite", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2
        assert "error:" in capsys.readouterr().err
