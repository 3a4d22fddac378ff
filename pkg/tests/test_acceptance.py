"""End-to-end acceptance suite.

Each test carries its own wall-clock budget, asserted inside the test body.
The hook in conftest.py prints one PASS/FAIL line per criterion after the
run. The satellite benchmark executes exactly twice (shared fixture); the
two runs back both the consistency checks and the byte-level determinism
check, and their combined runtime counts against the five-minute budget.
"""

import csv
import time

import numpy as np
import pytest

from manifold_ukf.bench import run_scalar
from manifold_ukf.cli import main as cli_main
from manifold_ukf.filters import FilterState, additive_step, augmented_step, linear_kf_step
from manifold_ukf.manifolds import (
    Euclidean,
    ManifoldPoint,
    Sphere,
    parallel_transport_cov,
)
from manifold_ukf.sigma import (
    HomogeneousMinimumSymmetric,
    Minimum,
    MinimumSymmetric,
    RhoMinimum,
    euclidean_sigma,
    riemannian_sigma,
)
from manifold_ukf.stats import RandomPointEstimate, WeightedSet, karcher_mean, sample_covariance
from manifold_ukf.systems import AdditiveSystem, NoiseSpec, add_tangent_noise, as_general, simulate

ALL_KINDS = (Minimum(), RhoMinimum(), MinimumSymmetric(), HomogeneousMinimumSymmetric())

NOISE_AWARE = (
    "additive:minimum",
    "additive:rho-minimum",
    "additive:symmetric",
    "additive:homogeneous",
    "augmented:minimum",
    "augmented:rho-minimum",
    "augmented:symmetric",
    "augmented:homogeneous",
)


def random_spd(rng, n, lo, hi):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q * rng.uniform(lo, hi, n)) @ q.T


def random_unit(rng, m):
    while True:
        a = rng.standard_normal(m)
        norm = np.linalg.norm(a)
        if norm > 0.1:
            return a / norm


def test_criterion_01_scalar_divergence():
    start = time.perf_counter()
    report = run_scalar(20)
    kf_x, kf_p = report.estimates["kf"], report.variances["kf"]
    uk_x, uk_p = report.estimates["additive:minimum"], report.variances["additive:minimum"]
    assert kf_x.shape == uk_x.shape == (20,)
    assert np.max(np.abs(kf_x - uk_x)) <= 1e-10
    assert np.max(np.abs(kf_p - uk_p)) <= 1e-10
    assert kf_x[0] == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert kf_p[0] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert ("noise-blind", 2) in report.failures
    assert time.perf_counter() - start < 1.0


def test_criterion_02_euclidean_reduction():
    start = time.perf_counter()
    rng = np.random.default_rng(404)
    for _ in range(20):
        n_x = int(rng.integers(1, 5))
        n_y = int(rng.integers(1, 5))
        A = rng.standard_normal((n_x, n_x))
        A *= 0.9 / max(1e-9, np.max(np.abs(np.linalg.eigvals(A))))
        b = rng.standard_normal(n_x)
        H = rng.standard_normal((n_y, n_x))
        c = rng.standard_normal(n_y)
        Q = random_spd(rng, n_x, 0.2, 1.5)
        R = random_spd(rng, n_y, 0.2, 1.5)
        P0 = random_spd(rng, n_x, 0.2, 1.5)
        man_x, man_y = Euclidean(n_x), Euclidean(n_y)

        def f(x, k, A=A, b=b, man=man_x):
            return ManifoldPoint(man, A @ x.coords + b)

        def h(x, k, H=H, c=c, man=man_y):
            return ManifoldPoint(man, H @ x.coords + c)

        system = AdditiveSystem(man_x, man_y, f, h, NoiseSpec(Q), NoiseSpec(R))
        general = as_general(system)
        x0 = ManifoldPoint(man_x, rng.standard_normal(n_x))
        measurements = simulate(system, x0, 50, seed=int(rng.integers(1 << 31))).measurements

        st_kf = FilterState(x0, P0)
        st_add = FilterState(x0, P0)
        st_aug = FilterState(x0, P0)
        for y in measurements:
            st_kf = linear_kf_step(st_kf, A, H, Q, R, y, f_offset=b, h_offset=c)
            st_add = additive_step(st_add, system, y)
            st_aug = augmented_step(st_aug, general, y)
            for st in (st_add, st_aug):
                assert np.max(np.abs(st.point.coords - st_kf.point.coords)) <= 1e-9
                assert np.max(np.abs(st.cov - st_kf.cov)) <= 1e-9
    assert time.perf_counter() - start < 10.0


def test_criterion_03_sigma_moment_compliance():
    start = time.perf_counter()
    rng = np.random.default_rng(405)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        mean = rng.standard_normal(n)
        P = random_spd(rng, n, 0.3, 3.0)
        for kind in ALL_KINDS:
            s = euclidean_sigma(kind, mean, P)
            expected = n + 1 if isinstance(kind, (Minimum, RhoMinimum)) else 2 * n
            assert s.size == expected
            got_mean = s.w_mean @ s.points
            assert np.max(np.abs(got_mean - mean)) <= 1e-12
            centered = s.points - mean
            scatter = (centered.T * s.w_cov) @ centered
            assert np.linalg.norm(scatter - P, "fro") <= 1e-10 * np.linalg.norm(P, "fro")
    assert time.perf_counter() - start < 5.0


def test_criterion_04_sphere_lift_roundtrip():
    start = time.perf_counter()
    rng = np.random.default_rng(406)
    for man in (Sphere(2), Sphere(3)):
        d = man.intrinsic_dim
        for _ in range(50):
            base = ManifoldPoint(man, random_unit(rng, man.ambient_dim))
            cov = random_spd(rng, d, 0.005, 0.05)
            est = RandomPointEstimate(base, cov)
            for kind in ALL_KINDS:
                lifted = riemannian_sigma(kind, est)
                mu = karcher_mean(lifted, tol=1e-10)
                assert man.dist(mu.coords, base.coords) <= 1e-8
                got = sample_covariance(lifted, mu)
                assert np.linalg.norm(got - cov, "fro") <= 1e-8
    assert time.perf_counter() - start < 10.0


def test_criterion_05_transport_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(407)
    for _ in range(1000):
        man = Sphere(int(rng.integers(2, 6)))
        m = man.ambient_dim
        a = random_unit(rng, m)
        while True:
            b = random_unit(rng, m)
            if float(a @ b) > -0.9:
                break
        v = rng.standard_normal(m)
        v -= (v @ a) * a
        moved = man.transport(v, a, b)
        assert abs(np.linalg.norm(moved) - np.linalg.norm(v)) <= 1e-9
        back = man.transport(moved, b, a)
        assert np.max(np.abs(back - v)) <= 1e-9
        pa, pb = ManifoldPoint(man, a), ManifoldPoint(man, b)
        P = random_spd(rng, man.intrinsic_dim, 0.1, 2.0)
        Pt = parallel_transport_cov(P, pa, pb)
        assert np.max(np.abs(np.linalg.eigvalsh(Pt) - np.linalg.eigvalsh(P))) <= 1e-9
    assert time.perf_counter() - start < 5.0


def test_criterion_06_noise_pushforward_monte_carlo():
    start = time.perf_counter()
    man = Sphere(2)
    pole = ManifoldPoint(man, np.array([0.0, 0.0, 1.0]))
    closed = add_tangent_noise(
        RandomPointEstimate(pole, 0.01 * np.eye(2)),
        NoiseSpec(0.02 * np.eye(2), mean=[0.1, 0.0]),
    )
    assert np.allclose(
        closed.mean.coords, [np.sin(0.1), 0.0, np.cos(0.1)], atol=1e-14
    )
    assert np.allclose(closed.cov, 0.03 * np.eye(2), atol=1e-14)

    n = 100_000
    rng = np.random.default_rng(2026)
    u = rng.standard_normal((n, 2)) * np.sqrt(0.01)
    w = np.array([0.1, 0.0]) + rng.standard_normal((n, 2)) * np.sqrt(0.02)
    frame = man.frame(pole.coords)
    pts = man.exp(pole.coords, (u + w) @ frame)
    ws = WeightedSet(man, pts, np.full(n, 1.0 / n))
    mu = karcher_mean(ws, tol=1e-10)
    cov = sample_covariance(ws, mu)

    se_mean = np.sqrt(np.diag(cov) / n)
    se_cov = np.sqrt((np.outer(np.diag(cov), np.diag(cov)) + cov**2) / n)
    dmean = man.frame(closed.mean.coords) @ man.log(closed.mean.coords, mu.coords)
    dcov = parallel_transport_cov(cov, mu, closed.mean) - closed.cov
    assert np.all(np.abs(dmean) <= 3.0 * se_mean)
    assert np.all(np.abs(dcov) <= 3.0 * se_cov)
    assert time.perf_counter() - start < 30.0


@pytest.fixture(scope="module")
def satellite_bench(tmp_path_factory):
    """Full 100-run benchmark executed twice into separate directories."""
    outs, elapsed = [], []
    for tag in ("first", "second"):
        out = tmp_path_factory.mktemp(f"bench_{tag}")
        t0 = time.perf_counter()
        rc = cli_main(["bench", "satellite", "--out", str(out)])
        elapsed.append(time.perf_counter() - t0)
        assert rc == 0
        outs.append(out)
    return outs, elapsed


def test_criterion_07_satellite_benchmark(satellite_bench):
    outs, elapsed = satellite_bench
    out = outs[0]

    rmse = {}
    failed = {}
    with open(out / "summary.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            rmse[row["filter"]] = float(row["rmse"])
            failed[row["filter"]] = int(row["failed_runs"])
            assert int(row["total_runs"]) == 100
    assert set(rmse) == set(NOISE_AWARE) | {"noise-blind"}

    # (a) every noise-aware variant finishes every run with finite,
    # positiveness-preserving covariances.
    rows_per_filter = {}
    with open(out / "trajectory.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            name = row["filter"]
            rows_per_filter[name] = rows_per_filter.get(name, 0) + 1
            assert np.isfinite(float(row["geodesic_error"]))
            assert float(row["min_cov_eig"]) > -1e-6
    for name in NOISE_AWARE:
        assert failed[name] == 0
        assert rows_per_filter[name] == 100 * 200
        assert np.isfinite(rmse[name]) and rmse[name] > 0.0

    # (b) the eight noise-aware variants agree to within half a percent.
    values = np.array([rmse[name] for name in NOISE_AWARE])
    assert values.max() / values.min() - 1.0 <= 0.005

    # (c) the noise-blind baseline is flagged as failed in all 100 runs.
    assert failed["noise-blind"] == 100
    with open(out / "failures.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 100
    assert all(r["filter"] == "noise-blind" for r in rows)

    assert sum(elapsed) < 300.0


def test_criterion_08_benchmark_determinism(satellite_bench):
    outs, elapsed = satellite_bench
    for name in ("trajectory.csv", "summary.csv", "failures.csv"):
        first = (outs[0] / name).read_bytes()
        second = (outs[1] / name).read_bytes()
        assert first == second, f"{name} differs between identical runs"
    assert sum(elapsed) < 300.0
