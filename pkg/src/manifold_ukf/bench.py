"""Benchmark harness: satellite attitude tracking and a scalar stress case.

The satellite benchmark estimates a rotating body's attitude on the unit
3-sphere of quaternions: truth comes from Runge-Kutta integration of the
attitude kinematics under a slowly varying angular-velocity profile,
measurements are tangent-Gaussian perturbations of the truth, and every
configured filter consumes the identical measurement stream per run. The
scalar case runs a one-dimensional affine system on which the noise-blind
baseline provably collapses at step 2 while the noise-aware filters match a
linear Kalman filter.

Reports are written as plain CSV plus a JSON manifest. CSV content is a pure
function of the configuration (wall time lives only in the manifest), so a
re-run with the same config and seed produces byte-identical CSV files.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .errors import (
    ContractViolationError,
    PositivenessLossError,
    SingularInnovationError,
)
from .filters import (
    FilterOptions,
    FilterState,
    additive_step,
    augmented_step,
    linear_kf_step,
    noise_blind_step,
)
from .linalg import min_eigenvalue, sqrt_psd
from .manifolds import Euclidean, ManifoldPoint, Sphere
from .quaternion import (
    integrate_attitude,
    left_product_matrix,
    normalize,
    rotation_quaternion,
)
from .sigma import (
    HomogeneousMinimumSymmetric,
    Minimum,
    MinimumSymmetric,
    RhoMinimum,
    SigmaKind,
)
from .systems import AdditiveSystem, NoiseSpec, as_general

RATE_AMPLITUDE = 0.03

SIGMA_TOKENS: dict[str, SigmaKind] = {
    "minimum": Minimum(),
    "rho-minimum": RhoMinimum(),
    "symmetric": MinimumSymmetric(),
    "homogeneous": HomogeneousMinimumSymmetric(),
}

DEFAULT_FILTERS = (
    "additive:minimum",
    "additive:rho-minimum",
    "additive:symmetric",
    "additive:homogeneous",
    "augmented:minimum",
    "augmented:rho-minimum",
    "augmented:symmetric",
    "augmented:homogeneous",
    "noise-blind",
)

_DEFAULT_ATTITUDE = (0.96, 0.13, 0.19, np.sqrt(1.0 - 0.96**2 - 0.13**2 - 0.19**2))


def angular_rate(t: float, unit: str = "deg") -> np.ndarray:
    """Angular velocity profile of the benchmark scenario.

    Three sinusoids of amplitude 0.03 sharing the phase variable pi*t/600,
    offset by 0, -300 and -600. With ``unit="deg"`` (default) the sine
    arguments are read as degrees; ``unit="rad"`` converts the offsets to
    radians and reads the phase variable as radians (a sensitivity variant).
    """
    phase = np.pi * t / 600.0
    if unit == "deg":
        args = np.radians([phase, phase - 300.0, phase - 600.0])
    elif unit == "rad":
        args = np.array(
            [phase, phase - np.radians(300.0), phase - np.radians(600.0)]
        )
    else:
        raise ContractViolationError(f"rate_unit must be 'deg' or 'rad', got {unit!r}")
    return RATE_AMPLITUDE * np.sin(args)


@dataclass(frozen=True)
class SatelliteConfig:
    """Configuration of the attitude-tracking benchmark.

    Noise scales are standard deviations per tangent axis; the covariances
    are ``std**2 * I``. ``initial_attitude`` is the true initial quaternion
    (scalar first), also used to initialize every filter; the initial
    covariance is ``p0_scale * I``.
    """

    dt: float = 0.1
    duration: float = 20.0
    num_runs: int = 100
    seed: int = 42
    process_noise_std: float = 0.31236e-6
    measurement_noise_std: float = 0.5 * np.pi / 180.0 * 1e-6
    p0_scale: float = 1e-6
    rate_unit: str = "deg"
    filters: tuple[str, ...] = DEFAULT_FILTERS
    initial_attitude: tuple[float, float, float, float] = _DEFAULT_ATTITUDE

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ContractViolationError("dt must be positive")
        if self.duration < self.dt:
            raise ContractViolationError("duration must cover at least one step")
        if self.num_runs < 1:
            raise ContractViolationError("num_runs must be >= 1")
        if self.process_noise_std < 0.0 or self.measurement_noise_std < 0.0:
            raise ContractViolationError("noise scales must be nonnegative")
        if self.p0_scale <= 0.0:
            raise ContractViolationError("p0_scale must be positive")
        if self.rate_unit not in ("deg", "rad"):
            raise ContractViolationError("rate_unit must be 'deg' or 'rad'")
        object.__setattr__(self, "filters", tuple(self.filters))
        for name in self.filters:
            _check_filter_token(name)
        att = np.asarray(self.initial_attitude, dtype=float)
        if att.shape != (4,):
            raise ContractViolationError("initial_attitude must have 4 components")
        if abs(float(np.linalg.norm(att)) - 1.0) > 1e-9:
            raise ContractViolationError("initial_attitude must be a unit quaternion")
        object.__setattr__(
            self, "initial_attitude", tuple(float(c) for c in normalize(att))
        )

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))

    def q0(self) -> np.ndarray:
        return np.asarray(self.initial_attitude, dtype=float)

    def process_cov(self) -> np.ndarray:
        return self.process_noise_std**2 * np.eye(3)

    def measurement_cov(self) -> np.ndarray:
        return self.measurement_noise_std**2 * np.eye(3)

    def initial_cov(self) -> np.ndarray:
        return self.p0_scale * np.eye(3)


def _check_filter_token(name: str) -> None:
    if name == "noise-blind":
        return
    family, sep, kind = name.partition(":")
    if sep and family in ("additive", "augmented") and kind in SIGMA_TOKENS:
        return
    raise ContractViolationError(
        f"unknown filter {name!r}; expected 'noise-blind' or "
        f"'additive:<kind>' / 'augmented:<kind>' with kind in "
        f"{sorted(SIGMA_TOKENS)}"
    )


# --------------------------------------------------------------------------
# Config file parsing (plain key=value lines)

_CONFIG_PARSERS: dict[str, Callable[[str], object]] = {
    "dt": float,
    "duration": float,
    "num_runs": int,
    "seed": int,
    "process_noise_std": float,
    "measurement_noise_std": float,
    "p0_scale": float,
    "rate_unit": str,
    "filters": lambda s: tuple(part.strip() for part in s.split(",") if part.strip()),
    "initial_attitude": lambda s: tuple(float(part) for part in s.split(",")),
}


def parse_config(text: str) -> SatelliteConfig:
    """Parse ``key=value`` lines (``#`` comments, blank lines allowed)."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _CONFIG_PARSERS:
            raise ContractViolationError(
                f"config line {lineno}: expected '<key>=<value>' with key in "
                f"{sorted(_CONFIG_PARSERS)}, got {raw!r}"
            )
        try:
            values[key] = _CONFIG_PARSERS[key](value.strip())
        except ValueError as exc:
            raise ContractViolationError(
                f"config line {lineno}: bad value for {key}: {exc}"
            ) from exc
    return SatelliteConfig(**values)


def load_config(path: str | Path) -> SatelliteConfig:
    return parse_config(Path(path).read_text())


# --------------------------------------------------------------------------
# Truth generation and the filtering system


def generate_truth(config: SatelliteConfig) -> np.ndarray:
    """True attitude trajectory, shape (steps + 1, 4), by RK4 integration."""
    return integrate_attitude(
        lambda t: angular_rate(t, config.rate_unit),
        config.q0(),
        config.dt,
        config.steps,
    )


def make_attitude_system(config: SatelliteConfig) -> AdditiveSystem:
    """The filtering model: discrete rotation propagator, identity measurement.

    The propagator holds the angular velocity of the step's start time for
    the whole step: ``f_k(x) = [cos(theta), sin(theta) * omega_hat] * x``
    with ``theta = |omega((k-1) dt)| dt / 2``.
    """
    man = Sphere(3)
    dt = config.dt
    unit = config.rate_unit
    # The step rotation depends on k alone; cache it as a left-product
    # matrix so the map is a single matrix-vector multiply per sigma point.
    rot_mats: dict[int, np.ndarray] = {}

    def f(x: ManifoldPoint, k: int) -> ManifoldPoint:
        mat = rot_mats.get(k)
        if mat is None:
            rot = rotation_quaternion(angular_rate((k - 1) * dt, unit), dt)
            mat = rot_mats.setdefault(k, left_product_matrix(rot))
        return ManifoldPoint(man, normalize(mat @ x.coords), check=False)

    def h(x: ManifoldPoint, k: int) -> ManifoldPoint:
        return x

    return AdditiveSystem(
        state_manifold=man,
        measurement_manifold=man,
        f=f,
        h=h,
        process_noise=NoiseSpec(config.process_cov()),
        measurement_noise=NoiseSpec(config.measurement_cov()),
    )


def _step_function(token: str, system: AdditiveSystem):
    """Bind a filter token to a (state, measurement) -> state callable."""
    if token == "noise-blind":
        return lambda state, y: noise_blind_step(state, system.f, system.h, y)
    family, _, kind_name = token.partition(":")
    kind = SIGMA_TOKENS[kind_name]
    if family == "additive":
        opts = FilterOptions(h_is_identity=True)
        return lambda state, y: additive_step(state, system, y, kind, opts)
    general = as_general(system)
    return lambda state, y: augmented_step(state, general, y, kind)


# --------------------------------------------------------------------------
# Report containers


@dataclass(frozen=True)
class FilterSummary:
    name: str
    rmse: float
    failed_runs: int
    total_runs: int


@dataclass(frozen=True, eq=False)
class RunTrace:
    """One filter's pass over one run: estimates until completion or failure."""

    run_id: int
    name: str
    estimates: np.ndarray = field(repr=False)  # (completed_steps, ambient)
    errors: np.ndarray = field(repr=False)  # geodesic error per step
    min_eigs: np.ndarray = field(repr=False)
    failed_at: int | None = None

    @property
    def completed(self) -> int:
        return self.estimates.shape[0]


@dataclass(frozen=True, eq=False)
class BenchReport:
    config: SatelliteConfig
    truth: np.ndarray = field(repr=False)  # (steps + 1, 4)
    traces: tuple[RunTrace, ...] = field(repr=False)
    summaries: tuple[FilterSummary, ...] = ()

    @property
    def failures(self) -> list[tuple[int, str, int]]:
        return [
            (t.run_id, t.name, t.failed_at)
            for t in self.traces
            if t.failed_at is not None
        ]


def run_satellite(config: SatelliteConfig) -> BenchReport:
    """Run every configured filter over ``num_runs`` measurement streams.

    Truth is deterministic; per-run randomness enters only through the
    measurements, drawn from one spawned RNG stream per run so all filters
    in a run see identical data. Filter breakdowns (positiveness loss,
    singular innovation) are recorded, never raised.
    """
    man = Sphere(3)
    truth = generate_truth(config)
    system = make_attitude_system(config)
    step_fns = [(name, _step_function(name, system)) for name in config.filters]
    meas_root = sqrt_psd(config.measurement_cov())
    p0 = config.initial_cov()
    x0 = ManifoldPoint(man, truth[0])

    children = np.random.SeedSequence(config.seed).spawn(config.num_runs)
    traces: list[RunTrace] = []
    for run_id in range(config.num_runs):
        rng = np.random.default_rng(children[run_id])
        measurements = np.empty((config.steps, 4))
        for k in range(1, config.steps + 1):
            coords = meas_root @ rng.standard_normal(3)
            ambient = coords @ man.frame(truth[k])
            measurements[k - 1] = man.exp(truth[k], ambient)
        for name, step_fn in step_fns:
            traces.append(
                _run_filter(name, step_fn, x0, p0, truth, measurements, run_id)
            )

    summaries = tuple(
        _summarize(name, [t for t in traces if t.name == name], config.num_runs)
        for name in config.filters
    )
    return BenchReport(config=config, truth=truth, traces=tuple(traces), summaries=summaries)


def _run_filter(
    name: str,
    step_fn,
    x0: ManifoldPoint,
    p0: np.ndarray,
    truth: np.ndarray,
    measurements: np.ndarray,
    run_id: int,
) -> RunTrace:
    man = x0.manifold
    steps = measurements.shape[0]
    state = FilterState(x0, p0)
    estimates = np.empty((steps, man.ambient_dim))
    errors = np.empty(steps)
    min_eigs = np.empty(steps)
    failed_at: int | None = None
    done = 0
    for k in range(1, steps + 1):
        y_coords = measurements[k - 1]
        # The quaternion double cover makes -y the same attitude as y; keep
        # the measurement on the current estimate's hemisphere so the log
        # stays far from the cut locus.
        if float(y_coords @ state.point.coords) < 0.0:
            y_coords = -y_coords
        try:
            state = step_fn(state, ManifoldPoint(man, y_coords))
        except (PositivenessLossError, SingularInnovationError) as err:
            failed_at = getattr(err, "step", None) or k
            break
        estimates[done] = state.point.coords
        errors[done] = man.dist(state.point.coords, truth[k])
        min_eigs[done] = min_eigenvalue(state.cov)
        done += 1
    return RunTrace(
        run_id=run_id,
        name=name,
        estimates=estimates[:done].copy(),
        errors=errors[:done].copy(),
        min_eigs=min_eigs[:done].copy(),
        failed_at=failed_at,
    )


def _summarize(name: str, traces: list[RunTrace], total_runs: int) -> FilterSummary:
    per_run = [
        float(np.sqrt(np.mean(t.errors**2)))
        for t in traces
        if t.failed_at is None and t.errors.size
    ]
    rmse = float(np.mean(per_run)) if per_run else float("nan")
    failed = sum(1 for t in traces if t.failed_at is not None)
    return FilterSummary(name=name, rmse=rmse, failed_runs=failed, total_runs=total_runs)


# --------------------------------------------------------------------------
# Scalar stress case


@dataclass(frozen=True, eq=False)
class ScalarReport:
    steps: int
    estimates: dict[str, np.ndarray] = field(repr=False)  # per filter, (completed,)
    variances: dict[str, np.ndarray] = field(repr=False)
    failures: tuple[tuple[str, int], ...] = ()


SCALAR_FILTERS = ("kf", "additive:minimum", "noise-blind")


def run_scalar(steps: int = 20) -> ScalarReport:
    """Constant-measurement scalar system that breaks the noise-blind filter.

    State prior (1, 1), identity dynamics, measurement map ``y = 1 - x``,
    unit process and measurement noise, observed measurement fixed at 1.
    The linear Kalman filter and the additive sigma filter agree to
    rounding; the noise-blind baseline reaches zero covariance after one
    step and loses positiveness at step 2.
    """
    if steps < 1:
        raise ContractViolationError("steps must be >= 1")
    man = Euclidean(1)
    y_obs = ManifoldPoint(man, np.array([1.0]))
    x0 = FilterState(ManifoldPoint(man, np.array([1.0])), np.array([[1.0]]))
    unit = np.array([[1.0]])

    def f(x: ManifoldPoint, k: int) -> ManifoldPoint:
        return x

    def h(x: ManifoldPoint, k: int) -> ManifoldPoint:
        return ManifoldPoint(man, 1.0 - x.coords)

    system = AdditiveSystem(
        state_manifold=man,
        measurement_manifold=man,
        f=f,
        h=h,
        process_noise=NoiseSpec(unit),
        measurement_noise=NoiseSpec(unit),
    )

    steppers = {
        "kf": lambda st: linear_kf_step(
            st, unit, -unit, unit, unit, y_obs, h_offset=np.array([1.0])
        ),
        "additive:minimum": lambda st: additive_step(st, system, y_obs, Minimum()),
        "noise-blind": lambda st: noise_blind_step(st, f, h, y_obs),
    }

    estimates: dict[str, np.ndarray] = {}
    variances: dict[str, np.ndarray] = {}
    failures: list[tuple[str, int]] = []
    for name, stepper in steppers.items():
        est = np.empty(steps)
        var = np.empty(steps)
        state = x0
        done = 0
        for k in range(1, steps + 1):
            try:
                state = stepper(state)
            except (PositivenessLossError, SingularInnovationError) as err:
                failures.append((name, getattr(err, "step", None) or k))
                break
            est[done] = state.point.coords[0]
            var[done] = state.cov[0, 0]
            done += 1
        estimates[name] = est[:done].copy()
        variances[name] = var[:done].copy()
    return ScalarReport(
        steps=steps,
        estimates=estimates,
        variances=variances,
        failures=tuple(failures),
    )


# --------------------------------------------------------------------------
# Serialization


def _fmt(x: float) -> str:
    return repr(float(x))


def _join(coords: np.ndarray) -> str:
    return ";".join(_fmt(c) for c in coords)


def write_satellite_report(
    report: BenchReport, out_dir: str | Path, wall_time_s: float | None = None
) -> dict[str, Path]:
    """Write trajectory.csv, summary.csv, failures.csv and manifest.json.

    CSV bytes depend only on the report content; wall time goes into the
    manifest alone.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trajectory": out / "trajectory.csv",
        "summary": out / "summary.csv",
        "failures": out / "failures.csv",
        "manifest": out / "manifest.json",
    }

    with paths["trajectory"].open("w", newline="") as fh:
        fh.write("run_id,step,filter,truth,estimate,geodesic_error,min_cov_eig\n")
        for trace in report.traces:
            for i in range(trace.completed):
                k = i + 1
                fh.write(
                    f"{trace.run_id},{k},{trace.name},"
                    f"{_join(report.truth[k])},{_join(trace.estimates[i])},"
                    f"{_fmt(trace.errors[i])},{_fmt(trace.min_eigs[i])}\n"
                )

    with paths["summary"].open("w", newline="") as fh:
        fh.write("filter,rmse,rmse_x1e6,failed_runs,total_runs\n")
        for s in report.summaries:
            fh.write(
                f"{s.name},{_fmt(s.rmse)},{_fmt(s.rmse * 1e6)},"
                f"{s.failed_runs},{s.total_runs}\n"
            )

    _write_failures(paths["failures"], report.failures)
    _write_manifest(
        paths["manifest"], "bench satellite", report.config, wall_time_s
    )
    return paths


def write_scalar_report(
    report: ScalarReport, out_dir: str | Path, wall_time_s: float | None = None
) -> dict[str, Path]:
    """Write estimates.csv, failures.csv and manifest.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "estimates": out / "estimates.csv",
        "failures": out / "failures.csv",
        "manifest": out / "manifest.json",
    }
    with paths["estimates"].open("w", newline="") as fh:
        fh.write("step,filter,estimate,variance\n")
        for name, est in report.estimates.items():
            var = report.variances[name]
            for i in range(est.shape[0]):
                fh.write(f"{i + 1},{name},{_fmt(est[i])},{_fmt(var[i])}\n")
    _write_failures(
        paths["failures"], [(0, name, step) for name, step in report.failures]
    )
    _write_manifest(
        paths["manifest"], "bench scalar", {"steps": report.steps}, wall_time_s
    )
    return paths


def _write_failures(path: Path, rows) -> None:
    with path.open("w", newline="") as fh:
        fh.write("run_id,filter,step\n")
        for run_id, name, step in rows:
            fh.write(f"{run_id},{name},{step}\n")


def _write_manifest(path: Path, command: str, config, wall_time_s) -> None:
    if dataclasses.is_dataclass(config) and not isinstance(config, type):
        config = dataclasses.asdict(config)
    manifest = {
        "command": command,
        "config": config,
        "version": __version__,
        "wall_time_s": wall_time_s,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
