"""System models and trajectory simulation.

A discrete-time system pairs a propagation map ``f`` with a measurement map
``h``. Noise enters either *additively* (a tangent-space perturbation at the
mapped point, described by a :class:`NoiseSpec`) or *generally* (an extra
random-point argument to the map, described by a
:class:`~manifold_ukf.stats.RandomPointEstimate` on its own manifold). The
four dataclasses below cover the combinations; :func:`as_general` rewrites
additive halves into equivalent general ones so both filter families can run
on the same model.

Map signatures carry an explicit step index so time-varying dynamics need no
closure state: ``f(x, k)`` / ``h(x, k)`` for additive halves and
``f(x, q, k)`` / ``h(x, r, k)`` for general ones, with ``k`` counting from 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ContractViolationError
from .linalg import check_symmetric, sqrt_psd
from .manifolds import (
    Euclidean,
    Manifold,
    ManifoldPoint,
    exp_map,
    from_coords,
    parallel_transport_cov,
)
from .stats import RandomPointEstimate

AdditiveMap = Callable[[ManifoldPoint, int], ManifoldPoint]
GeneralMap = Callable[[ManifoldPoint, ManifoldPoint, int], ManifoldPoint]


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Additive tangent-space noise.

    ``cov`` (and the optional nonzero ``mean``) are expressed in intrinsic
    coordinates of the deterministic tangent frame at whatever point the
    noise is applied to.
    """

    cov: np.ndarray = field(repr=False)
    mean: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        cov = np.asarray(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ContractViolationError("noise covariance must be a square matrix")
        check_symmetric(cov)
        cov = cov.copy()
        cov.flags.writeable = False
        object.__setattr__(self, "cov", cov)
        if self.mean is not None:
            mean = np.asarray(self.mean, dtype=float)
            if mean.shape != (cov.shape[0],):
                raise ContractViolationError(
                    "noise mean length must match the covariance size"
                )
            mean = mean.copy()
            mean.flags.writeable = False
            object.__setattr__(self, "mean", mean)

    @property
    def dim(self) -> int:
        return self.cov.shape[0]

    @property
    def has_offset(self) -> bool:
        """Whether the noise mean actually moves the point it is applied to."""
        return self.mean is not None and bool(np.any(self.mean != 0.0))


@dataclass(frozen=True, eq=False)
class AdditiveSystem:
    """Tangent-noise propagation and tangent-noise measurement."""

    state_manifold: Manifold
    measurement_manifold: Manifold
    f: AdditiveMap
    h: AdditiveMap
    process_noise: NoiseSpec
    measurement_noise: NoiseSpec

    def __post_init__(self) -> None:
        _check_noise_dim(self.process_noise, self.state_manifold, "process")
        _check_noise_dim(self.measurement_noise, self.measurement_manifold, "measurement")


@dataclass(frozen=True, eq=False)
class GeneralSystem:
    """Random-point noise in both the propagation and the measurement."""

    state_manifold: Manifold
    measurement_manifold: Manifold
    f: GeneralMap
    h: GeneralMap
    process_noise: RandomPointEstimate
    measurement_noise: RandomPointEstimate


@dataclass(frozen=True, eq=False)
class AdditiveProcessSystem:
    """Tangent-noise propagation, random-point-noise measurement."""

    state_manifold: Manifold
    measurement_manifold: Manifold
    f: AdditiveMap
    h: GeneralMap
    process_noise: NoiseSpec
    measurement_noise: RandomPointEstimate

    def __post_init__(self) -> None:
        _check_noise_dim(self.process_noise, self.state_manifold, "process")


@dataclass(frozen=True, eq=False)
class AdditiveMeasurementSystem:
    """Random-point-noise propagation, tangent-noise measurement."""

    state_manifold: Manifold
    measurement_manifold: Manifold
    f: GeneralMap
    h: AdditiveMap
    process_noise: RandomPointEstimate
    measurement_noise: NoiseSpec

    def __post_init__(self) -> None:
        _check_noise_dim(self.measurement_noise, self.measurement_manifold, "measurement")


AnySystem = Union[
    AdditiveSystem, GeneralSystem, AdditiveProcessSystem, AdditiveMeasurementSystem
]


def _check_noise_dim(noise: NoiseSpec, manifold: Manifold, role: str) -> None:
    if noise.dim != manifold.intrinsic_dim:
        raise ContractViolationError(
            f"{role} noise dimension {noise.dim} does not match the manifold "
            f"dimension {manifold.intrinsic_dim}"
        )


def add_tangent_noise(
    est: RandomPointEstimate, noise: NoiseSpec
) -> RandomPointEstimate:
    """Fold additive tangent noise into a random-point estimate.

    With a zero noise mean the point is untouched and only the covariances
    add. A nonzero mean moves the point along the geodesic it designates and
    parallel-transports the summed covariance to the new base point.
    """
    if noise.cov.shape != est.cov.shape:
        raise ContractViolationError(
            "noise covariance size does not match the estimate covariance"
        )
    summed = est.cov + noise.cov
    if not noise.has_offset:
        return RandomPointEstimate(est.mean, summed)
    moved = exp_map(est.mean, from_coords(est.mean, noise.mean))
    return RandomPointEstimate(moved, parallel_transport_cov(summed, est.mean, moved))


def _lift_additive_map(f: AdditiveMap) -> GeneralMap:
    def lifted(x: ManifoldPoint, q: ManifoldPoint, k: int) -> ManifoldPoint:
        base = f(x, k)
        man = base.manifold
        ambient = q.coords @ man.frame(base.coords)
        return ManifoldPoint(man, man.exp(base.coords, ambient), check=False)

    return lifted


def _lift_noise_spec(noise: NoiseSpec) -> RandomPointEstimate:
    coords = noise.mean if noise.mean is not None else np.zeros(noise.dim)
    return RandomPointEstimate(
        ManifoldPoint(Euclidean(noise.dim), coords), noise.cov
    )


def as_general(system: AnySystem) -> GeneralSystem:
    """Rewrite any additive half of ``system`` in general random-point form.

    An additive tangent noise becomes a Euclidean random point whose
    coordinates are read as tangent coordinates at the mapped point, so the
    general system is model-equivalent to the original.
    """
    if isinstance(system, GeneralSystem):
        return system
    f, q = system.f, system.process_noise
    if isinstance(q, NoiseSpec):
        f, q = _lift_additive_map(f), _lift_noise_spec(q)
    h, r = system.h, system.measurement_noise
    if isinstance(r, NoiseSpec):
        h, r = _lift_additive_map(h), _lift_noise_spec(r)
    return GeneralSystem(
        state_manifold=system.state_manifold,
        measurement_manifold=system.measurement_manifold,
        f=f,
        h=h,
        process_noise=q,
        measurement_noise=r,
    )


def sample_tangent_noise(
    rng: np.random.Generator,
    point: ManifoldPoint,
    cov: np.ndarray,
    mean: np.ndarray | None = None,
) -> ManifoldPoint:
    """Draw one point from a tangent-space Gaussian centered near ``point``.

    The draw is ``exp_point(frame^T (mean + sqrt(cov) z))`` with
    ``z ~ N(0, I)``; exactly one ``standard_normal`` call is made so
    callers can rely on a fixed stream layout.
    """
    coords = sqrt_psd(cov) @ rng.standard_normal(cov.shape[0])
    if mean is not None:
        coords = mean + coords
    return exp_map(point, from_coords(point, coords))


def _sample_noise_point(
    rng: np.random.Generator, noise: RandomPointEstimate
) -> ManifoldPoint:
    return sample_tangent_noise(rng, noise.mean, noise.cov)


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """A simulated truth trajectory and its measurements.

    ``truth`` holds ``steps + 1`` points (the initial state first);
    ``measurements`` holds one point per step, measured *after* propagation.
    """

    truth: tuple[ManifoldPoint, ...]
    measurements: tuple[ManifoldPoint, ...]

    @property
    def steps(self) -> int:
        return len(self.measurements)


def simulate(
    system: AnySystem, x0: ManifoldPoint, steps: int, seed: int | None = None
) -> SimulationResult:
    """Roll a system forward from ``x0`` for ``steps`` steps.

    Process and measurement noise come from two independently seeded
    streams, each consuming one standard-normal vector per step, so a system
    and its :func:`as_general` rewrite produce matching trajectories under
    the same seed.
    """
    if steps < 0:
        raise ContractViolationError("steps must be nonnegative")
    if x0.manifold != system.state_manifold:
        raise ContractViolationError("initial state is not on the system manifold")
    seq_q, seq_r = np.random.SeedSequence(seed).spawn(2)
    rng_q = np.random.default_rng(seq_q)
    rng_r = np.random.default_rng(seq_r)

    q_spec, r_spec = system.process_noise, system.measurement_noise
    truth = [x0]
    measurements = []
    x = x0
    for k in range(1, steps + 1):
        if isinstance(q_spec, NoiseSpec):
            base = system.f(x, k)
            x = sample_tangent_noise(rng_q, base, q_spec.cov, q_spec.mean)
        else:
            x = system.f(x, _sample_noise_point(rng_q, q_spec), k)
        truth.append(x)
        if isinstance(r_spec, NoiseSpec):
            base = system.h(x, k)
            measurements.append(
                sample_tangent_noise(rng_r, base, r_spec.cov, r_spec.mean)
            )
        else:
            measurements.append(system.h(x, _sample_noise_point(rng_r, r_spec), k))
    return SimulationResult(truth=tuple(truth), measurements=tuple(measurements))
