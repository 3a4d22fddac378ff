"""Unscented Kalman filter steps for manifold-valued states.

Each step function advances a :class:`FilterState` by one predict/correct
cycle and returns the new state; a trajectory is a fold over measurements.
Noise handling selects the step function:

:func:`additive_step`
    Tangent-space noise folded in after each transform (cheapest).
:func:`augmented_step`
    Noise manifolds stacked onto the state via a product manifold, so the
    noise points ride through the sigma transform themselves.
:func:`partially_additive_step`
    One half additive, the other augmented.
:func:`noise_blind_step`
    A deliberately faithful port of the earlier manifold UKF from the
    literature that ignores noise statistics everywhere; kept as a baseline
    because its covariance collapses and then loses positiveness.
:func:`linear_kf_step`
    Textbook linear Kalman step on Euclidean states, used as an oracle.

Covariance positivity is *detected, never repaired*: a corrected covariance
with an eigenvalue below ``-1e-9 * (1 + |trace|)`` raises
:class:`PositivenessLossError` carrying the step index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContractViolationError,
    ManifoldUKFError,
    NotPSDError,
    PositivenessLossError,
    SingularInnovationError,
    tag_stage,
)
from .linalg import min_eigenvalue, spd_solve, symmetrize
from .manifolds import (
    Manifold,
    ManifoldPoint,
    Product,
    exp_map,
    from_coords,
    log_map,
    parallel_transport_cov,
    to_coords,
    transport_matrix,
)
from .sigma import HomogeneousMinimumSymmetric, Minimum, SigmaKind
from .stats import KARCHER_MAX_ITER, KARCHER_TOL, RandomPointEstimate, WeightedSet
from .systems import (
    AdditiveMap,
    AdditiveMeasurementSystem,
    AdditiveProcessSystem,
    AdditiveSystem,
    GeneralMap,
    GeneralSystem,
    NoiseSpec,
    add_tangent_noise,
)
from .transform import unscented_transform

# Corrected covariances are accepted down to -POSITIVENESS_TOL * (1 + |trace|).
POSITIVENESS_TOL = 1e-9
# The noise-blind baseline treats an innovation covariance with smallest
# eigenvalue at or below INNOVATION_FLOOR * (1 + |trace|) as collapsed.
INNOVATION_FLOOR = 1e-15


@dataclass(frozen=True, eq=False)
class FilterState:
    """Corrected estimate after ``step`` measurement updates.

    ``cov`` is expressed in the deterministic tangent frame at ``point``.
    ``step`` is 0 for the initial state.
    """

    point: ManifoldPoint
    cov: np.ndarray = field(repr=False)
    step: int = 0

    def __post_init__(self):
        validated = RandomPointEstimate(self.point, self.cov)
        object.__setattr__(self, "cov", validated.cov)
        if self.step < 0:
            raise ContractViolationError("step index must be nonnegative")

    @property
    def estimate(self) -> RandomPointEstimate:
        return RandomPointEstimate(self.point, self.cov)


@dataclass(frozen=True)
class FilterOptions:
    """Knobs shared by the filter step functions.

    ``f_is_identity`` / ``h_is_identity`` replace the corresponding sigma
    transform of an *additive* half with the exact closed form (prior plus
    noise); they are ignored for augmented halves, where noise rides through
    the function itself. ``reuse_sigma`` feeds the propagated sigma set of
    the prediction into the measurement transform instead of regenerating
    from the predicted moments; it is skipped when the process-noise mean
    moved the prediction off the set's base point.
    """

    karcher_tol: float = KARCHER_TOL
    karcher_max_iter: int = KARCHER_MAX_ITER
    reuse_sigma: bool = False
    f_is_identity: bool = False
    h_is_identity: bool = False
    condition_limit: float = 1e12


_DEFAULT_OPTIONS = FilterOptions()


@dataclass(frozen=True, eq=False)
class PredictionBundle:
    """Everything the correction consumes.

    ``state`` is the predicted state estimate, ``measurement`` the predicted
    measurement estimate, and ``cross_cov`` their cross-covariance with rows
    in the state frame at ``state.mean`` and columns in the measurement
    frame at ``measurement.mean``.
    """

    state: RandomPointEstimate
    measurement: RandomPointEstimate
    cross_cov: np.ndarray = field(repr=False)

    def __post_init__(self):
        cross = np.asarray(self.cross_cov, dtype=float)
        expected = (
            self.state.manifold.intrinsic_dim,
            self.measurement.manifold.intrinsic_dim,
        )
        if cross.shape != expected:
            raise ContractViolationError(
                f"cross covariance must have shape {expected}, got {cross.shape}"
            )
        cross = cross.copy()
        cross.setflags(write=False)
        object.__setattr__(self, "cross_cov", cross)


def identity_prediction(
    est: RandomPointEstimate, noise: NoiseSpec
) -> RandomPointEstimate:
    """Exact prediction through an identity map with additive tangent noise.

    No sigma points are generated: the mean moves by the noise mean (if
    any) and the covariances add. Equals the sigma-transform path up to
    mean-solver tolerance, at closed-form cost.
    """
    return add_tangent_noise(est, noise)


# --------------------------------------------------------------------------
# Half steps. Each returns what the correction needs; the public step
# functions below only compose them.


def _predict_additive(
    est: RandomPointEstimate,
    f: AdditiveMap,
    noise: NoiseSpec,
    kind: SigmaKind,
    opts: FilterOptions,
    k: int,
) -> tuple[RandomPointEstimate, WeightedSet | None]:
    """Predicted state estimate plus the propagated sigma set (for reuse)."""
    if opts.f_is_identity:
        return identity_prediction(est, noise), None
    ut = unscented_transform(
        lambda p: f(p, k),
        est,
        kind,
        karcher_tol=opts.karcher_tol,
        karcher_max_iter=opts.karcher_max_iter,
    )
    pred = add_tangent_noise(RandomPointEstimate(ut.mean, ut.cov), noise)
    # The propagated set is based at the pre-noise mean; a noise offset
    # moves the prediction away from it, invalidating reuse.
    propagated = None if noise.has_offset else ut.dependent
    return pred, propagated


def _predict_augmented(
    est: RandomPointEstimate,
    f: GeneralMap,
    noise: RandomPointEstimate,
    kind: SigmaKind,
    opts: FilterOptions,
    k: int,
) -> tuple[RandomPointEstimate, WeightedSet | None]:
    """Prediction with the process noise stacked onto the state."""
    man_x = est.manifold
    man_q = noise.manifold
    aug = RandomPointEstimate(
        ManifoldPoint(
            Product((man_x, man_q)),
            np.concatenate([est.mean.coords, noise.mean.coords]),
        ),
        _block_diag(est.cov, noise.cov),
    )

    def f_aug(p: ManifoldPoint) -> ManifoldPoint:
        xc, qc = p.manifold.split(p.coords)
        return f(
            ManifoldPoint(man_x, xc, check=False),
            ManifoldPoint(man_q, qc, check=False),
            k,
        )

    ut = unscented_transform(
        f_aug,
        aug,
        kind,
        karcher_tol=opts.karcher_tol,
        karcher_max_iter=opts.karcher_max_iter,
    )
    # The propagated set lives on the state manifold and already carries the
    # process noise, so it is a valid stand-in for the prediction.
    return RandomPointEstimate(ut.mean, ut.cov), ut.dependent


def _measure_additive(
    pred: RandomPointEstimate,
    h: AdditiveMap,
    noise: NoiseSpec,
    man_y: Manifold,
    kind: SigmaKind,
    opts: FilterOptions,
    k: int,
    propagated: WeightedSet | None,
) -> tuple[RandomPointEstimate, np.ndarray]:
    """Predicted measurement estimate and state/measurement cross-covariance."""
    if opts.h_is_identity:
        if man_y != pred.manifold:
            raise ContractViolationError(
                "h_is_identity requires matching state and measurement manifolds"
            )
        star = pred
        cross = pred.cov
    else:
        independent = propagated if opts.reuse_sigma else None
        ut = unscented_transform(
            lambda p: h(p, k),
            pred,
            kind,
            cross=True,
            independent=independent,
            karcher_tol=opts.karcher_tol,
            karcher_max_iter=opts.karcher_max_iter,
        )
        if ut.mean.manifold != man_y:
            raise ContractViolationError(
                "measurement map landed off the declared measurement manifold"
            )
        star = RandomPointEstimate(ut.mean, ut.cov)
        cross = ut.cross_cov
    meas = add_tangent_noise(star, noise)
    if noise.has_offset:
        # The measurement frame moved with the noise mean; carry the
        # cross-covariance columns along the same geodesic.
        cross = cross @ transport_matrix(star.mean, meas.mean).T
    return meas, cross


def _measure_augmented(
    pred: RandomPointEstimate,
    h: GeneralMap,
    noise: RandomPointEstimate,
    kind: SigmaKind,
    opts: FilterOptions,
    k: int,
) -> tuple[RandomPointEstimate, np.ndarray]:
    """Measurement prediction with the noise stacked onto the state."""
    man_x = pred.manifold
    man_r = noise.manifold
    aug = RandomPointEstimate(
        ManifoldPoint(
            Product((man_x, man_r)),
            np.concatenate([pred.mean.coords, noise.mean.coords]),
        ),
        _block_diag(pred.cov, noise.cov),
    )

    def h_aug(p: ManifoldPoint) -> ManifoldPoint:
        xc, rc = p.manifold.split(p.coords)
        return h(
            ManifoldPoint(man_x, xc, check=False),
            ManifoldPoint(man_r, rc, check=False),
            k,
        )

    ut = unscented_transform(
        h_aug,
        aug,
        kind,
        cross=True,
        karcher_tol=opts.karcher_tol,
        karcher_max_iter=opts.karcher_max_iter,
    )
    meas = RandomPointEstimate(ut.mean, ut.cov)
    # Rows of the augmented cross-covariance beyond the state block pair the
    # *noise* with the measurement; the gain only needs the state block.
    cross = ut.cross_cov[: man_x.intrinsic_dim, :]
    return meas, cross


def correct(
    bundle: PredictionBundle,
    measurement: ManifoldPoint,
    step: int,
    options: FilterOptions | None = None,
) -> FilterState:
    """Fold one observed measurement into a prediction bundle.

    Gain from a symmetric positive-definite solve (condition-monitored, no
    explicit inverse), innovation in the tangent frame of the predicted
    measurement, state moved by ``exp`` of the gained innovation, covariance
    corrected at the predicted mean, positivity-checked, then parallel
    transported to the corrected mean.
    """
    opts = options or _DEFAULT_OPTIONS
    pred, meas = bundle.state, bundle.measurement
    if measurement.manifold != meas.manifold:
        raise ContractViolationError(
            "observed measurement is not on the measurement manifold"
        )
    try:
        solution, condition = spd_solve(
            meas.cov, bundle.cross_cov.T, opts.condition_limit
        )
        if solution is None:
            raise SingularInnovationError(
                f"innovation covariance condition number {condition:.6g} "
                f"exceeds the limit {opts.condition_limit:.6g}",
                condition=condition,
            )
        gain = solution.T
        corrected = symmetrize(pred.cov - gain @ meas.cov @ gain.T)
        lam = min_eigenvalue(corrected)
        scale = 1.0 + abs(float(np.trace(corrected)))
        if lam < -POSITIVENESS_TOL * scale:
            raise PositivenessLossError(
                f"corrected covariance lost positiveness at step {step} "
                f"(min eigenvalue {lam:.6g})",
                step=step,
                min_eigenvalue=lam,
            )
        innovation = to_coords(log_map(meas.mean, measurement))
        new_point = exp_map(pred.mean, from_coords(pred.mean, gain @ innovation))
        new_cov = parallel_transport_cov(corrected, pred.mean, new_point)
    except ManifoldUKFError as err:
        raise tag_stage(err, "correction")
    return FilterState(new_point, new_cov, step)


# --------------------------------------------------------------------------
# Public step functions


def additive_step(
    state: FilterState,
    system: AdditiveSystem,
    measurement: ManifoldPoint,
    kind: SigmaKind = Minimum(),
    options: FilterOptions | None = None,
) -> FilterState:
    """One predict/correct cycle with tangent-space noise on both halves."""
    opts = options or _DEFAULT_OPTIONS
    k = state.step + 1
    pred, propagated = _predict_additive(
        state.estimate, system.f, system.process_noise, kind, opts, k
    )
    meas, cross = _measure_additive(
        pred,
        system.h,
        system.measurement_noise,
        system.measurement_manifold,
        kind,
        opts,
        k,
        propagated,
    )
    return correct(PredictionBundle(pred, meas, cross), measurement, k, opts)


def augmented_step(
    state: FilterState,
    system: GeneralSystem,
    measurement: ManifoldPoint,
    kind: SigmaKind = Minimum(),
    options: FilterOptions | None = None,
) -> FilterState:
    """One predict/correct cycle with both noises stacked onto the state."""
    opts = options or _DEFAULT_OPTIONS
    k = state.step + 1
    pred, _ = _predict_augmented(
        state.estimate, system.f, system.process_noise, kind, opts, k
    )
    meas, cross = _measure_augmented(
        pred, system.h, system.measurement_noise, kind, opts, k
    )
    return correct(PredictionBundle(pred, meas, cross), measurement, k, opts)


def partially_additive_step(
    state: FilterState,
    system: AdditiveProcessSystem | AdditiveMeasurementSystem,
    measurement: ManifoldPoint,
    kind: SigmaKind = Minimum(),
    options: FilterOptions | None = None,
) -> FilterState:
    """One cycle mixing an additive half with an augmented half."""
    opts = options or _DEFAULT_OPTIONS
    k = state.step + 1
    if isinstance(system, AdditiveProcessSystem):
        pred, _ = _predict_additive(
            state.estimate, system.f, system.process_noise, kind, opts, k
        )
        meas, cross = _measure_augmented(
            pred, system.h, system.measurement_noise, kind, opts, k
        )
    elif isinstance(system, AdditiveMeasurementSystem):
        pred, propagated = _predict_augmented(
            state.estimate, system.f, system.process_noise, kind, opts, k
        )
        meas, cross = _measure_additive(
            pred,
            system.h,
            system.measurement_noise,
            system.measurement_manifold,
            kind,
            opts,
            k,
            propagated,
        )
    else:
        raise ContractViolationError(
            "partially_additive_step needs a system with exactly one additive half"
        )
    return correct(PredictionBundle(pred, meas, cross), measurement, k, opts)


def noise_blind_step(
    state: FilterState,
    f: AdditiveMap,
    h: AdditiveMap,
    measurement: ManifoldPoint,
    karcher_tol: float = KARCHER_TOL,
    karcher_max_iter: int = KARCHER_MAX_ITER,
) -> FilterState:
    """Baseline manifold UKF step that ignores noise statistics entirely.

    Faithful to the published baseline: symmetric equal-weight sigma sets,
    fresh regeneration for the measurement prediction, uncentered
    cross-moments, and *no* process or measurement noise anywhere. Without
    noise inflation the corrected covariance contracts toward singularity;
    any resulting breakdown (a non-PSD covariance at sigma generation, a
    numerically singular innovation covariance, or a corrected covariance
    with a negative eigenvalue) raises :class:`PositivenessLossError`
    carrying the step index.
    """
    k = state.step + 1
    kind = HomogeneousMinimumSymmetric()
    try:
        ut1 = unscented_transform(
            lambda p: f(p, k),
            state.estimate,
            kind,
            karcher_tol=karcher_tol,
            karcher_max_iter=karcher_max_iter,
        )
        pred = RandomPointEstimate(ut1.mean, ut1.cov)
        ut2 = unscented_transform(
            lambda p: h(p, k),
            pred,
            kind,
            cross=True,
            karcher_tol=karcher_tol,
            karcher_max_iter=karcher_max_iter,
        )
    except NotPSDError as err:
        raise PositivenessLossError(
            f"covariance lost positiveness at step {k}: {err}",
            step=k,
            min_eigenvalue=err.min_eigenvalue,
        ) from err
    meas_cov = ut2.cov
    lam = min_eigenvalue(meas_cov)
    if lam <= INNOVATION_FLOOR * (1.0 + abs(float(np.trace(meas_cov)))):
        raise PositivenessLossError(
            f"innovation covariance collapsed at step {k} "
            f"(min eigenvalue {lam:.6g})",
            step=k,
            min_eigenvalue=lam,
        )
    solution, _ = spd_solve(meas_cov, ut2.cross_cov.T, condition_limit=np.inf)
    gain = solution.T
    corrected = symmetrize(pred.cov - gain @ meas_cov @ gain.T)
    lam = min_eigenvalue(corrected)
    if lam < -POSITIVENESS_TOL * (1.0 + abs(float(np.trace(corrected)))):
        raise PositivenessLossError(
            f"corrected covariance lost positiveness at step {k} "
            f"(min eigenvalue {lam:.6g})",
            step=k,
            min_eigenvalue=lam,
        )
    innovation = to_coords(log_map(ut2.mean, measurement))
    new_point = exp_map(pred.mean, from_coords(pred.mean, gain @ innovation))
    new_cov = parallel_transport_cov(corrected, pred.mean, new_point)
    return FilterState(new_point, new_cov, k)


def linear_kf_step(
    state: FilterState,
    A: np.ndarray,
    H: np.ndarray,
    Q: np.ndarray,
    R: np.ndarray,
    measurement: ManifoldPoint,
    f_offset: np.ndarray | None = None,
    h_offset: np.ndarray | None = None,
) -> FilterState:
    """Textbook Kalman step for affine-Gaussian systems on Euclidean states.

    Dynamics ``x' = A x + f_offset``, measurement ``y = H x + h_offset``.
    Used as an oracle for the Euclidean reductions of the manifold filters.
    """
    x = state.point.coords
    x_pred = A @ x if f_offset is None else A @ x + f_offset
    P_pred = symmetrize(A @ state.cov @ A.T + Q)
    y_pred = H @ x_pred if h_offset is None else H @ x_pred + h_offset
    S = symmetrize(H @ P_pred @ H.T + R)
    gain = np.linalg.solve(S, H @ P_pred).T
    innovation = measurement.coords - y_pred
    x_new = x_pred + gain @ innovation
    P_new = symmetrize(P_pred - gain @ S @ gain.T)
    return FilterState(
        ManifoldPoint(state.point.manifold, x_new), P_new, state.step + 1
    )


def _block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    na, nb = a.shape[0], b.shape[0]
    out = np.zeros((na + nb, na + nb))
    out[:na, :na] = a
    out[na:, na:] = b
    return out
