"""Unscented transformation between Riemannian manifolds.

Propagates a :class:`RandomPointEstimate` through a point-to-point map by
pushing a moment-matched sigma set through the map and re-estimating
moments: the mean is the Karcher mean of the mapped set (warm-started at the
image of the input mean), the covariance is its sample covariance at that
mean, and the optional cross-covariance pairs the input sigma set with its
image. Errors from the stages are re-raised with a ``stage`` tag naming
where the pipeline failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ContractViolationError, ManifoldUKFError, tag_stage
from .manifolds import ManifoldPoint
from .sigma import SigmaKind, riemannian_sigma
from .stats import (
    KARCHER_MAX_ITER,
    KARCHER_TOL,
    RandomPointEstimate,
    WeightedSet,
    karcher_mean,
    sample_covariance,
    sample_cross_covariance,
)

PointMap = Callable[[ManifoldPoint], ManifoldPoint]


@dataclass(frozen=True, eq=False)
class UTResult:
    """Output moments of an unscented transformation.

    ``cross_cov`` is present exactly when cross-moments were requested.
    ``dependent`` carries the mapped sigma set so a follow-up transform can
    reuse it as its input set instead of regenerating one.
    """

    mean: ManifoldPoint
    cov: np.ndarray = field(repr=False)
    cross_cov: np.ndarray | None = field(default=None, repr=False)
    dependent: WeightedSet | None = field(default=None, repr=False)


def unscented_transform(
    f: PointMap,
    est: RandomPointEstimate,
    kind: SigmaKind,
    *,
    cross: bool = False,
    independent: WeightedSet | None = None,
    karcher_tol: float = KARCHER_TOL,
    karcher_max_iter: int = KARCHER_MAX_ITER,
) -> UTResult:
    """Push ``est`` through ``f`` and re-estimate moments from sigma points.

    ``independent`` substitutes a caller-supplied input set for the freshly
    generated one (sigma-set reuse between chained transforms); it must live
    on ``est``'s manifold and is *assumed* to represent ``est``. With
    ``cross=True`` the result also carries the input/output cross-covariance,
    with the input side centered at ``est.mean``.
    """
    if independent is None:
        try:
            chi = riemannian_sigma(kind, est)
        except ManifoldUKFError as err:
            raise tag_stage(err, "sigma-generation")
    else:
        if independent.manifold != est.manifold:
            raise ContractViolationError(
                "supplied sigma set lives on a different manifold than the estimate"
            )
        chi = independent

    try:
        init = f(est.mean)
        if not isinstance(init, ManifoldPoint):
            raise ContractViolationError("map must return ManifoldPoint values")
        mapped = np.empty((chi.size, init.manifold.ambient_dim))
        for i in range(chi.size):
            out = f(chi.point(i))
            if not isinstance(out, ManifoldPoint) or out.manifold != init.manifold:
                raise ContractViolationError(
                    "map must return points on one fixed manifold"
                )
            mapped[i] = out.coords
        gamma = WeightedSet(
            init.manifold, mapped, chi.w_mean, chi.w_cov, chi.w_cross, check=False
        )
    except ManifoldUKFError as err:
        raise tag_stage(err, "map")

    try:
        mean = karcher_mean(gamma, init=init, tol=karcher_tol, max_iter=karcher_max_iter)
    except ManifoldUKFError as err:
        raise tag_stage(err, "mean")

    try:
        cov = sample_covariance(gamma, mean)
        cross_cov = None
        if cross:
            cross_cov = sample_cross_covariance(chi, est.mean, gamma, mean)
    except ManifoldUKFError as err:
        raise tag_stage(err, "moments")

    return UTResult(mean=mean, cov=cov, cross_cov=cross_cov, dependent=gamma)
