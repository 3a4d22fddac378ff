"""Sigma-point sets that match means and second moments by construction.

Four families are provided, all normalized (each weight family sums to one)
and all matching the target mean and covariance exactly in Euclidean space:

``Minimum``
    n+1 points with equal weights: a regular simplex scaled to unit weighted
    scatter, then pushed through the covariance square root.
``RhoMinimum``
    n+1 points with a free parameter rho > 0 steering the first weight to
    rho/(rho+n) (the remaining points share 1/(rho+n) each); rho = 1 recovers
    ``Minimum``.
``MinimumSymmetric``
    2n points in +/- pairs, pair i carrying weight w_i on both members and
    offset col_i(sqrt(P))/sqrt(2 w_i); pair weights must sum to 1/2.
``HomogeneousMinimumSymmetric``
    2n points, all weights 1/(2n), offsets +/- sqrt(n) * col_i(sqrt(P)).

The manifold lift maps the tangent-space set through the exponential at the
target mean. With mean weights positive and every tangent point inside the
ball of radius (1/2) * min(injectivity radius, pi/sqrt(curvature bound)),
the lifted set keeps the target mean as its Karcher mean and the target
covariance as its sample covariance; points outside that ball are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ContractViolationError, SigmaPointOutOfBallError
from .linalg import sqrt_psd
from .manifolds import Euclidean, Manifold
from .stats import RandomPointEstimate, WeightedSet


class SigmaKind:
    """Marker base class for sigma-set families."""


@dataclass(frozen=True)
class Minimum(SigmaKind):
    """n+1 points, equal weights 1/(n+1)."""


@dataclass(frozen=True)
class RhoMinimum(SigmaKind):
    """n+1 points; first weight rho/(rho+n), the others 1/(rho+n)."""

    rho: float = 1.0

    def __post_init__(self):
        if not (self.rho > 0.0 and np.isfinite(self.rho)):
            raise ContractViolationError("rho must be a positive finite number")


@dataclass(frozen=True)
class MinimumSymmetric(SigmaKind):
    """2n points in +/- pairs with caller-chosen pair weights.

    ``pair_weights`` holds one positive weight per dimension, summing to 1/2
    (each weight is used twice). ``None`` means equal pairs, which coincides
    with :class:`HomogeneousMinimumSymmetric`.
    """

    pair_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.pair_weights is not None:
            object.__setattr__(self, "pair_weights", tuple(float(w) for w in self.pair_weights))


@dataclass(frozen=True)
class HomogeneousMinimumSymmetric(SigmaKind):
    """2n points in +/- pairs, all weights equal to 1/(2n)."""


@dataclass(frozen=True, eq=False)
class EuclideanSigmaSet(WeightedSet):
    """A tangent/Euclidean sigma-point set plus the kind that generated it."""

    kind: SigmaKind = field(kw_only=True, default=None)

    def __post_init__(self, check: bool):
        super().__post_init__(check)
        if not isinstance(self.kind, SigmaKind):
            raise ContractViolationError("EuclideanSigmaSet requires a SigmaKind")


def _simplex_rows(weights: np.ndarray) -> np.ndarray:
    """(n+1, n) rows u_i with sum_i w_i u_i = 0 and sum_i w_i u_i u_i^T = I.

    Built from a Householder frame orthogonal to sqrt(w): the rows of an
    orthogonal matrix mapping sqrt(w) to e_1, columns rescaled by
    1/sqrt(w_i).
    """
    m = weights.shape[0]
    u = np.sqrt(weights)
    p = u.copy()
    p[0] -= 1.0
    pp = float(p @ p)
    if pp < 1e-32:
        house = np.eye(m)
    else:
        house = np.eye(m) - (2.0 / pp) * np.outer(p, p)
    frame = house[1:, :]  # (n, m): frame @ u = 0, frame @ frame.T = I
    return (frame / u).T


@lru_cache(maxsize=None)
def _tangent_template(kind: SigmaKind, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit-scatter tangent points (rows) and weights for a given kind.

    Cached per (kind, dim); the returned arrays are shared and read-only.
    """
    points, weights = _build_template(kind, dim)
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


def _build_template(kind: SigmaKind, dim: int) -> tuple[np.ndarray, np.ndarray]:
    n = dim
    if isinstance(kind, Minimum):
        w = np.full(n + 1, 1.0 / (n + 1))
        return _simplex_rows(w), w
    if isinstance(kind, RhoMinimum):
        w = np.full(n + 1, 1.0 / (kind.rho + n))
        w[0] = kind.rho / (kind.rho + n)
        return _simplex_rows(w), w
    if isinstance(kind, HomogeneousMinimumSymmetric):
        w = np.full(2 * n, 1.0 / (2 * n))
        scaled = np.sqrt(n) * np.eye(n)
        return np.vstack([scaled, -scaled]), w
    if isinstance(kind, MinimumSymmetric):
        if kind.pair_weights is None:
            pair = np.full(n, 1.0 / (2 * n))
        else:
            pair = np.asarray(kind.pair_weights, dtype=float)
            if pair.shape != (n,):
                raise ContractViolationError(
                    f"pair_weights must have length {n}, got {pair.shape}"
                )
            if np.any(pair <= 0.0):
                raise ContractViolationError("pair weights must be positive")
            if abs(float(pair.sum()) - 0.5) > 1e-12:
                raise ContractViolationError("pair weights must sum to 1/2")
        scaled = np.eye(n) / np.sqrt(2.0 * pair)[:, None]
        return np.vstack([scaled, -scaled]), np.concatenate([pair, pair])
    raise ContractViolationError(f"unknown sigma kind: {kind!r}")


def euclidean_sigma(kind: SigmaKind, mean: np.ndarray, cov: np.ndarray) -> EuclideanSigmaSet:
    """Sigma-point set in R^n whose weighted mean is ``mean`` and whose
    weighted scatter about the mean is ``cov`` (PSD; rank deficiency and the
    zero matrix degenerate gracefully to coincident points)."""
    mean = np.asarray(mean, dtype=float)
    if mean.ndim != 1:
        raise ContractViolationError("mean must be a vector")
    if not np.all(np.isfinite(mean)):
        raise ContractViolationError("mean must be finite")
    n = mean.shape[0]
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (n, n):
        raise ContractViolationError(f"covariance must be {n}x{n}, got {cov.shape}")
    root = sqrt_psd(cov)
    template, weights = _tangent_template(kind, n)
    points = mean + template @ root.T
    return EuclideanSigmaSet(Euclidean(n), points, weights, kind=kind, check=False)


def lift_ball_radius(manifold: Manifold) -> float:
    """Radius of the tangent ball on which the sigma lift preserves moments:
    (1/2) * min(injectivity radius, pi / sqrt(curvature bound))."""
    r = manifold.injectivity_radius
    kappa = manifold.curvature_bound
    if kappa > 0.0:
        r = min(r, np.pi / np.sqrt(kappa))
    return 0.5 * r


def riemannian_sigma(kind: SigmaKind, est: RandomPointEstimate) -> WeightedSet:
    """Lift the tangent sigma set of (0, est.cov) through exp at est.mean.

    The resulting weighted set has Karcher mean est.mean and sample
    covariance est.cov (up to mean-solver tolerance). Raises
    :class:`SigmaPointOutOfBallError` if any tangent point leaves the ball
    from :func:`lift_ball_radius`; on Euclidean manifolds this equals
    :func:`euclidean_sigma` translated by the mean.
    """
    man = est.manifold
    n = man.intrinsic_dim
    tangent_set = euclidean_sigma(kind, np.zeros(n), est.cov)
    radius = lift_ball_radius(man)
    norms = np.linalg.norm(tangent_set.points, axis=1)
    worst = int(np.argmax(norms))
    if norms[worst] >= radius:
        raise SigmaPointOutOfBallError(
            f"tangent sigma point {worst} has norm {norms[worst]:.6g}, "
            f"outside the lift ball of radius {radius:.6g}",
            index=worst,
            norm=float(norms[worst]),
            radius=float(radius),
        )
    ambient = tangent_set.points @ man.frame(est.mean.coords)
    points = man.exp(est.mean.coords, ambient)
    return WeightedSet(
        man,
        points,
        tangent_set.w_mean,
        tangent_set.w_cov,
        tangent_set.w_cross,
        check=False,
    )
