"""Intrinsic statistics of weighted point sets on manifolds.

A :class:`WeightedSet` carries one stack of points and three weight
families: one for the sample mean, one for sample (co)variances, and one for
cross-covariances between two sets. The families are deliberately kept
separate; each statistic below consumes exactly its own family.

The sample mean is the weighted Karcher mean, computed by the classical
fixed-point iteration ``mu <- exp_mu(sum_i w[i] * log_mu(p_i))`` run until
the tangent-space gradient norm drops to tolerance. Covariances are second
moments of log-coordinates in the deterministic tangent frame of their base
point, optionally centered when evaluated at a point other than the sample
mean.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass, field

import numpy as np

from .errors import ContractViolationError, ConvergenceError
from .linalg import check_symmetric, symmetrize
from .manifolds import Manifold, ManifoldPoint

KARCHER_TOL = 1e-6
KARCHER_MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class RandomPointEstimate:
    """First two moments of a manifold-valued random point: a mean point and
    a covariance expressed in the deterministic tangent frame at that mean."""

    mean: ManifoldPoint
    cov: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.mean.manifold.intrinsic_dim
        arr = check_symmetric(self.cov, "covariance")
        if arr.shape != (n, n):
            raise ContractViolationError(
                f"covariance must be {n}x{n} for this manifold, got {arr.shape}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "cov", arr)

    @property
    def manifold(self) -> Manifold:
        return self.mean.manifold


@dataclass(frozen=True, eq=False)
class WeightedSet:
    """Stacked points on one manifold plus the three weight families.

    ``w_cov`` and ``w_cross`` default to ``w_mean`` when omitted. Weights
    must be nonzero; they need not sum to one (see :meth:`is_normalized`).
    ``check=False`` trusts (and does not copy) internally produced arrays.
    """

    manifold: Manifold
    points: np.ndarray = field(repr=False)
    w_mean: np.ndarray = field(repr=False)
    w_cov: np.ndarray | None = field(default=None, repr=False)
    w_cross: np.ndarray | None = field(default=None, repr=False)
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        pts = self.points
        if check:
            pts = np.array(pts, dtype=float, copy=True)
            if pts.ndim != 2:
                raise ContractViolationError("points must be a (N, ambient) array")
            if pts.shape[0] < 1:
                raise ContractViolationError("a weighted set needs at least one point")
            self.manifold.check_point(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

        n = pts.shape[0]
        families = {}
        for name in ("w_mean", "w_cov", "w_cross"):
            w = getattr(self, name)
            if w is None:
                # Defaulted families share the validated mean-weight array.
                w = families["w_mean"]
            elif check:
                w = np.array(w, dtype=float, copy=True)
                if w.shape != (n,):
                    raise ContractViolationError(
                        f"{name} must have shape ({n},), got {w.shape}"
                    )
                if np.any(w == 0.0) or not np.all(np.isfinite(w)):
                    raise ContractViolationError(
                        f"{name} entries must be finite and nonzero"
                    )
                w.setflags(write=False)
            else:
                w.setflags(write=False)
            families[name] = w
            object.__setattr__(self, name, w)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def is_normalized(self) -> bool:
        """True when each weight family sums to one (within 1e-12)."""
        return all(
            abs(float(np.sum(w)) - 1.0) <= 1e-12
            for w in (self.w_mean, self.w_cov, self.w_cross)
        )

    def point(self, i: int) -> ManifoldPoint:
        # Rows were validated when the set was constructed.
        return ManifoldPoint(self.manifold, self.points[i], check=False)


def karcher_mean(
    wset: WeightedSet,
    init: ManifoldPoint | None = None,
    tol: float = KARCHER_TOL,
    max_iter: int = KARCHER_MAX_ITER,
) -> ManifoldPoint:
    """Weighted Karcher (Frechet) mean of a weighted set.

    Fixed-point iteration ``mu <- exp_mu(g)`` with gradient
    ``g = sum_i w_mean[i] * log_mu(p_i)``, stopped once ``|g| <= tol``.
    Starts from ``init`` when given, else from the point with the largest
    mean weight. Raises :class:`ConvergenceError` carrying the last gradient
    norm when ``max_iter`` steps do not reach tolerance.
    """
    man = wset.manifold
    if init is None:
        mu = wset.points[int(np.argmax(wset.w_mean))]
    else:
        if init.manifold != man:
            raise ContractViolationError("init point lives on a different manifold")
        mu = init.coords
    grad_norm = np.inf
    for _ in range(max_iter + 1):
        logs = man.log(mu, wset.points)
        grad = wset.w_mean @ logs
        grad_norm = math.sqrt(float(grad @ grad))
        if grad_norm <= tol:
            return ManifoldPoint(man, mu, check=False)
        mu = man.exp(mu, grad)
    raise ConvergenceError(
        f"Karcher mean gradient norm {grad_norm:.3e} > tol {tol:.1e} "
        f"after {max_iter} iterations",
        gradient_norm=grad_norm,
        iterations=max_iter,
    )


def _centered_log_coords(
    wset: WeightedSet, at: ManifoldPoint, center: ManifoldPoint | None
) -> np.ndarray:
    """Frame coordinates at ``at`` of log(at -> points), centered on the
    coordinates of log(at -> center) when a distinct center is supplied."""
    man = wset.manifold
    if at.manifold != man:
        raise ContractViolationError("base point lives on a different manifold")
    frame = man.frame(at.coords)
    coords = man.log(at.coords, wset.points) @ frame.T
    if center is not None and center != at:
        if center.manifold != man:
            raise ContractViolationError("center lives on a different manifold")
        coords = coords - frame @ man.log(at.coords, center.coords)
    return coords


def sample_covariance(
    wset: WeightedSet,
    at: ManifoldPoint,
    center: ManifoldPoint | None = None,
) -> np.ndarray:
    """Weighted second moment of the set's log-coordinates at ``at``.

    ``center`` names the set's sample mean when evaluating at any other base
    point; in the common call pattern ``at`` is the sample mean itself and
    the centering term vanishes. Uses the ``w_cov`` family. The result lives
    in the deterministic tangent frame of ``at``.
    """
    coords = _centered_log_coords(wset, at, center)
    return symmetrize((coords.T * wset.w_cov) @ coords)


def sample_cross_covariance(
    wset_x: WeightedSet,
    at_x: ManifoldPoint,
    wset_y: WeightedSet,
    at_y: ManifoldPoint,
    center_x: ManifoldPoint | None = None,
    center_y: ManifoldPoint | None = None,
) -> np.ndarray:
    """Weighted cross-moment between two equally sized, jointly indexed sets.

    Log-coordinates of each set are taken at its own base point (and
    optionally centered on its own sample mean). Weights come from
    ``wset_x.w_cross``. Shape: (dim_x, dim_y).
    """
    if wset_x.size != wset_y.size:
        raise ContractViolationError(
            "cross-covariance needs sets of equal size "
            f"({wset_x.size} vs {wset_y.size})"
        )
    cx = _centered_log_coords(wset_x, at_x, center_x)
    cy = _centered_log_coords(wset_y, at_y, center_y)
    return (cx.T * wset_x.w_cross) @ cy
