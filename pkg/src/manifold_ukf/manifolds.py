"""Geodesically complete Riemannian manifolds with closed-form geometry.

Three manifold families are provided: Euclidean space, the unit n-sphere
embedded in R^{n+1}, and finite products of these. Points and tangent
vectors are represented by their ambient coordinates; products concatenate
factor coordinates. Every operation needed by the statistical layers has a
closed form here: exponential and logarithm maps, geodesic distance,
parallel transport along minimizing geodesics, and deterministic orthonormal
tangent frames.

Array-level methods on the manifold classes accept stacked inputs with the
point/vector axis last. The typed wrappers (:class:`ManifoldPoint`,
:class:`TangentVector`, :class:`TangentBasis`) validate their invariants on
construction and are what the public module-level functions exchange.
"""

from __future__ import annotations

import abc
import math
from dataclasses import InitVar, dataclass, field
from functools import cached_property

import numpy as np

from .errors import ContractViolationError, CutLocusError, ExpDomainError
from .linalg import check_symmetric, symmetrize

# Unit-norm tolerance for sphere points.
POINT_ATOL = 1e-12
# Orthogonality tolerance for tangent vectors and frames.
TANGENT_ATOL = 1e-10
# Proximity to the cut locus below which log/transport refuse to pick a geodesic.
CUT_LOCUS_ATOL = 1e-9
# Below this angle sphere transport is the identity on coordinates.
SMALL_ANGLE = 1e-8


class Manifold(abc.ABC):
    """A geodesically complete Riemannian manifold with closed-form ops."""

    # -- shape and geometry constants -------------------------------------

    @property
    @abc.abstractmethod
    def intrinsic_dim(self) -> int:
        """Dimension of the tangent spaces."""

    @property
    @abc.abstractmethod
    def ambient_dim(self) -> int:
        """Length of the coordinate vectors."""

    @property
    @abc.abstractmethod
    def injectivity_radius(self) -> float:
        """Radius below which exp is a diffeomorphism (inf if unbounded)."""

    @property
    @abc.abstractmethod
    def curvature_bound(self) -> float:
        """Upper bound on the sectional curvature (0 for flat factors)."""

    # -- array-level operations (ambient coordinates, point axis last) ----

    @abc.abstractmethod
    def exp(self, a: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Exponential map at ``a`` applied to tangent vector(s) ``v``."""

    @abc.abstractmethod
    def log(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Tangent vector(s) at ``a`` pointing to ``b`` along the minimizing
        geodesic; raises :class:`CutLocusError` when that geodesic is not
        unique."""

    @abc.abstractmethod
    def dist(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Geodesic distance (total, defined also at the cut locus)."""

    @abc.abstractmethod
    def transport(self, v: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Parallel transport of tangent vector(s) ``v`` from ``a`` to ``b``
        along the minimizing geodesic."""

    @abc.abstractmethod
    def frame(self, a: np.ndarray) -> np.ndarray:
        """Deterministic orthonormal tangent frame at ``a`` as rows of an
        (intrinsic_dim, ambient_dim) matrix."""

    @abc.abstractmethod
    def check_point(self, x: np.ndarray) -> None:
        """Raise :class:`ContractViolationError` if ``x`` is not a valid
        point (works on stacked input)."""

    @abc.abstractmethod
    def check_tangent(self, a: np.ndarray, v: np.ndarray) -> None:
        """Raise if ``v`` is not a valid tangent vector at ``a``."""

    def norm(self, v: np.ndarray) -> np.ndarray:
        """Riemannian norm of tangent vectors (ambient Euclidean norm for
        the embedded metrics used here)."""
        return np.linalg.norm(v, axis=-1)

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"{type(self).__name__}({self.intrinsic_dim})"


@dataclass(frozen=True)
class Euclidean(Manifold):
    """Flat R^n with the standard inner product."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ContractViolationError("Euclidean dimension must be >= 1")

    @property
    def intrinsic_dim(self) -> int:
        return self.dim

    @property
    def ambient_dim(self) -> int:
        return self.dim

    @property
    def injectivity_radius(self) -> float:
        return np.inf

    @property
    def curvature_bound(self) -> float:
        return 0.0

    def exp(self, a, v):
        return np.asarray(a, float) + np.asarray(v, float)

    def log(self, a, b):
        return np.asarray(b, float) - np.asarray(a, float)

    def dist(self, a, b):
        return np.linalg.norm(np.asarray(b, float) - np.asarray(a, float), axis=-1)

    def transport(self, v, a, b):
        return np.array(v, dtype=float, copy=True)

    @cached_property
    def _identity_frame(self) -> np.ndarray:
        eye = np.eye(self.dim)
        eye.setflags(write=False)
        return eye

    def frame(self, a):
        # Shared read-only identity; callers never mutate frames.
        return self._identity_frame

    def check_point(self, x) -> None:
        arr = np.asarray(x, dtype=float)
        if arr.shape[-1] != self.dim:
            raise ContractViolationError(
                f"expected coordinates of length {self.dim}, got {arr.shape[-1]}"
            )
        if not np.all(np.isfinite(arr)):
            raise ContractViolationError("coordinates must be finite")

    def check_tangent(self, a, v) -> None:
        self.check_point(v)


@dataclass(frozen=True)
class Sphere(Manifold):
    """Unit n-sphere S^n embedded in R^{n+1}."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ContractViolationError("Sphere dimension must be >= 1")

    @property
    def intrinsic_dim(self) -> int:
        return self.dim

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    @property
    def injectivity_radius(self) -> float:
        return np.pi

    @property
    def curvature_bound(self) -> float:
        return 1.0

    def exp(self, a, v):
        a = np.asarray(a, float)
        v = np.asarray(v, float)
        if a.ndim == 1 and v.ndim == 1:
            t = math.sqrt(float(v @ v))
            if t >= np.pi - CUT_LOCUS_ATOL:
                raise ExpDomainError(
                    f"tangent norm {t:.6g} reaches the sphere's injectivity "
                    f"radius pi"
                )
            s = math.sin(t) / t if t > 0.0 else 1.0
            out = math.cos(t) * a + s * v
            return out / math.sqrt(float(out @ out))
        t = np.sqrt(np.einsum("...i,...i->...", v, v))
        if np.any(t >= np.pi - CUT_LOCUS_ATOL):
            worst = float(np.max(t))
            raise ExpDomainError(
                f"tangent norm {worst:.6g} reaches the sphere's injectivity "
                f"radius pi"
            )
        t_arr = np.asarray(t)[..., None]
        out = np.cos(t_arr) * a + np.sinc(t_arr / np.pi) * v
        return out / np.linalg.norm(out, axis=-1, keepdims=True)

    def log(self, a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        # atan2(sin, cos) keeps full relative precision for small angles,
        # where arccos(dot) would quantize at sqrt(eps) and corrupt the
        # magnitude of near-zero logs.
        if a.ndim == 1 and b.ndim == 1:
            dot = min(1.0, max(-1.0, float(a @ b)))
            if dot <= -1.0 + CUT_LOCUS_ATOL:
                raise CutLocusError(
                    "log between (nearly) antipodal sphere points is undefined"
                )
            residual = b - dot * a
            res_norm = math.sqrt(float(residual @ residual))
            if res_norm == 0.0:
                return residual
            return residual * (math.atan2(res_norm, dot) / res_norm)
        dots = np.clip(np.sum(a * b, axis=-1), -1.0, 1.0)
        if np.any(dots <= -1.0 + CUT_LOCUS_ATOL):
            raise CutLocusError(
                "log between (nearly) antipodal sphere points is undefined"
            )
        residual = b - a * dots[..., None]
        res_norm = np.linalg.norm(residual, axis=-1)
        theta = np.arctan2(res_norm, dots)
        safe = np.where(res_norm > 0.0, res_norm, 1.0)
        factor = np.where(res_norm > 0.0, theta / safe, 1.0)
        return residual * factor[..., None]

    def dist(self, a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        # Defined at the cut locus too: atan2(0, -1) = pi.
        if a.ndim == 1 and b.ndim == 1:
            dot = min(1.0, max(-1.0, float(a @ b)))
            residual = b - dot * a
            return math.atan2(math.sqrt(float(residual @ residual)), dot)
        dots = np.clip(np.sum(a * b, axis=-1), -1.0, 1.0)
        residual = b - a * dots[..., None]
        return np.arctan2(np.linalg.norm(residual, axis=-1), dots)

    def transport(self, v, a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        v = np.asarray(v, float)
        u = self.log(a, b)
        t = math.sqrt(float(u @ u))
        if t < SMALL_ANGLE:
            return np.array(v, copy=True)
        u_hat = u / t
        along = np.sum(v * u_hat, axis=-1)[..., None]
        return v + along * ((math.cos(t) - 1.0) * u_hat - math.sin(t) * a)

    def frame(self, a):
        a = np.asarray(a, float)
        m = self.ambient_dim
        k = int(np.abs(a).argmax())
        s = 1.0 if a[k] >= 0.0 else -1.0
        u = a.copy()
        u[k] -= s
        uu = float(u @ u)
        if uu < 1e-32:
            return np.delete(np.eye(m), k, axis=0)
        # The Householder reflector is symmetric, so dropping row k equals
        # dropping column k and transposing.
        house = (-2.0 / uu) * np.outer(u, u)
        house.flat[:: m + 1] += 1.0
        if k == 0:
            return house[1:]
        return np.concatenate((house[:k], house[k + 1 :]))

    def check_point(self, x) -> None:
        arr = np.asarray(x, dtype=float)
        if arr.shape[-1] != self.ambient_dim:
            raise ContractViolationError(
                f"expected coordinates of length {self.ambient_dim}, "
                f"got {arr.shape[-1]}"
            )
        if arr.ndim == 1:
            sq = float(arr @ arr)
            err = abs(math.sqrt(sq) - 1.0) if math.isfinite(sq) else np.inf
        else:
            norms = np.linalg.norm(arr, axis=-1)
            err = float(np.max(np.abs(norms - 1.0)))
        if not np.isfinite(err) or err > POINT_ATOL:
            raise ContractViolationError(
                f"sphere point norm deviates from 1 by {err:.3e}"
            )

    def check_tangent(self, a, v) -> None:
        a = np.asarray(a, float)
        v = np.asarray(v, float)
        if v.shape[-1] != self.ambient_dim:
            raise ContractViolationError("tangent vector has wrong length")
        if a.ndim == 1 and v.ndim == 1:
            dot = abs(float(a @ v))
            bound = TANGENT_ATOL * max(1.0, math.sqrt(float(v @ v)))
            if not dot <= bound:
                raise ContractViolationError(
                    "tangent vector is not orthogonal to its sphere base point"
                )
            return
        dots = np.abs(np.sum(a * v, axis=-1))
        bound = TANGENT_ATOL * np.maximum(1.0, np.linalg.norm(v, axis=-1))
        if np.any(dots > bound):
            raise ContractViolationError(
                "tangent vector is not orthogonal to its sphere base point"
            )


@dataclass(frozen=True)
class Product(Manifold):
    """Finite product manifold; coordinates concatenate the factors'."""

    factors: tuple[Manifold, ...]

    def __post_init__(self):
        if not self.factors:
            raise ContractViolationError("product needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def intrinsic_dim(self) -> int:
        return sum(f.intrinsic_dim for f in self.factors)

    @property
    def ambient_dim(self) -> int:
        return sum(f.ambient_dim for f in self.factors)

    @property
    def injectivity_radius(self) -> float:
        return min(f.injectivity_radius for f in self.factors)

    @property
    def curvature_bound(self) -> float:
        return max(f.curvature_bound for f in self.factors)

    @cached_property
    def _spans(self) -> tuple[tuple[int, int], ...]:
        stops = np.cumsum([f.ambient_dim for f in self.factors])
        return tuple(zip(np.concatenate(([0], stops[:-1])), stops))

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        """Slice concatenated coordinates into per-factor blocks (views)."""
        arr = np.asarray(x, dtype=float)
        return [arr[..., lo:hi] for lo, hi in self._spans]

    def join(self, parts) -> np.ndarray:
        return np.concatenate([np.asarray(p, float) for p in parts], axis=-1)

    def exp(self, a, v):
        return self.join(
            f.exp(pa, pv)
            for f, pa, pv in zip(self.factors, self.split(a), self.split(v))
        )

    def log(self, a, b):
        return self.join(
            f.log(pa, pb)
            for f, pa, pb in zip(self.factors, self.split(a), self.split(b))
        )

    def dist(self, a, b):
        parts = [
            f.dist(pa, pb)
            for f, pa, pb in zip(self.factors, self.split(a), self.split(b))
        ]
        return np.sqrt(sum(np.asarray(p) ** 2 for p in parts))

    def transport(self, v, a, b):
        return self.join(
            f.transport(pv, pa, pb)
            for f, pv, pa, pb in zip(
                self.factors, self.split(v), self.split(a), self.split(b)
            )
        )

    def frame(self, a):
        rows = self.intrinsic_dim
        cols = self.ambient_dim
        out = np.zeros((rows, cols))
        r = c = 0
        for f, pa in zip(self.factors, self.split(a)):
            fr = f.frame(pa)
            out[r : r + f.intrinsic_dim, c : c + f.ambient_dim] = fr
            r += f.intrinsic_dim
            c += f.ambient_dim
        return out

    def check_point(self, x) -> None:
        arr = np.asarray(x, dtype=float)
        if arr.shape[-1] != self.ambient_dim:
            raise ContractViolationError(
                f"expected coordinates of length {self.ambient_dim}, "
                f"got {arr.shape[-1]}"
            )
        for f, part in zip(self.factors, self.split(arr)):
            f.check_point(part)

    def check_tangent(self, a, v) -> None:
        for f, pa, pv in zip(self.factors, self.split(a), self.split(v)):
            f.check_tangent(pa, pv)


# --------------------------------------------------------------------------
# Typed wrappers


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    """A validated point: manifold plus ambient coordinates.

    ``check=False`` skips validation and the defensive copy; it is reserved
    for values coming out of this package's own geometry, which are valid by
    construction and freshly allocated.
    """

    manifold: Manifold
    coords: np.ndarray = field(repr=False)
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        if check:
            arr = np.array(self.coords, dtype=float, copy=True)
            if arr.ndim != 1:
                raise ContractViolationError("point coordinates must be a vector")
            self.manifold.check_point(arr)
        else:
            arr = self.coords
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ManifoldPoint):
            return NotImplemented
        return self.manifold == other.manifold and np.array_equal(
            self.coords, other.coords
        )

    def __hash__(self) -> int:
        return hash((self.manifold, self.coords.tobytes()))

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"ManifoldPoint({self.manifold!r}, {np.array2string(self.coords, precision=4)})"


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A validated tangent vector attached to its base point.

    ``check=False`` trusts (and does not copy) internally produced values.
    """

    base: ManifoldPoint
    ambient: np.ndarray = field(repr=False)
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        if check:
            arr = np.array(self.ambient, dtype=float, copy=True)
            if arr.ndim != 1:
                raise ContractViolationError("tangent coordinates must be a vector")
            self.base.manifold.check_tangent(self.base.coords, arr)
        else:
            arr = self.ambient
        arr.setflags(write=False)
        object.__setattr__(self, "ambient", arr)

    @property
    def norm(self) -> float:
        return math.sqrt(float(self.ambient @ self.ambient))


@dataclass(frozen=True, eq=False)
class TangentBasis:
    """Orthonormal tangent frame at a base point (rows are basis vectors).

    ``check=False`` trusts (and does not copy) internally produced frames.
    """

    base: ManifoldPoint
    vectors: np.ndarray = field(repr=False)
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        if check:
            arr = np.array(self.vectors, dtype=float, copy=True)
            man = self.base.manifold
            if arr.shape != (man.intrinsic_dim, man.ambient_dim):
                raise ContractViolationError(
                    f"basis must have shape {(man.intrinsic_dim, man.ambient_dim)}"
                )
            gram = arr @ arr.T
            if np.abs(gram - np.eye(man.intrinsic_dim)).max() > TANGENT_ATOL:
                raise ContractViolationError("basis rows are not orthonormal")
            man.check_tangent(self.base.coords, arr)
        else:
            arr = self.vectors
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)


def _require_same_manifold(a: ManifoldPoint, b: ManifoldPoint, what: str) -> None:
    if a.manifold != b.manifold:
        raise ContractViolationError(f"{what} requires points on the same manifold")


# --------------------------------------------------------------------------
# Public operations on typed values


def exp_map(a: ManifoldPoint, v: TangentVector) -> ManifoldPoint:
    """Follow the geodesic from ``a`` with initial velocity ``v`` for unit time."""
    if v.base != a:
        raise ContractViolationError("tangent vector is not based at the given point")
    return ManifoldPoint(a.manifold, a.manifold.exp(a.coords, v.ambient), check=False)


def log_map(a: ManifoldPoint, b: ManifoldPoint) -> TangentVector:
    """Inverse of :func:`exp_map` along the minimizing geodesic from ``a`` to ``b``."""
    _require_same_manifold(a, b, "log_map")
    return TangentVector(a, a.manifold.log(a.coords, b.coords), check=False)


def distance(a: ManifoldPoint, b: ManifoldPoint) -> float:
    """Geodesic distance; total (defined at the cut locus too)."""
    _require_same_manifold(a, b, "distance")
    return float(a.manifold.dist(a.coords, b.coords))


def parallel_transport_vec(v: TangentVector, to: ManifoldPoint) -> TangentVector:
    """Parallel transport along the minimizing geodesic from ``v.base`` to ``to``."""
    _require_same_manifold(v.base, to, "parallel_transport_vec")
    moved = v.base.manifold.transport(v.ambient, v.base.coords, to.coords)
    return TangentVector(to, moved, check=False)


def tangent_basis(a: ManifoldPoint) -> TangentBasis:
    """Deterministic orthonormal frame at ``a`` (canonical axes on Euclidean
    space, a Householder complement keyed on the largest-magnitude coordinate
    on spheres, block-diagonal concatenation on products)."""
    return TangentBasis(a, a.manifold.frame(a.coords), check=False)


def to_coords(v: TangentVector, basis: TangentBasis | None = None) -> np.ndarray:
    """Coordinates of a tangent vector in an orthonormal frame at its base."""
    if basis is None:
        basis = tangent_basis(v.base)
    elif basis.base != v.base:
        raise ContractViolationError("basis and vector have different base points")
    return basis.vectors @ v.ambient


def from_coords(a: ManifoldPoint, coords: np.ndarray, basis: TangentBasis | None = None) -> TangentVector:
    """Tangent vector at ``a`` with the given frame coordinates."""
    if basis is None:
        basis = tangent_basis(a)
    elif basis.base != a:
        raise ContractViolationError("basis is not anchored at the given point")
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (a.manifold.intrinsic_dim,):
        raise ContractViolationError(
            f"expected {a.manifold.intrinsic_dim} frame coordinates, got {coords.shape}"
        )
    return TangentVector(a, coords @ basis.vectors, check=False)


def transport_matrix(a: ManifoldPoint, b: ManifoldPoint) -> np.ndarray:
    """Orthogonal matrix re-expressing frame coordinates at ``a`` as frame
    coordinates at ``b`` after parallel transport along the minimizing
    geodesic. Column j holds the coordinates of the transported j-th frame
    vector of ``a``."""
    _require_same_manifold(a, b, "transport_matrix")
    man = a.manifold
    frame_a = man.frame(a.coords)
    frame_b = man.frame(b.coords)
    moved = man.transport(frame_a, a.coords, b.coords)
    return frame_b @ moved.T


def parallel_transport_cov(P: np.ndarray, a: ManifoldPoint, b: ManifoldPoint) -> np.ndarray:
    """Transport a covariance expressed in the frame at ``a`` to the frame at
    ``b``: eigendecompose P, parallel transport each eigenvector along the
    minimizing geodesic, and reassemble. Preserves the eigenvalue multiset.
    """
    _require_same_manifold(a, b, "parallel_transport_cov")
    man = a.manifold
    P = check_symmetric(P, "covariance")
    if P.shape[0] != man.intrinsic_dim:
        raise ContractViolationError(
            f"covariance must be {man.intrinsic_dim}x{man.intrinsic_dim}"
        )
    eigs, vecs = np.linalg.eigh(P)
    frame_a = man.frame(a.coords)
    frame_b = man.frame(b.coords)
    ambient = vecs.T @ frame_a
    moved = man.transport(ambient, a.coords, b.coords)
    new_coords = moved @ frame_b.T
    out = (new_coords.T * eigs) @ new_coords
    return symmetrize(out)
