"""Exception types shared across the library.

Every error raised by this package derives from :class:`ManifoldUKFError`.
Errors carry structured attributes (offending index, gradient norm, failing
step, ...) so callers can react programmatically, and an optional ``stage``
tag naming the pipeline stage that failed.
"""

from __future__ import annotations


class ManifoldUKFError(Exception):
    """Base class for all library errors."""

    stage: str | None = None

    def __str__(self) -> str:
        base = super().__str__()
        if self.stage:
            return f"{base} [stage: {self.stage}]"
        return base


class ContractViolationError(ManifoldUKFError, ValueError):
    """An argument breaks a documented precondition (mismatched manifolds,
    wrong dimensions, non-symmetric covariance, invalid weights, ...)."""


class ExpDomainError(ManifoldUKFError):
    """Exponential-map argument reaches or exceeds the injectivity domain."""


class CutLocusError(ManifoldUKFError):
    """Logarithm or transport requested between points at each other's cut
    locus, where the minimizing geodesic is not unique."""


class NotPSDError(ManifoldUKFError):
    """A matrix required to be positive semidefinite has an eigenvalue below
    the tolerance floor."""

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class FactorizationError(ManifoldUKFError):
    """A matrix square root could not be formed."""


class SigmaPointOutOfBallError(ManifoldUKFError):
    """A tangent sigma point falls outside the ball on which the lift to the
    manifold is guaranteed to preserve moments."""

    def __init__(self, message: str, index: int, norm: float, radius: float):
        super().__init__(message)
        self.index = index
        self.norm = norm
        self.radius = radius


class ConvergenceError(ManifoldUKFError):
    """Iterative mean computation stopped before meeting its tolerance."""

    def __init__(self, message: str, gradient_norm: float, iterations: int):
        super().__init__(message)
        self.gradient_norm = gradient_norm
        self.iterations = iterations


class SingularInnovationError(ManifoldUKFError):
    """Innovation covariance is singular or too ill-conditioned to invert."""

    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


class PositivenessLossError(ManifoldUKFError):
    """A filter covariance stopped being positive (semi)definite.

    This is a detected, reportable condition rather than something the
    library repairs silently; benchmark harnesses catch it and record the
    failing step.
    """

    def __init__(self, message: str, step: int, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.step = step
        self.min_eigenvalue = min_eigenvalue


def tag_stage(err: ManifoldUKFError, stage: str) -> ManifoldUKFError:
    """Attach a pipeline-stage tag to ``err`` (kept if already set)."""
    if err.stage is None:
        err.stage = stage
    return err
