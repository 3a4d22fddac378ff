"""Unscented Kalman filtering on geodesically complete Riemannian manifolds.

The package provides:

* manifold primitives (Euclidean space, unit spheres, products) with exp/log
  maps, parallel transport and deterministic tangent bases;
* weighted point sets, Karcher means and tangent-space covariances;
* sigma-point sets (minimum, scalable-weight minimum, symmetric minimum and
  homogeneous symmetric) generated in tangent coordinates and lifted to the
  manifold;
* the unscented transform for maps between manifolds;
* filter steps: additive-noise, augmented (general-noise), partially
  additive, a noise-blind baseline and a linear Kalman reference;
* a reproducible benchmark harness with a CLI (``manifold-ukf``).
"""

__version__ = "0.1.0"

from .errors import (
    ContractViolationError,
    ConvergenceError,
    CutLocusError,
    ExpDomainError,
    FactorizationError,
    ManifoldUKFError,
    NotPSDError,
    PositivenessLossError,
    SigmaPointOutOfBallError,
    SingularInnovationError,
)
from .filters import (
    FilterOptions,
    FilterState,
    PredictionBundle,
    additive_step,
    augmented_step,
    correct,
    identity_prediction,
    linear_kf_step,
    noise_blind_step,
    partially_additive_step,
)
from .manifolds import (
    Euclidean,
    Manifold,
    ManifoldPoint,
    Product,
    Sphere,
    TangentBasis,
    TangentVector,
    distance,
    exp_map,
    from_coords,
    log_map,
    parallel_transport_cov,
    parallel_transport_vec,
    tangent_basis,
    to_coords,
    transport_matrix,
)
from .sigma import (
    EuclideanSigmaSet,
    HomogeneousMinimumSymmetric,
    Minimum,
    MinimumSymmetric,
    RhoMinimum,
    SigmaKind,
    euclidean_sigma,
    lift_ball_radius,
    riemannian_sigma,
)
from .stats import (
    RandomPointEstimate,
    WeightedSet,
    karcher_mean,
    sample_covariance,
    sample_cross_covariance,
)
from .systems import (
    AdditiveMeasurementSystem,
    AdditiveProcessSystem,
    AdditiveSystem,
    GeneralSystem,
    NoiseSpec,
    SimulationResult,
    add_tangent_noise,
    as_general,
    sample_tangent_noise,
    simulate,
)
from .transform import UTResult, unscented_transform

__all__ = [
    "__version__",
    # errors
    "ManifoldUKFError",
    "ContractViolationError",
    "ExpDomainError",
    "CutLocusError",
    "NotPSDError",
    "FactorizationError",
    "SigmaPointOutOfBallError",
    "ConvergenceError",
    "SingularInnovationError",
    "PositivenessLossError",
    # manifolds
    "Manifold",
    "Euclidean",
    "Sphere",
    "Product",
    "ManifoldPoint",
    "TangentVector",
    "TangentBasis",
    "exp_map",
    "log_map",
    "distance",
    "parallel_transport_vec",
    "parallel_transport_cov",
    "transport_matrix",
    "tangent_basis",
    "to_coords",
    "from_coords",
    # statistics
    "RandomPointEstimate",
    "WeightedSet",
    "karcher_mean",
    "sample_covariance",
    "sample_cross_covariance",
    # sigma sets
    "SigmaKind",
    "Minimum",
    "RhoMinimum",
    "MinimumSymmetric",
    "HomogeneousMinimumSymmetric",
    "EuclideanSigmaSet",
    "euclidean_sigma",
    "riemannian_sigma",
    "lift_ball_radius",
    # transform
    "UTResult",
    "unscented_transform",
    # systems
    "NoiseSpec",
    "AdditiveSystem",
    "GeneralSystem",
    "AdditiveProcessSystem",
    "AdditiveMeasurementSystem",
    "add_tangent_noise",
    "as_general",
    "sample_tangent_noise",
    "simulate",
    "SimulationResult",
    # filters
    "FilterState",
    "FilterOptions",
    "PredictionBundle",
    "identity_prediction",
    "correct",
    "additive_step",
    "augmented_step",
    "partially_additive_step",
    "noise_blind_step",
    "linear_kf_step",
]
