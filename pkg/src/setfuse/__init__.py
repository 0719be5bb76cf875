"""Fusion of finite-set distributions via weighted geometric means, with
cardinality-consistency diagnostics and optimal-weight solvers."""

from .model import (
    BernoulliRfs,
    CardinalityPmf,
    FiniteSet,
    FiniteSetDistribution,
    GaussianDensity,
    GridDensity,
    IidClusterRfs,
    LocalisationDensity,
    PoissonRfs,
    cardinality_of,
    default_poisson_n_max,
    pmf_kld,
    rfs_density_eval,
    validate_normalization,
)
from .fusion import (
    bernoulli_fuse_p2,
    cardinality_emd,
    fused_cardinality_p2,
    iid_fuse_p2,
    localisation_emd,
    poisson_fuse_p2,
)
from .solvers import (
    BernoulliWeight,
    FusionResult,
    NewtonConfig,
    NewtonTrace,
    PoissonWeight,
    SolverError,
    TraceRecord,
    bernoulli_closed_form,
    chernoff_objective,
    consistent_fuse,
    kld_balance_residual,
    newton_cardinality,
    newton_localisation,
    poisson_closed_form,
    with_diagnostics,
)

__all__ = [
    "BernoulliRfs",
    "BernoulliWeight",
    "CardinalityPmf",
    "FiniteSet",
    "FiniteSetDistribution",
    "FusionResult",
    "GaussianDensity",
    "GridDensity",
    "IidClusterRfs",
    "LocalisationDensity",
    "NewtonConfig",
    "NewtonTrace",
    "PoissonRfs",
    "PoissonWeight",
    "SolverError",
    "TraceRecord",
    "bernoulli_closed_form",
    "bernoulli_fuse_p2",
    "cardinality_emd",
    "cardinality_of",
    "chernoff_objective",
    "consistent_fuse",
    "default_poisson_n_max",
    "fused_cardinality_p2",
    "iid_fuse_p2",
    "kld_balance_residual",
    "localisation_emd",
    "newton_cardinality",
    "newton_localisation",
    "pmf_kld",
    "poisson_closed_form",
    "poisson_fuse_p2",
    "rfs_density_eval",
    "validate_normalization",
    "with_diagnostics",
]

__version__ = "0.1.0"
