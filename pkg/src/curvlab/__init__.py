"""curvlab: exact desk-scale curvature and entropy-contraction analysis of
finite Markov chains."""

__version__ = "0.1.0"

from .chain import (
    Generator,
    ProbabilityVector,
    StateSpace,
    StochasticMatrix,
    adjoint,
    adjoint_generator,
    generator_stationary,
    perturb,
    semigroup_at,
    stationary_distribution,
)
from .metric import (
    GeneratingSet,
    MetricSpace,
    closure_from_pairs,
    combinatorial_distance,
    trivial_metric,
    verify_generating,
)
from .transport import (
    Coupling,
    CurvatureReport,
    SectionalCertificate,
    lipschitz,
    ollivier_curvature,
    sectional_feasible,
    wasserstein,
)
from .entropy import (
    AlphaEstimate,
    EntropyCurve,
    contraction_ratio,
    entropy_decay_curve,
    estimate_alpha,
    lambda2_ppstar,
    relative_entropy,
    relative_entropy_batch,
)
from .bounds import (
    BoundCurve,
    BoundTable,
    compare_bounds,
    dbar,
    dbar_curve,
    kappa_curve,
    mlsi_rate,
)
from .chainspec import ChainBundle, load_chain, parse_chain
from .simulate import (
    CouplingEstimate,
    simulate_bdp_pair,
    simulate_interchange_pair,
    simulate_zrp_pair,
)
from . import models
