"""Builders for the five model families, each returning its generator (or
kernel), stationary law, natural metric, and generating pair set."""

from .bdp import BDPDecayBounds, BirthDeathSpec, bdp_m_curve, bdp_monotone, build_bdp
from .cep import CEPSpec, build_cep, cep_killed_tail, laplace_matrix
from .glauber import (
    GlauberSpec,
    SpinSystem,
    build_glauber,
    conditional_laws,
    glauber_weakdep,
    solve_epsilon_q,
    spin_influences,
)
from .interchange import (
    InterchangeSpec,
    build_interchange,
    interchange_meeting_tail,
    single_particle_conductances,
    transposition_distance,
)
from .zrp import (
    ZRPMonotonicity,
    ZRPSpec,
    adjoint_routing,
    adjoint_spec,
    build_zrp,
    compositions,
    is_mean_field,
    routing_law,
    zrp_monotone,
)
from .caps import DEFAULT_STATE_CAP, state_cap

__all__ = [
    "BDPDecayBounds",
    "BirthDeathSpec",
    "bdp_m_curve",
    "bdp_monotone",
    "build_bdp",
    "CEPSpec",
    "build_cep",
    "cep_killed_tail",
    "laplace_matrix",
    "GlauberSpec",
    "SpinSystem",
    "build_glauber",
    "conditional_laws",
    "glauber_weakdep",
    "solve_epsilon_q",
    "spin_influences",
    "InterchangeSpec",
    "build_interchange",
    "interchange_meeting_tail",
    "single_particle_conductances",
    "transposition_distance",
    "ZRPMonotonicity",
    "ZRPSpec",
    "adjoint_routing",
    "adjoint_spec",
    "build_zrp",
    "compositions",
    "is_mean_field",
    "routing_law",
    "zrp_monotone",
    "DEFAULT_STATE_CAP",
    "state_cap",
]
