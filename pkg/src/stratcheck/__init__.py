"""Numerical checks of stratification regularity conditions on graphs of definable functions."""

from .cones import c1_boundary_evidence, check_n, check_npf, cone_fiber, fiber_tangent_cone, secant_direction
from .density import MCConfig, density_profile, psi, theta
from .expr import EXTENDED, STANDARD, eval_jet, parse
from .geom import delta, eta, orthonormalize, tangent_of_graph
from .kernels import BACKEND
from .numscale import XScalar, from_log, to_float
from .probes import FamilyConfig, classify_limit, sample_geometric, standard_family
from .regularity import (
    PairAtPoint,
    Tolerances,
    alpha,
    beta,
    check_condition,
    kuo_ratio,
    r_profile,
    re_quantity,
    rint_check,
    slice_pair,
    verdier_quotient,
)
from .strata import Retraction, catalog, graph_set, project, sample_fiber

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EXTENDED",
    "STANDARD",
    "FamilyConfig",
    "MCConfig",
    "PairAtPoint",
    "Retraction",
    "Tolerances",
    "XScalar",
    "alpha",
    "beta",
    "c1_boundary_evidence",
    "catalog",
    "check_condition",
    "check_n",
    "check_npf",
    "classify_limit",
    "cone_fiber",
    "delta",
    "density_profile",
    "eta",
    "eval_jet",
    "fiber_tangent_cone",
    "from_log",
    "graph_set",
    "kuo_ratio",
    "orthonormalize",
    "parse",
    "project",
    "psi",
    "r_profile",
    "re_quantity",
    "rint_check",
    "sample_fiber",
    "sample_geometric",
    "secant_direction",
    "slice_pair",
    "standard_family",
    "tangent_of_graph",
    "theta",
    "to_float",
    "verdier_quotient",
]
