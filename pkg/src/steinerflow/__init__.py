"""Continuous Steiner symmetrization of sets and sampled functions.

The package provides the exact interval flow behind the symmetrization, its
layer-cake lift to grid functions, checkers for the classical rearrangement
inequalities, local-symmetry detection with annular decomposition, weak-form
verification of degenerate elliptic equations, and closed-form test solutions
with piecewise source terms.
"""

from .cst import cst, steiner_symmetrize, truncate
from .estimators import SteinerSymmetrizer
from .exemplars import ExemplarParams, eval_f, eval_grad_u, eval_u, sample
from .gridfn import SampledGridFunction, read_sgf, write_sgf
from .intervals import Interval, IntervalUnion, MergeEvent, collision_time, evolve, measure
from .local_symmetry import (
    AnnularDecomposition,
    Annulus,
    decompose,
    is_locally_symmetric_in_direction,
    levelset_ball_check,
    reflection_partner,
)
from .nonlinearity import NonlinearityPair
from .pde import (
    BoundaryVerdict,
    TestFunction,
    boundary_verdict,
    brock_derivative,
    strong_residual,
    weak_residual,
)
from .properties import (
    PropertyReport,
    boundary_flux,
    cavalieri_check,
    convexity_surplus_check,
    energy,
    energy_inequality_check,
    f_pairing_check,
    h_drift_check,
    hardy_littlewood_check,
    monotonicity_in_level_check,
    nonexpansivity_check,
    prop_battery,
    truncated_monotonicity_check,
)
from .sections import LevelLadder, SectionProfile, cst_section, superlevel_set
from .validation import DegenerateLevelError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "AnnularDecomposition",
    "Annulus",
    "BoundaryVerdict",
    "DegenerateLevelError",
    "ExemplarParams",
    "Interval",
    "IntervalUnion",
    "LevelLadder",
    "MergeEvent",
    "NonlinearityPair",
    "PropertyReport",
    "SampledGridFunction",
    "SectionProfile",
    "SteinerSymmetrizer",
    "TestFunction",
    "ValidationError",
    "boundary_flux",
    "boundary_verdict",
    "brock_derivative",
    "cavalieri_check",
    "collision_time",
    "convexity_surplus_check",
    "cst",
    "cst_section",
    "decompose",
    "energy",
    "energy_inequality_check",
    "eval_f",
    "eval_grad_u",
    "eval_u",
    "evolve",
    "f_pairing_check",
    "h_drift_check",
    "hardy_littlewood_check",
    "is_locally_symmetric_in_direction",
    "levelset_ball_check",
    "measure",
    "monotonicity_in_level_check",
    "nonexpansivity_check",
    "prop_battery",
    "read_sgf",
    "reflection_partner",
    "sample",
    "steiner_symmetrize",
    "superlevel_set",
    "truncate",
    "truncated_monotonicity_check",
    "weak_residual",
    "write_sgf",
]
