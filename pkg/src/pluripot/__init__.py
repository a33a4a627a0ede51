"""Numerical weighted pluripotential theory on lattice-polytope polynomial spaces."""

from .basis import DimInfo, MultiIndexBasis, a_limit, dims, eval_basis, eval_basis_log
from .design import DesignResult, efficiency_bound, kw_gap, optimal_measure, tfd_sandwich
from .energy import (
    GridFunction1D,
    bvr_energy_experiment,
    closed_form_extremal,
    cocycle_check,
    ddc_1d,
    domination_check,
    energy_1d,
    energy_derivative_check,
)
from .errors import NumericalError, PluripotError, ValidationError
from .fekete import FeketeResult, fekete_moments, fekete_search, log_abs_wvdm
from .geometry import ConvexBody, box, h_p_eval, interval, lattice_points, parse_body, simplex, simplex_inclusion
from .gram import GramSystem, bergman_eval, f_derivative_check, gram_build, logdet_scaled, zn_crosscheck
from .measures import DiscreteMeasure, WeightSpec, bm_constant, make_grid, parse_grid, parse_weight

__version__ = "0.1.0"

__all__ = [
    "ConvexBody", "DesignResult", "DimInfo", "DiscreteMeasure", "FeketeResult", "GramSystem", "GridFunction1D",
    "MultiIndexBasis", "NumericalError", "PluripotError", "ValidationError", "WeightSpec",
    "a_limit", "bergman_eval", "bm_constant", "box", "bvr_energy_experiment", "closed_form_extremal",
    "cocycle_check", "ddc_1d", "dims", "domination_check", "efficiency_bound", "energy_1d",
    "energy_derivative_check", "eval_basis", "eval_basis_log", "f_derivative_check", "fekete_moments",
    "fekete_search", "gram_build", "h_p_eval", "interval", "kw_gap", "lattice_points", "log_abs_wvdm",
    "logdet_scaled", "make_grid", "optimal_measure", "parse_body", "parse_grid", "parse_weight", "simplex",
    "simplex_inclusion", "tfd_sandwich", "zn_crosscheck",
]
