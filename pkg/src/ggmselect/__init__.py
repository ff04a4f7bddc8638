"""Graph estimation for Gaussian graphical models.

Builds data-driven candidate graph families (exhaustive neighborhood
search, pairwise conditional-independence tests, l1 regularization paths,
adaptively reweighted paths) and selects the family member minimizing a
penalized node-regression criterion.  Includes a sparse-model simulator,
recovery/prediction metrics, and a benchmarking CLI.
"""

from .errors import (
    ConvergenceError,
    DegenerateDirectionError,
    DomainError,
    GGMSelectError,
)
from .family_c01 import c01_family, partial_corr, pmax
from .family_ew import EWParams, ew_estimator, ew_family, ew_matrix, scale_columns
from .family_la import la_family
from .family_qe import and_or_graphs, qe_family, select_neighborhood
from .graphs import Graph, GraphFamily, degree_profile, family_union
from .lars import LassoPath, lasso_path
from .linmodel import NodeFit, crit, fit_graph, fit_neighborhood
from .metrics import fdr_power, msep
from .penalty import PenaltyParams, PenaltyTable, dkhi, edkhi, fisher_tail, pen_table
from .selector import SelectionResult, ggmselect, select_my_fam
from .simulate import CovModel, SimParams, calibrate_eta, gen_cov, sample

__version__ = "0.1.0"

__all__ = [
    "CovModel",
    "ConvergenceError",
    "DegenerateDirectionError",
    "DomainError",
    "EWParams",
    "GGMSelectError",
    "Graph",
    "GraphFamily",
    "LassoPath",
    "NodeFit",
    "PenaltyParams",
    "PenaltyTable",
    "SelectionResult",
    "SimParams",
    "and_or_graphs",
    "c01_family",
    "calibrate_eta",
    "crit",
    "degree_profile",
    "dkhi",
    "edkhi",
    "ew_estimator",
    "ew_family",
    "ew_matrix",
    "family_union",
    "fdr_power",
    "fisher_tail",
    "fit_graph",
    "fit_neighborhood",
    "gen_cov",
    "ggmselect",
    "la_family",
    "lasso_path",
    "msep",
    "partial_corr",
    "pen_table",
    "pmax",
    "qe_family",
    "sample",
    "scale_columns",
    "select_my_fam",
    "select_neighborhood",
    "__version__",
]
