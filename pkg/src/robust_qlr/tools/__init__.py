"""
Estimação, leis limite, teste RQLR e estudos de Monte Carlo
"""
from .estimation import (
    EstimateResult,
    Objective,
    estimate_breve,
    estimate_breve_affine,
    estimate_restricted,
    estimate_unrestricted,
    qlr_statistic,
)
from .limit_law import (
    ConcentratedProcess,
    LimitDraws,
    LimitLawSpec,
    concentrated_qw,
    concentrated_qwr,
    draw_qlr_limit,
    qlr_limit_draws,
    simulate_quantile,
)
from .polyhedron import PolyhedralQP, Polyhedron, qp_min
from .restrictions import AffinePiRestriction, BetaRestriction, Case, classify_case
from .rqlr import (
    AlphaBudget,
    build_boundary_sets,
    build_pi_hat,
    ics_kappa,
    invert_ci,
    robust_critical_value,
    rqlr_test,
)

__all__ = [
    "AffinePiRestriction",
    "AlphaBudget",
    "BetaRestriction",
    "Case",
    "ConcentratedProcess",
    "EstimateResult",
    "LimitDraws",
    "LimitLawSpec",
    "Objective",
    "PolyhedralQP",
    "Polyhedron",
    "build_boundary_sets",
    "build_pi_hat",
    "classify_case",
    "concentrated_qw",
    "concentrated_qwr",
    "draw_qlr_limit",
    "estimate_breve",
    "estimate_breve_affine",
    "estimate_restricted",
    "estimate_unrestricted",
    "ics_kappa",
    "invert_ci",
    "qlr_limit_draws",
    "qlr_statistic",
    "qp_min",
    "robust_critical_value",
    "rqlr_test",
    "simulate_quantile",
]
