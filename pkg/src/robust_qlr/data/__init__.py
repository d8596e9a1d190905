"""
Momentos amostrais, ingestão de CSV e simulação de dados
"""
from .dgp import simulate_dgp
from .moments import (
    SampleMoments,
    WeightScheme,
    compute_moments,
    empirical_moments,
    limit_matrices,
    load_csv,
    normal_theory_variance,
    population_moments,
    weight_matrix,
)

__all__ = [
    "SampleMoments",
    "WeightScheme",
    "compute_moments",
    "empirical_moments",
    "limit_matrices",
    "load_csv",
    "normal_theory_variance",
    "population_moments",
    "simulate_dgp",
    "weight_matrix",
]
