"""
Utilitários do robust-qlr
"""

from .validators import (
    ValidationError,
    validate_alpha,
    validate_beta_grid,
    validate_data_matrix,
    validate_positive_int,
    validate_square_matrix,
)

from .calculations import (
    golden_section_batch,
    normal_quantile,
    numerical_jacobian,
    order_statistic_quantile,
    pd_cholesky,
    pd_inverse,
    regularize_pd,
)

from .rng import derive_seed, substream

__all__ = [
    'ValidationError',
    'validate_alpha',
    'validate_beta_grid',
    'validate_data_matrix',
    'validate_positive_int',
    'validate_square_matrix',
    'golden_section_batch',
    'normal_quantile',
    'numerical_jacobian',
    'order_statistic_quantile',
    'pd_cholesky',
    'pd_inverse',
    'regularize_pd',
    'derive_seed',
    'substream',
]
