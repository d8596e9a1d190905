# src/robust_qlr/utils/validators.py
"""
Validadores para dados de entrada e parâmetros de execução
"""
from typing import List, Optional, Sequence

import numpy as np

from robust_qlr.core.exceptions import InputError, InsufficientData, NonFiniteData


class ValidationError(InputError):
    """Exceção customizada para erros de validação"""
    pass


def validate_alpha(alpha: float, name: str = "alpha") -> float:
    """
    Valida um nível de significância

    Args:
        alpha: Nível em (0, 1)
        name: Nome usado na mensagem de erro

    Returns:
        float: O próprio nível

    Raises:
        ValidationError: Se o nível estiver fora de (0, 1)
    """
    if not isinstance(alpha, (int, float)) or not 0.0 < float(alpha) < 1.0:
        raise ValidationError(f"{name} deve estar entre 0 e 1 (recebido {alpha})")
    return float(alpha)


def validate_positive_int(value: int, name: str, minimum: int = 1) -> int:
    """Valida inteiro com limite inferior"""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
        raise ValidationError(f"{name} deve ser inteiro >= {minimum} (recebido {value})")
    return int(value)


def validate_data_matrix(
    data: np.ndarray,
    n_variables: int,
    require_sample_size: bool = True,
) -> np.ndarray:
    """
    Valida a matriz de dados n×p usada no cálculo dos momentos

    Args:
        data: Matriz de observações (uma linha por observação)
        n_variables: Número de variáveis esperado pelo modelo
        require_sample_size: Exige n > p+1

    Returns:
        np.ndarray: Cópia float64 da matriz

    Raises:
        ValidationError: Se a forma estiver incorreta
        NonFiniteData: Se houver NaN ou infinito
        InsufficientData: Se n <= p+1
    """
    array = np.asarray(data, dtype=float)
    if array.ndim != 2 or array.shape[1] != n_variables:
        raise ValidationError(
            f"Dados devem ter forma (n, {n_variables}); recebido {array.shape}"
        )

    finite = np.isfinite(array)
    if not finite.all():
        rows, cols = np.nonzero(~finite)
        raise NonFiniteData(
            f"Valor ausente ou não finito na linha {int(rows[0])}, coluna {int(cols[0])}"
        )

    n = array.shape[0]
    if require_sample_size and n <= n_variables + 1:
        raise InsufficientData(
            f"Amostra com n={n} observações; são necessárias mais que {n_variables + 1}"
        )
    return array


def validate_beta_grid(grid: Optional[Sequence[float]]) -> List[float]:
    """
    Valida e ordena uma grade de valores β₀

    Raises:
        ValidationError: Se a grade estiver vazia ou tiver valores não finitos
    """
    if grid is None or len(grid) == 0:
        raise ValidationError("Grade de β₀ não pode ser vazia")
    values = [float(v) for v in grid]
    if not all(np.isfinite(values)):
        raise ValidationError("Grade de β₀ contém valores não finitos")
    return sorted(set(values))


def validate_square_matrix(matrix: np.ndarray, size: int, name: str) -> np.ndarray:
    """Valida matriz quadrada simétrica de dimensão conhecida"""
    array = np.asarray(matrix, dtype=float)
    if array.shape != (size, size):
        raise ValidationError(f"{name} deve ter forma ({size}, {size}); recebido {array.shape}")
    if not np.all(np.isfinite(array)):
        raise NonFiniteData(f"{name} contém valores não finitos")
    if not np.allclose(array, array.T, atol=1e-10 * max(1.0, np.abs(array).max())):
        raise ValidationError(f"{name} deve ser simétrica")
    return 0.5 * (array + array.T)
