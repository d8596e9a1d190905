# src/robust_qlr/utils/calculations.py
"""
Cálculos numéricos compartilhados: regularização, quantis, busca áurea
vetorizada e jacobianos numéricos
"""
import logging
import math
from typing import Callable, Tuple

import numpy as np
from scipy import stats

logger = logging.getLogger(__name__)

PD_FLOOR = 1e-10
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    """Parte simétrica de uma matriz"""
    return 0.5 * (matrix + matrix.T)


def regularize_pd(matrix: np.ndarray, floor: float = PD_FLOOR) -> np.ndarray:
    """
    Regulariza uma matriz simétrica para definida positiva

    Soma εI com ε = max(0, floor − λ_min).

    Args:
        matrix: Matriz simétrica
        floor: Menor autovalor desejado

    Returns:
        np.ndarray: Matriz com autovalor mínimo >= floor (a menos de arredondamento)
    """
    sym = symmetrize(np.asarray(matrix, dtype=float))
    lam_min = float(np.linalg.eigvalsh(sym).min()) if sym.size else 0.0
    eps = max(0.0, floor - lam_min)
    if eps > 0.0:
        logger.warning(f"Regularização PD aplicada: ε={eps:.3e} (λ_min={lam_min:.3e})")
        sym = sym + eps * np.eye(sym.shape[0])
    return sym


def pd_inverse(matrix: np.ndarray) -> np.ndarray:
    """Inversa de uma matriz regularizada para PD"""
    return symmetrize(np.linalg.inv(regularize_pd(matrix)))


def pd_cholesky(matrix: np.ndarray) -> np.ndarray:
    """Fator de Cholesky inferior após regularização PD"""
    return np.linalg.cholesky(regularize_pd(matrix))


def normal_quantile(prob: float) -> float:
    """Quantil da normal padrão"""
    return float(stats.norm.ppf(prob))


def order_statistic_quantile(values: np.ndarray, alpha: float) -> Tuple[float, float]:
    """
    Quantil (1−α) como estatística de ordem ⌈(1−α)B⌉ e seu erro de Monte Carlo

    O erro padrão usa a aproximação binomial: a posição da estatística de
    ordem oscila ±√(Bα(1−α)) índices, convertida em unidades de valor pelo
    espaçamento local das estatísticas de ordem.

    Args:
        values: Draws simulados (B valores)
        alpha: Nível; retorna o quantil 1−α

    Returns:
        Tuple[float, float]: (quantil, erro padrão de Monte Carlo)
    """
    ordered = np.sort(np.asarray(values, dtype=float))
    size = ordered.size
    if size == 0:
        raise ValueError("Nenhum draw para calcular o quantil")
    k = min(size, max(1, math.ceil((1.0 - alpha) * size - 1e-9)))
    quantile = float(ordered[k - 1])

    spread = max(1, math.ceil(math.sqrt(size * alpha * (1.0 - alpha))))
    upper = ordered[min(size, k + spread) - 1]
    lower = ordered[max(1, k - spread) - 1]
    return quantile, float(0.5 * (upper - lower))


def golden_section_batch(
    func: Callable[[np.ndarray], np.ndarray],
    lower: np.ndarray,
    upper: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Busca da seção áurea simultânea em vários intervalos

    Args:
        func: Avalia um vetor de abscissas (uma por intervalo) e retorna os valores
        lower: Extremos inferiores
        upper: Extremos superiores
        tol: Largura final dos intervalos
        max_iter: Limite de iterações

    Returns:
        Tuple[np.ndarray, np.ndarray]: (argmin, mínimo) por intervalo
    """
    a = np.asarray(lower, dtype=float).copy()
    b = np.asarray(upper, dtype=float).copy()
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc = func(c)
    fd = func(d)

    for _ in range(max_iter):
        if np.all(b - a <= tol):
            break
        left = fc < fd
        # Mínimo em [a, d] quando f(c) < f(d); caso contrário em [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = np.where(left, b - GOLDEN * (b - a), d)
        new_d = np.where(left, c, a + GOLDEN * (b - a))
        trial = np.where(left, new_c, new_d)
        ftrial = func(trial)
        fc_next = np.where(left, ftrial, fd)
        fd_next = np.where(left, fc, ftrial)
        c, d, fc, fd = new_c, new_d, fc_next, fd_next

    best_left = fc <= fd
    return np.where(best_left, c, d), np.where(best_left, fc, fd)


def numerical_jacobian(
    func: Callable[[np.ndarray], np.ndarray],
    point: np.ndarray,
    step: float = 1e-6,
) -> np.ndarray:
    """
    Jacobiano por diferenças centrais

    Args:
        func: Função vetorial
        point: Ponto de avaliação
        step: Passo relativo

    Returns:
        np.ndarray: Matriz (saída × entrada)
    """
    x = np.asarray(point, dtype=float)
    columns = []
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        forward = x.copy()
        backward = x.copy()
        forward[i] += h
        backward[i] -= h
        columns.append((np.asarray(func(forward)) - np.asarray(func(backward))) / (2.0 * h))
    return np.column_stack(columns)
