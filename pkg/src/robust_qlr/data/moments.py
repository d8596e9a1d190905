# src/robust_qlr/data/moments.py
"""
Momentos amostrais: covariância empírica na ordenação do modelo e a
estimativa de quarto momento da sua variância assintótica
"""
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from robust_qlr.core.base import FactorModel
from robust_qlr.utils.calculations import pd_inverse, symmetrize
from robust_qlr.utils.validators import ValidationError, validate_data_matrix

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

# Autovalor mínimo aceito para V̄ antes da regularização
PSD_TOL = 1e-10


class WeightScheme(str, Enum):
    """Esquemas de ponderação da distância mínima"""
    OPTIMAL = "optimal"      # Ŵ = V̄⁻¹
    IDENTITY = "identity"
    DIAGONAL = "diagonal"    # inversa de diag(V̄)


@dataclass(frozen=True)
class SampleMoments:
    """n, m̂ = vech(S) na ordenação de δ e V̄̂"""

    n: int
    m_hat: np.ndarray
    v_bar_hat: np.ndarray
    model_name: str = ""

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m_hat": [float(v) for v in self.m_hat],
            "model": self.model_name,
        }


def empirical_moments(data: np.ndarray, cells: Sequence[Cell]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Covariância centrada (divisor n) e variância de quarto momento

    V̄[(j,k),(l,m)] = n⁻¹ Σ_i (x_ij x_ik − S_jk)(x_il x_im − S_lm) com x centrado.

    Args:
        data: Matriz n×p
        cells: Células (j, k) na ordem desejada

    Returns:
        Tuple[np.ndarray, np.ndarray]: (m̂, V̄̂)
    """
    x = np.asarray(data, dtype=float)
    centered = x - x.mean(axis=0)
    rows = [j for j, _ in cells]
    cols = [k for _, k in cells]
    products = centered[:, rows] * centered[:, cols]
    m_hat = products.mean(axis=0)
    deviations = products - m_hat
    v_bar = symmetrize(deviations.T @ deviations / x.shape[0])
    return m_hat, v_bar


def compute_moments(model: FactorModel, data: np.ndarray) -> SampleMoments:
    """
    SampleMoments a partir de dados brutos

    Raises:
        InsufficientData: Se n <= p+1
        NonFiniteData: Se houver valores ausentes
    """
    array = validate_data_matrix(data, model.spec.n_measures)
    m_hat, v_bar = empirical_moments(array, model.spec.delta_index_map)

    lam_min = float(np.linalg.eigvalsh(v_bar).min())
    if lam_min < PSD_TOL:
        logger.warning(
            f"V̄̂ quase singular (λ_min={lam_min:.3e}); será regularizada antes da inversão"
        )
    logger.debug(f"Momentos calculados: n={array.shape[0]}, m̂={np.round(m_hat, 4).tolist()}")
    return SampleMoments(n=array.shape[0], m_hat=m_hat, v_bar_hat=v_bar, model_name=model.spec.name)


def normal_theory_variance(cov: np.ndarray, cells: Sequence[Cell]) -> np.ndarray:
    """
    Variância assintótica de vech(S) sob normalidade

    Cov(x_i x_j, x_k x_l) = Σ_ik Σ_jl + Σ_il Σ_jk.
    """
    cov = np.asarray(cov, dtype=float)
    i = np.array([c[0] for c in cells])
    j = np.array([c[1] for c in cells])
    return (
        cov[np.ix_(i, i)] * cov[np.ix_(j, j)]
        + cov[np.ix_(i, j)] * cov[np.ix_(j, i)]
    )


def population_moments(model: FactorModel, structural: Any, n: int) -> SampleMoments:
    """Momentos sem ruído: m̂ = δ(θ) e V̄ pela fórmula da normal"""
    omega = structural.implied_covariance()
    m_hat = model.vech(omega)
    v_bar = normal_theory_variance(omega, model.spec.delta_index_map)
    return SampleMoments(n=int(n), m_hat=m_hat, v_bar_hat=v_bar, model_name=model.spec.name)


def weight_matrix(moments: SampleMoments, scheme: WeightScheme = WeightScheme.OPTIMAL) -> np.ndarray:
    """Matriz de ponderação Ŵ simétrica definida positiva"""
    scheme = WeightScheme(scheme)
    size = moments.m_hat.size
    if scheme == WeightScheme.OPTIMAL:
        return pd_inverse(moments.v_bar_hat)
    if scheme == WeightScheme.IDENTITY:
        return np.eye(size)
    diag = np.diag(moments.v_bar_hat).copy()
    return np.diag(1.0 / np.maximum(diag, PSD_TOL))


def limit_matrices(moments: SampleMoments, weight: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(Ĥ, V̂) = (Ŵ, ŴV̄̂Ŵ)"""
    v_hat = symmetrize(weight @ moments.v_bar_hat @ weight)
    return weight, v_hat


def load_csv(path: str, columns: Optional[List[str]] = None) -> np.ndarray:
    """
    Carrega um CSV com cabeçalho e seleciona colunas na ordem pedida

    Args:
        path: Caminho do arquivo
        columns: Colunas na ordem das medidas do modelo (todas se None)

    Returns:
        np.ndarray: Matriz n×p

    Raises:
        ValidationError: Arquivo ilegível, coluna ausente ou valor ausente
    """
    file_path = Path(path)
    if not file_path.exists():
        raise ValidationError(f"Arquivo de dados não encontrado: {path}")

    df: Optional[pd.DataFrame] = None
    # Tenta diferentes encodings
    for encoding in ["utf-8", "latin-1", "cp1252"]:
        try:
            df = pd.read_csv(file_path, encoding=encoding)
            logger.info(f"Dados carregados com {len(df)} registros (encoding: {encoding})")
            break
        except UnicodeDecodeError:
            continue
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ValidationError(f"CSV inválido em {path}: {e}") from e
    if df is None:
        raise ValidationError("Não foi possível carregar o arquivo com nenhum encoding")

    if columns:
        missing = [c for c in columns if c not in df.columns]
        if missing:
            raise ValidationError(f"Colunas ausentes no CSV: {', '.join(missing)}")
        df = df[list(columns)]

    null_mask = df.isnull().to_numpy()
    if null_mask.any():
        row, col = np.argwhere(null_mask)[0]
        raise ValidationError(
            f"Valor ausente na linha {int(row) + 1} (dados), coluna '{df.columns[col]}'"
        )

    try:
        return df.to_numpy(dtype=float)
    except ValueError as e:
        raise ValidationError(f"Colunas não numéricas em {path}: {e}") from e
