# src/robust_qlr/data/dgp.py
"""
Simulação dos dados dos modelos fatoriais com fatores e erros normais
"""
import logging
from typing import Optional

import numpy as np

from robust_qlr.models.simulation import DgpSpec
from robust_qlr.utils.rng import STREAM_DATA, substream

logger = logging.getLogger(__name__)


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    # Raiz simétrica; aceita matrizes PSD singulares
    values, vectors = np.linalg.eigh(matrix)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.T


def simulate_dgp(spec: DgpSpec, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Gera a matriz n×p: X_i = ΛΣ^{1/2}z_i + Φ^{1/2}e_i

    Args:
        spec: Especificação do DGP
        rng: Gerador opcional; por padrão o subfluxo (seed, "data", *stream)

    Returns:
        np.ndarray: Dados simulados, determinísticos dados seed e stream
    """
    if rng is None:
        rng = substream(spec.seed, STREAM_DATA, *spec.stream)

    structural = spec.structural
    loadings = structural.loadings()
    factor_root = _psd_sqrt(structural.factor_cov())
    error_sd = np.sqrt(structural.error_var())

    z = rng.standard_normal((spec.n, loadings.shape[1]))
    e = rng.standard_normal((spec.n, loadings.shape[0]))
    data = z @ (loadings @ factor_root).T + e * error_sd
    logger.debug(f"DGP {spec.model}: {spec.n} observações simuladas (stream={spec.stream})")
    return data
