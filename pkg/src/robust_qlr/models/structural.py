# src/robust_qlr/models/structural.py
"""
Modelos Pydantic para os parâmetros estruturais dos modelos fatoriais
"""
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Tolerância para variâncias calculadas numericamente
NONNEG_TOL = 1e-10


class StructuralParamsOneFactor(BaseModel):
    """Um fator, três medidas: X = (1, λ₂, λ₃)′F + e"""

    model_config = ConfigDict(frozen=True)

    lambda2: float
    lambda3: float
    sigma2: float = Field(..., ge=0)
    phi: List[float] = Field(..., min_length=3, max_length=3)

    @field_validator("phi")
    @classmethod
    def validate_phi(cls, v: List[float]) -> List[float]:
        if any(value < -NONNEG_TOL for value in v):
            raise ValueError("Variâncias dos erros devem ser não negativas")
        return [max(0.0, float(value)) for value in v]

    def loadings(self) -> np.ndarray:
        """Matriz de cargas Λ (3×1)"""
        return np.array([[1.0], [self.lambda2], [self.lambda3]])

    def factor_cov(self) -> np.ndarray:
        """Variância do fator Σ (1×1)"""
        return np.array([[self.sigma2]])

    def error_var(self) -> np.ndarray:
        return np.asarray(self.phi, dtype=float)

    def implied_covariance(self) -> np.ndarray:
        """Covariância implícita ΛΣΛ′ + Φ"""
        lam = self.loadings()
        return lam @ self.factor_cov() @ lam.T + np.diag(self.error_var())


class StructuralParamsTwoFactor(BaseModel):
    """
    Dois fatores, cinco medidas

    As duas primeiras linhas de Λ são a normalização identidade; `lambda_`
    guarda as cargas das medidas 3 a 5.
    """

    model_config = ConfigDict(frozen=True)

    lambda_: List[List[float]] = Field(..., min_length=3, max_length=3)
    sigma: List[List[float]] = Field(..., min_length=2, max_length=2)
    phi: List[float] = Field(..., min_length=5, max_length=5)

    @field_validator("lambda_")
    @classmethod
    def validate_lambda(cls, v: List[List[float]]) -> List[List[float]]:
        if any(len(row) != 2 for row in v):
            raise ValueError("Cargas devem formar uma matriz 3×2")
        if v[0][0] < -NONNEG_TOL or v[1][0] < -NONNEG_TOL:
            raise ValueError("Convenção de sinal: λ₁₁ e λ₂₁ devem ser positivas")
        return v

    @field_validator("sigma")
    @classmethod
    def validate_sigma(cls, v: List[List[float]]) -> List[List[float]]:
        if any(len(row) != 2 for row in v):
            raise ValueError("Σ deve ser 2×2")
        matrix = np.asarray(v, dtype=float)
        if abs(matrix[0, 1] - matrix[1, 0]) > NONNEG_TOL:
            raise ValueError("Σ deve ser simétrica")
        if np.linalg.eigvalsh(matrix).min() < -NONNEG_TOL * max(1.0, np.abs(matrix).max()):
            raise ValueError("Σ deve ser positiva semidefinida")
        return v

    @field_validator("phi")
    @classmethod
    def validate_phi(cls, v: List[float]) -> List[float]:
        if any(value < -NONNEG_TOL for value in v):
            raise ValueError("Variâncias dos erros devem ser não negativas")
        return [max(0.0, float(value)) for value in v]

    @model_validator(mode="after")
    def validate_nonzero_loadings(self) -> "StructuralParamsTwoFactor":
        if self.lambda_[0][1] == 0.0 or self.lambda_[1][1] == 0.0:
            raise ValueError("Convenção: λ₁₂ e λ₂₂ devem ser não nulas")
        return self

    def loadings(self) -> np.ndarray:
        """Matriz de cargas completa Λ (5×2)"""
        return np.vstack([np.eye(2), np.asarray(self.lambda_, dtype=float)])

    def factor_cov(self) -> np.ndarray:
        return np.asarray(self.sigma, dtype=float)

    def error_var(self) -> np.ndarray:
        return np.asarray(self.phi, dtype=float)

    def implied_covariance(self) -> np.ndarray:
        """Covariância implícita ΛΣΛ′ + Φ"""
        lam = self.loadings()
        return lam @ self.factor_cov() @ lam.T + np.diag(self.error_var())
