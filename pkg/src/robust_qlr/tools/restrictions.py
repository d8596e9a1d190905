# src/robust_qlr/tools/restrictions.py
"""
Restrições da hipótese nula e classificação do caso (W1 ou W2)
"""
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from scipy import linalg

from robust_qlr.core.base import FactorModel
from robust_qlr.core.exceptions import InfeasibleRestriction
from robust_qlr.utils.validators import ValidationError


class Case(str, Enum):
    """Casos da lei limite"""
    S = "S"
    W1 = "W1"
    W2 = "W2"


@dataclass(frozen=True)
class BetaRestriction:
    """H₀: β = β₀"""

    beta0: float

    def check(self, tol_strict: float) -> None:
        if not np.isfinite(self.beta0) or self.beta0 < tol_strict:
            raise InfeasibleRestriction(
                f"β₀={self.beta0} fora do espaço de parâmetros (variância deve ser positiva)"
            )

    def describe(self) -> dict:
        return {"type": "beta", "beta0": float(self.beta0)}


@dataclass(frozen=True)
class AffinePiRestriction:
    """H₀: Rπ = r (restrição afim apenas em π)"""

    R: np.ndarray
    r: np.ndarray

    def __post_init__(self) -> None:
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        r = np.atleast_1d(np.asarray(self.r, dtype=float))
        if R.shape[0] != r.size:
            raise ValidationError("R e r devem ter o mesmo número de linhas")
        if np.linalg.matrix_rank(R) < R.shape[0]:
            raise ValidationError("Linhas de R devem ser linearmente independentes")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "r", r)

    def check_dimension(self, model: FactorModel) -> None:
        if self.R.shape[1] != model.spec.d_pi:
            raise ValidationError(
                f"R deve ter {model.spec.d_pi} colunas no modelo {model.spec.name}"
            )

    def residual(self, pi: np.ndarray) -> np.ndarray:
        return self.R @ pi - self.r

    def particular_solution(self) -> np.ndarray:
        solution, *_ = np.linalg.lstsq(self.R, self.r, rcond=None)
        return solution

    def null_space(self) -> np.ndarray:
        """Base N com RN = 0"""
        return linalg.null_space(self.R)

    def describe(self) -> dict:
        return {"type": "affine_pi", "R": self.R.tolist(), "r": self.r.tolist()}


Restriction = Union[BetaRestriction, AffinePiRestriction]


def classify_case(restriction: Restriction) -> Case:
    """β fixado -> W1; restrição afim em π -> W2"""
    if isinstance(restriction, BetaRestriction):
        return Case.W1
    if isinstance(restriction, AffinePiRestriction):
        return Case.W2
    raise ValidationError(f"Restrição não suportada: {type(restriction).__name__}")
