"""
Núcleo dos modelos: reparametrização, ligação, limites e registro
"""
from typing import Dict, Type

from robust_qlr.core.base import FactorModel, ModelSpec, StructuralBox, ThetaPoint
from robust_qlr.core.exceptions import InputError
from robust_qlr.core.one_factor import OneFactorModel
from robust_qlr.core.two_factor import TwoFactorModel

MODEL_REGISTRY: Dict[str, Type[FactorModel]] = {
    "one-factor": OneFactorModel,
    "two-factor": TwoFactorModel,
}


def get_model(name: str) -> FactorModel:
    """
    Instancia um modelo pelo identificador

    Raises:
        InputError: Se o modelo não existir
    """
    try:
        return MODEL_REGISTRY[name]()
    except KeyError:
        raise InputError(
            f"Modelo '{name}' desconhecido; use um de: {', '.join(sorted(MODEL_REGISTRY))}"
        ) from None


__all__ = [
    "FactorModel",
    "ModelSpec",
    "StructuralBox",
    "ThetaPoint",
    "OneFactorModel",
    "TwoFactorModel",
    "get_model",
    "MODEL_REGISTRY",
]
