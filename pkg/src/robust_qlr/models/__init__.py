"""
Modelos Pydantic: parâmetros estruturais, DGPs e relatórios
"""
from .reports import CIPoint, CIReport, CriticalValueReport, EstimateReport, QuantileReport, TestReport
from .simulation import DgpSpec
from .structural import StructuralParamsOneFactor, StructuralParamsTwoFactor

__all__ = [
    "CIPoint",
    "CIReport",
    "CriticalValueReport",
    "DgpSpec",
    "EstimateReport",
    "QuantileReport",
    "StructuralParamsOneFactor",
    "StructuralParamsTwoFactor",
    "TestReport",
]
