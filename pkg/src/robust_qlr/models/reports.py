"""
Modelos Pydantic para os relatórios de estimação, teste e intervalo
"""
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class CriticalValueReport(BaseModel):
    """Componentes do valor crítico robusto"""

    cv: float = Field(..., ge=0)
    kappa: int = Field(..., ge=0, le=1)
    ics_statistic: float
    ics_threshold: float
    q_weak: Optional[float] = None
    q_strong: Optional[float] = None
    mc_se: float = 0.0
    alpha_weak: float
    alpha_strong: float
    sup_candidate: Optional[List[float]] = None
    sup_beta_star: Optional[float] = None
    candidate_quantiles: List[float] = Field(default_factory=list)
    pi_grid_size: int = 0
    n_failed: int = 0
    max_rule: bool = False
    beta_interval: Optional[Tuple[float, float]] = None
    ell_upper: List[float] = Field(default_factory=list)
    ell_lower: List[float] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)


class TestReport(BaseModel):
    """Resultado do teste RQLR para uma hipótese"""

    # Evita que o pytest tente coletar a classe
    __test__ = False

    case: str = Field(..., pattern="^(W1|W2)$")
    restriction: Dict[str, Any]
    qlr: Optional[float] = None
    cv: Optional[float] = None
    reject: bool
    kappa: Optional[int] = None
    pi_grid_size: int = 0
    sup_candidate: Optional[List[float]] = None
    mc_se: float = 0.0
    active_bounds: List[str] = Field(default_factory=list)
    infeasible_restriction: bool = False
    unrestricted: Optional[Dict[str, Any]] = None
    restricted: Optional[Dict[str, Any]] = None
    theta_breve: Optional[Dict[str, Any]] = None
    critical_value: Optional[CriticalValueReport] = None
    message: Optional[str] = None

    @model_validator(mode="after")
    def validate_decision(self) -> "TestReport":
        if self.infeasible_restriction:
            if not self.reject:
                raise ValueError("Restrição inviável implica rejeição")
            return self
        if self.qlr is None or self.cv is None:
            raise ValueError("qlr e cv são obrigatórios quando a restrição é viável")
        if self.reject != (self.qlr > self.cv):
            raise ValueError("Decisão inconsistente com qlr > cv")
        return self


class CIPoint(BaseModel):
    beta0: float
    qlr: Optional[float] = None
    cv: Optional[float] = None
    reject: bool
    infeasible_restriction: bool = False
    failed: bool = False


class CIReport(BaseModel):
    """Conjunto de confiança para β por inversão de testes"""

    points: List[CIPoint]
    accepted: List[float]
    hull: Optional[Tuple[float, float]] = None
    empty: bool
    non_convex: bool
    grid_interval: Tuple[float, float]
    cross_section: Tuple[float, float]
    step: float


class QuantileReport(BaseModel):
    case: str = Field(..., pattern="^(S|W1|W2)$")
    alpha_level: float
    draws: int
    seed: int
    quantile: float
    mc_se: float
    pi_star: List[float]
    beta_star: float


class EstimateReport(BaseModel):
    """θ̂ nas coordenadas reduzidas e estruturais"""

    name: str
    n: int
    theta: Dict[str, Any]
    structural: Optional[Dict[str, Any]] = None
    q_value: float = Field(..., ge=0)
    active_bounds: List[str] = Field(default_factory=list)
    bounds: List[float] = Field(default_factory=list)
    cross_section: Optional[Tuple[float, float]] = None
    converged: bool
    method: str
    multistart_spread: float = 0.0
