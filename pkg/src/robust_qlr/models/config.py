"""
Configuração de uma execução (arquivo JSON sobrescrito por flags da CLI)
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from robust_qlr.core.base import FactorModel
from robust_qlr.data.moments import WeightScheme
from robust_qlr.tools.restrictions import AffinePiRestriction, BetaRestriction, Case, Restriction
from robust_qlr.tools.rqlr import AlphaBudget
from robust_qlr.utils.validators import ValidationError


class PiRestrictionConfig(BaseModel):
    """Rπ = r"""

    R: List[List[float]] = Field(..., min_length=1)
    r: List[float] = Field(..., min_length=1)

    def build(self) -> AffinePiRestriction:
        return AffinePiRestriction(self.R, self.r)


class RunConfig(BaseModel):
    """Fonte única de verdade de uma execução; embutida em todo arquivo de saída"""

    model: Literal["one-factor", "two-factor"] = "one-factor"

    # Entrada: CSV ou DGP de simulação
    data: Optional[str] = None
    columns: Optional[List[str]] = None
    design: Optional[Literal["weak", "strong"]] = None
    n: Optional[int] = Field(default=None, ge=1)
    population: bool = False

    # Hipótese
    beta0: Optional[float] = None
    beta0_grid: Optional[List[float]] = None
    pi_restriction: Optional[PiRestrictionConfig] = None

    # Teste
    alpha: float = Field(default=0.05, gt=0, lt=1)
    alpha_c: Optional[float] = Field(default=None, ge=0, lt=1)
    alpha_psi: Optional[float] = Field(default=None, ge=0, lt=1)
    draws: Optional[int] = Field(default=None, ge=1000)
    seed: int = Field(default=0, ge=0)
    max_rule: bool = False
    force_kappa: Optional[Literal[0, 1]] = None
    weighting: WeightScheme = WeightScheme.OPTIMAL
    ci_step: Optional[float] = Field(default=None, gt=0)

    # Estudo de Monte Carlo
    reps: Optional[int] = None
    out: Optional[str] = None

    @field_validator("beta0_grid")
    @classmethod
    def validate_grid(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None and len(v) == 0:
            raise ValueError("Grade de β₀ não pode ser vazia")
        return v

    @model_validator(mode="after")
    def validate_input_source(self) -> "RunConfig":
        if (self.data is None) == (self.design is None):
            raise ValueError("Informe exatamente uma fonte de dados: 'data' (CSV) ou 'design' (DGP)")
        if self.design is not None and self.n is None:
            raise ValueError("'design' exige o tamanho amostral 'n'")
        if self.population and self.design is None:
            raise ValueError("'population' exige um 'design'")
        if self.beta0 is not None and self.pi_restriction is not None:
            raise ValueError("Use 'beta0' ou 'pi_restriction', não ambos")
        return self

    @classmethod
    def from_file(cls, path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """
        Lê o JSON e aplica as sobrescritas (valores None são ignorados)

        Raises:
            ValidationError: Se o arquivo não existir ou não for JSON válido
        """
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"Arquivo de configuração não encontrado: {path}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ValidationError(f"JSON inválido em {path}: {e}") from e
        return cls.from_mapping(payload, overrides)

    @classmethod
    def from_mapping(
        cls, payload: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None
    ) -> "RunConfig":
        merged = dict(payload)
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key] = value
        return cls.model_validate(merged)

    def restriction(self) -> Restriction:
        """
        Raises:
            ValidationError: Se nenhuma hipótese pontual estiver configurada
        """
        if self.pi_restriction is not None:
            return self.pi_restriction.build()
        if self.beta0 is None:
            raise ValidationError("Informe 'beta0' ou 'pi_restriction'")
        return BetaRestriction(self.beta0)

    def budget(self, case: Case) -> AlphaBudget:
        """Orçamento padrão do caso com as sobrescritas de α_c e α_Ψ"""
        default = AlphaBudget.default(case, self.alpha)
        return AlphaBudget(
            alpha=self.alpha,
            alpha_c=default.alpha_c if self.alpha_c is None else self.alpha_c,
            alpha_psi=default.alpha_psi if self.alpha_psi is None else self.alpha_psi,
        ).validate(case)

    def structural(self, model: FactorModel) -> Any:
        if self.design == "strong":
            return model.strong_design()
        return model.design()
