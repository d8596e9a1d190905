"""
Especificação dos processos geradores de dados (DGP) de simulação
"""
from typing import Tuple, Union

from pydantic import BaseModel, Field, model_validator

from robust_qlr.models.structural import StructuralParamsOneFactor, StructuralParamsTwoFactor


class DgpSpec(BaseModel):
    """Fatores e erros normais independentes: X = ΛΣ^{1/2}z + Φ^{1/2}e"""

    model: str = Field(..., pattern="^(one-factor|two-factor)$")
    structural: Union[StructuralParamsOneFactor, StructuralParamsTwoFactor]
    n: int = Field(..., ge=1)
    seed: int = Field(default=0, ge=0)
    # Caminho do subfluxo aleatório (p.ex. índice de β₀ e replicação)
    stream: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def validate_structural_matches_model(self) -> "DgpSpec":
        expected = (
            StructuralParamsOneFactor if self.model == "one-factor" else StructuralParamsTwoFactor
        )
        if not isinstance(self.structural, expected):
            raise ValueError(f"Parâmetros estruturais não correspondem ao modelo {self.model}")
        return self
