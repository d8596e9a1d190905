# src/robust_qlr/config/settings.py
"""
Configurações do robust-qlr

Valores padrão de tolerâncias, tamanhos de grade e paralelismo. Todos podem
ser sobrescritos por variáveis de ambiente com prefixo RQLR_ ou por um
arquivo .env.
"""
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Configurações principais da aplicação"""

    model_config = SettingsConfigDict(
        env_prefix="RQLR_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Aplicação
    log_level: str = Field(default="INFO")
    threads: Optional[int] = Field(default=None, ge=1)

    # Simulação da lei limite
    draws: int = Field(default=10_000, ge=1000)
    beta_grid_size: int = Field(default=200, ge=3)
    golden_tol: float = Field(default=1e-8, gt=0)

    # Otimização
    multistart: int = Field(default=16, ge=1)
    max_iter: int = Field(default=500, ge=1)
    grad_tol: float = Field(default=1e-10, gt=0)
    step_tol: float = Field(default=1e-12, gt=0)

    # Tolerâncias do modelo
    tol_strict: float = Field(default=1e-8, gt=0)
    tol_denom: float = Field(default=1e-12, gt=0)
    bound_active_tol: float = Field(default=1e-6, gt=0)

    # Grades do teste robusto
    pi_grid_one_factor: int = Field(default=21, ge=1)
    pi_grid_two_factor: int = Field(default=9, ge=1)
    ci_step: float = Field(default=0.02, gt=0)
    ci_enlarge: float = Field(default=0.25, ge=0)
    beta_star_grid_size: int = Field(default=5, ge=1)

    def worker_count(self, workers: Optional[int] = None) -> int:
        """Processos efetivos: o valor explícito vence RQLR_THREADS; mínimo 1"""
        if workers is not None:
            return max(1, int(workers))
        return self.threads or 1


# Instância global
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Retorna instância singleton das configurações"""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reload_settings() -> Settings:
    """Recarrega as configurações (útil após alterar o ambiente)"""
    global _settings
    _settings = None
    return get_settings()
