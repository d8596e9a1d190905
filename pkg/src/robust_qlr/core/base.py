# src/robust_qlr/core/base.py
"""
Abstração de modelo de distância mínima com limites

Um modelo define a reparametrização θ = (π, β), a função de ligação
δ(θ) = (π, τ(π, β)), as funções de limite ℓ(θ) ≤ 0 e as coordenadas
estruturais usadas pelo otimizador.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from robust_qlr.config.settings import get_settings
from robust_qlr.core.exceptions import EmptyCrossSection, NotInvertible

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

# Folga para considerar a seção transversal não vazia
CROSS_SECTION_TOL = 1e-10


@dataclass(frozen=True)
class ModelSpec:
    """Dimensões e ordenação de δ de um modelo"""

    name: str
    n_measures: int
    d_pi: int
    d_beta: int
    d_tau: int
    delta_index_map: Tuple[Cell, ...]
    n_bounds: int
    pi_names: Tuple[str, ...]
    bound_names: Tuple[str, ...]

    def __post_init__(self) -> None:
        p = self.n_measures
        if len(self.delta_index_map) != self.d_delta:
            raise ValueError("delta_index_map deve ter d_δ células")
        if self.d_delta != p * (p + 1) // 2:
            raise ValueError("d_δ deve ser p(p+1)/2")
        normalized = {(min(i, j), max(i, j)) for i, j in self.delta_index_map}
        if len(normalized) != self.d_delta:
            raise ValueError("Células de delta_index_map devem ser distintas")

    @property
    def d_delta(self) -> int:
        return self.d_pi + self.d_tau

    @property
    def d_theta(self) -> int:
        return self.d_pi + self.d_beta


@dataclass(frozen=True)
class ThetaPoint:
    """Ponto reparametrizado θ = (π, β) com β escalar"""

    pi: np.ndarray
    beta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "pi", np.asarray(self.pi, dtype=float).copy())
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def vector(self) -> np.ndarray:
        return np.append(self.pi, self.beta)

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "ThetaPoint":
        vector = np.asarray(vector, dtype=float)
        return cls(pi=vector[:-1], beta=float(vector[-1]))

    def to_dict(self) -> dict:
        return {"pi": [float(v) for v in self.pi], "beta": self.beta}


@dataclass
class StructuralBox:
    """Caixa de limites das coordenadas estruturais do otimizador"""

    lower: np.ndarray
    upper: np.ndarray
    beta_index: int
    names: List[str] = field(default_factory=list)

    def as_scipy(self, frozen: Optional[float] = None) -> List[Tuple[Optional[float], Optional[float]]]:
        """Limites no formato do scipy.optimize; fixa a coordenada de β se pedido"""
        bounds: List[Tuple[Optional[float], Optional[float]]] = []
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if frozen is not None and i == self.beta_index:
                bounds.append((frozen, frozen))
                continue
            bounds.append((None if np.isinf(lo) else float(lo), None if np.isinf(hi) else float(hi)))
        return bounds

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)


class FactorModel(ABC):
    """
    Modelo fatorial reparametrizado

    Subclasses implementam τ, seus jacobianos em lote sobre β, os limites
    ℓ e a correspondência com as coordenadas estruturais.
    """

    spec: ModelSpec
    ics_label: str = ""
    # Coordenadas de π que Π̂ varia e número de erros que podem ser nulos juntos
    ics_coordinates: Tuple[int, ...] = ()
    boundary_split: int = 1

    def __init__(self) -> None:
        settings = get_settings()
        self.tol_strict = settings.tol_strict
        self.tol_denom = settings.tol_denom

    # ------------------------------------------------------------------
    # τ e derivadas
    # ------------------------------------------------------------------

    @abstractmethod
    def tau_batch(self, pi: np.ndarray, betas: np.ndarray) -> np.ndarray:
        """τ(π, β) para um vetor de β: retorna (m, d_τ)"""

    @abstractmethod
    def tau_jacobians_batch(self, pi: np.ndarray, betas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(∂_πτ com forma (m, d_τ, d_π), ∂_βτ com forma (m, d_τ))"""

    def tau(self, pi: np.ndarray, beta: float) -> np.ndarray:
        return self.tau_batch(np.asarray(pi, dtype=float), np.array([float(beta)]))[0]

    def tau_jacobians(self, pi: np.ndarray, beta: float) -> Tuple[np.ndarray, np.ndarray]:
        """Jacobianos analíticos (d_τ×d_π, d_τ×d_β)"""
        d_pi, d_beta = self.tau_jacobians_batch(np.asarray(pi, dtype=float), np.array([float(beta)]))
        return d_pi[0], d_beta[0].reshape(-1, 1)

    # ------------------------------------------------------------------
    # Função de ligação
    # ------------------------------------------------------------------

    def _check_theta(self, theta: ThetaPoint) -> None:
        if theta.pi.shape != (self.spec.d_pi,):
            raise ValueError(
                f"π deve ter dimensão {self.spec.d_pi} no modelo {self.spec.name}; "
                f"recebido {theta.pi.shape}"
            )

    def link_delta(self, theta: ThetaPoint) -> np.ndarray:
        """δ(θ) = (π, τ(π, β))"""
        self._check_theta(theta)
        return np.concatenate([theta.pi, self.tau(theta.pi, theta.beta)])

    def link_jacobian_pi(self, theta: ThetaPoint) -> np.ndarray:
        """D₁(θ) = ∂δ/∂π, de forma d_δ×d_π"""
        d_pi, _ = self.tau_jacobians(theta.pi, theta.beta)
        return np.vstack([np.eye(self.spec.d_pi), d_pi])

    def link_jacobian(self, theta: ThetaPoint) -> np.ndarray:
        """D(θ) = ∂δ/∂θ, de forma d_δ×d_θ"""
        d_pi, d_beta = self.tau_jacobians(theta.pi, theta.beta)
        top = np.hstack([np.eye(self.spec.d_pi), np.zeros((self.spec.d_pi, self.spec.d_beta))])
        return np.vstack([top, np.hstack([d_pi, d_beta])])

    # ------------------------------------------------------------------
    # Limites e seção transversal
    # ------------------------------------------------------------------

    @abstractmethod
    def bounds(self, theta: ThetaPoint) -> np.ndarray:
        """ℓ(θ); θ ∈ Θ se e somente se todos os componentes são <= 0"""

    @abstractmethod
    def bounds_jacobian(self, theta: ThetaPoint) -> np.ndarray:
        """∂_θℓ, de forma n_bounds×d_θ"""

    def _affine_bounds(self, pi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        # ℓ_j(π, β) = a_j + b_j β para π fixo
        a = self.bounds(ThetaPoint(pi, 0.0))
        b = self.bounds(ThetaPoint(pi, 1.0)) - a
        return a, b

    def raw_cross_section(self, pi: np.ndarray) -> Tuple[float, float]:
        """Extremos {β : ℓ(π, β) ≤ 0, β > 0} sem verificar se o intervalo é vazio"""
        a, b = self._affine_bounds(np.asarray(pi, dtype=float))
        lo, hi = self.tol_strict, np.inf
        scale = np.maximum(1.0, np.abs(a))
        for a_j, b_j, s_j in zip(a, b, scale):
            if abs(b_j) <= 1e-14 * s_j:
                if a_j > CROSS_SECTION_TOL * s_j:
                    # Limite violado para todo β
                    return np.inf, -np.inf
                continue
            root = -a_j / b_j
            if b_j > 0:
                hi = min(hi, root)
            else:
                lo = max(lo, root)
        return float(lo), float(hi)

    def cross_section(self, pi: np.ndarray) -> Tuple[float, float]:
        """
        Seção transversal B(π) = {β : ℓ(π, β) ≤ 0}

        Raises:
            EmptyCrossSection: Se β_lo > β_hi + tol
        """
        lo, hi = self.raw_cross_section(pi)
        if not lo <= hi + CROSS_SECTION_TOL:
            raise EmptyCrossSection(
                f"Seção transversal vazia para π={np.round(np.asarray(pi), 6).tolist()}: "
                f"[{lo:.6g}, {hi:.6g}]"
            )
        if lo > hi:
            lo = hi = 0.5 * (lo + hi)
        return lo, hi

    def is_in_theta(self, theta: ThetaPoint, tol: float = 0.0) -> bool:
        return bool(np.all(self.bounds(theta) <= tol))

    # ------------------------------------------------------------------
    # Deriva e força de identificação
    # ------------------------------------------------------------------

    def drift_c_hat(self, pi_star: np.ndarray, beta_star: float, beta: float, n: int) -> np.ndarray:
        """ĉ(β; π★, β★) = √n (τ(π★, β) − τ(π★, β★))"""
        return self.drift_c_hat_batch(pi_star, beta_star, np.array([float(beta)]), n)[0]

    def drift_c_hat_batch(
        self, pi_star: np.ndarray, beta_star: float, betas: np.ndarray, n: int
    ) -> np.ndarray:
        pi_star = np.asarray(pi_star, dtype=float)
        star = self.tau(pi_star, beta_star)
        return np.sqrt(n) * (self.tau_batch(pi_star, np.asarray(betas, dtype=float)) - star)

    @abstractmethod
    def local_drift(self, pi: np.ndarray, s_star: np.ndarray, beta_star: float, beta: float) -> np.ndarray:
        """Função de deriva c(β) de sequências fracas com s★ = lim √n s(π_n)"""

    @abstractmethod
    def id_strength_s(self, pi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Funcional de identificação s(π) e seu jacobiano ∂_π s"""

    @abstractmethod
    def ics_threshold(self, n: int) -> float:
        """Limiar do estatístico ICS"""

    def ics_statistic(self, pi: np.ndarray, cov_pi: np.ndarray, n: int) -> float:
        """
        Σ_k n s_k² / V_{s_k}, com V_s = ∂s Var(√n π̆) ∂s′

        Args:
            pi: π̆
            cov_pi: Variância assintótica de √n π̆
            n: Tamanho da amostra
        """
        s, ds = self.id_strength_s(pi)
        var_s = np.einsum("ij,jk,ik->i", ds, cov_pi, ds)
        var_s = np.maximum(var_s, np.finfo(float).tiny)
        return float(np.sum(n * s**2 / var_s))

    # ------------------------------------------------------------------
    # Reparametrização
    # ------------------------------------------------------------------

    @abstractmethod
    def to_theta(self, structural: Any) -> ThetaPoint:
        """Parâmetros estruturais -> θ"""

    @abstractmethod
    def structural_arrays(self, theta: ThetaPoint) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(Λ, Σ, φ) implicados por θ, sem verificar sinais"""

    @abstractmethod
    def build_structural(self, loadings: np.ndarray, factor_cov: np.ndarray, phi: np.ndarray) -> Any:
        """Monta o modelo Pydantic a partir das matrizes"""

    def from_theta(self, theta: ThetaPoint, tol: float = 1e-8) -> Any:
        """
        θ -> parâmetros estruturais

        Raises:
            NotInvertible: Se θ não estiver na imagem do espaço estrutural
        """
        self._check_theta(theta)
        loadings, factor_cov, phi = self.structural_arrays(theta)
        bounded = self.bounded_error_indices()
        scale = max(1.0, float(np.abs(theta.pi).max()))
        if np.any(phi[bounded] < -tol * scale):
            raise NotInvertible(
                f"θ fora do espaço estrutural: variâncias dos erros {np.round(phi, 8).tolist()}"
            )
        if np.linalg.eigvalsh(factor_cov).min() < -tol * scale:
            raise NotInvertible("θ implica covariância dos fatores não PSD")
        phi = phi.copy()
        phi[bounded] = np.maximum(phi[bounded], 0.0)
        try:
            return self.build_structural(loadings, factor_cov, phi)
        except ValueError as e:
            raise NotInvertible(f"θ não corresponde a parâmetros estruturais válidos: {e}") from e

    @abstractmethod
    def bounded_error_indices(self) -> List[int]:
        """Índices das variâncias de erro associadas a uma função de limite"""

    # ------------------------------------------------------------------
    # Coordenadas estruturais do otimizador
    # ------------------------------------------------------------------

    @abstractmethod
    def structural_box(self) -> StructuralBox:
        """Caixa de limites; coincide com Θ = {ℓ ≤ 0}"""

    @abstractmethod
    def unpack(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """x -> (Λ, Σ, φ)"""

    @abstractmethod
    def unpack_jacobian(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Derivadas (dΛ, dΣ, dφ) em relação a cada coordenada de x"""

    @abstractmethod
    def pack(self, loadings: np.ndarray, factor_cov: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """(Λ, Σ, φ) -> x"""

    @abstractmethod
    def beta_to_coordinate(self, beta: float) -> float:
        """Valor da coordenada de x que carrega β"""

    def implied_covariance_x(self, x: np.ndarray) -> np.ndarray:
        loadings, factor_cov, phi = self.unpack(x)
        return loadings @ factor_cov @ loadings.T + np.diag(phi)

    def vech(self, matrix: np.ndarray) -> np.ndarray:
        """Entradas de uma matriz p×p na ordenação de δ do modelo"""
        rows, cols = zip(*self.spec.delta_index_map)
        return np.asarray(matrix)[..., list(rows), list(cols)]

    def unvech(self, delta: np.ndarray) -> np.ndarray:
        p = self.spec.n_measures
        matrix = np.zeros((p, p))
        for value, (i, j) in zip(delta, self.spec.delta_index_map):
            matrix[i, j] = matrix[j, i] = value
        return matrix

    def delta_of_x(self, x: np.ndarray) -> np.ndarray:
        return self.vech(self.implied_covariance_x(x))

    def delta_jacobian_x(self, x: np.ndarray) -> np.ndarray:
        """
        ∂δ/∂x via dΩ = dΛΣΛ′ + ΛΣdΛ′ + ΛdΣΛ′ + dΦ

        Returns:
            np.ndarray: Matriz d_δ×dim(x)
        """
        loadings, factor_cov, _ = self.unpack(x)
        d_lam, d_sigma, d_phi = self.unpack_jacobian(x)
        # (k, p, r) @ (r, r) @ (r, p) -> (k, p, p)
        first = d_lam @ factor_cov @ loadings.T
        d_omega = first + np.transpose(first, (0, 2, 1))
        d_omega = d_omega + loadings @ d_sigma @ loadings.T
        idx = np.arange(self.spec.n_measures)
        d_omega[:, idx, idx] += d_phi
        return self.vech(d_omega).T

    def theta_of_x(self, x: np.ndarray) -> ThetaPoint:
        delta = self.delta_of_x(x)
        _, factor_cov, _ = self.unpack(x)
        return ThetaPoint(delta[: self.spec.d_pi], float(factor_cov[-1, -1]))

    def x_of_theta(self, theta: ThetaPoint) -> np.ndarray:
        """Coordenadas estruturais de θ, projetadas na caixa (usado como semente)"""
        loadings, factor_cov, phi = self.structural_arrays(theta)
        return self.structural_box().clip(self.pack(loadings, factor_cov, phi))

    # ------------------------------------------------------------------
    # Desenhos de teste e delineamentos de simulação
    # ------------------------------------------------------------------

    @abstractmethod
    def design(self) -> Any:
        """Parâmetros estruturais do delineamento de simulação padrão"""

    @abstractmethod
    def strong_design(self) -> Any:
        """Variante fortemente identificada do delineamento"""

    @abstractmethod
    def random_structural(self, rng: np.random.Generator) -> Any:
        """Ponto estrutural aleatório válido (interior)"""

    def describe_bounds(self, values: Sequence[float], tol: float) -> List[str]:
        """Nomes dos limites ativos (|ℓ_j| < tol)"""
        return [name for name, value in zip(self.spec.bound_names, values) if abs(value) < tol]
