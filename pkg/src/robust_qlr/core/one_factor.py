# src/robust_qlr/core/one_factor.py
"""
Modelo de um fator com três medidas

π = (ρ₁, ρ₂, ω₁, ω₂, ω₃), β = σ² e τ(π, β) = ρ₁ρ₂/β. Os limites vêm da
não negatividade de φ₁ e φ₂: ℓ = (β − ω₁, ρ₁² − ω₂β).
"""
import math
from typing import List, Tuple

import numpy as np

from robust_qlr.core.base import FactorModel, ModelSpec, StructuralBox, ThetaPoint
from robust_qlr.core.exceptions import SingularTau
from robust_qlr.models.structural import StructuralParamsOneFactor

ONE_FACTOR_SPEC = ModelSpec(
    name="one-factor",
    n_measures=3,
    d_pi=5,
    d_beta=1,
    d_tau=1,
    delta_index_map=((0, 1), (0, 2), (0, 0), (1, 1), (2, 2), (1, 2)),
    n_bounds=2,
    pi_names=("rho1", "rho2", "omega1", "omega2", "omega3"),
    bound_names=("phi1", "phi2"),
)


class OneFactorModel(FactorModel):
    """Um fator: X = (1, λ₂, λ₃)′F + e com Var(F) = σ²"""

    spec = ONE_FACTOR_SPEC
    ics_label = "rho2"
    ics_coordinates = (1,)
    boundary_split = 1

    def _check_beta(self, betas: np.ndarray) -> None:
        if np.any(np.abs(betas) < self.tol_denom):
            raise SingularTau(f"β numericamente nulo em τ = ρ₁ρ₂/β (β={betas.min():.3e})")

    def tau_batch(self, pi: np.ndarray, betas: np.ndarray) -> np.ndarray:
        betas = np.asarray(betas, dtype=float)
        self._check_beta(betas)
        return (pi[0] * pi[1] / betas)[:, None]

    def tau_jacobians_batch(self, pi: np.ndarray, betas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        betas = np.asarray(betas, dtype=float)
        self._check_beta(betas)
        m = betas.size
        d_pi = np.zeros((m, 1, 5))
        d_pi[:, 0, 0] = pi[1] / betas
        d_pi[:, 0, 1] = pi[0] / betas
        d_beta = (-pi[0] * pi[1] / betas**2)[:, None]
        return d_pi, d_beta

    def bounds(self, theta: ThetaPoint) -> np.ndarray:
        rho1, _, omega1, omega2, _ = theta.pi
        beta = theta.beta
        return np.array([beta - omega1, rho1**2 - omega2 * beta])

    def bounds_jacobian(self, theta: ThetaPoint) -> np.ndarray:
        rho1, _, _, omega2, _ = theta.pi
        beta = theta.beta
        return np.array(
            [
                [0.0, 0.0, -1.0, 0.0, 0.0, 1.0],
                [2.0 * rho1, 0.0, 0.0, -beta, 0.0, -omega2],
            ]
        )

    def local_drift(self, pi: np.ndarray, s_star: np.ndarray, beta_star: float, beta: float) -> np.ndarray:
        """c(β) = s★ρ₁(1/β − 1/β★)"""
        s = float(np.atleast_1d(s_star)[0])
        return np.array([s * pi[0] * (1.0 / beta - 1.0 / beta_star)])

    def id_strength_s(self, pi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        ds = np.zeros((1, 5))
        ds[0, 1] = 1.0
        return np.array([pi[1]]), ds

    def ics_threshold(self, n: int) -> float:
        # n ρ̆₂²/V ≤ (log n)²  ⟺  √n|ρ̆₂| ≤ log(n)·se
        return math.log(n) ** 2

    def to_theta(self, structural: StructuralParamsOneFactor) -> ThetaPoint:
        s2 = structural.sigma2
        l2, l3 = structural.lambda2, structural.lambda3
        phi = structural.phi
        pi = np.array([l2 * s2, l3 * s2, s2 + phi[0], l2**2 * s2 + phi[1], l3**2 * s2 + phi[2]])
        return ThetaPoint(pi, s2)

    def structural_arrays(self, theta: ThetaPoint) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        rho1, rho2, omega1, omega2, omega3 = theta.pi
        beta = theta.beta
        self._check_beta(np.array([beta]))
        loadings = np.array([[1.0], [rho1 / beta], [rho2 / beta]])
        phi = np.array([omega1 - beta, omega2 - rho1**2 / beta, omega3 - rho2**2 / beta])
        return loadings, np.array([[beta]]), phi

    def build_structural(
        self, loadings: np.ndarray, factor_cov: np.ndarray, phi: np.ndarray
    ) -> StructuralParamsOneFactor:
        return StructuralParamsOneFactor(
            lambda2=float(loadings[1, 0]),
            lambda3=float(loadings[2, 0]),
            sigma2=float(factor_cov[0, 0]),
            phi=[float(v) for v in phi],
        )

    def bounded_error_indices(self) -> List[int]:
        return [0, 1]

    # x = (λ₂, λ₃, σ², φ₁, φ₂, φ₃)
    def structural_box(self) -> StructuralBox:
        lower = np.array([-np.inf, -np.inf, self.tol_strict, 0.0, 0.0, -np.inf])
        upper = np.full(6, np.inf)
        return StructuralBox(lower, upper, beta_index=2,
                             names=["lambda2", "lambda3", "sigma2", "phi1", "phi2", "phi3"])

    def unpack(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        loadings = np.array([[1.0], [x[0]], [x[1]]])
        return loadings, np.array([[x[2]]]), np.asarray(x[3:6], dtype=float)

    def unpack_jacobian(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        d_lam = np.zeros((6, 3, 1))
        d_lam[0, 1, 0] = 1.0
        d_lam[1, 2, 0] = 1.0
        d_sigma = np.zeros((6, 1, 1))
        d_sigma[2, 0, 0] = 1.0
        d_phi = np.zeros((6, 3))
        d_phi[3:6, :] = np.eye(3)
        return d_lam, d_sigma, d_phi

    def pack(self, loadings: np.ndarray, factor_cov: np.ndarray, phi: np.ndarray) -> np.ndarray:
        return np.array([loadings[1, 0], loadings[2, 0], factor_cov[0, 0], *phi])

    def beta_to_coordinate(self, beta: float) -> float:
        return float(beta)

    def design(self) -> StructuralParamsOneFactor:
        """λ₂ = 1, λ₃ = 0, σ² = 1, φ = (1, 1, 2): π = (1, 0, 2, 2, 2), β = 1"""
        return StructuralParamsOneFactor(lambda2=1.0, lambda3=0.0, sigma2=1.0, phi=[1.0, 1.0, 2.0])

    def strong_design(self) -> StructuralParamsOneFactor:
        """Variante fortemente identificada (λ₃ = 1)"""
        return StructuralParamsOneFactor(lambda2=1.0, lambda3=1.0, sigma2=1.0, phi=[1.0, 1.0, 1.0])

    def random_structural(self, rng: np.random.Generator) -> StructuralParamsOneFactor:
        return StructuralParamsOneFactor(
            lambda2=float(rng.uniform(0.3, 2.0) * rng.choice([-1.0, 1.0])),
            lambda3=float(rng.uniform(-2.0, 2.0)),
            sigma2=float(rng.uniform(0.3, 3.0)),
            phi=[float(v) for v in rng.uniform(0.1, 2.0, size=3)],
        )
