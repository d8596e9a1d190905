# src/robust_qlr/core/two_factor.py
"""
Modelo de dois fatores com cinco medidas

π = (ρ₁₁, ρ₁₂, ρ₂₁, ρ₂₂, ρ₃₁, ρ₃₂, ω₁, …, ω₅, σ₁₂, χ) e β = σ₂². Com
s₁ = ρ₃₂ρ₂₁ − ρ₃₁ρ₂₂ e s₂ = ρ₃₂ρ₁₁ − ρ₃₁ρ₁₂:

    τ₁ = [ρ₁₂s₁ + χ(βρ₃₁ − σ₁₂ρ₃₂)] / (βρ₂₁ − σ₁₂ρ₂₂)
    τ₂ = [ρ₂₂s₂ + χ(βρ₃₁ − σ₁₂ρ₃₂)] / (βρ₁₁ − σ₁₂ρ₁₂)
"""
import logging
import math
from typing import List, Tuple

import numpy as np

from robust_qlr.core.base import FactorModel, ModelSpec, StructuralBox, ThetaPoint
from robust_qlr.core.exceptions import NotInvertible, SingularTau
from robust_qlr.models.structural import StructuralParamsTwoFactor
from robust_qlr.utils.calculations import numerical_jacobian

logger = logging.getLogger(__name__)

# Posições em π
R11, R12, R21, R22, R31, R32 = range(6)
W1, W2, W3, W4, W5 = range(6, 11)
S12, CHI = 11, 12

INVERSE_RESIDUAL_TOL = 1e-8

TWO_FACTOR_SPEC = ModelSpec(
    name="two-factor",
    n_measures=5,
    d_pi=13,
    d_beta=1,
    d_tau=2,
    delta_index_map=(
        (0, 2), (1, 2), (0, 3), (1, 3), (0, 4), (1, 4),
        (0, 0), (1, 1), (2, 2), (3, 3), (4, 4),
        (0, 1), (2, 3),
        (2, 4), (3, 4),
    ),
    n_bounds=4,
    pi_names=(
        "rho11", "rho12", "rho21", "rho22", "rho31", "rho32",
        "omega1", "omega2", "omega3", "omega4", "omega5",
        "sigma12", "chi",
    ),
    bound_names=("phi1", "phi2", "phi3", "phi4"),
)


class TwoFactorModel(FactorModel):
    """Dois fatores com normalização identidade nas duas primeiras medidas"""

    spec = TWO_FACTOR_SPEC
    ics_label = "s1,s2"
    ics_coordinates = (R31, R32)
    boundary_split = 2

    def _denominators(self, pi: np.ndarray, betas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        d1 = betas * pi[R21] - pi[S12] * pi[R22]
        d2 = betas * pi[R11] - pi[S12] * pi[R12]
        small = np.minimum(np.abs(d1), np.abs(d2))
        if np.any(small < self.tol_denom):
            raise SingularTau(
                f"Denominador de τ numericamente nulo (min |D|={small.min():.3e}); "
                "β fora da região admissível para este π"
            )
        return d1, d2

    def _numerators(self, pi: np.ndarray, betas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        s1 = pi[R32] * pi[R21] - pi[R31] * pi[R22]
        s2 = pi[R32] * pi[R11] - pi[R31] * pi[R12]
        common = pi[CHI] * (betas * pi[R31] - pi[S12] * pi[R32])
        return pi[R12] * s1 + common, pi[R22] * s2 + common

    def tau_batch(self, pi: np.ndarray, betas: np.ndarray) -> np.ndarray:
        betas = np.asarray(betas, dtype=float)
        d1, d2 = self._denominators(pi, betas)
        n1, n2 = self._numerators(pi, betas)
        return np.column_stack([n1 / d1, n2 / d2])

    def tau_jacobians_batch(self, pi: np.ndarray, betas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        betas = np.asarray(betas, dtype=float)
        m = betas.size
        d1, d2 = self._denominators(pi, betas)
        n1, n2 = self._numerators(pi, betas)
        tau1, tau2 = n1 / d1, n2 / d2

        r11, r12, r21, r22, r31, r32 = pi[:6]
        s12, chi = pi[S12], pi[CHI]
        s1 = r32 * r21 - r31 * r22
        s2 = r32 * r11 - r31 * r12
        ones = np.ones(m)

        # Partes comuns de χ(βρ₃₁ − σ₁₂ρ₃₂)
        dn_common = np.zeros((m, 13))
        dn_common[:, R31] = chi * betas
        dn_common[:, R32] = -chi * s12 * ones
        dn_common[:, S12] = -chi * r32 * ones
        dn_common[:, CHI] = betas * r31 - s12 * r32

        dn1 = dn_common.copy()
        dn1[:, R12] += s1
        dn1[:, R21] += r12 * r32
        dn1[:, R22] += -r12 * r31
        dn1[:, R31] += -r12 * r22
        dn1[:, R32] += r12 * r21

        dn2 = dn_common.copy()
        dn2[:, R11] += r22 * r32
        dn2[:, R12] += -r22 * r31
        dn2[:, R22] += s2
        dn2[:, R31] += -r22 * r12
        dn2[:, R32] += r22 * r11

        dd1 = np.zeros((m, 13))
        dd1[:, R21] = betas
        dd1[:, R22] = -s12
        dd1[:, S12] = -r22
        dd2 = np.zeros((m, 13))
        dd2[:, R11] = betas
        dd2[:, R12] = -s12
        dd2[:, S12] = -r12

        # ∂τ = (∂N − τ∂D)/D
        d_pi = np.stack(
            [
                (dn1 - tau1[:, None] * dd1) / d1[:, None],
                (dn2 - tau2[:, None] * dd2) / d2[:, None],
            ],
            axis=1,
        )
        d_beta = np.column_stack(
            [
                (chi * r31 - tau1 * r21) / d1,
                (chi * r31 - tau2 * r11) / d2,
            ]
        )
        return d_pi, d_beta

    def bounds(self, theta: ThetaPoint) -> np.ndarray:
        p = theta.pi
        beta = theta.beta
        r11, r12, r21, r22 = p[R11], p[R12], p[R21], p[R22]
        s12, chi = p[S12], p[CHI]
        l1 = (
            chi * s12**2
            - s12 * (r11 * r22 + r12 * r21)
            + p[W1] * r22 * r12
            - (p[W1] * chi - r11 * r21) * beta
        )
        l2 = beta - p[W2]
        l3 = (
            chi * (r11 * beta - s12 * r12)
            - p[W3] * (r21 * beta - s12 * r22)
            - r12 * (r11 * r22 - r12 * r21)
        )
        l4 = (
            chi * (r21 * beta - s12 * r22)
            - p[W4] * (r11 * beta - s12 * r12)
            + r22 * (r11 * r22 - r12 * r21)
        )
        return np.array([l1, l2, l3, l4])

    def bounds_jacobian(self, theta: ThetaPoint) -> np.ndarray:
        p = theta.pi
        beta = theta.beta
        r11, r12, r21, r22 = p[R11], p[R12], p[R21], p[R22]
        w1, w3, w4 = p[W1], p[W3], p[W4]
        s12, chi = p[S12], p[CHI]
        jac = np.zeros((4, 14))

        jac[0, R11] = -s12 * r22 + r21 * beta
        jac[0, R12] = -s12 * r21 + w1 * r22
        jac[0, R21] = -s12 * r12 + r11 * beta
        jac[0, R22] = -s12 * r11 + w1 * r12
        jac[0, W1] = r22 * r12 - chi * beta
        jac[0, S12] = 2.0 * chi * s12 - (r11 * r22 + r12 * r21)
        jac[0, CHI] = s12**2 - w1 * beta
        jac[0, 13] = -(w1 * chi - r11 * r21)

        jac[1, W2] = -1.0
        jac[1, 13] = 1.0

        jac[2, R11] = chi * beta - r12 * r22
        jac[2, R12] = -chi * s12 - r11 * r22 + 2.0 * r12 * r21
        jac[2, R21] = -w3 * beta + r12**2
        jac[2, R22] = w3 * s12 - r12 * r11
        jac[2, W3] = -(r21 * beta - s12 * r22)
        jac[2, S12] = -chi * r12 + w3 * r22
        jac[2, CHI] = r11 * beta - s12 * r12
        jac[2, 13] = chi * r11 - w3 * r21

        jac[3, R11] = -w4 * beta + r22**2
        jac[3, R12] = w4 * s12 - r22 * r21
        jac[3, R21] = chi * beta - r22 * r12
        jac[3, R22] = -chi * s12 + 2.0 * r11 * r22 - r12 * r21
        jac[3, W4] = -(r11 * beta - s12 * r12)
        jac[3, S12] = -chi * r22 + w4 * r12
        jac[3, CHI] = r21 * beta - s12 * r22
        jac[3, 13] = chi * r21 - w4 * r11
        return jac

    def local_drift(self, pi: np.ndarray, s_star: np.ndarray, beta_star: float, beta: float) -> np.ndarray:
        """
        c(β) para sequências com √n s(π_n) → s★

        c₁ = s₁★(β − β★)(χσ₁₂ − ρ₁₂ρ₂₁) / (D₁(β)D₁(β★)), e c₂ análogo com
        (χσ₁₂ − ρ₁₁ρ₂₂) e D₂.
        """
        s_star = np.asarray(s_star, dtype=float)
        betas = np.array([beta, beta_star], dtype=float)
        d1, d2 = self._denominators(pi, betas)
        chi_s12 = pi[CHI] * pi[S12]
        c1 = s_star[0] * (beta - beta_star) * (chi_s12 - pi[R12] * pi[R21]) / (d1[0] * d1[1])
        c2 = s_star[1] * (beta - beta_star) * (chi_s12 - pi[R11] * pi[R22]) / (d2[0] * d2[1])
        return np.array([c1, c2])

    def id_strength_s(self, pi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        s1 = pi[R32] * pi[R21] - pi[R31] * pi[R22]
        s2 = pi[R32] * pi[R11] - pi[R31] * pi[R12]
        ds = np.zeros((2, 13))
        ds[0, R21], ds[0, R22], ds[0, R31], ds[0, R32] = pi[R32], -pi[R31], -pi[R22], pi[R21]
        ds[1, R11], ds[1, R12], ds[1, R31], ds[1, R32] = pi[R32], -pi[R31], -pi[R12], pi[R11]
        return np.array([s1, s2]), ds

    def ics_threshold(self, n: int) -> float:
        return 2.0 * math.log(n)

    def to_theta(self, structural: StructuralParamsTwoFactor) -> ThetaPoint:
        omega = structural.implied_covariance()
        delta = self.vech(omega)
        return ThetaPoint(delta[: self.spec.d_pi], float(structural.factor_cov()[1, 1]))

    def _closed_form_inverse(self, theta: ThetaPoint) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        p = theta.pi
        beta = theta.beta
        s12, chi = p[S12], p[CHI]
        denom = chi * beta - p[R12] * p[R22]
        if abs(denom) < self.tol_denom:
            raise NotInvertible("χβ − ρ₁₂ρ₂₂ numericamente nulo: σ₁² não identificada")
        sigma11 = (
            p[R11] * p[R21] * beta
            - s12 * (p[R11] * p[R22] + p[R12] * p[R21])
            + chi * s12**2
        ) / denom
        factor_cov = np.array([[sigma11, s12], [s12, beta]])
        rho = p[:6].reshape(3, 2)
        try:
            lam = np.linalg.solve(factor_cov, rho.T).T
        except np.linalg.LinAlgError as e:
            raise NotInvertible("Covariância dos fatores singular") from e
        loadings = np.vstack([np.eye(2), lam])
        explained = np.einsum("ij,jk,ik->i", loadings, factor_cov, loadings)
        phi = p[W1:W5 + 1] - explained
        return loadings, factor_cov, phi

    def _inverse_residual(self, unknowns: np.ndarray, theta: ThetaPoint) -> np.ndarray:
        # unknowns = (λ 3×2, σ₁², φ); σ₁₂ e β vêm de θ
        lam = unknowns[:6].reshape(3, 2)
        factor_cov = np.array([[unknowns[6], theta.pi[S12]], [theta.pi[S12], theta.beta]])
        loadings = np.vstack([np.eye(2), lam])
        omega = loadings @ factor_cov @ loadings.T + np.diag(unknowns[7:12])
        return self.vech(omega) - self.link_delta(theta)

    def structural_arrays(self, theta: ThetaPoint) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Inversa da reparametrização

        A forma fechada serve de semente; passos de Newton amortecidos sobre as
        equações de momentos refinam a solução.

        Raises:
            NotInvertible: Se o resíduo final exceder 1e-8
        """
        loadings, factor_cov, phi = self._closed_form_inverse(theta)
        unknowns = np.concatenate([loadings[2:].ravel(), [factor_cov[0, 0]], phi])
        residual = self._inverse_residual(unknowns, theta)
        norm = float(np.abs(residual).max())

        for _ in range(50):
            if norm <= INVERSE_RESIDUAL_TOL * 1e-2:
                break
            jac = numerical_jacobian(lambda u: self._inverse_residual(u, theta), unknowns)
            step, *_ = np.linalg.lstsq(jac, -residual, rcond=None)
            damping = 1.0
            while damping > 1e-4:
                trial = unknowns + damping * step
                trial_residual = self._inverse_residual(trial, theta)
                trial_norm = float(np.abs(trial_residual).max())
                if trial_norm < norm:
                    unknowns, residual, norm = trial, trial_residual, trial_norm
                    break
                damping *= 0.5
            else:
                break

        if norm > INVERSE_RESIDUAL_TOL * max(1.0, float(np.abs(theta.pi).max())):
            raise NotInvertible(f"Inversão numérica não convergiu (resíduo {norm:.3e})")

        lam = unknowns[:6].reshape(3, 2)
        factor_cov = np.array([[unknowns[6], theta.pi[S12]], [theta.pi[S12], theta.beta]])
        return np.vstack([np.eye(2), lam]), factor_cov, unknowns[7:12].copy()

    def build_structural(
        self, loadings: np.ndarray, factor_cov: np.ndarray, phi: np.ndarray
    ) -> StructuralParamsTwoFactor:
        return StructuralParamsTwoFactor(
            lambda_=[[float(v) for v in row] for row in loadings[2:]],
            sigma=[[float(v) for v in row] for row in factor_cov],
            phi=[float(v) for v in phi],
        )

    def bounded_error_indices(self) -> List[int]:
        return [0, 1, 2, 3]

    # x = (λ₁₁, λ₁₂, λ₂₁, λ₂₂, λ₃₁, λ₃₂, a, b, c, φ₁, …, φ₅)
    # Σ = [[b² + c², ab], [ab, a²]]
    def structural_box(self) -> StructuralBox:
        lower = np.full(14, -np.inf)
        lower[0] = self.tol_strict
        lower[2] = self.tol_strict
        lower[6] = math.sqrt(self.tol_strict)
        lower[8] = 0.0
        lower[9:13] = 0.0
        names = [
            "lambda11", "lambda12", "lambda21", "lambda22", "lambda31", "lambda32",
            "a", "b", "c", "phi1", "phi2", "phi3", "phi4", "phi5",
        ]
        return StructuralBox(lower, np.full(14, np.inf), beta_index=6, names=names)

    def unpack(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        a, b, c = x[6], x[7], x[8]
        loadings = np.vstack([np.eye(2), np.asarray(x[:6], dtype=float).reshape(3, 2)])
        factor_cov = np.array([[b * b + c * c, a * b], [a * b, a * a]])
        return loadings, factor_cov, np.asarray(x[9:14], dtype=float)

    def unpack_jacobian(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        a, b, c = x[6], x[7], x[8]
        d_lam = np.zeros((14, 5, 2))
        for k in range(6):
            d_lam[k, 2 + k // 2, k % 2] = 1.0
        d_sigma = np.zeros((14, 2, 2))
        d_sigma[6] = [[0.0, b], [b, 2.0 * a]]
        d_sigma[7] = [[2.0 * b, a], [a, 0.0]]
        d_sigma[8] = [[2.0 * c, 0.0], [0.0, 0.0]]
        d_phi = np.zeros((14, 5))
        d_phi[9:14] = np.eye(5)
        return d_lam, d_sigma, d_phi

    def pack(self, loadings: np.ndarray, factor_cov: np.ndarray, phi: np.ndarray) -> np.ndarray:
        a = math.sqrt(max(factor_cov[1, 1], 0.0))
        b = factor_cov[0, 1] / a if a > 0 else 0.0
        c = math.sqrt(max(factor_cov[0, 0] - b * b, 0.0))
        return np.concatenate([np.asarray(loadings[2:], dtype=float).ravel(), [a, b, c], phi])

    def beta_to_coordinate(self, beta: float) -> float:
        return math.sqrt(beta)

    def design(self) -> StructuralParamsTwoFactor:
        """Σ = I, φ = 1 e todas as cargas iguais a 1"""
        return StructuralParamsTwoFactor(
            lambda_=[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]],
            sigma=[[1.0, 0.0], [0.0, 1.0]],
            phi=[1.0] * 5,
        )

    def strong_design(self) -> StructuralParamsTwoFactor:
        """Cargas não colineares: s(π) ≠ 0"""
        return StructuralParamsTwoFactor(
            lambda_=[[1.0, 0.5], [0.5, 1.0], [1.0, 1.0]],
            sigma=[[1.0, 0.0], [0.0, 1.0]],
            phi=[1.0] * 5,
        )

    def random_structural(self, rng: np.random.Generator) -> StructuralParamsTwoFactor:
        var = rng.uniform(0.5, 2.0, size=2)
        cov12 = float(rng.uniform(-0.5, 0.5) * math.sqrt(var[0] * var[1]))
        signs = rng.choice([-1.0, 1.0], size=2)
        lam = [
            [float(rng.uniform(0.5, 2.0)), float(signs[0] * rng.uniform(0.5, 2.0))],
            [float(rng.uniform(0.5, 2.0)), float(signs[1] * rng.uniform(0.5, 2.0))],
            [float(rng.uniform(-2.0, 2.0)), float(rng.uniform(-2.0, 2.0))],
        ]
        return StructuralParamsTwoFactor(
            lambda_=lam,
            sigma=[[float(var[0]), cov12], [cov12, float(var[1])]],
            phi=[float(v) for v in rng.uniform(0.2, 2.0, size=5)],
        )
