# src/robust_qlr/tools/limit_law.py
"""
Simulação das leis limite do QLR nos casos S, W1 e W2

Os draws Y_b ~ N(0, V̂) são comuns a todos os candidatos (números
aleatórios comuns). O processo concentrado 2q̃ᵂ(β) é avaliado em lote para
todos os draws, numa grade de β compartilhada ou num β por draw, de modo que
a busca áurea refina todos os draws simultaneamente.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from robust_qlr.config.settings import get_settings
from robust_qlr.core.base import FactorModel, ThetaPoint
from robust_qlr.core.exceptions import SingularJ11
from robust_qlr.tools.polyhedron import PolyhedralQP, Polyhedron
from robust_qlr.tools.restrictions import Case
from robust_qlr.utils.calculations import (
    golden_section_batch,
    order_statistic_quantile,
    pd_cholesky,
    symmetrize,
)
from robust_qlr.utils.rng import STREAM_LIMIT, substream
from robust_qlr.utils.validators import validate_alpha, validate_positive_int

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
REFINE_BRACKETS = 3


@dataclass
class LimitDraws:
    """Draws Y_b ~ N(0, V̂) reutilizados entre candidatos"""

    V: np.ndarray
    n_draws: int
    seed: int
    Y: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        root = pd_cholesky(self.V)
        rng = substream(self.seed, STREAM_LIMIT)
        self.Y = rng.standard_normal((self.n_draws, root.shape[0])) @ root.T


@dataclass
class LimitLawSpec:
    """Objetos que indexam a lei limite do QLR"""

    model: FactorModel
    pi_star: np.ndarray
    beta_star: float
    H: np.ndarray
    V: np.ndarray
    n: int
    case: Case
    # Caso S: Ψ e Ψʳ em coordenadas θ. Caso W1: Ψʳ em coordenadas ψ₁
    psi: Optional[Polyhedron] = None
    psi_r: Optional[Polyhedron] = None
    beta_interval: Optional[Tuple[float, float]] = None
    restricted_interval: Optional[Tuple[float, float]] = None
    R1: Optional[np.ndarray] = None
    drift_pi: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.pi_star = np.asarray(self.pi_star, dtype=float)
        if self.drift_pi is None:
            self.drift_pi = self.pi_star
        if self.beta_interval is None and self.case != Case.S:
            self.beta_interval = self.model.cross_section(self.pi_star)
        if self.restricted_interval is None:
            self.restricted_interval = self.beta_interval

    def drift(self, beta: float) -> np.ndarray:
        """ĉ(β; π★, β★)"""
        return self.model.drift_c_hat(self.drift_pi, self.beta_star, beta, self.n)

    def beta_grid(self, size: int) -> np.ndarray:
        lo, hi = self.beta_interval
        return np.linspace(lo, hi, size)


class ConcentratedProcess:
    """
    2q̃ᵂ(β) = c′H_ττc + 2Y_τ′c − u′J₁₁⁻¹u, com u = D₁′(Y + Hg), e o termo
    de restrição Z₁′R₁′(R₁J₁₁⁻¹R₁′)⁻¹R₁Z₁ de 2q̃^{W,r}
    """

    def __init__(
        self,
        model: FactorModel,
        pi_star: np.ndarray,
        beta_star: float,
        H: np.ndarray,
        n: int,
        R1: Optional[np.ndarray] = None,
        drift_pi: Optional[np.ndarray] = None,
    ):
        self.model = model
        self.pi_star = np.asarray(pi_star, dtype=float)
        self.drift_pi = self.pi_star if drift_pi is None else np.asarray(drift_pi, dtype=float)
        self.beta_star = float(beta_star)
        self.n = n
        d_pi = model.spec.d_pi
        H = symmetrize(np.asarray(H, dtype=float))
        self.Hpp = H[:d_pi, :d_pi]
        self.Hpt = H[:d_pi, d_pi:]
        self.Htt = H[d_pi:, d_pi:]
        self.R1 = None if R1 is None or np.size(R1) == 0 else np.atleast_2d(R1)

    def _split(self, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        d_pi = self.model.spec.d_pi
        return Y[:, :d_pi], Y[:, d_pi:]

    def _drift(self, betas: np.ndarray) -> np.ndarray:
        return self.model.drift_c_hat_batch(self.drift_pi, self.beta_star, betas, self.n)

    def evaluate_grid(self, Y: np.ndarray, grid: np.ndarray, restricted: bool = False) -> np.ndarray:
        """
        2q̃ em cada β da grade para todos os draws

        Returns:
            np.ndarray: Matriz (len(grid), n_draws)

        Raises:
            SingularJ11: Se J₁₁(β) for mal condicionada
        """
        Y_pi, Y_tau = self._split(Y)
        d_pi_tau, _ = self.model.tau_jacobians_batch(self.pi_star, grid)
        drifts = self._drift(grid)
        out = np.empty((grid.size, Y.shape[0]))

        for i in range(grid.size):
            T = d_pi_tau[i]
            c = drifts[i]
            J11 = symmetrize(self.Hpp + self.Hpt @ T + T.T @ self.Hpt.T + T.T @ self.Htt @ T)
            if np.linalg.cond(J11) > CONDITION_LIMIT:
                raise SingularJ11(f"J₁₁ mal condicionada em β={grid[i]:.6g}")
            J11_inv = np.linalg.inv(J11)
            u = Y_pi + self.Hpt @ c + (Y_tau + self.Htt @ c) @ T
            quad = np.einsum("bi,ij,bj->b", u, J11_inv, u)
            values = c @ self.Htt @ c + 2.0 * Y_tau @ c - quad
            if restricted and self.R1 is not None:
                RZ = -(u @ J11_inv) @ self.R1.T
                M = self.R1 @ J11_inv @ self.R1.T
                values = values + np.einsum("bi,ij,bj->b", RZ, np.linalg.inv(M), RZ)
            out[i] = values
        return out

    def evaluate_at(self, Y: np.ndarray, betas: np.ndarray, restricted: bool = False) -> np.ndarray:
        """2q̃ no β de cada draw (um β por linha de Y)"""
        Y_pi, Y_tau = self._split(Y)
        T, _ = self.model.tau_jacobians_batch(self.pi_star, betas)
        c = self._drift(betas)
        Tt = np.transpose(T, (0, 2, 1))
        J11 = self.Hpp + self.Hpt @ T + Tt @ self.Hpt.T + Tt @ self.Htt @ T
        J11 = 0.5 * (J11 + np.transpose(J11, (0, 2, 1)))
        u = Y_pi + c @ self.Hpt.T + np.einsum("bt,btp->bp", Y_tau + c @ self.Htt, T)
        sol = np.linalg.solve(J11, u[..., None])[..., 0]
        values = (
            np.einsum("bt,tk,bk->b", c, self.Htt, c)
            + 2.0 * np.sum(Y_tau * c, axis=1)
            - np.sum(u * sol, axis=1)
        )
        if restricted and self.R1 is not None:
            RZ = -sol @ self.R1.T
            J_inv_Rt = np.linalg.solve(J11, np.broadcast_to(self.R1.T, (betas.size,) + self.R1.T.shape))
            M = self.R1 @ J_inv_Rt
            values = values + np.sum(RZ * np.linalg.solve(M, RZ[..., None])[..., 0], axis=1)
        return values

    def minimize(
        self,
        Y: np.ndarray,
        interval: Tuple[float, float],
        restricted: bool = False,
        extra_points: Tuple[float, ...] = (),
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        inf_β 2q̃ sobre o intervalo: grade uniforme e seção áurea em torno dos
        três melhores pontos da grade

        Returns:
            Tuple[np.ndarray, np.ndarray]: (mínimos, argmins) por draw
        """
        settings = get_settings()
        lo, hi = interval
        grid = np.linspace(lo, hi, settings.beta_grid_size) if hi > lo else np.array([lo])
        extras = [b for b in extra_points if lo <= b <= hi]
        if extras:
            grid = np.unique(np.concatenate([grid, extras]))

        values = self.evaluate_grid(Y, grid, restricted)
        n_draws = Y.shape[0]
        best_idx = np.argmin(values, axis=0)
        best_val = values[best_idx, np.arange(n_draws)]
        best_beta = grid[best_idx]
        if grid.size < 3:
            return best_val, best_beta

        n_brackets = min(REFINE_BRACKETS, grid.size)
        order = np.argsort(values, axis=0)[:n_brackets]

        for rank in range(n_brackets):
            idx = order[rank]
            left = grid[np.maximum(idx - 1, 0)]
            right = grid[np.minimum(idx + 1, grid.size - 1)]
            beta_ref, val_ref = golden_section_batch(
                lambda b: self.evaluate_at(Y, b, restricted),
                left,
                right,
                tol=settings.golden_tol,
            )
            better = val_ref < best_val
            best_val = np.where(better, val_ref, best_val)
            best_beta = np.where(better, beta_ref, best_beta)
        return best_val, best_beta


def _process(spec: LimitLawSpec) -> ConcentratedProcess:
    return ConcentratedProcess(
        spec.model, spec.pi_star, spec.beta_star, spec.H, spec.n, spec.R1, spec.drift_pi
    )


def concentrated_qw(spec: LimitLawSpec, y_draw: np.ndarray, beta: float) -> float:
    """q̃ᵂ(β) para um único draw"""
    value = _process(spec).evaluate_grid(np.atleast_2d(y_draw), np.array([float(beta)]))
    return float(0.5 * value[0, 0])


def concentrated_qwr(spec: LimitLawSpec, y_draw: np.ndarray, beta: float) -> float:
    """q̃^{W,r}(β) para um único draw"""
    value = _process(spec).evaluate_grid(np.atleast_2d(y_draw), np.array([float(beta)]), True)
    return float(0.5 * value[0, 0])


def _strong_draws(spec: LimitLawSpec, Y: np.ndarray) -> np.ndarray:
    model = spec.model
    theta = ThetaPoint(spec.pi_star, spec.beta_star)
    D = model.link_jacobian(theta)
    J = symmetrize(D.T @ spec.H @ D)
    if np.linalg.cond(J) > CONDITION_LIMIT:
        raise SingularJ11("J = D′HD mal condicionada no caso S")
    Z = -np.linalg.solve(J, D.T @ Y.T).T
    psi = spec.psi if spec.psi is not None else Polyhedron.unconstrained(model.spec.d_theta)
    psi_r = spec.psi_r if spec.psi_r is not None else Polyhedron.unconstrained(model.spec.d_theta)
    restricted, _ = PolyhedralQP(J, psi_r).solve(Z)
    unrestricted, _ = PolyhedralQP(J, psi).solve(Z)
    return restricted - unrestricted


def _w1_draws(spec: LimitLawSpec, Y: np.ndarray) -> np.ndarray:
    model = spec.model
    process = _process(spec)
    d_pi = model.spec.d_pi

    # Termos em β★ (g = 0)
    T, _ = model.tau_jacobians(spec.pi_star, spec.beta_star)
    J11 = symmetrize(process.Hpp + process.Hpt @ T + T.T @ process.Hpt.T + T.T @ process.Htt @ T)
    if np.linalg.cond(J11) > CONDITION_LIMIT:
        raise SingularJ11(f"J₁₁ mal condicionada em β★={spec.beta_star:.6g}")
    u = Y[:, :d_pi] + Y[:, d_pi:] @ T
    Z1 = -np.linalg.solve(J11, u.T).T
    psi_r = spec.psi_r if spec.psi_r is not None else Polyhedron.unconstrained(d_pi)
    qp_values, _ = PolyhedralQP(J11, psi_r).solve(Z1)
    centered = np.einsum("bi,ij,bj->b", Z1, J11, Z1)

    min_u, _ = process.minimize(Y, spec.beta_interval, extra_points=(spec.beta_star,))
    return qp_values - centered - min_u


def _w2_draws(spec: LimitLawSpec, Y: np.ndarray) -> np.ndarray:
    process = _process(spec)
    min_r, beta_r = process.minimize(Y, spec.restricted_interval, restricted=True)
    min_u, _ = process.minimize(Y, spec.beta_interval)
    # O minimizador restrito também é avaliado no processo irrestrito
    lo, hi = spec.beta_interval
    inside = (beta_r >= lo) & (beta_r <= hi)
    if np.any(inside):
        cross = process.evaluate_at(Y[inside], beta_r[inside])
        min_u[inside] = np.minimum(min_u[inside], cross)
    return min_r - min_u


def qlr_limit_draws(spec: LimitLawSpec, Y: np.ndarray) -> np.ndarray:
    """Draws de QLR*^L para cada linha de Y"""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if spec.case == Case.S:
        return _strong_draws(spec, Y)
    if spec.case == Case.W1:
        return _w1_draws(spec, Y)
    return _w2_draws(spec, Y)


def draw_qlr_limit(spec: LimitLawSpec, y_draw: np.ndarray) -> float:
    """Um draw de QLR*^L"""
    return float(qlr_limit_draws(spec, np.atleast_2d(y_draw))[0])


def simulate_quantile(
    spec: LimitLawSpec,
    alpha_level: float,
    n_draws: int,
    seed: int,
    draws: Optional[LimitDraws] = None,
) -> Tuple[float, float]:
    """
    Quantil (1−α) de QLR*^L com erro de Monte Carlo

    Args:
        spec: Especificação da lei limite
        alpha_level: α_L
        n_draws: B (>= 1000)
        seed: Semente dos draws Y_b
        draws: Draws comuns já gerados (ignora n_draws e seed)
    """
    validate_alpha(alpha_level, "α_L")
    if draws is None:
        validate_positive_int(n_draws, "B", minimum=1000)
        draws = LimitDraws(spec.V, n_draws, seed)
    values = qlr_limit_draws(spec, draws.Y)
    quantile, mc_se = order_statistic_quantile(values, alpha_level)
    logger.debug(
        f"Quantil caso {spec.case.value} em π★={np.round(spec.pi_star[:2], 4).tolist()}: "
        f"{quantile:.4f} (±{mc_se:.4f})"
    )
    return quantile, mc_se
