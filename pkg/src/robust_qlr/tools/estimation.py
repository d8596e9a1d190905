# src/robust_qlr/tools/estimation.py
"""
Estimação por distância mínima com limites

Q_n(θ) = (δ(θ) − m̂)′Ŵ(δ(θ) − m̂)/2. O ajuste com limites roda nas
coordenadas estruturais (onde Θ é uma caixa) com múltiplos pontos iniciais;
θ̆ minimiza Q_n em π com β fixo, ignorando os limites.
"""
import concurrent.futures as cf
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from robust_qlr.config.settings import get_settings
from robust_qlr.core.base import FactorModel, StructuralBox, ThetaPoint
from robust_qlr.core.exceptions import (
    InfeasibleRestriction,
    NoConvergence,
    NotInvertible,
    SingularTau,
)
from robust_qlr.data.moments import SampleMoments, WeightScheme, limit_matrices, weight_matrix
from robust_qlr.tools.restrictions import AffinePiRestriction, BetaRestriction, Restriction
from robust_qlr.utils.calculations import symmetrize
from robust_qlr.utils.rng import STREAM_STARTS, substream
from robust_qlr.utils.validators import validate_square_matrix

logger = logging.getLogger(__name__)

# Gradiente projetado aceito como convergência quando o otimizador para antes
PROJECTED_GRAD_TOL = 1e-6
FOC_TOL = 1e-8
FEASIBILITY_TOL = 1e-8
SEED_SCAN_POINTS = 21


class Objective:
    """Função objetivo de distância mínima"""

    def __init__(
        self,
        model: FactorModel,
        moments: SampleMoments,
        scheme: WeightScheme = WeightScheme.OPTIMAL,
        weight: Optional[np.ndarray] = None,
    ):
        self.model = model
        self.moments = moments
        self.scheme = WeightScheme(scheme)
        if weight is None:
            self.weight = weight_matrix(moments, self.scheme)
        else:
            self.weight = validate_square_matrix(weight, model.spec.d_delta, "Ŵ")
            if np.linalg.eigvalsh(self.weight).min() <= 0:
                raise ValueError("Ŵ deve ser definida positiva")
        self.H, self.V = limit_matrices(moments, self.weight)
        self._root = np.linalg.cholesky(self.weight)

    @property
    def n(self) -> int:
        return self.moments.n

    @property
    def optimal(self) -> bool:
        return self.scheme == WeightScheme.OPTIMAL

    def residual(self, theta: ThetaPoint) -> np.ndarray:
        return self.model.link_delta(theta) - self.moments.m_hat

    def q_value(self, theta: ThetaPoint) -> float:
        """Q_n(θ) >= 0"""
        r = self.residual(theta)
        return float(0.5 * r @ self.weight @ r)

    def q_of_x(self, x: np.ndarray) -> float:
        r = self.model.delta_of_x(x) - self.moments.m_hat
        return float(0.5 * r @ self.weight @ r)

    def grad_of_x(self, x: np.ndarray) -> np.ndarray:
        r = self.model.delta_of_x(x) - self.moments.m_hat
        return self.model.delta_jacobian_x(x).T @ (self.weight @ r)

    def whitened_residual_x(self, x: np.ndarray) -> np.ndarray:
        # q = ½‖L′r‖² com Ŵ = LL′
        return self._root.T @ (self.model.delta_of_x(x) - self.moments.m_hat)

    def whitened_jacobian_x(self, x: np.ndarray) -> np.ndarray:
        return self._root.T @ self.model.delta_jacobian_x(x)

    def first_order_pi(self, theta: ThetaPoint) -> np.ndarray:
        """D₁(θ)′Ŵ(δ(θ) − m̂)"""
        return self.model.link_jacobian_pi(theta).T @ (self.weight @ self.residual(theta))


@dataclass
class EstimateResult:
    """Resultado de um ajuste com limites"""

    theta_hat: ThetaPoint
    structural_hat: Optional[Any]
    q_value: float
    active_bounds: List[int]
    converged: bool
    multistart_spread: float
    x_hat: np.ndarray
    bounds_value: np.ndarray
    n_converged: int = 0
    method: str = "multistart"
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self, model: FactorModel) -> Dict[str, Any]:
        structural = self.structural_hat.model_dump() if self.structural_hat is not None else None
        return {
            "theta": self.theta_hat.to_dict(),
            "structural": structural,
            "q_value": self.q_value,
            "active_bounds": [model.spec.bound_names[j] for j in self.active_bounds],
            "bounds": [float(v) for v in self.bounds_value],
            "converged": self.converged,
            "multistart_spread": self.multistart_spread,
            "n_converged": self.n_converged,
            "method": self.method,
        }


@dataclass
class _StartOutcome:
    x: np.ndarray
    q: float
    converged: bool


class _FreeCoordinates:
    """Elimina a coordenada estrutural de β quando ela está fixa"""

    def __init__(self, box: StructuralBox, frozen: Optional[float]):
        size = box.lower.size
        self.frozen = frozen
        self.beta_index = box.beta_index
        self.mask = np.ones(size, dtype=bool)
        if frozen is not None:
            self.mask[box.beta_index] = False
        self.lower = box.lower[self.mask]
        self.upper = box.upper[self.mask]

    def full(self, y: np.ndarray) -> np.ndarray:
        x = np.empty(self.mask.size)
        x[self.mask] = y
        if self.frozen is not None:
            x[self.beta_index] = self.frozen
        return x

    def free(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float)[self.mask]

    def scipy_bounds(self) -> List[Tuple[Optional[float], Optional[float]]]:
        return [
            (None if np.isinf(lo) else float(lo), None if np.isinf(hi) else float(hi))
            for lo, hi in zip(self.lower, self.upper)
        ]

    def projected_gradient(self, y: np.ndarray, grad: np.ndarray) -> float:
        g = grad.copy()
        at_lower = (y <= self.lower + 1e-12) & (g > 0)
        at_upper = (y >= self.upper - 1e-12) & (g < 0)
        g[at_lower | at_upper] = 0.0
        return float(np.abs(g).max()) if g.size else 0.0


def _seed_beta_values(model: FactorModel, pi0: np.ndarray) -> np.ndarray:
    lo, hi = model.raw_cross_section(pi0)
    if lo > hi:
        # Seção vazia: usa os extremos ordenados
        lo, hi = hi, lo
    if not np.isfinite(lo):
        lo = model.tol_strict
    if not np.isfinite(hi):
        hi = max(2.0 * lo, 1.0)
    lo = max(lo, model.tol_strict)
    if hi <= lo:
        hi = lo * 2.0 + 1e-6
    return np.linspace(lo, hi, SEED_SCAN_POINTS)


def moment_seed(obj: Objective, beta_fixed: Optional[float] = None) -> np.ndarray:
    """
    Semente de momentos: varre β sobre a seção de π = m̂_π usando a inversa fechada

    Returns:
        np.ndarray: Coordenadas estruturais com menor Q_n na varredura
    """
    model = obj.model
    pi0 = obj.moments.m_hat[: model.spec.d_pi]
    betas = np.array([beta_fixed]) if beta_fixed is not None else _seed_beta_values(model, pi0)
    box = model.structural_box()

    best_x: Optional[np.ndarray] = None
    best_q = np.inf
    for beta in betas:
        try:
            x = model.x_of_theta(ThetaPoint(pi0, float(beta)))
        except (NotInvertible, SingularTau):
            continue
        if beta_fixed is not None:
            x[box.beta_index] = model.beta_to_coordinate(beta_fixed)
        if not np.all(np.isfinite(x)):
            continue
        q = obj.q_of_x(x)
        if q < best_q:
            best_x, best_q = x, q

    if best_x is None:
        logger.warning("Semente de momentos indisponível; usando o delineamento padrão")
        best_x = model.x_of_theta(model.to_theta(model.design()))
        if beta_fixed is not None:
            best_x[box.beta_index] = model.beta_to_coordinate(beta_fixed)
    return best_x


def _starting_points(
    obj: Objective, coords: _FreeCoordinates, beta_fixed: Optional[float], seed: int, n_starts: int
) -> List[np.ndarray]:
    x0 = moment_seed(obj, beta_fixed)
    y0 = np.clip(coords.free(x0), coords.lower, coords.upper)
    rng = substream(seed, STREAM_STARTS)
    starts = [y0]
    for _ in range(n_starts - 1):
        noise = rng.normal(scale=0.25, size=y0.size) * (1.0 + np.abs(y0))
        starts.append(np.clip(y0 + noise, coords.lower, coords.upper))
    return starts


def _run_bounded_start(obj: Objective, coords: _FreeCoordinates, y0: np.ndarray) -> _StartOutcome:
    settings = get_settings()

    def fun(y: np.ndarray) -> float:
        return obj.q_of_x(coords.full(y))

    def jac(y: np.ndarray) -> np.ndarray:
        return obj.grad_of_x(coords.full(y))[coords.mask]

    try:
        res = optimize.minimize(
            fun,
            y0,
            jac=jac,
            method="L-BFGS-B",
            bounds=coords.scipy_bounds(),
            options={
                "maxiter": settings.max_iter,
                "gtol": settings.grad_tol,
                "ftol": settings.step_tol,
            },
        )
        y = np.clip(res.x, coords.lower, coords.upper)
        success = bool(res.success)
    except (FloatingPointError, ValueError) as e:
        logger.debug(f"L-BFGS-B falhou: {e}")
        y, success = y0, False

    # Polimento por mínimos quadrados com limites (região de confiança refletiva)
    try:
        lsq = optimize.least_squares(
            lambda v: obj.whitened_residual_x(coords.full(v)),
            y,
            jac=lambda v: obj.whitened_jacobian_x(coords.full(v))[:, coords.mask],
            bounds=(coords.lower, coords.upper),
            method="trf",
            xtol=settings.step_tol,
            ftol=max(settings.step_tol, 1e-15),
            gtol=settings.grad_tol,
            max_nfev=settings.max_iter,
        )
        if fun(lsq.x) <= fun(y):
            y = np.clip(lsq.x, coords.lower, coords.upper)
            success = success or bool(lsq.success)
    except (FloatingPointError, ValueError, np.linalg.LinAlgError) as e:
        logger.debug(f"Polimento por mínimos quadrados falhou: {e}")

    q = fun(y)
    pg = coords.projected_gradient(y, jac(y))
    converged = success or pg <= PROJECTED_GRAD_TOL * max(1.0, q)
    return _StartOutcome(coords.full(y), q, bool(converged and np.isfinite(q)))


def _run_affine_start(
    obj: Objective, restriction: AffinePiRestriction, coords: _FreeCoordinates, y0: np.ndarray
) -> _StartOutcome:
    settings = get_settings()
    model = obj.model
    d_pi = model.spec.d_pi

    def fun(y: np.ndarray) -> float:
        return obj.q_of_x(coords.full(y))

    def jac(y: np.ndarray) -> np.ndarray:
        return obj.grad_of_x(coords.full(y))

    def cons(y: np.ndarray) -> np.ndarray:
        return restriction.residual(model.delta_of_x(coords.full(y))[:d_pi])

    def cons_jac(y: np.ndarray) -> np.ndarray:
        return restriction.R @ model.delta_jacobian_x(coords.full(y))[:d_pi]

    try:
        res = optimize.minimize(
            fun,
            y0,
            jac=jac,
            method="SLSQP",
            bounds=coords.scipy_bounds(),
            constraints=[{"type": "eq", "fun": cons, "jac": cons_jac}],
            options={"maxiter": settings.max_iter, "ftol": settings.step_tol},
        )
    except (FloatingPointError, ValueError) as e:
        logger.debug(f"SLSQP falhou: {e}")
        return _StartOutcome(coords.full(y0), np.inf, False)

    y = np.clip(res.x, coords.lower, coords.upper)
    violation = float(np.abs(cons(y)).max())
    feasible = violation <= FEASIBILITY_TOL * max(1.0, float(np.abs(restriction.r).max(initial=0.0)))
    return _StartOutcome(coords.full(y), fun(y), bool(res.success and feasible))


def _summarize(
    obj: Objective, outcomes: List[_StartOutcome], method: str
) -> EstimateResult:
    model = obj.model
    settings = get_settings()
    converged = [o for o in outcomes if o.converged]
    pool = converged if converged else outcomes
    best = min(pool, key=lambda o: o.q)
    spread = float(max(o.q for o in converged) - min(o.q for o in converged)) if converged else np.inf

    theta = model.theta_of_x(best.x)
    bounds_value = model.bounds(theta)
    active = [j for j, v in enumerate(bounds_value) if abs(v) < settings.bound_active_tol]
    loadings, factor_cov, phi = model.unpack(best.x)
    diagnostics: Dict[str, Any] = {}
    try:
        structural = model.build_structural(loadings, factor_cov, phi)
    except ValueError as e:
        # Variância de erro sem limite (φ₃ ou φ₅) negativa: θ̂ segue válido
        structural = None
        diagnostics["structural_skipped"] = str(e)
        logger.warning(f"Parâmetros estruturais não reportados (φ={np.round(phi, 6).tolist()}): {e}")

    logger.debug(
        f"Ajuste {method}: q={best.q:.6e}, {len(converged)}/{len(outcomes)} partidas convergiram, "
        f"dispersão={spread:.3e}"
    )
    return EstimateResult(
        theta_hat=theta,
        structural_hat=structural,
        q_value=float(best.q),
        active_bounds=active,
        converged=bool(converged),
        multistart_spread=spread,
        x_hat=best.x,
        bounds_value=bounds_value,
        n_converged=len(converged),
        method=method,
        diagnostics=diagnostics,
    )


def _run_starts(
    run: Callable[[np.ndarray], _StartOutcome],
    starts: Sequence[np.ndarray],
    workers: Optional[int],
) -> List[_StartOutcome]:
    """
    Executa as partidas em ordem; com `workers` > 1 usa um pool de processos

    Sem `workers` explícito roda em série: testes dentro de estudos de Monte
    Carlo e da grade do intervalo já ocupam o pool externo.
    """
    n_workers = 1 if workers is None else min(get_settings().worker_count(workers), len(starts))
    if n_workers <= 1:
        return [run(y0) for y0 in starts]
    with cf.ProcessPoolExecutor(max_workers=n_workers) as ex:
        return list(ex.map(run, starts))


def _fit_bounded(
    obj: Objective,
    beta_fixed: Optional[float],
    seed: int,
    n_starts: Optional[int] = None,
    workers: Optional[int] = None,
) -> EstimateResult:
    settings = get_settings()
    model = obj.model
    frozen = model.beta_to_coordinate(beta_fixed) if beta_fixed is not None else None
    coords = _FreeCoordinates(model.structural_box(), frozen)
    starts = _starting_points(obj, coords, beta_fixed, seed, n_starts or settings.multistart)
    outcomes = _run_starts(partial(_run_bounded_start, obj, coords), starts, workers)
    return _summarize(obj, outcomes, "multistart")


def _profile_beta(obj: Objective, seed: int) -> EstimateResult:
    """Perfil em β sobre a seção transversal da semente"""
    settings = get_settings()
    model = obj.model
    pi0 = obj.moments.m_hat[: model.spec.d_pi]
    lo, hi = _seed_beta_values(model, pi0)[[0, -1]]
    logger.warning(f"Quasi-Newton sem convergência; perfilando β em [{lo:.4g}, {hi:.4g}]")

    outcomes: List[_StartOutcome] = []
    for beta in np.linspace(lo, hi, settings.beta_grid_size):
        coords = _FreeCoordinates(model.structural_box(), model.beta_to_coordinate(beta))
        y0 = np.clip(coords.free(moment_seed(obj, float(beta))), coords.lower, coords.upper)
        outcomes.append(_run_bounded_start(obj, coords, y0))
    best = min((o for o in outcomes if o.converged), key=lambda o: o.q, default=None)
    if best is None:
        raise NoConvergence("Nenhum ponto inicial convergiu, nem no perfil em β")

    # Refinamento livre a partir do melhor ponto do perfil
    coords = _FreeCoordinates(model.structural_box(), None)
    final = _run_bounded_start(obj, coords, coords.free(best.x))
    pool = [final, best] if final.converged else [best]
    result = _summarize(obj, pool, "beta-profile")
    return result


def estimate_unrestricted(obj: Objective, seed: int = 0, workers: Optional[int] = None) -> EstimateResult:
    """
    Minimiza Q_n sobre Θ

    As partidas são independentes; `workers` > 1 as distribui entre processos
    sem alterar o resultado.

    Raises:
        NoConvergence: Se nenhum ponto inicial nem o perfil em β convergirem
    """
    result = _fit_bounded(obj, None, seed, workers=workers)
    if not result.converged:
        result = _profile_beta(obj, seed)
    logger.info(
        f"Estimativa irrestrita: β̂={result.theta_hat.beta:.6g}, q={result.q_value:.6e}, "
        f"limites ativos={result.active_bounds}"
    )
    return result


def estimate_restricted(
    obj: Objective, restriction: Restriction, seed: int = 0, workers: Optional[int] = None
) -> EstimateResult:
    """
    Minimiza Q_n sobre Θʳ = {θ ∈ Θ : r(θ) = 0}

    Raises:
        InfeasibleRestriction: β₀ fora do espaço ou nenhuma partida viável
        NoConvergence: Se nenhum ponto inicial convergir
    """
    settings = get_settings()
    model = obj.model

    if isinstance(restriction, BetaRestriction):
        restriction.check(model.tol_strict)
        result = _fit_bounded(obj, restriction.beta0, seed, workers=workers)
        if not result.converged:
            raise NoConvergence(f"Ajuste restrito em β₀={restriction.beta0} não convergiu")
        return result

    restriction.check_dimension(model)
    coords = _FreeCoordinates(model.structural_box(), None)
    starts = _starting_points(obj, coords, None, seed, settings.multistart)
    outcomes = _run_starts(partial(_run_affine_start, obj, restriction, coords), starts, workers)
    if not any(o.converged for o in outcomes):
        finite = [o for o in outcomes if np.isfinite(o.q)]
        violations = [
            float(np.abs(restriction.residual(model.delta_of_x(o.x)[: model.spec.d_pi])).max())
            for o in finite
        ]
        if not violations or min(violations) > 1e-6:
            raise InfeasibleRestriction("Nenhuma partida satisfez Rπ = r dentro de Θ")
        raise NoConvergence("Ajuste com restrição afim em π não convergiu")
    return _summarize(obj, outcomes, "multistart-affine")


def _gauss_newton_pi(
    obj: Objective,
    beta: float,
    y0: np.ndarray,
    offset: np.ndarray,
    basis: np.ndarray,
) -> Tuple[np.ndarray, float, float]:
    """
    Gauss–Newton em π = offset + basis·y com β fixo

    Returns:
        Tuple[np.ndarray, float, float]: (π, Q_n, ‖D₁′Ŵr‖)
    """
    settings = get_settings()
    W = obj.weight
    y = y0.copy()
    theta = ThetaPoint(offset + basis @ y, beta)
    r = obj.residual(theta)
    q = 0.5 * r @ W @ r
    grad_norm = np.inf

    for _ in range(settings.max_iter):
        G = obj.model.link_jacobian_pi(theta) @ basis
        grad = G.T @ (W @ r)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= FOC_TOL:
            break
        A = symmetrize(G.T @ W @ G)
        step, *_ = np.linalg.lstsq(A, -grad, rcond=None)

        accepted = False
        t = 1.0
        while t > 1e-10:
            trial_y = y + t * step
            try:
                trial_theta = ThetaPoint(offset + basis @ trial_y, beta)
                trial_r = obj.residual(trial_theta)
            except SingularTau:
                t *= 0.5
                continue
            trial_q = 0.5 * trial_r @ W @ trial_r
            if trial_q <= q:
                y, theta, r, q = trial_y, trial_theta, trial_r, trial_q
                accepted = True
                break
            t *= 0.5
        if not accepted or t * np.linalg.norm(step) <= settings.step_tol * (1.0 + np.linalg.norm(y)):
            G = obj.model.link_jacobian_pi(theta) @ basis
            grad_norm = float(np.linalg.norm(G.T @ (W @ r)))
            break
    return theta.pi, float(q), grad_norm


def _breve_multistart(
    obj: Objective, beta: float, offset: np.ndarray, basis: np.ndarray, pi_start: np.ndarray, seed: int
) -> ThetaPoint:
    settings = get_settings()
    n_starts = max(1, settings.multistart // 4)
    y_center, *_ = np.linalg.lstsq(basis, pi_start - offset, rcond=None)
    rng = substream(seed, STREAM_STARTS, "breve")

    best: Optional[Tuple[np.ndarray, float, float]] = None
    for k in range(n_starts):
        y0 = y_center if k == 0 else y_center + rng.normal(scale=0.1, size=y_center.size) * (
            1.0 + np.abs(y_center)
        )
        try:
            outcome = _gauss_newton_pi(obj, beta, y0, offset, basis)
        except SingularTau:
            continue
        # Prefere pontos que satisfazem a condição de primeira ordem
        if outcome[2] > 1e-6:
            continue
        if best is None or outcome[1] < best[1]:
            best = outcome
    if best is None:
        raise NoConvergence(f"Gauss–Newton para θ̆ não convergiu em β={beta:.6g}")
    logger.debug(f"θ̆ em β={beta:.6g}: q={best[1]:.6e}, ‖FOC‖={best[2]:.2e}")
    return ThetaPoint(best[0], beta)


def estimate_breve(obj: Objective, beta0: float, seed: int = 0) -> ThetaPoint:
    """
    θ̆: minimiza Q_n em π ∈ ℝ^{d_π} com β = β₀, sem impor os limites

    Raises:
        NoConvergence: Se nenhuma partida satisfizer a condição de primeira ordem
    """
    d_pi = obj.model.spec.d_pi
    pi_start = obj.moments.m_hat[:d_pi]
    return _breve_multistart(obj, float(beta0), np.zeros(d_pi), np.eye(d_pi), pi_start, seed)


def estimate_breve_affine(
    obj: Objective, restriction: AffinePiRestriction, beta: float, seed: int = 0
) -> ThetaPoint:
    """θ̆ sob Rπ = r: Gauss–Newton em π = π₀ + Ny com β fixo"""
    offset = restriction.particular_solution()
    basis = restriction.null_space()
    if basis.shape[1] == 0:
        return ThetaPoint(offset, beta)
    pi_start = obj.moments.m_hat[: obj.model.spec.d_pi]
    return _breve_multistart(obj, float(beta), offset, basis, pi_start, seed)


def qlr_from_fits(obj: Objective, restricted: EstimateResult, unrestricted: EstimateResult) -> float:
    """max(0, 2n(q_r − q_u))"""
    return max(0.0, 2.0 * obj.n * (restricted.q_value - unrestricted.q_value))


def qlr_statistic(
    obj: Objective,
    restriction: Restriction,
    unrestricted: Optional[EstimateResult] = None,
    seed: int = 0,
) -> float:
    """QLR_n = 2n(inf_Θʳ Q_n − inf_Θ Q_n), truncado em 0"""
    if unrestricted is None:
        unrestricted = estimate_unrestricted(obj, seed)
    restricted = estimate_restricted(obj, restriction, seed)
    return qlr_from_fits(obj, restricted, unrestricted)
