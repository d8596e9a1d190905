# src/robust_qlr/tools/rqlr.py
"""
Teste RQLR: conjuntos Π̂, Ψ̂ e Ψ̂ʳ, estatístico ICS κ̂, valor crítico robusto
e intervalos de confiança por inversão
"""
import concurrent.futures as cf
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from robust_qlr.config.settings import get_settings
from robust_qlr.core.base import FactorModel, ThetaPoint
from robust_qlr.core.exceptions import (
    EmptyCrossSection,
    InfeasibleRestriction,
    NoConvergence,
    SingularJ11,
    SingularTau,
)
from robust_qlr.models.reports import CIPoint, CIReport, CriticalValueReport, TestReport
from robust_qlr.tools.estimation import (
    EstimateResult,
    Objective,
    estimate_breve,
    estimate_breve_affine,
    estimate_restricted,
    estimate_unrestricted,
    qlr_from_fits,
)
from robust_qlr.tools.limit_law import LimitDraws, LimitLawSpec, simulate_quantile
from robust_qlr.tools.polyhedron import Polyhedron
from robust_qlr.tools.restrictions import (
    AffinePiRestriction,
    BetaRestriction,
    Case,
    Restriction,
    classify_case,
)
from robust_qlr.utils.calculations import normal_quantile, symmetrize
from robust_qlr.utils.validators import ValidationError, validate_alpha, validate_positive_int

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
DEDUP_DECIMALS = 12


@dataclass(frozen=True)
class AlphaBudget:
    """
    Divisão do nível α entre Π̂ (α_c), os conjuntos de fronteira (α_Ψ) e o
    quantil da lei limite
    """

    alpha: float = 0.05
    alpha_c: float = 0.005
    alpha_psi: float = 0.005

    @classmethod
    def default(cls, case: Case, alpha: float = 0.05) -> "AlphaBudget":
        """W1: α_c = α_Ψ = α/10; W2: α_c = α/5, α_Ψ = α/10"""
        if Case(case) == Case.W2:
            return cls(alpha, alpha / 5.0, alpha / 10.0)
        return cls(alpha, alpha / 10.0, alpha / 10.0)

    @property
    def alpha_w1(self) -> float:
        return self.alpha - self.alpha_c - self.alpha_psi

    @property
    def alpha_w2(self) -> float:
        return self.alpha - self.alpha_c

    @property
    def alpha_s(self) -> float:
        return self.alpha - 2.0 * self.alpha_psi

    def level(self, case: Case) -> float:
        case = Case(case)
        if case == Case.W1:
            return self.alpha_w1
        if case == Case.W2:
            return self.alpha_w2
        return self.alpha_s

    def validate(self, case: Case) -> "AlphaBudget":
        """
        Raises:
            ValidationError: Se algum componente for negativo ou se
                α_L ∉ (0, α_S]
        """
        validate_alpha(self.alpha)
        if self.alpha_c < 0 or self.alpha_psi < 0:
            raise ValidationError("α_c e α_Ψ devem ser não negativos")
        level = self.level(case)
        if not 0.0 < level <= self.alpha_s + 1e-15:
            raise ValidationError(
                f"Orçamento inválido para o caso {Case(case).value}: "
                f"α_L={level:.4g}, α_S={self.alpha_s:.4g}"
            )
        return self

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "alpha_c": self.alpha_c,
            "alpha_psi": self.alpha_psi,
            "alpha_W1": self.alpha_w1,
            "alpha_W2": self.alpha_w2,
            "alpha_S": self.alpha_s,
        }


@dataclass
class BoundarySets:
    """Envelopes ℓ̄± e os poliedros de fronteira construídos em θ̆"""

    scaled_bounds: np.ndarray
    se: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    psi: Polyhedron
    # Ψ̂ʳ em coordenadas θ (caso S) e em coordenadas ψ₁ (lei W1)
    psi_r: Polyhedron
    psi_r_pi: Polyhedron


@dataclass
class _WeakSup:
    quantile: float = -np.inf
    mc_se: float = 0.0
    candidate: Optional[np.ndarray] = None
    beta_star: Optional[float] = None
    quantiles: List[float] = field(default_factory=list)
    n_failed: int = 0


def breve_covariance(obj: Objective, theta_breve: ThetaPoint) -> np.ndarray:
    """
    Var(√n π̆) = J̆₁₁⁻¹D₁′V̂D₁J̆₁₁⁻¹, igual a J̆₁₁⁻¹ com pesos ótimos

    Raises:
        SingularJ11: Se J̆₁₁ = D₁′ĤD₁ for mal condicionada
    """
    D1 = obj.model.link_jacobian_pi(theta_breve)
    J11 = symmetrize(D1.T @ obj.H @ D1)
    if np.linalg.cond(J11) > CONDITION_LIMIT:
        raise SingularJ11("J̆₁₁ mal condicionada em θ̆")
    J11_inv = np.linalg.inv(J11)
    return symmetrize(J11_inv @ D1.T @ obj.V @ D1 @ J11_inv)


def build_pi_hat(
    model: FactorModel,
    theta_breve: ThetaPoint,
    cov_pi: np.ndarray,
    n: int,
    alpha_c: float,
    grid_size: Optional[int] = None,
) -> np.ndarray:
    """
    Candidatos π★ em torno de π̆

    Cada funcional s_k(π) varia em s̆_k ± z·se_k, com z = z_{1−α_c/(2k)} para
    k funcionais; as coordenadas de identificação de π são recuperadas por
    pseudo-inversa e só ficam os pontos que satisfazem todas as faixas.

    Returns:
        np.ndarray: Matriz (n_candidatos, d_π), com o centro π̆ na primeira linha
    """
    settings = get_settings()
    validate_alpha(alpha_c, "α_c")
    coords = list(model.ics_coordinates)
    k = len(coords)
    if grid_size is None:
        grid_size = settings.pi_grid_one_factor if k == 1 else settings.pi_grid_two_factor
    validate_positive_int(grid_size, "grid_size")

    pi0 = np.asarray(theta_breve.pi, dtype=float)
    s0, ds = model.id_strength_s(pi0)
    se = np.sqrt(np.maximum(np.einsum("ki,ij,kj->k", ds, cov_pi, ds), 0.0) / n)
    half_width = normal_quantile(1.0 - alpha_c / (2.0 * k)) * se

    offsets = np.linspace(-1.0, 1.0, grid_size) if grid_size > 1 else np.zeros(1)
    axes = [s0[j] + half_width[j] * offsets for j in range(k)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    M_pinv = np.linalg.pinv(ds[:, coords])

    candidates = [pi0]
    slack = half_width + 1e-10 * (1.0 + np.abs(s0))
    for s in mesh:
        cand = pi0.copy()
        cand[coords] += M_pinv @ (s - s0)
        s_cand, _ = model.id_strength_s(cand)
        if np.all(np.abs(s_cand - s0) <= slack):
            candidates.append(cand)

    stacked = np.vstack(candidates)
    _, first = np.unique(np.round(stacked, DEDUP_DECIMALS), axis=0, return_index=True)
    result = stacked[np.sort(first)]
    logger.debug(f"Π̂ com {result.shape[0]} candidatos (meia largura {half_width.tolist()})")
    return result


def boundary_envelopes(
    bounds: np.ndarray, se: np.ndarray, n: int, z: float
) -> Tuple[np.ndarray, np.ndarray]:
    """ℓ̄± = √n ℓ(θ̆) ± z·se"""
    scaled = np.sqrt(n) * np.asarray(bounds, dtype=float)
    return scaled + z * se, scaled - z * se


def build_boundary_sets(
    model: FactorModel,
    theta_breve: ThetaPoint,
    cov_pi: np.ndarray,
    n: int,
    alpha_psi: float,
    restriction: Optional[Restriction] = None,
) -> BoundarySets:
    """
    Ψ̂ = {ψ : min(ℓ̄⁻, 0) + ∂_θℓ ψ ≤ 0} e Ψ̂ʳ com min(ℓ̄⁺, 0)

    Sob β = β₀, Ψ̂ʳ fixa a coordenada β em zero; sob Rπ = r, Ψ̂ʳ vive no
    núcleo de [R, 0].
    """
    validate_alpha(alpha_psi, "α_Ψ")
    d_pi = model.spec.d_pi
    bounds = model.bounds(theta_breve)
    L = model.bounds_jacobian(theta_breve)
    L_pi = L[:, :d_pi]
    se = np.sqrt(np.maximum(np.einsum("ji,ik,jk->j", L_pi, cov_pi, L_pi), 0.0))
    z = normal_quantile(1.0 - alpha_psi / model.boundary_split)
    upper, lower = boundary_envelopes(bounds, se, n, z)

    b_lower = np.minimum(lower, 0.0)
    b_upper = np.minimum(upper, 0.0)
    psi = Polyhedron(L, b_lower)

    if isinstance(restriction, AffinePiRestriction):
        restriction.check_dimension(model)
        R_theta = np.hstack([restriction.R, np.zeros((restriction.R.shape[0], model.spec.d_beta))])
        psi_r = Polyhedron(L, b_upper, linalg.null_space(R_theta))
        psi_r_pi = Polyhedron(L_pi, b_upper, linalg.null_space(restriction.R))
    else:
        basis = np.vstack([np.eye(d_pi), np.zeros((model.spec.d_beta, d_pi))])
        psi_r = Polyhedron(L, b_upper, basis)
        psi_r_pi = Polyhedron(L_pi, b_upper)

    return BoundarySets(np.sqrt(n) * bounds, se, upper, lower, psi, psi_r, psi_r_pi)


def ics_kappa(
    model: FactorModel,
    theta_breve: ThetaPoint,
    cov_pi: np.ndarray,
    n: int,
    force: Optional[int] = None,
) -> Tuple[int, float, float]:
    """
    κ̂ = 1 sinaliza identificação fraca

    Returns:
        Tuple[int, float, float]: (κ̂, estatístico, limiar)
    """
    statistic = model.ics_statistic(theta_breve.pi, cov_pi, n)
    threshold = model.ics_threshold(n)
    kappa = int(statistic <= threshold)
    if force is not None:
        if force not in (0, 1):
            raise ValidationError("force_kappa deve ser 0 ou 1")
        kappa = int(force)
    return kappa, float(statistic), float(threshold)


def _beta_interval(
    model: FactorModel, theta_breve: ThetaPoint, fallback_pi: Optional[np.ndarray], notes: List[str]
) -> Tuple[float, float]:
    try:
        return model.cross_section(theta_breve.pi)
    except EmptyCrossSection:
        if fallback_pi is None:
            raise
        notes.append("B(π̆) vazio; usada a seção transversal de π̂")
        logger.warning("Seção transversal de π̆ vazia; usando π̂ irrestrito")
        return model.cross_section(fallback_pi)


def _weak_sup(
    obj: Objective,
    case: Case,
    restriction: Restriction,
    theta_breve: ThetaPoint,
    candidates: np.ndarray,
    sets: BoundarySets,
    interval: Tuple[float, float],
    level: float,
    draws: LimitDraws,
) -> _WeakSup:
    settings = get_settings()
    if case == Case.W1:
        beta_stars = np.array([restriction.beta0])
        R1 = None
    else:
        lo, hi = interval
        beta_stars = np.linspace(lo, hi, settings.beta_star_grid_size) if hi > lo else np.array([lo])
        beta_stars = np.unique(np.append(beta_stars, np.clip(theta_breve.beta, lo, hi)))
        R1 = restriction.R

    sup = _WeakSup()
    for cand in candidates:
        for beta_star in beta_stars:
            # Π̂ só desloca a deriva; D₁ e J₁₁ ficam em π̆
            spec = LimitLawSpec(
                model=obj.model,
                pi_star=theta_breve.pi,
                drift_pi=cand,
                beta_star=float(beta_star),
                H=obj.H,
                V=obj.V,
                n=obj.n,
                case=case,
                psi_r=sets.psi_r_pi if case == Case.W1 else None,
                beta_interval=interval,
                restricted_interval=interval,
                R1=R1,
            )
            try:
                quantile, mc_se = simulate_quantile(spec, level, draws.n_draws, draws.seed, draws)
            except (SingularJ11, SingularTau) as e:
                sup.n_failed += 1
                logger.warning(f"Candidato π★ descartado: {e}")
                continue
            sup.quantiles.append(quantile)
            if quantile > sup.quantile:
                sup.quantile, sup.mc_se = quantile, mc_se
                sup.candidate, sup.beta_star = cand, float(beta_star)

    if sup.candidate is None:
        raise SingularJ11("Nenhum candidato de Π̂ produziu uma lei limite fraca válida")
    return sup


def robust_critical_value(
    obj: Objective,
    restriction: Restriction,
    theta_breve: ThetaPoint,
    budget: AlphaBudget,
    n_draws: int,
    seed: int,
    max_rule: bool = False,
    force_kappa: Optional[int] = None,
    pi_candidates: Optional[np.ndarray] = None,
    fallback_pi: Optional[np.ndarray] = None,
) -> Tuple[float, CriticalValueReport]:
    """
    ĈV_L = κ̂·sup_{Π̂} q_L + (1 − κ̂)·q_S, ou max(q_S, sup q_L) com a regra do máximo

    Todos os candidatos usam os mesmos draws Y_b.

    Args:
        obj: Objetivo com Ĥ, V̂ e n
        restriction: β = β₀ (caso W1) ou Rπ = r (caso W2)
        theta_breve: θ̆
        budget: Orçamento de α
        n_draws: B
        seed: Semente dos draws
        max_rule: Usa max(q_S, sup q_L) no lugar de κ̂
        force_kappa: Fixa κ̂
        pi_candidates: Substitui a grade Π̂
        fallback_pi: π usado em B(π̂) quando B(π̆) é vazio

    Returns:
        Tuple[float, CriticalValueReport]: (cv, componentes)
    """
    model = obj.model
    case = classify_case(restriction)
    budget.validate(case)
    notes: List[str] = []

    cov_pi = breve_covariance(obj, theta_breve)
    kappa, statistic, threshold = ics_kappa(model, theta_breve, cov_pi, obj.n, force_kappa)
    sets = build_boundary_sets(model, theta_breve, cov_pi, obj.n, budget.alpha_psi, restriction)
    draws = LimitDraws(obj.V, n_draws, seed)

    if pi_candidates is None:
        candidates = build_pi_hat(model, theta_breve, cov_pi, obj.n, budget.alpha_c)
    else:
        candidates = np.atleast_2d(np.asarray(pi_candidates, dtype=float))

    level_weak = budget.level(case)
    level_strong = budget.alpha_s
    need_weak = kappa == 1 or max_rule
    need_strong = kappa == 0 or max_rule

    q_strong: Optional[float] = None
    strong_se = 0.0
    if need_strong:
        strong_spec = LimitLawSpec(
            model=model,
            pi_star=theta_breve.pi,
            beta_star=theta_breve.beta,
            H=obj.H,
            V=obj.V,
            n=obj.n,
            case=Case.S,
            psi=sets.psi,
            psi_r=sets.psi_r,
        )
        try:
            q_strong, strong_se = simulate_quantile(strong_spec, level_strong, n_draws, seed, draws)
        except SingularJ11 as e:
            notes.append("J singular no caso S; usado apenas sup q_L")
            logger.warning(f"Lei limite forte indisponível ({e}); usando apenas a lei fraca")
            need_weak = True

    interval: Optional[Tuple[float, float]] = None
    weak: Optional[_WeakSup] = None
    if need_weak:
        interval = _beta_interval(model, theta_breve, fallback_pi, notes)
        weak = _weak_sup(
            obj, case, restriction, theta_breve, candidates, sets, interval, level_weak, draws
        )

    if q_strong is None:
        assert weak is not None
        cv, mc_se = weak.quantile, weak.mc_se
    elif weak is None:
        cv, mc_se = q_strong, strong_se
    elif max_rule:
        cv, mc_se = (q_strong, strong_se) if q_strong >= weak.quantile else (weak.quantile, weak.mc_se)
    else:
        cv = kappa * weak.quantile + (1 - kappa) * q_strong
        mc_se = weak.mc_se if kappa else strong_se
    cv = max(float(cv), 0.0)

    report = CriticalValueReport(
        cv=cv,
        kappa=kappa,
        ics_statistic=statistic,
        ics_threshold=threshold,
        q_weak=None if weak is None else float(weak.quantile),
        q_strong=q_strong,
        mc_se=float(mc_se),
        alpha_weak=level_weak,
        alpha_strong=level_strong,
        sup_candidate=None if weak is None else weak.candidate.tolist(),
        sup_beta_star=None if weak is None else weak.beta_star,
        candidate_quantiles=[] if weak is None else [float(q) for q in weak.quantiles],
        pi_grid_size=int(candidates.shape[0]),
        n_failed=0 if weak is None else weak.n_failed,
        max_rule=max_rule,
        beta_interval=interval,
        ell_upper=sets.upper.tolist(),
        ell_lower=sets.lower.tolist(),
        notes=notes,
    )
    logger.info(
        f"Valor crítico caso {case.value}: cv={cv:.4f} (κ̂={kappa}, "
        f"{candidates.shape[0]} candidatos, B={n_draws})"
    )
    return cv, report


def _breve_point(obj: Objective, restriction: Restriction, restricted: EstimateResult, seed: int) -> ThetaPoint:
    if isinstance(restriction, BetaRestriction):
        return estimate_breve(obj, restriction.beta0, seed)
    return estimate_breve_affine(obj, restriction, restricted.theta_hat.beta, seed)


def rqlr_test(
    obj: Objective,
    restriction: Restriction,
    budget: Optional[AlphaBudget] = None,
    n_draws: Optional[int] = None,
    seed: int = 0,
    max_rule: bool = False,
    force_kappa: Optional[int] = None,
    unrestricted: Optional[EstimateResult] = None,
    pi_candidates: Optional[np.ndarray] = None,
) -> TestReport:
    """
    Teste RQLR de H₀: β = β₀ (caso W1) ou Rπ = r (caso W2)

    Uma restrição inviável dentro de Θ é reportada como rejeição, sem erro.

    Raises:
        NoConvergence: Se um dos ajustes não convergir
        SingularJ11: Se J̆₁₁ for singular
    """
    settings = get_settings()
    case = classify_case(restriction)
    budget = (budget or AlphaBudget.default(case)).validate(case)
    n_draws = settings.draws if n_draws is None else n_draws
    model = obj.model

    if unrestricted is None:
        unrestricted = estimate_unrestricted(obj, seed)

    try:
        restricted = estimate_restricted(obj, restriction, seed)
    except InfeasibleRestriction as e:
        logger.info(f"Restrição inviável ({e}); rejeitada")
        return TestReport(
            case=case.value,
            restriction=restriction.describe(),
            reject=True,
            infeasible_restriction=True,
            unrestricted=unrestricted.to_dict(model),
            message=str(e),
        )

    qlr = qlr_from_fits(obj, restricted, unrestricted)
    theta_breve = _breve_point(obj, restriction, restricted, seed)
    cv, cv_report = robust_critical_value(
        obj,
        restriction,
        theta_breve,
        budget,
        n_draws,
        seed,
        max_rule=max_rule,
        force_kappa=force_kappa,
        pi_candidates=pi_candidates,
        fallback_pi=unrestricted.theta_hat.pi,
    )
    reject = qlr > cv
    logger.info(
        f"RQLR {restriction.describe()}: QLR={qlr:.4f}, cv={cv:.4f}, "
        f"{'rejeita' if reject else 'não rejeita'}"
    )
    return TestReport(
        case=case.value,
        restriction=restriction.describe(),
        qlr=qlr,
        cv=cv,
        reject=reject,
        kappa=cv_report.kappa,
        pi_grid_size=cv_report.pi_grid_size,
        sup_candidate=cv_report.sup_candidate,
        mc_se=cv_report.mc_se,
        active_bounds=[model.spec.bound_names[j] for j in restricted.active_bounds],
        unrestricted=unrestricted.to_dict(model),
        restricted=restricted.to_dict(model),
        theta_breve=theta_breve.to_dict(),
        critical_value=cv_report,
    )


def ci_grid(
    model: FactorModel, pi_hat: np.ndarray, step: Optional[float] = None
) -> Tuple[np.ndarray, Tuple[float, float], Tuple[float, float]]:
    """
    Grade de β₀ sobre B(π̂) alargada em 25% da largura de cada lado

    Returns:
        Tuple: (grade, intervalo da grade, seção transversal)
    """
    settings = get_settings()
    step = settings.ci_step if step is None else float(step)
    if step <= 0:
        raise ValidationError("Passo da grade de β₀ deve ser positivo")
    lo, hi = model.cross_section(pi_hat)
    width = max(hi - lo, step)
    grid_lo = max(lo - settings.ci_enlarge * width, model.tol_strict)
    grid_hi = hi + settings.ci_enlarge * width
    n_points = int(np.floor((grid_hi - grid_lo) / step + 1e-9)) + 1
    grid = grid_lo + step * np.arange(n_points)
    return grid, (float(grid_lo), float(grid_hi)), (float(lo), float(hi))


@dataclass(frozen=True)
class CIPointTask:
    """Um ponto β₀ da grade do intervalo; precisa ser serializável"""

    obj: Objective
    unrestricted: EstimateResult
    beta0: float
    budget: AlphaBudget
    n_draws: Optional[int]
    seed: int
    max_rule: bool = False
    force_kappa: Optional[int] = None


def ci_point(task: CIPointTask) -> CIPoint:
    try:
        report = rqlr_test(
            task.obj,
            BetaRestriction(task.beta0),
            task.budget,
            task.n_draws,
            task.seed,
            max_rule=task.max_rule,
            force_kappa=task.force_kappa,
            unrestricted=task.unrestricted,
        )
    except (NoConvergence, SingularJ11) as e:
        logger.warning(f"Teste em β₀={task.beta0:.4f} falhou: {e}")
        return CIPoint(beta0=task.beta0, reject=True, failed=True)
    except InfeasibleRestriction:
        return CIPoint(beta0=task.beta0, reject=True, infeasible_restriction=True)
    return CIPoint(
        beta0=task.beta0,
        qlr=report.qlr,
        cv=report.cv,
        reject=report.reject,
        infeasible_restriction=report.infeasible_restriction,
    )


def invert_ci(
    obj: Objective,
    beta_grid: Optional[Sequence[float]] = None,
    budget: Optional[AlphaBudget] = None,
    n_draws: Optional[int] = None,
    seed: int = 0,
    max_rule: bool = False,
    force_kappa: Optional[int] = None,
    step: Optional[float] = None,
    workers: Optional[int] = None,
) -> CIReport:
    """
    Conjunto de confiança {β₀ : RQLR não rejeita β = β₀}

    O conjunto aceito é reportado mesmo quando não é convexo; o envoltório
    é marcado nesse caso. Conjunto vazio gera aviso, não erro.
    Os pontos da grade são independentes e rodam em até RQLR_THREADS
    processos (ou `workers`).
    """
    settings = get_settings()
    model = obj.model
    budget = budget or AlphaBudget.default(Case.W1)
    step = settings.ci_step if step is None else float(step)

    unrestricted = estimate_unrestricted(obj, seed)
    auto_grid, grid_interval, section = ci_grid(model, unrestricted.theta_hat.pi, step)
    if beta_grid is None:
        grid = auto_grid
    else:
        grid = np.asarray(sorted(set(float(b) for b in beta_grid)))
        if grid.size == 0:
            raise ValidationError("Grade de β₀ não pode ser vazia")
        grid_interval = (float(grid[0]), float(grid[-1]))

    tasks = [
        CIPointTask(
            obj=obj,
            unrestricted=unrestricted,
            beta0=float(beta0),
            budget=budget,
            n_draws=n_draws,
            seed=seed,
            max_rule=max_rule,
            force_kappa=force_kappa,
        )
        for beta0 in grid
    ]
    n_workers = min(settings.worker_count(workers), len(tasks))
    if n_workers > 1:
        # mesma semente em todos os pontos; a ordem de ex.map preserva a grade
        with cf.ProcessPoolExecutor(max_workers=n_workers) as ex:
            points = list(ex.map(ci_point, tasks))
    else:
        points = [ci_point(task) for task in tasks]

    accepted = [p.beta0 for p in points if not p.reject]
    empty = not accepted
    hull = None if empty else (min(accepted), max(accepted))
    non_convex = False
    if hull is not None:
        inside = [p for p in points if hull[0] <= p.beta0 <= hull[1]]
        non_convex = any(p.reject for p in inside)
    if empty:
        logger.warning("Conjunto de confiança vazio: todos os β₀ da grade foram rejeitados")
    elif non_convex:
        logger.warning(f"Conjunto aceito não convexo; envoltório {hull}")

    return CIReport(
        points=points,
        accepted=accepted,
        hull=hull,
        empty=empty,
        non_convex=non_convex,
        grid_interval=grid_interval,
        cross_section=section,
        step=step,
    )


__all__ = [
    "AlphaBudget",
    "BoundarySets",
    "boundary_envelopes",
    "breve_covariance",
    "build_boundary_sets",
    "build_pi_hat",
    "ci_grid",
    "ics_kappa",
    "invert_ci",
    "robust_critical_value",
    "rqlr_test",
]
