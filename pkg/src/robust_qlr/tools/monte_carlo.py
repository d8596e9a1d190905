# src/robust_qlr/tools/monte_carlo.py
"""
Estudos de Monte Carlo: curvas de rejeição do RQLR e quantis da lei limite
em desenhos de simulação
"""
import concurrent.futures as cf
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from robust_qlr.config.settings import get_settings
from robust_qlr.core import get_model
from robust_qlr.core.exceptions import NumericalError
from robust_qlr.data.dgp import simulate_dgp
from robust_qlr.data.moments import WeightScheme, compute_moments, population_moments
from robust_qlr.models.simulation import DgpSpec
from robust_qlr.models.structural import StructuralParamsOneFactor, StructuralParamsTwoFactor
from robust_qlr.tools.estimation import Objective
from robust_qlr.tools.limit_law import LimitLawSpec, simulate_quantile
from robust_qlr.tools.polyhedron import Polyhedron
from robust_qlr.tools.restrictions import AffinePiRestriction, BetaRestriction, Case
from robust_qlr.tools.rqlr import AlphaBudget, rqlr_test
from robust_qlr.utils.rng import STREAM_LIMIT, derive_seed
from robust_qlr.utils.validators import (
    ValidationError,
    validate_beta_grid,
    validate_positive_int,
)

logger = logging.getLogger(__name__)

Structural = Union[StructuralParamsOneFactor, StructuralParamsTwoFactor]

CURVE_COLUMNS = ["beta0", "rejection_rate", "mc_se", "reps", "n_infeasible", "n_failed"]


@dataclass(frozen=True)
class ReplicationTask:
    """Uma replicação (índice de β₀, réplica); precisa ser serializável"""

    model_name: str
    structural: Structural
    n: int
    seed: int
    beta_index: int
    beta0: float
    rep: int
    budget: AlphaBudget
    n_draws: int
    max_rule: bool = False
    weighting: str = WeightScheme.OPTIMAL.value
    force_kappa: Optional[int] = None


@dataclass(frozen=True)
class ReplicationOutcome:
    beta_index: int
    rep: int
    reject: bool
    infeasible: bool
    failed: bool
    qlr: Optional[float]
    cv: Optional[float]


def run_replication(task: ReplicationTask) -> ReplicationOutcome:
    """
    Simula um conjunto de dados e aplica o teste RQLR em β₀

    Os dados usam o subfluxo (semente, "data", i, réplica) e os draws da lei
    limite uma semente derivada de (semente, "limit", i, réplica), então o
    resultado não depende da ordem de execução.
    """
    model = get_model(task.model_name)
    spec = DgpSpec(
        model=task.model_name,
        structural=task.structural,
        n=task.n,
        seed=task.seed,
        stream=(task.beta_index, task.rep),
    )
    data = simulate_dgp(spec)
    limit_seed = derive_seed(task.seed, STREAM_LIMIT, task.beta_index, task.rep)
    try:
        obj = Objective(model, compute_moments(model, data), WeightScheme(task.weighting))
        report = rqlr_test(
            obj,
            BetaRestriction(task.beta0),
            task.budget,
            task.n_draws,
            limit_seed,
            max_rule=task.max_rule,
            force_kappa=task.force_kappa,
        )
    except NumericalError as e:
        logger.warning(f"Réplica {task.rep} em β₀={task.beta0:.4f} falhou: {e}")
        return ReplicationOutcome(task.beta_index, task.rep, False, False, True, None, None)
    return ReplicationOutcome(
        task.beta_index,
        task.rep,
        report.reject,
        report.infeasible_restriction,
        False,
        report.qlr,
        report.cv,
    )


def reject_curve(
    model_name: str,
    structural: Structural,
    n: int,
    beta0_grid: Sequence[float],
    reps: int,
    seed: int = 0,
    budget: Optional[AlphaBudget] = None,
    n_draws: Optional[int] = None,
    max_rule: bool = False,
    weighting: str = WeightScheme.OPTIMAL.value,
    force_kappa: Optional[int] = None,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """
    Frequência de rejeição do RQLR para cada β₀ da grade

    Args:
        model_name: "one-factor" ou "two-factor"
        structural: Parâmetros estruturais do DGP
        n: Tamanho de cada amostra
        beta0_grid: Valores de β₀
        reps: Réplicas por β₀
        seed: Semente mestre
        budget: Orçamento de α (padrão do caso W1)
        n_draws: B por teste
        workers: Processos em paralelo (padrão RQLR_THREADS)

    Returns:
        pd.DataFrame: Colunas beta0, rejection_rate, mc_se, reps, n_infeasible,
            n_failed, ordenadas por β₀
    """
    settings = get_settings()
    grid = validate_beta_grid(beta0_grid)
    validate_positive_int(reps, "reps")
    budget = (budget or AlphaBudget.default(Case.W1)).validate(Case.W1)
    n_draws = settings.draws if n_draws is None else n_draws

    tasks = [
        ReplicationTask(
            model_name=model_name,
            structural=structural,
            n=n,
            seed=seed,
            beta_index=i,
            beta0=beta0,
            rep=rep,
            budget=budget,
            n_draws=n_draws,
            max_rule=max_rule,
            weighting=weighting,
            force_kappa=force_kappa,
        )
        for i, beta0 in enumerate(grid)
        for rep in range(reps)
    ]

    n_workers = settings.worker_count(workers)
    logger.info(
        f"Curva de rejeição: {len(grid)} valores de β₀ × {reps} réplicas, "
        f"{n_workers} processo(s)"
    )
    outcomes: List[ReplicationOutcome] = []
    if n_workers > 1:
        with cf.ProcessPoolExecutor(max_workers=n_workers) as ex:
            outcomes.extend(ex.map(run_replication, tasks, chunksize=max(1, reps // 10)))
    else:
        for task in tasks:
            outcomes.append(run_replication(task))

    frame = pd.DataFrame([asdict(o) for o in outcomes])
    rows: List[Dict[str, Any]] = []
    for i, beta0 in enumerate(grid):
        block = frame[frame["beta_index"] == i]
        rate = float(block["reject"].mean())
        rows.append(
            {
                "beta0": beta0,
                "rejection_rate": rate,
                "mc_se": float(np.sqrt(rate * (1.0 - rate) / reps)),
                "reps": reps,
                "n_infeasible": int(block["infeasible"].sum()),
                "n_failed": int(block["failed"].sum()),
            }
        )
        logger.info(f"β₀={beta0:.4f}: rejeição {rate:.3f}")
    return pd.DataFrame(rows, columns=CURVE_COLUMNS).sort_values("beta0").reset_index(drop=True)


def write_curve_csv(curve: pd.DataFrame, path: Union[str, Path], header: Dict[str, Any]) -> Path:
    """CSV com linhas de comentário `#` carregando a configuração resolvida"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for key in sorted(header):
            f.write(f"# {key}={header[key]}\n")
        curve.to_csv(f, index=False, float_format="%.10g")
    return path


def read_curve_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def design_quantile(
    model_name: str,
    structural: Structural,
    n: int,
    case: Case,
    alpha_level: float,
    n_draws: int,
    seed: int,
    beta_star: Optional[float] = None,
    weighting: str = WeightScheme.OPTIMAL.value,
    pi_restriction: Optional[AffinePiRestriction] = None,
) -> Tuple[float, float, LimitLawSpec]:
    """
    Quantil da lei limite no ponto populacional de um desenho

    Usa momentos populacionais (V̄ da teoria normal). No caso S os conjuntos
    de fronteira são irrestritos e Ψʳ fixa a coordenada β; nos casos fracos a
    deriva é ĉ(·; π★, β★) com β★ = β do desenho quando não informado. O caso W2
    exige a restrição Rπ = r.

    Returns:
        Tuple[float, float, LimitLawSpec]: (quantil, erro de Monte Carlo, especificação)
    """
    model = get_model(model_name)
    obj = Objective(model, population_moments(model, structural, n), WeightScheme(weighting))
    theta = model.to_theta(structural)
    beta_star = theta.beta if beta_star is None else float(beta_star)
    case = Case(case)
    if case == Case.W2 and pi_restriction is None:
        raise ValidationError("Quantis do caso W2 exigem uma restrição Rπ = r")

    if case == Case.S:
        d_pi, d_theta = model.spec.d_pi, model.spec.d_theta
        basis = np.vstack([np.eye(d_pi), np.zeros((d_theta - d_pi, d_pi))])
        spec = LimitLawSpec(
            model=model,
            pi_star=theta.pi,
            beta_star=beta_star,
            H=obj.H,
            V=obj.V,
            n=n,
            case=case,
            psi=Polyhedron.unconstrained(d_theta),
            psi_r=Polyhedron.unconstrained(d_theta, basis),
        )
    else:
        spec = LimitLawSpec(
            model=model,
            pi_star=theta.pi,
            beta_star=beta_star,
            H=obj.H,
            V=obj.V,
            n=n,
            case=case,
            psi_r=Polyhedron.unconstrained(model.spec.d_pi),
            R1=None if pi_restriction is None else pi_restriction.R,
        )
    quantile, mc_se = simulate_quantile(spec, alpha_level, n_draws, seed)
    return quantile, mc_se, spec
