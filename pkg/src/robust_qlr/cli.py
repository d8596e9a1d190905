#!/usr/bin/env python3
"""
Interface de linha de comando do robust-qlr

Subcomandos: estimate, test, ci, reject-curve e simulate-quantiles.
Códigos de saída: 0 sucesso, 2 erro de entrada, 3 falha numérica.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from robust_qlr.config.settings import get_settings
from robust_qlr.core import FactorModel, get_model
from robust_qlr.core.exceptions import EmptyCrossSection, InputError, NumericalError
from robust_qlr.data.dgp import simulate_dgp
from robust_qlr.data.moments import (
    SampleMoments,
    compute_moments,
    load_csv,
    population_moments,
)
from robust_qlr.models.config import RunConfig
from robust_qlr.models.reports import EstimateReport, QuantileReport
from robust_qlr.models.simulation import DgpSpec
from robust_qlr.tools.estimation import Objective, estimate_unrestricted
from robust_qlr.tools.monte_carlo import design_quantile, reject_curve, write_curve_csv
from robust_qlr.tools.restrictions import Case, classify_case
from robust_qlr.tools.rqlr import invert_ci, rqlr_test
from robust_qlr.utils.validators import ValidationError

logger = logging.getLogger(__name__)

MIN_CURVE_REPS = 50


def _parse_grid(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"Grade de β₀ inválida: '{text}'") from None


def _parse_pi_restriction(text: Optional[str]) -> Optional[Dict[str, Any]]:
    if text is None:
        return None
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"--pi-restriction não é JSON válido: {e}") from e
    if not isinstance(payload, dict):
        raise ValidationError("--pi-restriction deve ser um objeto {\"R\": [[...]], \"r\": [...]}")
    return payload


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robust-qlr",
        description="Inferência de distância mínima robusta (teste RQLR) em modelos fatoriais",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Arquivo JSON de configuração")
    common.add_argument("--model", choices=["one-factor", "two-factor"])
    common.add_argument("--data", type=str, help="CSV com as medidas")
    common.add_argument("--columns", type=str, nargs="+", help="Colunas do CSV na ordem das medidas")
    common.add_argument("--design", choices=["weak", "strong"], help="DGP de simulação")
    common.add_argument("--n", type=int, help="Tamanho amostral do DGP")
    common.add_argument("--population", action="store_true", default=None,
                        help="Usa momentos populacionais do DGP (sem ruído)")
    common.add_argument("--beta0", type=float)
    common.add_argument("--beta0-grid", type=str, help="Valores separados por vírgula")
    common.add_argument("--pi-restriction", type=str,
                        help='Hipótese Rπ = r em JSON, ex.: {"R": [[0, 1, 0, 0, 0]], "r": [0]}')
    common.add_argument("--alpha", type=float)
    common.add_argument("--draws", type=int, help="Número B de draws da lei limite")
    common.add_argument("--reps", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=str)
    common.add_argument("--max-rule", action="store_true", default=None)
    common.add_argument("--force-kappa", type=int, choices=[0, 1])
    common.add_argument("--weighting", choices=["optimal", "identity", "diagonal"])

    sub.add_parser("estimate", parents=[common], help="Estimador com limites")
    sub.add_parser("test", parents=[common], help="Teste RQLR de um β₀ ou de Rπ = r")
    ci = sub.add_parser("ci", parents=[common], help="Intervalo de confiança por inversão")
    ci.add_argument("--ci-step", type=float)
    sub.add_parser("reject-curve", parents=[common], help="Curva de rejeição por Monte Carlo")
    quant = sub.add_parser("simulate-quantiles", parents=[common], help="Quantil da lei limite")
    quant.add_argument("--case", choices=["S", "W1", "W2"], default="W1")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Arquivo de configuração sobrescrito pelas flags (as flags vencem)"""
    overrides: Dict[str, Any] = {
        "model": args.model,
        "data": args.data,
        "columns": args.columns,
        "design": args.design,
        "n": args.n,
        "population": args.population,
        "beta0": args.beta0,
        "beta0_grid": _parse_grid(args.beta0_grid),
        "pi_restriction": _parse_pi_restriction(args.pi_restriction),
        "alpha": args.alpha,
        "draws": args.draws,
        "reps": args.reps,
        "seed": args.seed,
        "out": args.out,
        "max_rule": args.max_rule,
        "force_kappa": args.force_kappa,
        "weighting": args.weighting,
        "ci_step": getattr(args, "ci_step", None),
    }
    if args.config:
        return RunConfig.from_file(args.config, overrides)
    return RunConfig.from_mapping({}, overrides)


def load_moments(config: RunConfig, model: FactorModel) -> SampleMoments:
    if config.data is not None:
        data = load_csv(config.data, config.columns)
        return compute_moments(model, data)
    structural = config.structural(model)
    if config.population:
        return population_moments(model, structural, config.n)
    spec = DgpSpec(model=config.model, structural=structural, n=config.n, seed=config.seed)
    return compute_moments(model, simulate_dgp(spec))


def _objective(config: RunConfig) -> Objective:
    model = get_model(config.model)
    return Objective(model, load_moments(config, model), config.weighting)


def write_report(payload: Dict[str, Any], out: Optional[str]) -> None:
    """JSON com chaves ordenadas; sem marcas de tempo para saídas reprodutíveis"""
    text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)
    if out is None:
        print(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info(f"Relatório salvo em {path}")


def _envelope(config: RunConfig, command: str, report: Dict[str, Any]) -> Dict[str, Any]:
    return {"command": command, "config": config.model_dump(mode="json"), "report": report}


def cmd_estimate(config: RunConfig) -> Dict[str, Any]:
    obj = _objective(config)
    model = obj.model
    fit = estimate_unrestricted(obj, config.seed, workers=get_settings().worker_count())
    try:
        section: Optional[tuple] = model.cross_section(fit.theta_hat.pi)
    except EmptyCrossSection:
        section = None
    report = EstimateReport(
        name=model.spec.name,
        n=obj.n,
        theta=fit.theta_hat.to_dict(),
        structural=fit.structural_hat.model_dump() if fit.structural_hat is not None else None,
        q_value=fit.q_value,
        active_bounds=[model.spec.bound_names[j] for j in fit.active_bounds],
        bounds=[float(v) for v in fit.bounds_value],
        cross_section=section,
        converged=fit.converged,
        method=fit.method,
        multistart_spread=fit.multistart_spread,
    )
    payload = _envelope(config, "estimate", report.model_dump(mode="json"))
    write_report(payload, config.out)
    return payload


def cmd_test(config: RunConfig) -> Dict[str, Any]:
    restriction = config.restriction()
    case = classify_case(restriction)
    obj = _objective(config)
    report = rqlr_test(
        obj,
        restriction,
        config.budget(case),
        config.draws,
        config.seed,
        max_rule=config.max_rule,
        force_kappa=config.force_kappa,
    )
    payload = _envelope(config, "test", report.model_dump(mode="json"))
    write_report(payload, config.out)
    return payload


def cmd_ci(config: RunConfig) -> Dict[str, Any]:
    obj = _objective(config)
    report = invert_ci(
        obj,
        beta_grid=config.beta0_grid,
        budget=config.budget(Case.W1),
        n_draws=config.draws,
        seed=config.seed,
        max_rule=config.max_rule,
        force_kappa=config.force_kappa,
        step=config.ci_step,
    )
    payload = _envelope(config, "ci", report.model_dump(mode="json"))
    write_report(payload, config.out)
    return payload


def cmd_reject_curve(config: RunConfig) -> Path:
    """
    Raises:
        ValidationError: Sem DGP, sem grade de β₀ ou com menos de 50 réplicas
    """
    if config.design is None:
        raise ValidationError("reject-curve exige um DGP ('design' e 'n')")
    if config.reps is None or config.reps < MIN_CURVE_REPS:
        raise ValidationError(f"reject-curve exige reps >= {MIN_CURVE_REPS} (recebido {config.reps})")
    grid = config.beta0_grid or ([config.beta0] if config.beta0 is not None else None)
    if not grid:
        raise ValidationError("reject-curve exige 'beta0_grid' ou 'beta0'")

    model = get_model(config.model)
    curve = reject_curve(
        config.model,
        config.structural(model),
        config.n,
        grid,
        config.reps,
        seed=config.seed,
        budget=config.budget(Case.W1),
        n_draws=config.draws,
        max_rule=config.max_rule,
        weighting=config.weighting.value,
        force_kappa=config.force_kappa,
    )
    header = {"config": json.dumps(config.model_dump(mode="json"), sort_keys=True)}
    path = write_curve_csv(curve, config.out or "reject_curve.csv", header)
    logger.info(f"Curva de rejeição salva em {path}")
    return path


def cmd_simulate_quantiles(config: RunConfig, case_name: str) -> Dict[str, Any]:
    if config.design is None:
        raise ValidationError("simulate-quantiles exige um DGP ('design' e 'n')")
    settings = get_settings()
    model = get_model(config.model)
    case = Case(case_name)
    pi_restriction = None
    if case == Case.W2:
        if config.pi_restriction is None:
            raise ValidationError("simulate-quantiles --case W2 exige 'pi_restriction'")
        pi_restriction = config.pi_restriction.build()
    budget = config.budget(Case.W2 if case == Case.W2 else Case.W1)
    level = budget.alpha_s if case == Case.S else budget.level(case)
    n_draws = config.draws or settings.draws
    quantile, mc_se, spec = design_quantile(
        config.model,
        config.structural(model),
        config.n,
        case,
        level,
        n_draws,
        config.seed,
        beta_star=config.beta0,
        weighting=config.weighting.value,
        pi_restriction=pi_restriction,
    )
    report = QuantileReport(
        case=case.value,
        alpha_level=level,
        draws=n_draws,
        seed=config.seed,
        quantile=quantile,
        mc_se=mc_se,
        pi_star=np.asarray(spec.pi_star).tolist(),
        beta_star=spec.beta_star,
    )
    payload = _envelope(config, "simulate-quantiles", report.model_dump(mode="json"))
    write_report(payload, config.out)
    return payload


def main(argv: Optional[List[str]] = None) -> int:
    """Ponto de entrada do console script"""
    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = resolve_config(args)
        if args.command == "estimate":
            cmd_estimate(config)
        elif args.command == "test":
            cmd_test(config)
        elif args.command == "ci":
            cmd_ci(config)
        elif args.command == "reject-curve":
            cmd_reject_curve(config)
        else:
            cmd_simulate_quantiles(config, args.case)
    except PydanticValidationError as e:
        logger.error(f"Configuração inválida: {e}")
        return InputError.exit_code
    except InputError as e:
        logger.error(f"Erro de entrada: {e}")
        return e.exit_code
    except NumericalError as e:
        logger.error(f"Falha numérica: {e}")
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
