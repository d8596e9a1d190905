"""
Testes do teste RQLR: orçamento de α, conjuntos Π̂ e de fronteira, κ̂,
valor crítico robusto e inversão em intervalos de confiança
"""
import numpy as np
import pytest
from scipy import stats

from robust_qlr.core import ThetaPoint
from robust_qlr.data import population_moments
from robust_qlr.models.reports import TestReport
from robust_qlr.tools.estimation import Objective, estimate_breve
from robust_qlr.tools.restrictions import AffinePiRestriction, BetaRestriction, Case
from robust_qlr.tools.rqlr import (
    AlphaBudget,
    boundary_envelopes,
    breve_covariance,
    build_boundary_sets,
    build_pi_hat,
    ci_grid,
    ics_kappa,
    invert_ci,
    robust_critical_value,
    rqlr_test,
)
from robust_qlr.utils.validators import ValidationError

from .conftest import ONE_FACTOR_DESIGN_PI, TWO_FACTOR_DESIGN_PI

DRAWS = 1000


@pytest.mark.unit
class TestAlphaBudget:
    def test_w1_default(self):
        budget = AlphaBudget.default(Case.W1, 0.05)
        assert budget.alpha_c == pytest.approx(0.005)
        assert budget.alpha_psi == pytest.approx(0.005)
        assert budget.alpha_w1 == pytest.approx(0.04)
        assert budget.alpha_s == pytest.approx(0.04)
        budget.validate(Case.W1)

    def test_w2_default(self):
        budget = AlphaBudget.default(Case.W2, 0.05)
        assert budget.alpha_c == pytest.approx(0.01)
        assert budget.alpha_psi == pytest.approx(0.005)
        assert budget.level(Case.W2) == pytest.approx(0.04)
        budget.validate(Case.W2)

    def test_level_above_strong_level_rejected(self):
        with pytest.raises(ValidationError):
            AlphaBudget(0.05, 0.0, 0.03).validate(Case.W1)

    def test_nonpositive_level_rejected(self):
        with pytest.raises(ValidationError):
            AlphaBudget(0.05, 0.06, 0.0).validate(Case.W1)

    def test_negative_component_rejected(self):
        with pytest.raises(ValidationError):
            AlphaBudget(0.05, -0.01, 0.005).validate(Case.W1)

    def test_to_dict(self):
        payload = AlphaBudget.default(Case.W1).to_dict()
        assert payload["alpha_W1"] == pytest.approx(0.04)


@pytest.mark.unit
class TestBoundarySets:
    def test_envelopes_example(self):
        upper, lower = boundary_envelopes(np.array([-0.1, -0.3]), np.array([0.2, 0.2]), 100, 2.576)
        np.testing.assert_allclose(upper, [-0.4848, -2.4848], atol=1e-3)
        np.testing.assert_allclose(lower, [-1.5152, -3.5152], atol=1e-3)

    def test_beta_restriction_sets(self, one_factor):
        theta = ThetaPoint(ONE_FACTOR_DESIGN_PI, 1.0)
        sets = build_boundary_sets(one_factor, theta, np.eye(5), 500, 0.005, BetaRestriction(1.0))
        assert sets.psi.dim == 6
        assert np.all(sets.psi.b <= 0.0)
        assert np.all(sets.psi_r.b <= 0.0)
        # Ψ̂ʳ fixa a coordenada β
        np.testing.assert_allclose(sets.psi_r.subspace()[-1], 0.0)
        assert sets.psi_r_pi.dim == 5
        np.testing.assert_array_less(sets.lower, sets.upper)

    def test_affine_restriction_sets(self, one_factor):
        theta = ThetaPoint(ONE_FACTOR_DESIGN_PI, 1.0)
        restriction = AffinePiRestriction([[0.0, 1.0, 0.0, 0.0, 0.0]], [0.0])
        sets = build_boundary_sets(one_factor, theta, np.eye(5), 500, 0.005, restriction)
        np.testing.assert_allclose(restriction.R @ sets.psi_r_pi.subspace(), 0.0, atol=1e-12)
        assert sets.psi_r.subspace().shape == (6, 5)

    def test_active_bound_enters_polyhedron(self, one_factor):
        # β = 2 torna φ₁ ativo: ℓ̄± envolvem zero e Ψ̂ʳ restringe ψ
        theta = ThetaPoint(ONE_FACTOR_DESIGN_PI, 2.0)
        sets = build_boundary_sets(one_factor, theta, np.eye(5), 500, 0.005)
        assert sets.upper[0] > 0.0 > sets.lower[0]
        assert sets.psi.b[0] < 0.0
        assert sets.psi_r.b[0] == 0.0


@pytest.mark.unit
class TestPiHat:
    def test_one_factor_endpoints(self, one_factor):
        theta = ThetaPoint(ONE_FACTOR_DESIGN_PI, 1.0)
        cov = np.eye(5)
        cands = build_pi_hat(one_factor, theta, cov, 100, 0.005, grid_size=21)
        half = stats.norm.ppf(1.0 - 0.005 / 2.0) * np.sqrt(1.0 / 100)
        np.testing.assert_allclose(cands[0], ONE_FACTOR_DESIGN_PI)
        assert cands[:, 1].min() == pytest.approx(-half)
        assert cands[:, 1].max() == pytest.approx(half)
        assert cands.shape == (21, 5)
        # Só a coordenada de identificação varia
        np.testing.assert_allclose(np.delete(cands, 1, axis=1), np.delete(cands[:1], 1, axis=1).repeat(21, 0))

    def test_single_point_grid(self, one_factor):
        theta = ThetaPoint(ONE_FACTOR_DESIGN_PI, 1.0)
        cands = build_pi_hat(one_factor, theta, np.eye(5), 100, 0.005, grid_size=1)
        assert cands.shape == (1, 5)

    def test_two_factor_candidates_within_bands(self, two_factor):
        theta = ThetaPoint(TWO_FACTOR_DESIGN_PI, 1.0)
        cov = np.eye(13)
        n = 500
        cands = build_pi_hat(two_factor, theta, cov, n, 0.005, grid_size=3)
        np.testing.assert_allclose(cands[0], TWO_FACTOR_DESIGN_PI)
        assert 1 < cands.shape[0] <= 10
        s0, ds = two_factor.id_strength_s(TWO_FACTOR_DESIGN_PI)
        se = np.sqrt(np.einsum("ki,ij,kj->k", ds, cov, ds) / n)
        half = stats.norm.ppf(1.0 - 0.005 / 4.0) * se
        for cand in cands:
            s, _ = two_factor.id_strength_s(cand)
            assert np.all(np.abs(s - s0) <= half + 1e-9)
        assert len({tuple(np.round(c, 12)) for c in cands}) == cands.shape[0]


@pytest.mark.unit
class TestKappa:
    def test_weak_design(self, one_factor):
        kappa, statistic, threshold = ics_kappa(one_factor, ThetaPoint(ONE_FACTOR_DESIGN_PI, 1.0), np.eye(5), 500)
        assert kappa == 1
        assert statistic == pytest.approx(0.0)
        assert threshold == pytest.approx(np.log(500) ** 2)

    def test_strong_design(self, one_factor):
        pi = ONE_FACTOR_DESIGN_PI.copy()
        pi[1] = 1.0
        kappa, statistic, _ = ics_kappa(one_factor, ThetaPoint(pi, 1.0), np.eye(5), 500)
        assert kappa == 0
        assert statistic == pytest.approx(500.0)

    def test_two_factor_threshold(self, two_factor):
        kappa, _, threshold = ics_kappa(two_factor, ThetaPoint(TWO_FACTOR_DESIGN_PI, 1.0), np.eye(13), 500)
        assert kappa == 1
        assert threshold == pytest.approx(2.0 * np.log(500))

    def test_force(self, one_factor):
        theta = ThetaPoint(ONE_FACTOR_DESIGN_PI, 1.0)
        assert ics_kappa(one_factor, theta, np.eye(5), 500, force=0)[0] == 0
        with pytest.raises(ValidationError):
            ics_kappa(one_factor, theta, np.eye(5), 500, force=2)


@pytest.mark.unit
def test_ci_grid_enlarges_cross_section(one_factor):
    grid, interval, section = ci_grid(one_factor, ONE_FACTOR_DESIGN_PI, step=0.02)
    assert section == pytest.approx((0.5, 2.0))
    assert interval[0] == pytest.approx(0.125)
    assert interval[1] == pytest.approx(2.375)
    assert grid[0] == pytest.approx(0.125)
    np.testing.assert_allclose(np.diff(grid), 0.02)
    assert grid[-1] <= 2.375 + 1e-9


@pytest.mark.unit
def test_breve_covariance_optimal_weight(one_factor_population, one_factor_theta):
    obj = one_factor_population
    cov = breve_covariance(obj, one_factor_theta)
    D1 = obj.model.link_jacobian_pi(one_factor_theta)
    np.testing.assert_allclose(cov, np.linalg.inv(D1.T @ obj.H @ D1), rtol=1e-6)


@pytest.mark.integration
class TestCriticalValue:
    def test_sup_over_superset(self, fast_settings, one_factor_population):
        obj = one_factor_population
        restriction = BetaRestriction(1.0)
        budget = AlphaBudget.default(Case.W1)
        theta = estimate_breve(obj, 1.0)
        cv_single, report_single = robust_critical_value(
            obj, restriction, theta, budget, DRAWS, 3, force_kappa=1, pi_candidates=theta.pi[None, :]
        )
        cv_full, report_full = robust_critical_value(obj, restriction, theta, budget, DRAWS, 3, force_kappa=1)
        assert report_single.pi_grid_size == 1
        assert report_full.pi_grid_size > 1
        assert cv_full >= cv_single
        assert len(report_full.candidate_quantiles) == report_full.pi_grid_size

    def test_max_rule_dominates(self, fast_settings, strong_population):
        obj = strong_population
        restriction = BetaRestriction(1.0)
        budget = AlphaBudget.default(Case.W1)
        theta = estimate_breve(obj, 1.0)
        cv_strong, report_strong = robust_critical_value(obj, restriction, theta, budget, DRAWS, 4, force_kappa=0)
        cv_weak, _ = robust_critical_value(obj, restriction, theta, budget, DRAWS, 4, force_kappa=1)
        cv_max, report_max = robust_critical_value(obj, restriction, theta, budget, DRAWS, 4, max_rule=True)
        assert report_strong.q_weak is None
        assert report_strong.q_strong is not None
        assert cv_max >= max(cv_strong, cv_weak) - 1e-12
        assert report_max.max_rule

    def test_strong_design_selects_strong_law(self, fast_settings, strong_population):
        obj = strong_population
        theta = estimate_breve(obj, 1.0)
        cv, report = robust_critical_value(
            obj, BetaRestriction(1.0), theta, AlphaBudget.default(Case.W1), DRAWS, 0
        )
        assert report.kappa == 0
        assert cv == pytest.approx(report.q_strong)

    def test_common_random_numbers(self, fast_settings, one_factor_population):
        obj = one_factor_population
        theta = estimate_breve(obj, 1.0)
        args = (obj, BetaRestriction(1.0), theta, AlphaBudget.default(Case.W1), DRAWS, 11)
        assert robust_critical_value(*args)[0] == robust_critical_value(*args)[0]

    def test_candidates_only_move_the_drift(self, fast_settings, one_factor_population):
        obj = one_factor_population
        theta = estimate_breve(obj, 1.0)
        base = theta.pi.copy()
        base[:2] = (1.0, 0.1)
        # mesmo ρ₁ρ₂ (mesma deriva), mas ρ₁, ρ₂ e ω diferentes
        shifted = base.copy()
        shifted[:2] = (2.0, 0.05)
        shifted[2:] += np.array([0.5, -0.3, 0.7])
        _, report = robust_critical_value(
            obj, BetaRestriction(1.0), theta, AlphaBudget.default(Case.W1), DRAWS, 5,
            force_kappa=1, pi_candidates=np.vstack([base, shifted]),
        )
        # D₁ e J₁₁ ficam em π̆; só a deriva depende do candidato
        assert report.candidate_quantiles[0] == pytest.approx(report.candidate_quantiles[1], abs=1e-12)


@pytest.mark.integration
class TestRQLR:
    def test_true_value_not_rejected(self, fast_settings, one_factor_population):
        report = rqlr_test(one_factor_population, BetaRestriction(1.0), n_draws=DRAWS, seed=1)
        assert isinstance(report, TestReport)
        assert report.case == "W1"
        assert report.qlr == pytest.approx(0.0, abs=1e-4)
        assert not report.reject
        assert report.kappa == 1

    def test_far_value_rejected(self, fast_settings, one_factor_population):
        report = rqlr_test(one_factor_population, BetaRestriction(5.0), n_draws=DRAWS, seed=1)
        assert report.qlr > report.cv
        assert report.reject
        assert "phi1" in report.active_bounds

    def test_infeasible_restriction_rejected(self, fast_settings, one_factor_population):
        report = rqlr_test(one_factor_population, BetaRestriction(-0.5), n_draws=DRAWS, seed=1)
        assert report.reject
        assert report.infeasible_restriction
        assert report.qlr is None

    def test_affine_restriction(self, fast_settings, one_factor_population):
        restriction = AffinePiRestriction([[0.0, 1.0, 0.0, 0.0, 0.0]], [0.0])
        theta = ONE_FACTOR_DESIGN_PI[None, :]
        report = rqlr_test(
            one_factor_population, restriction, n_draws=DRAWS, seed=2, pi_candidates=theta
        )
        assert report.case == "W2"
        assert not report.reject
        assert report.critical_value.alpha_weak == pytest.approx(0.04)

    def test_decision_validator(self):
        with pytest.raises(ValueError):
            TestReport(case="W1", restriction={}, qlr=5.0, cv=1.0, reject=False)

    @pytest.mark.slow
    def test_two_factor_true_value(self, fast_settings, two_factor):
        obj = Objective(two_factor, population_moments(two_factor, two_factor.design(), 500))
        report = rqlr_test(
            obj,
            BetaRestriction(1.0),
            n_draws=DRAWS,
            seed=1,
            pi_candidates=TWO_FACTOR_DESIGN_PI[None, :],
        )
        assert not report.reject


@pytest.mark.integration
class TestConfidenceInterval:
    def test_population_interval_covers_identified_set(self, fast_settings, one_factor_population):
        report = invert_ci(
            one_factor_population, beta_grid=[0.75, 1.25, 1.75, 5.0], n_draws=DRAWS, seed=0
        )
        assert {0.75, 1.25, 1.75} <= set(report.accepted)
        assert 5.0 not in report.accepted
        assert report.hull[0] <= 0.75 and report.hull[1] >= 1.75
        assert not report.empty
        assert report.cross_section == pytest.approx((0.5, 2.0), abs=1e-3)

    def test_infeasible_grid_point(self, fast_settings, one_factor_population):
        report = invert_ci(one_factor_population, beta_grid=[-1.0, 1.0], n_draws=DRAWS, seed=0)
        infeasible = [p for p in report.points if p.beta0 == -1.0][0]
        assert infeasible.reject and infeasible.infeasible_restriction
        assert report.accepted == [1.0]

    def test_parallel_grid_matches_sequential(self, fast_settings, one_factor_population):
        grid = [0.75, 1.5, 5.0]
        sequential = invert_ci(one_factor_population, beta_grid=grid, n_draws=DRAWS, seed=2, workers=1)
        parallel = invert_ci(one_factor_population, beta_grid=grid, n_draws=DRAWS, seed=2, workers=2)
        assert parallel.model_dump() == sequential.model_dump()
