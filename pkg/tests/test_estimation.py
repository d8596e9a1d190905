"""
Testes da função objetivo e dos estimadores com limites
"""
import numpy as np
import pytest

from robust_qlr.core import ThetaPoint
from robust_qlr.core.exceptions import InfeasibleRestriction
from robust_qlr.data import population_moments
from robust_qlr.data.moments import SampleMoments
from robust_qlr.tools.estimation import (
    Objective,
    estimate_breve,
    estimate_breve_affine,
    estimate_restricted,
    estimate_unrestricted,
    qlr_statistic,
)
from robust_qlr.tools.restrictions import AffinePiRestriction, BetaRestriction

from .conftest import ONE_FACTOR_DESIGN_PI


def _shifted_objective(model, theta, weight):
    delta = model.link_delta(theta)
    e1 = np.zeros(delta.size)
    e1[0] = 1.0
    moments = SampleMoments(n=100, m_hat=delta - e1, v_bar_hat=np.eye(delta.size))
    return Objective(model, moments, weight=weight)


@pytest.mark.unit
class TestObjective:
    def test_unit_residual(self, one_factor, one_factor_theta):
        obj = _shifted_objective(one_factor, one_factor_theta, np.eye(6))
        assert obj.q_value(one_factor_theta) == pytest.approx(0.5)

    def test_weight_scaling(self, one_factor, one_factor_theta):
        obj = _shifted_objective(one_factor, one_factor_theta, 3.0 * np.eye(6))
        assert obj.q_value(one_factor_theta) == pytest.approx(1.5)

    def test_non_pd_weight_rejected(self, one_factor, one_factor_theta):
        with pytest.raises(ValueError):
            _shifted_objective(one_factor, one_factor_theta, -np.eye(6))

    def test_limit_matrices_optimal(self, one_factor_population):
        obj = one_factor_population
        np.testing.assert_allclose(obj.V, obj.H, rtol=1e-6, atol=1e-8)

    def test_population_minimum_is_zero(self, one_factor_population, one_factor_theta):
        assert one_factor_population.q_value(one_factor_theta) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.integration
class TestBoundedEstimation:
    def test_unrestricted_population(self, fast_settings, one_factor_population):
        fit = estimate_unrestricted(one_factor_population, seed=1)
        assert fit.converged
        assert fit.q_value <= 1e-8
        lo, hi = one_factor_population.model.cross_section(fit.theta_hat.pi)
        assert lo - 1e-4 <= fit.theta_hat.beta <= hi + 1e-4

    def test_restricted_outside_identified_set(self, fast_settings, one_factor_population):
        fit = estimate_restricted(one_factor_population, BetaRestriction(2.15), seed=1)
        assert fit.theta_hat.beta == pytest.approx(2.15)
        assert fit.q_value > 1e-4
        assert "phi1" in [one_factor_population.model.spec.bound_names[j] for j in fit.active_bounds]

    def test_restricted_inside_identified_set(self, fast_settings, one_factor_population):
        fit = estimate_restricted(one_factor_population, BetaRestriction(1.0), seed=1)
        assert fit.q_value <= 1e-8

    def test_infeasible_beta(self, fast_settings, one_factor_population):
        with pytest.raises(InfeasibleRestriction):
            estimate_restricted(one_factor_population, BetaRestriction(-1.0))

    def test_qlr_nonnegative(self, fast_settings, one_factor_population):
        for beta0 in (0.3, 1.0, 2.5):
            assert qlr_statistic(one_factor_population, BetaRestriction(beta0), seed=2) >= 0.0

    def test_affine_restriction_population(self, fast_settings, one_factor_population):
        restriction = AffinePiRestriction([[0.0, 1.0, 0.0, 0.0, 0.0]], [0.0])
        fit = estimate_restricted(one_factor_population, restriction, seed=3)
        assert fit.theta_hat.pi[1] == pytest.approx(0.0, abs=1e-6)
        assert fit.q_value <= 1e-7

    def test_seed_determinism(self, fast_settings, one_factor_population):
        a = estimate_unrestricted(one_factor_population, seed=5)
        b = estimate_unrestricted(one_factor_population, seed=5)
        np.testing.assert_array_equal(a.theta_hat.vector, b.theta_hat.vector)

    def test_parallel_starts_match_sequential(self, fast_settings, one_factor_population):
        serial = estimate_unrestricted(one_factor_population, seed=5, workers=1)
        pooled = estimate_unrestricted(one_factor_population, seed=5, workers=2)
        np.testing.assert_array_equal(serial.theta_hat.vector, pooled.theta_hat.vector)
        assert serial.q_value == pooled.q_value

    def test_parallel_restricted_starts(self, fast_settings, one_factor_population):
        restriction = BetaRestriction(2.15)
        serial = estimate_restricted(one_factor_population, restriction, seed=1, workers=1)
        pooled = estimate_restricted(one_factor_population, restriction, seed=1, workers=2)
        np.testing.assert_array_equal(serial.theta_hat.vector, pooled.theta_hat.vector)

    def test_result_serialization(self, fast_settings, one_factor_population):
        fit = estimate_unrestricted(one_factor_population, seed=1)
        payload = fit.to_dict(one_factor_population.model)
        assert set(payload) >= {"theta", "q_value", "active_bounds", "converged"}


@pytest.mark.integration
class TestBreveEstimator:
    def test_recovers_pi_at_true_beta(self, fast_settings, one_factor_population):
        theta = estimate_breve(one_factor_population, 1.0, seed=0)
        np.testing.assert_allclose(theta.pi, ONE_FACTOR_DESIGN_PI, atol=1e-6)
        assert theta.beta == 1.0

    def test_ignores_bounds(self, fast_settings, one_factor_population):
        # β = 3 fica fora de B(π), mas θ̆ não impõe ℓ ≤ 0
        theta = estimate_breve(one_factor_population, 3.0, seed=0)
        model = one_factor_population.model
        assert one_factor_population.q_value(theta) == pytest.approx(0.0, abs=1e-10)
        assert not model.is_in_theta(theta)

    def test_affine_breve_respects_restriction(self, fast_settings, one_factor_population):
        restriction = AffinePiRestriction([[0.0, 1.0, 0.0, 0.0, 0.0]], [0.0])
        theta = estimate_breve_affine(one_factor_population, restriction, 1.0, seed=0)
        assert theta.pi[1] == pytest.approx(0.0, abs=1e-10)
        np.testing.assert_allclose(theta.pi, ONE_FACTOR_DESIGN_PI, atol=1e-6)

    def test_two_factor_breve(self, fast_settings, two_factor):
        obj = Objective(two_factor, population_moments(two_factor, two_factor.strong_design(), 500))
        truth = two_factor.to_theta(two_factor.strong_design())
        theta = estimate_breve(obj, truth.beta, seed=0)
        np.testing.assert_allclose(theta.pi, truth.pi, atol=1e-5)
        assert isinstance(theta, ThetaPoint)


def _strong_moments(model, overrides):
    """Momentos do delineamento forte δ = (1, 1, 2, 2, 2, 1) com entradas alteradas"""
    delta = model.link_delta(model.to_theta(model.strong_design()))
    for index, value in overrides.items():
        delta[index] = value
    return SampleMoments(n=200, m_hat=delta, v_bar_hat=np.eye(delta.size))


@pytest.mark.integration
class TestBoundaryFits:
    def test_inflated_beta_activates_phi1(self, fast_settings, one_factor):
        # τ = 0.4 pede β = ρ₁ρ₂/τ = 2.5 > ω₁ = 2: φ₁ vai a zero
        obj = Objective(one_factor, _strong_moments(one_factor, {5: 0.4}))
        fit = estimate_unrestricted(obj, seed=1)
        names = [one_factor.spec.bound_names[j] for j in fit.active_bounds]
        assert names == ["phi1"]
        assert fit.q_value > 1e-6
        assert fit.bounds_value[0] == pytest.approx(0.0, abs=1e-6)
        assert fit.structural_hat.phi[0] == pytest.approx(0.0, abs=1e-5)
        assert one_factor.is_in_theta(fit.theta_hat, tol=1e-8)

    def test_negative_unbounded_variance_skips_structural(self, fast_settings, one_factor, caplog):
        # ω₃ = 0.5 < ρ₂²/β = 1 implica φ₃ = −0.5, fora do modelo estrutural mas dentro de Θ
        obj = Objective(one_factor, _strong_moments(one_factor, {4: 0.5}))
        with caplog.at_level("WARNING", logger="robust_qlr.tools.estimation"):
            fit = estimate_unrestricted(obj, seed=1)
        assert fit.q_value <= 1e-8
        assert fit.structural_hat is None
        assert "structural_skipped" in fit.diagnostics
        assert "Parâmetros estruturais não reportados" in caplog.text
        assert fit.to_dict(one_factor)["structural"] is None
