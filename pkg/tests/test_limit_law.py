"""
Testes do processo concentrado e das leis limite dos casos S, W1 e W2
"""
import numpy as np
import pytest
from scipy import optimize

from robust_qlr.core.exceptions import SingularJ11
from robust_qlr.tools.limit_law import (
    ConcentratedProcess,
    LimitDraws,
    LimitLawSpec,
    concentrated_qw,
    concentrated_qwr,
    draw_qlr_limit,
    qlr_limit_draws,
    simulate_quantile,
)
from robust_qlr.tools.monte_carlo import design_quantile
from robust_qlr.tools.polyhedron import Polyhedron
from robust_qlr.tools.restrictions import Case
from robust_qlr.utils.calculations import order_statistic_quantile
from robust_qlr.utils.validators import ValidationError

from .conftest import ONE_FACTOR_DESIGN_PI

WEAK_PI = np.array([1.0, 0.3, 2.0, 2.0, 2.0])


def _spd(rng, size):
    root = rng.normal(size=(size, size))
    return root @ root.T + size * np.eye(size)


def _weak_spec(one_factor, case=Case.W1, H=None, R1=None, pi_star=ONE_FACTOR_DESIGN_PI):
    H = np.eye(6) if H is None else H
    return LimitLawSpec(
        model=one_factor,
        pi_star=pi_star,
        beta_star=1.0,
        H=H,
        V=H,
        n=500,
        case=case,
        psi_r=Polyhedron.unconstrained(5) if case == Case.W1 else None,
        R1=R1,
    )


def _direct_quadratic(spec, y, beta, fixed=()):
    """min_ψ₁ de (D₁ψ₁ + g)′H(D₁ψ₁ + g) + 2Y′(D₁ψ₁ + g), g = (0, ĉ(β))"""
    model = spec.model
    T, _ = model.tau_jacobians(spec.pi_star, beta)
    D1 = np.vstack([np.eye(5), T])
    g = np.concatenate([np.zeros(5), spec.drift(beta)])
    free = [i for i in range(5) if i not in fixed]

    def value(v):
        psi = np.zeros(5)
        psi[free] = v
        w = D1 @ psi + g
        return w @ spec.H @ w + 2.0 * y @ w

    res = optimize.minimize(value, np.zeros(len(free)), method="BFGS", options={"gtol": 1e-10})
    return res.fun


@pytest.mark.unit
class TestConcentratedProcess:
    def test_unit_example(self, one_factor):
        spec = _weak_spec(one_factor)
        y = np.zeros(6)
        y[5] = 1.0
        assert concentrated_qw(spec, y, 1.0) == pytest.approx(-0.25)

    def test_zero_draw_at_beta_star(self, one_factor):
        spec = _weak_spec(one_factor, pi_star=WEAK_PI)
        assert concentrated_qw(spec, np.zeros(6), 1.0) == pytest.approx(0.0)

    def test_drift_term_without_noise(self, one_factor):
        spec = _weak_spec(one_factor, pi_star=WEAK_PI)
        # Com Y = 0, 2q̃ é o resíduo da projeção H-ortogonal de g sobre D₁
        assert concentrated_qw(spec, np.zeros(6), 1.8) >= -1e-12

    @pytest.mark.parametrize("beta", [0.6, 1.0, 1.4, 1.9])
    def test_matches_direct_minimization(self, one_factor, beta):
        rng = np.random.default_rng(12)
        spec = _weak_spec(one_factor, H=_spd(rng, 6), pi_star=WEAK_PI)
        y = rng.normal(size=6)
        expected = _direct_quadratic(spec, y, beta)
        assert 2.0 * concentrated_qw(spec, y, beta) == pytest.approx(expected, rel=1e-6, abs=1e-8)

    def test_restricted_matches_direct_minimization(self, one_factor):
        rng = np.random.default_rng(13)
        R1 = np.array([[0.0, 1.0, 0.0, 0.0, 0.0]])
        spec = _weak_spec(one_factor, case=Case.W2, H=_spd(rng, 6), R1=R1, pi_star=WEAK_PI)
        y = rng.normal(size=6)
        expected = _direct_quadratic(spec, y, 1.3, fixed=(1,))
        assert 2.0 * concentrated_qwr(spec, y, 1.3) == pytest.approx(expected, rel=1e-6, abs=1e-8)

    def test_grid_and_pointwise_agree(self, one_factor):
        rng = np.random.default_rng(2)
        H = _spd(rng, 6)
        process = ConcentratedProcess(one_factor, WEAK_PI, 1.0, H, 500, np.array([[0, 1.0, 0, 0, 0]]))
        Y = rng.normal(size=(7, 6))
        grid = np.linspace(0.5, 2.0, 4)
        values = process.evaluate_grid(Y, grid, restricted=True)
        for i, beta in enumerate(grid):
            pointwise = process.evaluate_at(Y, np.full(7, beta), restricted=True)
            np.testing.assert_allclose(values[i], pointwise, rtol=1e-10, atol=1e-10)

    def test_minimize_not_above_grid(self, fast_settings, one_factor):
        rng = np.random.default_rng(5)
        process = ConcentratedProcess(one_factor, WEAK_PI, 1.0, np.eye(6), 500)
        Y = rng.normal(size=(20, 6))
        minimum, argmin = process.minimize(Y, (0.5, 2.0))
        grid_values = process.evaluate_grid(Y, np.linspace(0.5, 2.0, 60))
        assert np.all(minimum <= grid_values.min(axis=0) + 1e-12)
        assert np.all((argmin >= 0.5) & (argmin <= 2.0))

    def test_singular_j11(self, one_factor):
        process = ConcentratedProcess(one_factor, WEAK_PI, 1.0, np.diag([0.0] * 5 + [1.0]), 500)
        with pytest.raises(SingularJ11):
            process.evaluate_grid(np.zeros((1, 6)), np.array([1.0]))


@pytest.mark.unit
class TestLimitDraws:
    def test_deterministic(self):
        V = np.diag([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(LimitDraws(V, 1000, 9).Y, LimitDraws(V, 1000, 9).Y)

    def test_covariance(self):
        V = np.array([[2.0, 0.5], [0.5, 1.0]])
        Y = LimitDraws(V, 40_000, 3).Y
        np.testing.assert_allclose(np.cov(Y, rowvar=False), V, atol=0.06)

    def test_constant_draws_quantile(self):
        quantile, mc_se = order_statistic_quantile(np.full(1000, 2.5), 0.05)
        assert quantile == 2.5
        assert mc_se == 0.0

    def test_order_statistic_index(self):
        values = np.arange(1, 1001, dtype=float)
        quantile, _ = order_statistic_quantile(values, 0.05)
        assert quantile == 950.0


@pytest.mark.integration
class TestLimitLaws:
    def test_strong_case_chi_square(self, one_factor):
        quantile, mc_se, _ = design_quantile(
            "one-factor", one_factor.strong_design(), 500, Case.S, 0.05, 40_000, seed=1
        )
        assert quantile == pytest.approx(3.841, abs=0.15)
        assert mc_se < 0.1

    def test_w1_draws_nonnegative(self, fast_settings, one_factor):
        spec = _weak_spec(one_factor)
        Y = LimitDraws(spec.V, 300, 4).Y
        draws = qlr_limit_draws(spec, Y)
        assert draws.shape == (300,)
        assert np.all(draws >= -1e-9)

    def test_w2_without_restriction_is_zero(self, fast_settings, one_factor):
        spec = _weak_spec(one_factor, case=Case.W2)
        Y = LimitDraws(spec.V, 100, 4).Y
        np.testing.assert_allclose(qlr_limit_draws(spec, Y), 0.0, atol=1e-12)

    def test_w2_nonnegative(self, fast_settings, one_factor):
        spec = _weak_spec(one_factor, case=Case.W2, R1=np.array([[0.0, 1.0, 0.0, 0.0, 0.0]]))
        Y = LimitDraws(spec.V, 200, 8).Y
        assert np.all(qlr_limit_draws(spec, Y) >= -1e-9)

    def test_single_draw_matches_batch(self, fast_settings, one_factor):
        spec = _weak_spec(one_factor)
        Y = LimitDraws(spec.V, 5, 6).Y
        batch = qlr_limit_draws(spec, Y)
        assert draw_qlr_limit(spec, Y[2]) == pytest.approx(batch[2], rel=1e-9, abs=1e-12)

    def test_quantile_monotone_in_alpha(self, fast_settings, one_factor):
        spec = _weak_spec(one_factor)
        draws = LimitDraws(spec.V, 1000, 2)
        q10, _ = simulate_quantile(spec, 0.10, 1000, 2, draws)
        q05, _ = simulate_quantile(spec, 0.05, 1000, 2, draws)
        q01, _ = simulate_quantile(spec, 0.01, 1000, 2, draws)
        assert q10 <= q05 <= q01

    def test_minimum_draws(self, one_factor):
        with pytest.raises(ValidationError):
            simulate_quantile(_weak_spec(one_factor), 0.05, 500, 0)

    def test_w2_design_quantile_requires_restriction(self, one_factor):
        with pytest.raises(ValidationError):
            design_quantile("one-factor", one_factor.strong_design(), 500, Case.W2, 0.04, 1000, seed=0)
