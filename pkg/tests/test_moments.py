"""
Testes dos momentos amostrais, da ingestão de CSV e do DGP
"""
import logging

import numpy as np
import pytest

from robust_qlr.core.exceptions import InsufficientData, NonFiniteData
from robust_qlr.data import (
    WeightScheme,
    compute_moments,
    empirical_moments,
    load_csv,
    normal_theory_variance,
    population_moments,
    simulate_dgp,
    weight_matrix,
)
from robust_qlr.models.simulation import DgpSpec
from robust_qlr.utils.validators import ValidationError


@pytest.mark.unit
class TestEmpiricalMoments:
    def test_two_point_sample(self):
        data = np.array([[0.0], [2.0]])
        m_hat, v_bar = empirical_moments(data, [(0, 0)])
        assert m_hat[0] == pytest.approx(1.0)
        assert v_bar[0, 0] == pytest.approx(0.0)

    def test_ordering_follows_cells(self, one_factor):
        rng = np.random.default_rng(0)
        data = rng.normal(size=(200, 3))
        m_hat, v_bar = empirical_moments(data, one_factor.spec.delta_index_map)
        cov = np.cov(data, rowvar=False, bias=True)
        np.testing.assert_allclose(m_hat, one_factor.vech(cov))
        assert v_bar.shape == (6, 6)
        np.testing.assert_allclose(v_bar, v_bar.T)

    def test_constant_column_warns(self, one_factor, caplog):
        rng = np.random.default_rng(1)
        data = rng.normal(size=(100, 3))
        data[:, 2] = 5.0
        with caplog.at_level(logging.WARNING):
            moments = compute_moments(one_factor, data)
        assert moments.n == 100
        assert "quase singular" in caplog.text

    def test_nan_rejected(self, one_factor):
        data = np.ones((20, 3))
        data[4, 1] = np.nan
        with pytest.raises(NonFiniteData, match="linha 4, coluna 1"):
            compute_moments(one_factor, data)

    def test_small_sample_rejected(self, one_factor):
        with pytest.raises(InsufficientData):
            compute_moments(one_factor, np.random.default_rng(0).normal(size=(4, 3)))

    def test_wrong_shape_rejected(self, one_factor):
        with pytest.raises(ValidationError):
            compute_moments(one_factor, np.zeros((50, 4)))


@pytest.mark.unit
class TestPopulationMoments:
    def test_population_equals_link(self, one_factor):
        structural = one_factor.design()
        moments = population_moments(one_factor, structural, 500)
        np.testing.assert_allclose(moments.m_hat, one_factor.link_delta(one_factor.to_theta(structural)))
        assert moments.n == 500

    def test_normal_theory_variance_single_cell(self):
        cov = np.array([[2.0, 0.5], [0.5, 1.0]])
        v = normal_theory_variance(cov, [(0, 0), (0, 1)])
        # Var(x₁²) = 2σ₁₁², Var(x₁x₂) = σ₁₁σ₂₂ + σ₁₂²
        assert v[0, 0] == pytest.approx(8.0)
        assert v[1, 1] == pytest.approx(2.25)
        assert v[0, 1] == pytest.approx(2.0)

    def test_weight_schemes(self, one_factor):
        moments = population_moments(one_factor, one_factor.design(), 500)
        np.testing.assert_allclose(weight_matrix(moments, WeightScheme.IDENTITY), np.eye(6))
        optimal = weight_matrix(moments, WeightScheme.OPTIMAL)
        np.testing.assert_allclose(optimal @ moments.v_bar_hat, np.eye(6), atol=1e-8)
        diagonal = weight_matrix(moments, WeightScheme.DIAGONAL)
        np.testing.assert_allclose(np.diag(diagonal), 1.0 / np.diag(moments.v_bar_hat))


@pytest.mark.integration
class TestSimulatedData:
    def test_law_of_large_numbers(self, one_factor):
        structural = one_factor.design()
        data = simulate_dgp(DgpSpec(model="one-factor", structural=structural, n=50_000, seed=7))
        moments = compute_moments(one_factor, data)
        expected = one_factor.vech(structural.implied_covariance())
        assert np.max(np.abs(moments.m_hat - expected)) < 0.05

    def test_simulation_deterministic(self, one_factor):
        spec = DgpSpec(model="one-factor", structural=one_factor.design(), n=300, seed=11, stream=(2, 5))
        np.testing.assert_array_equal(simulate_dgp(spec), simulate_dgp(spec))

    def test_streams_differ(self, one_factor):
        base = dict(model="one-factor", structural=one_factor.design(), n=300, seed=11)
        a = simulate_dgp(DgpSpec(**base, stream=(0, 0)))
        b = simulate_dgp(DgpSpec(**base, stream=(0, 1)))
        assert not np.allclose(a, b)

    def test_two_factor_shape(self, two_factor):
        data = simulate_dgp(DgpSpec(model="two-factor", structural=two_factor.design(), n=120, seed=1))
        assert data.shape == (120, 5)

    def test_model_mismatch_rejected(self, one_factor):
        with pytest.raises(ValueError):
            DgpSpec(model="two-factor", structural=one_factor.design(), n=10)


@pytest.mark.unit
class TestLoadCsv:
    def test_load_selected_columns(self, tmp_path):
        path = tmp_path / "medidas.csv"
        path.write_text("b,a,c\n1,2,3\n4,5,6\n", encoding="utf-8")
        data = load_csv(str(path), ["a", "b", "c"])
        np.testing.assert_allclose(data, [[2, 1, 3], [5, 4, 6]])

    def test_missing_value_reports_row_and_column(self, tmp_path):
        path = tmp_path / "medidas.csv"
        path.write_text("x1,x2,x3\n1,2,3\n4,,6\n", encoding="utf-8")
        with pytest.raises(ValidationError, match=r"linha 2 .*coluna 'x2'"):
            load_csv(str(path))

    def test_missing_column(self, tmp_path):
        path = tmp_path / "medidas.csv"
        path.write_text("x1,x2\n1,2\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="x3"):
            load_csv(str(path), ["x1", "x2", "x3"])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            load_csv(str(tmp_path / "nao_existe.csv"))
