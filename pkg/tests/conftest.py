"""
Fixtures compartilhadas dos testes
"""
import os

import numpy as np
import pytest

from robust_qlr.config import reload_settings
from robust_qlr.core import OneFactorModel, ThetaPoint, TwoFactorModel
from robust_qlr.data import population_moments
from robust_qlr.tools.estimation import Objective

ONE_FACTOR_DESIGN_PI = np.array([1.0, 0.0, 2.0, 2.0, 2.0])
TWO_FACTOR_DESIGN_PI = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 0.0, 2.0])


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Isola cada teste das variáveis RQLR_ do ambiente"""
    for key in list(os.environ):
        if key.startswith("RQLR_"):
            monkeypatch.delenv(key, raising=False)
    reload_settings()
    yield
    monkeypatch.undo()
    reload_settings()


@pytest.fixture
def fast_settings(monkeypatch):
    """Grades e partidas reduzidas para testes de integração"""
    monkeypatch.setenv("RQLR_MULTISTART", "6")
    monkeypatch.setenv("RQLR_BETA_GRID_SIZE", "60")
    monkeypatch.setenv("RQLR_PI_GRID_ONE_FACTOR", "5")
    monkeypatch.setenv("RQLR_PI_GRID_TWO_FACTOR", "3")
    monkeypatch.setenv("RQLR_BETA_STAR_GRID_SIZE", "3")
    monkeypatch.setenv("RQLR_GOLDEN_TOL", "1e-6")
    return reload_settings()


@pytest.fixture
def one_factor():
    return OneFactorModel()


@pytest.fixture
def two_factor():
    return TwoFactorModel()


@pytest.fixture
def one_factor_theta():
    return ThetaPoint(ONE_FACTOR_DESIGN_PI, 1.0)


@pytest.fixture
def two_factor_theta():
    return ThetaPoint(TWO_FACTOR_DESIGN_PI, 1.0)


@pytest.fixture
def one_factor_population(one_factor):
    """Objetivo com momentos populacionais do delineamento de um fator (n = 500)"""
    return Objective(one_factor, population_moments(one_factor, one_factor.design(), 500))


@pytest.fixture
def strong_population(one_factor):
    """Objetivo populacional fortemente identificado (λ₃ = 1)"""
    return Objective(one_factor, population_moments(one_factor, one_factor.strong_design(), 500))
