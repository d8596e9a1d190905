"""
Testes das curvas de rejeição por Monte Carlo
"""
import numpy as np
import pandas as pd
import pytest

from robust_qlr.core import OneFactorModel
from robust_qlr.tools.monte_carlo import (
    CURVE_COLUMNS,
    ReplicationTask,
    read_curve_csv,
    reject_curve,
    run_replication,
    write_curve_csv,
)
from robust_qlr.tools.restrictions import Case
from robust_qlr.tools.rqlr import AlphaBudget
from robust_qlr.utils.validators import ValidationError

DESIGN = OneFactorModel().design()


@pytest.mark.integration
class TestReplication:
    def test_replication_deterministic(self, fast_settings):
        task = ReplicationTask(
            model_name="one-factor",
            structural=DESIGN,
            n=200,
            seed=3,
            beta_index=0,
            beta0=1.0,
            rep=1,
            budget=AlphaBudget.default(Case.W1),
            n_draws=1000,
        )
        first = run_replication(task)
        second = run_replication(task)
        assert first == second
        assert first.rep == 1


@pytest.mark.integration
class TestRejectCurve:
    def test_columns_and_order(self, fast_settings):
        curve = reject_curve("one-factor", DESIGN, 200, [3.0, 1.0], reps=2, seed=1, n_draws=1000, workers=1)
        assert list(curve.columns) == CURVE_COLUMNS
        assert curve["beta0"].tolist() == [1.0, 3.0]
        assert curve["reps"].tolist() == [2, 2]
        assert curve["rejection_rate"].between(0.0, 1.0).all()

    def test_worker_count_independent(self, fast_settings):
        kwargs = dict(reps=2, seed=7, n_draws=1000)
        serial = reject_curve("one-factor", DESIGN, 200, [1.0, 2.5], workers=1, **kwargs)
        parallel = reject_curve("one-factor", DESIGN, 200, [1.0, 2.5], workers=2, **kwargs)
        pd.testing.assert_frame_equal(serial, parallel)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValidationError):
            reject_curve("one-factor", DESIGN, 200, [], reps=2)

    def test_csv_round_trip(self, tmp_path):
        curve = pd.DataFrame(
            [[1.0, 0.04, 0.011, 300, 0, 1]], columns=CURVE_COLUMNS
        )
        path = write_curve_csv(curve, tmp_path / "out" / "curva.csv", {"seed": 1, "model": "one-factor"})
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# model=one-factor"
        assert lines[1] == "# seed=1"
        pd.testing.assert_frame_equal(read_curve_csv(path), curve, check_dtype=False)


@pytest.mark.slow
def test_size_inside_identified_set(fast_settings):
    """Rejeição em β₀ = 1 (interior de B(π)) não excede o nível nominal"""
    reps = 300
    curve = reject_curve("one-factor", DESIGN, 500, [1.0], reps=reps, seed=2024, n_draws=2000)
    bound = 0.05 + 3.0 * np.sqrt(0.05 * 0.95 / reps)
    assert curve.loc[0, "rejection_rate"] <= bound


@pytest.mark.slow
def test_power_outside_identified_set(fast_settings):
    curve = reject_curve("one-factor", DESIGN, 500, [4.0], reps=100, seed=2024, n_draws=2000)
    assert curve.loc[0, "rejection_rate"] >= 0.8
