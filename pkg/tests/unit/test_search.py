import json

import numpy as np
import pytest
from pydantic import ValidationError

from src.games.game_eval import GameCoefficients, dr_game, perturbed_game, val_1d
from src.games.strip_games import is_strip_pair
from src.search.optimizer import SearchConfig, optimize
from src.search.stability import stability_audit

pytestmark = pytest.mark.unit


def small_config(**overrides) -> SearchConfig:
    values = dict(
        max_breakpoints_per_function=3,
        restarts=3,
        seed=7,
        step_tolerance=1e-8,
        value_tolerance=1e-12,
        max_sweeps=50,
        grid_points=8,
    )
    values.update(overrides)
    return SearchConfig(**values)


class TestSearchConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValidationError):
            small_config(restarts=0)
        with pytest.raises(ValidationError):
            small_config(step_tolerance=0.0)
        with pytest.raises(ValidationError):
            small_config(grid_points=2)
        with pytest.raises(ValidationError):
            small_config(seed=-1)

    def test_from_settings_ignores_missing_overrides(self):
        cfg = SearchConfig.from_settings(restarts=5, seed=None)
        assert cfg.restarts == 5
        assert cfg.seed == 20240229

    def test_frozen(self):
        cfg = small_config()
        with pytest.raises(ValidationError):
            cfg.restarts = 10


class TestOptimize:
    def test_deterministic_for_fixed_seed(self):
        first = optimize(dr_game(), small_config())
        second = optimize(dr_game(), small_config())
        assert first.best_val == second.best_val
        assert first.best_f == second.best_f
        assert first.best_g == second.best_g
        assert first.trace == second.trace

    def test_traces_are_non_decreasing(self):
        result = optimize(dr_game(), small_config())
        frame = result.trace_frame()
        for _, group in frame.groupby("restart"):
            assert np.all(np.diff(group["val"].to_numpy()) >= 0.0)
        assert len(result.restart_values) == 3

    def test_best_is_consistent(self, constants):
        result = optimize(dr_game(), small_config())
        assert result.best_val == pytest.approx(val_1d(dr_game(), result.best_f, result.best_g))
        assert result.best_val == max(result.restart_values)
        assert result.best_val <= constants.val_dr + 1e-12
        assert result.restart_pairs[result.best_restart] == (result.best_f, result.best_g)
        for (f, g), value in zip(result.restart_pairs, result.restart_values):
            assert val_1d(dr_game(), f, g) == pytest.approx(value, abs=1e-12)

    def test_zero_game(self):
        result = optimize(GameCoefficients({}, 0.0), small_config(restarts=2))
        assert result.best_val == 0.0
        assert result.converged
        assert result.best_restart == 0

    def test_worker_count_does_not_change_result(self):
        serial = optimize(dr_game(), small_config(restarts=4))
        parallel = optimize(dr_game(), small_config(restarts=4, workers=2))
        assert serial.best_val == parallel.best_val
        assert serial.best_restart == parallel.best_restart
        assert serial.trace == parallel.trace

    def test_serialization(self, tmp_path):
        result = optimize(dr_game(), small_config(restarts=2))
        data = json.loads(result.to_json())
        assert data["best_val"] == result.best_val
        assert data["config"]["restarts"] == 2
        out = tmp_path / "trace.csv"
        text = result.trace_csv(out)
        assert text.splitlines()[0] == "restart,iteration,val"
        assert out.read_text() == text


@pytest.fixture(scope="module")
def dr_search():
    return optimize(dr_game(), SearchConfig.from_settings(restarts=40))


@pytest.mark.slow
class TestSearchQuality:
    def test_recovers_dr_value(self, dr_search, constants):
        assert 0.4780 <= dr_search.best_val <= 0.47857
        assert dr_search.best_val <= constants.val_dr + 1e-9

    @pytest.mark.parametrize("eps", [1e-3, 1e-4])
    def test_perturbation_slope(self, dr_search, eps):
        perturbed = optimize(perturbed_game(eps), SearchConfig.from_settings(restarts=40)).best_val
        slope = (dr_search.best_val - perturbed) / eps
        assert 0.044 <= slope <= 0.090

    def test_optimizer_is_a_strip_pair(self, dr_search):
        diagnostics = is_strip_pair(dr_search.best_f, dr_search.best_g, tol=1e-2, balance_tol=1e-3)
        assert diagnostics.item_i
        assert diagnostics.item_ii

    def test_optimizer_passes_stability_audit(self, dr_search):
        assert stability_audit(dr_search.best_f, dr_search.best_g).passed
        for f, g in dr_search.restart_pairs:
            assert stability_audit(f, g).passed
