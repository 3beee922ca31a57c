"""
Tests for the reproduction recipes.

The full reproductions are marked slow; run them with ``pytest -m slow``.
"""

import numpy as np
import pytest

from errors import ConfigError
from models.schemas import EpochMetrics, GenConfig, GenPreset, LossKind
from storage.run_store import RunStore
from training.recipes import (
    RECIPES,
    ReproduceSummary,
    get_recipe,
    recipe_configs,
    run_recipe,
    settling_epoch,
    stabilized,
)


def history(values, metric="c1"):
    return [
        EpochMetrics(epoch=i + 1, train_loss=1.0, test_loss=1.0, **{metric: v})
        for i, v in enumerate(values)
    ]


class TestRecipes:
    """Tests for recipe definitions and configs."""

    def test_published_values_cover_every_loss(self):
        for recipe in RECIPES.values():
            for metric in recipe.metrics:
                assert set(recipe.published[metric]) == set(recipe.losses)

    def test_unknown_simulation(self):
        with pytest.raises(ConfigError):
            get_recipe("d")

    def test_full_batch_lr_scaled_by_batch_count(self, tmp_path):
        gen = GenConfig.for_preset(GenPreset.SIM_A)
        configs = recipe_configs(get_recipe("a"), gen, tmp_path / "data", tmp_path, seed=2)
        lrs = {cfg.loss: cfg.lr for cfg in configs}
        assert lrs[LossKind.MINI_BATCHED] == 0.01
        assert lrs[LossKind.FULL_BATCHED] == pytest.approx(0.01 * 32)
        assert all(cfg.epochs == 50 and not cfg.record_timing for cfg in configs)
        assert len({cfg.output_dir for cfg in configs}) == 3

    def test_two_class_hazard_gap(self, tmp_path):
        for sim, preset in (("a", GenPreset.SIM_A), ("b", GenPreset.SIM_B)):
            gen = GenConfig.for_preset(preset)
            for cfg in recipe_configs(get_recipe(sim), gen, tmp_path / "data", tmp_path, seed=1):
                assert cfg.gen.phi_map == {0: 0.0, 1: 3.0}


class TestStabilized:
    """Tests for stabilized values and settling epochs."""

    def test_mean_of_last_five(self):
        assert stabilized(history([0.1, 0.2, 0.5, 0.6, 0.7, 0.8, 0.9]), "c1") == pytest.approx(0.7)

    def test_absent_metric(self):
        assert stabilized(history([0.5, 0.6]), "auc") is None

    def test_settling_epoch(self):
        values = [0.5, 0.7, 0.6, 0.70, 0.705, 0.70, 0.70, 0.70]
        assert settling_epoch(history(values), "c1") == 4

    def test_table_layout(self):
        recipe = get_recipe("a")
        summary = ReproduceSummary(
            recipe=recipe,
            source="synthetic",
            seeds=[1],
            values={"c1": {LossKind.ORACLE: 0.73, LossKind.FULL_BATCHED: None, LossKind.MINI_BATCHED: 0.72}},
            histories={},
            true_loss=1.5,
        )
        lines = summary.table().splitlines()
        assert lines[0] == "# sim a, data source: synthetic, seeds: [1]"
        assert lines[1] == "metric,oracle,oracle_published,full-batched,full-batched_published,mini-batched,mini-batched_published"
        assert lines[2] == "c1,0.7300,0.7268,,0.7165,0.7200,0.7189"
        assert lines[3] == "true_loss,1.5000"


@pytest.mark.slow
class TestReproductions:
    """Full-size simulation studies."""

    def test_simulation_a(self, tmp_path):
        summary = run_recipe("a", str(tmp_path), seed=1, n_seeds=3, jobs=3)
        c1 = summary.values["c1"]
        for loss, published in summary.recipe.published["c1"].items():
            assert abs(c1[loss] - published) <= 0.05
        assert c1[LossKind.ORACLE] >= c1[LossKind.MINI_BATCHED] - 0.01

        full = summary.histories[(1, LossKind.FULL_BATCHED)]
        mini = summary.histories[(1, LossKind.MINI_BATCHED)]
        oracle = summary.histories[(1, LossKind.ORACLE)]
        settled = {name: np.mean([m.test_loss for m in h[-5:]]) for name, h in
                   (("oracle", oracle), ("full", full), ("mini", mini))}
        assert abs(settled["full"] - settled["mini"]) <= 0.02
        assert settled["oracle"] < min(settled["full"], settled["mini"])

    def test_simulation_b(self, tmp_path):
        summary = run_recipe("b", str(tmp_path), seed=1, n_seeds=3, jobs=3)
        for metric, floor in (("c1", 0.67), ("c2", 0.63)):
            for loss, published in summary.recipe.published[metric].items():
                value = summary.values[metric][loss]
                assert value >= floor
                assert abs(value - published) <= 0.05

    @staticmethod
    def check_simulation_c(summary, slack):
        values = summary.values
        published = summary.recipe.published
        for metric, floor in (("auc", 0.72), ("c2", 0.72), ("c1", 0.61)):
            value = values[metric][LossKind.TWO_TASK]
            assert value >= floor - slack
            assert abs(value - published[metric][LossKind.TWO_TASK]) <= 0.06 + slack
        fast = settling_epoch(summary.histories[(1, LossKind.TWO_TASK)], "auc")
        slow = settling_epoch(summary.histories[(1, LossKind.TWO_TASK_FULL)], "auc")
        assert fast <= slow

    def test_simulation_c(self, tmp_path):
        self.check_simulation_c(run_recipe("c", str(tmp_path), seed=1, jobs=2), slack=0.0)

    def test_simulation_c_scaled(self, tmp_path):
        self.check_simulation_c(run_recipe("c", str(tmp_path), seed=1, scale=0.4, jobs=2), slack=0.03)

    def test_deterministic_metrics(self, tmp_path):
        run_recipe("a", str(tmp_path / "first"), seed=1, scale=0.1, epochs=3)
        run_recipe("a", str(tmp_path / "second"), seed=1, scale=0.1, epochs=3)
        for loss in RECIPES["a"].losses:
            first = RunStore(tmp_path / "first" / "seed1" / loss.value).metrics_csv.read_bytes()
            second = RunStore(tmp_path / "second" / "seed1" / loss.value).metrics_csv.read_bytes()
            assert first == second
