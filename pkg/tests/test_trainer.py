"""
Tests for batching, epoch training, evaluation and experiment runs.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from errors import ArgumentError, ConfigError, NumericAbort, UsageError
from models.schemas import (
    C2Group,
    ExperimentConfig,
    LayerKind,
    LayerSpec,
    LossKind,
    ModelConfig,
    ModelPreset,
)
from nn.network import Network
from storage.run_store import RunStore
from survival.dataset import SurvivalDataset
from survival.losses import oracle_loss
from training import check_partition, evaluate, make_batches, run_experiment, train_epoch
from training.experiment import true_loss

LINEAR = ModelConfig(input_shape=(3,), layers=[LayerSpec(kind=LayerKind.DENSE, units=1)])


def linear_data(n: int, seed: int, censor: float = 0.3, split: str = "train") -> SurvivalDataset:
    """Exponential times whose log hazard is linear in three features."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 3))
    phi = x @ np.array([1.0, -0.5, 0.0])
    times = rng.exponential(size=n) / np.exp(phi)
    events = (rng.random(n) >= censor).astype(np.int8)
    labels = (phi > 0).astype(np.int8)
    return SurvivalDataset.from_arrays(times, events, labels, images=x, phi=phi, split=split)


def linear_network(seed: int = 0) -> Network:
    return Network(LINEAR, np.random.default_rng(seed))


@pytest.fixture
def datasets():
    return {"train": linear_data(80, 1), "test": linear_data(40, 2, split="test")}


def experiment_config(tmp_path, **overrides) -> ExperimentConfig:
    values = dict(
        name="linear",
        model_preset=ModelPreset.CUSTOM,
        model=LINEAR,
        loss=LossKind.MINI_BATCHED,
        batch_size=16,
        epochs=6,
        lr=0.05,
        output_dir=str(tmp_path / "run"),
        record_timing=False,
    )
    values.update(overrides)
    return ExperimentConfig(**values)


class TestBatching:
    """Tests for make_batches and check_partition."""

    def test_even_split(self):
        batches = make_batches(4, 2, np.random.default_rng(0))
        assert [len(b) for b in batches] == [2, 2]
        assert sorted(np.concatenate(batches).tolist()) == [0, 1, 2, 3]

    def test_short_last_batch(self):
        assert [len(b) for b in make_batches(5, 2, np.random.default_rng(0))] == [2, 2, 1]

    def test_same_seed_same_partition(self):
        a = make_batches(50, 8, np.random.default_rng(3))
        b = make_batches(50, 8, np.random.default_rng(3))
        for x, y in zip(a, b):
            assert_array_equal(x, y)

    def test_bad_batch_size(self):
        with pytest.raises(ConfigError):
            make_batches(4, 0, np.random.default_rng(0))

    def test_empty_dataset(self):
        with pytest.raises(ArgumentError):
            make_batches(0, 2, np.random.default_rng(0))

    def test_partition_check(self):
        check_partition([np.array([1, 0]), np.array([2])], 3)
        with pytest.raises(UsageError):
            check_partition([np.array([1, 1]), np.array([2])], 3)


class TestTrainEpoch:
    """Tests for train_epoch."""

    def test_loss_decreases(self, datasets):
        network = linear_network()
        rng = np.random.default_rng(4)
        losses = []
        for _ in range(5):
            batches = make_batches(80, 16, rng)
            losses.append(train_epoch(network, datasets["train"], LossKind.MINI_BATCHED, batches, lr=0.1).loss)
        assert losses[-1] < losses[0]

    def test_full_batch_single_step(self, datasets):
        result = train_epoch(linear_network(), datasets["train"], LossKind.FULL_BATCHED, None, lr=0.1, chunk_size=7)
        assert result.steps == 1
        assert result.skipped_batches == 0

    def test_whole_set_batch_matches_full_batch(self, datasets):
        train = datasets["train"]
        mini, full = linear_network(), linear_network()
        a = train_epoch(mini, train, LossKind.MINI_BATCHED, [np.arange(len(train))], lr=0.1)
        b = train_epoch(full, train, LossKind.FULL_BATCHED, None, lr=0.1, chunk_size=13)
        assert a.loss == pytest.approx(b.loss, rel=1e-12)
        for name, value in mini.parameters().items():
            assert_allclose(value, full.parameters()[name], rtol=1e-12, atol=1e-15)

    def test_zero_event_batch_leaves_parameters(self, datasets):
        train = datasets["train"]
        censored = np.flatnonzero(train.events == 0)[:4]
        network = linear_network()
        before = {name: value.copy() for name, value in network.parameters().items()}
        result = train_epoch(network, train, LossKind.MINI_BATCHED, [censored], lr=0.1)
        assert result.skipped_batches == 1
        assert result.steps == 0
        for name, value in network.parameters().items():
            assert_array_equal(value, before[name])

    def test_oracle_never_skips(self, datasets):
        train = datasets["train"]
        censored = np.flatnonzero(train.events == 0)[:4]
        result = train_epoch(linear_network(), train, LossKind.ORACLE, [censored], lr=0.1)
        assert result.steps == 1

    def test_two_task_steps_without_events(self):
        data = SurvivalDataset.from_arrays(
            [1.0, 2.0, 3.0, 4.0], [0, 0, 0, 0], [1, 1, 0, 0], images=np.eye(4, 3) + 0.5
        )
        for kind, batches in ((LossKind.TWO_TASK, [np.arange(4)]), (LossKind.TWO_TASK_FULL, None)):
            network = linear_network()
            before = network.parameters()["0.weight"].copy()
            result = train_epoch(network, data, kind, batches, lr=0.1)
            assert result.steps == 1
            assert result.skipped_batches == 0
            assert not np.array_equal(network.parameters()["0.weight"], before)

    def test_full_batch_overflow_names_batch(self):
        data = SurvivalDataset.from_arrays([1.0, 2.0], [1, 1], images=np.full((2, 3), 1e308))
        network = linear_network()
        network.parameters()["0.weight"][...] = 10.0
        with pytest.raises(NumericAbort) as e:
            train_epoch(network, data, LossKind.FULL_BATCHED, None, lr=0.1)
        assert e.value.batch_index == 0

    def test_overflow_aborts_with_batch_index(self):
        data = SurvivalDataset.from_arrays([1.0, 2.0], [1, 1], images=np.full((2, 3), 1000.0))
        network = linear_network()
        network.parameters()["0.weight"][...] = 1.0
        with pytest.raises(NumericAbort) as e:
            train_epoch(network, data, LossKind.ORACLE, [np.array([0, 1])], lr=0.1)
        assert e.value.batch_index == 0
        assert e.value.exit_code == 4

    def test_needs_images(self):
        data = SurvivalDataset.from_arrays([1.0], [1])
        with pytest.raises(ArgumentError):
            train_epoch(linear_network(), data, LossKind.ORACLE, [np.array([0])], lr=0.1)


class TestEvaluate:
    """Tests for evaluate."""

    def test_constant_model(self, datasets):
        network = linear_network()
        network.parameters()["0.weight"][...] = 0.0
        loss, report = evaluate(network, datasets["test"], LossKind.TWO_TASK, C2Group.DISEASE)
        assert report.c1 == 0.5
        assert report.auc == 0.5
        assert np.isfinite(loss)

    def test_auc_only_for_two_task(self, datasets):
        _, report = evaluate(linear_network(), datasets["test"], LossKind.MINI_BATCHED)
        assert report.auc is None
        assert report.c1 is not None

    def test_oracle_test_loss_uses_observed_times(self, datasets):
        network = linear_network()
        test = datasets["test"]
        loss, _ = evaluate(network, test, LossKind.ORACLE)
        assert loss == pytest.approx(oracle_loss(network.predict(test.images), test))


class TestRunExperiment:
    """Tests for run_experiment."""

    def test_artifacts_written(self, tmp_path, datasets):
        cfg = experiment_config(tmp_path, eval_every=4)
        result = run_experiment(cfg, datasets)
        assert [m.epoch for m in result.history] == [4, 6]

        store = RunStore(cfg.output_dir)
        assert store.read_metrics() == result.history
        manifest = store.read_manifest()
        assert manifest.config.seed == cfg.seed
        assert "init" in manifest.decisions
        assert manifest.true_loss == pytest.approx(true_loss(datasets["test"]))
        assert set(store.load_parameters()) == set(result.network.parameters())

    def test_reproducible(self, tmp_path, datasets):
        a = run_experiment(experiment_config(tmp_path / "a"), datasets).history
        b = run_experiment(experiment_config(tmp_path / "b"), datasets).history
        assert a == b

    def test_seconds_empty_without_timing(self, tmp_path, datasets):
        history = run_experiment(experiment_config(tmp_path, epochs=1), datasets).history
        assert history[0].seconds is None

    def test_on_epoch_callback(self, tmp_path, datasets):
        seen = []
        run_experiment(experiment_config(tmp_path, epochs=3), datasets, on_epoch=seen.append)
        assert [m.epoch for m in seen] == [1, 2, 3]

    def test_input_shape_mismatch(self, tmp_path, datasets):
        cfg = experiment_config(tmp_path, model_preset=ModelPreset.TABLE1, model=None)
        with pytest.raises(ConfigError):
            run_experiment(cfg, datasets)

    def test_batch_size_rule(self, tmp_path):
        with pytest.raises(ValueError):
            experiment_config(tmp_path, batch_size=1)
