import numpy as np
import pytest

from adeqnn import circuit, metrics
from adeqnn.tasks import classification as cls


def test_task_configs():
    ade = cls.task_config("circle", "ade")
    assert ade.replication_enabled and ade.mcry_enabled and ade.input_map == (0, 1, 0, 1)
    base = cls.task_config("spiral", "baseline")
    assert not base.replication_enabled and not base.mcry_enabled
    assert base.input_map == (0, 1, None, None)
    glass = cls.task_config("glass", "ade")
    assert glass.readout == "three_class" and glass.input_map == (0, 1, 2, 3)
    with pytest.raises(ValueError):
        cls.task_config("moons", "ade")
    with pytest.raises(ValueError):
        cls.task_config("circle", "deep")


def test_hyper_defaults_and_round_trip():
    h = cls.ClassifyHyper.for_task("glass")
    assert (h.epochs, h.batch_size) == (70, 32)
    assert cls.ClassifyHyper.for_task("circle").epochs == 100
    assert cls.ClassifyHyper.from_dict(h.to_dict()) == h


def test_baseline_initial_params_pin_mcry():
    theta = cls.initial_params(cls.task_config("circle", "baseline"), 3)
    assert np.array_equal(theta[circuit.SLICES["mcry"]], circuit.MCRY_IDENTITY)


def test_decision_grid_shape():
    cfg = cls.task_config("circle", "ade")
    grid = cls.decision_grid(cfg, circuit.random_params(np.random.default_rng(0)), n=11)
    assert grid.shape == (121, 5)
    # two independent marginals P(q2=1), P(q3=1)
    assert np.all((grid[:, 2:4] >= 0) & (grid[:, 2:4] <= 1 + 1e-12))
    assert np.array_equal(grid[:, 4], metrics.predict(grid[:, 2:4]))
    assert grid[0, 0] == -1 and grid[-1, 1] == 1


def test_short_run_and_reproducible_metrics():
    cfg = cls.task_config("circle", "ade")
    hyper = cls.ClassifyHyper(epochs=3, batch_size=20)
    a = cls.run_classification("circle", cfg, hyper, seed=1)
    b = cls.run_classification("circle", cfg, hyper, seed=1)
    assert len(a.record.history) == 3 * 3
    assert [h.cost for h in a.record.history] == [h.cost for h in b.record.history]
    assert a.grid.shape == (cls.GRID_SIZE**2, 5)
    train, test = cls.load_task("circle", 1)
    pred = metrics.predict(cls.predict_scores(cfg, a.record.final_params, test.x))
    assert np.mean(pred == test.y) == a.test_accuracy
    assert a.confusion.sum() == len(test)
    # the last recorded metric is the final training accuracy
    assert a.record.history[-1].metric == a.train_accuracy


def test_parallel_workers_match_serial():
    cfg = cls.task_config("spiral", "ade")
    hyper = cls.ClassifyHyper(epochs=2)
    a = cls.run_classification("spiral", cfg, hyper, seed=0, with_grid=False)
    b = cls.run_classification("spiral", cfg, hyper, seed=0, with_grid=False, workers=3)
    assert [h.cost for h in a.record.history] == [h.cost for h in b.record.history]
    assert np.array_equal(a.record.final_params, b.record.final_params)


def test_baseline_run_keeps_mcry_at_identity():
    cfg = cls.task_config("circle", "baseline")
    res = cls.run_classification("circle", cfg, cls.ClassifyHyper(epochs=2), seed=0, with_grid=False)
    assert np.array_equal(res.record.final_params[circuit.SLICES["mcry"]], circuit.MCRY_IDENTITY)


def test_sampled_mode_uses_shot_schedule():
    cfg = cls.task_config("circle", "ade", shots_mode="sampled")
    hyper = cls.ClassifyHyper(epochs=4, shots_s0=64, shots_doublings=1)
    res = cls.run_classification("circle", cfg, hyper, seed=0, with_grid=False)
    assert [h.shots for h in res.record.history] == [64, 64, 128, 128]


def test_glass_pipeline_shapes():
    cfg = cls.task_config("glass", "ade")
    res = cls.run_classification("glass", cfg, cls.ClassifyHyper.for_task("glass", epochs=1), seed=0)
    assert res.grid is None
    assert res.confusion.shape == (3, 3) and res.confusion.sum() == 44
    assert len(res.record.history) == int(np.ceil(131 / 32))
