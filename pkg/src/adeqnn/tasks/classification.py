"""Supervised classification with the ADE-QNN or its linear baseline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from adeqnn import circuit, datasets, metrics
from adeqnn.circuit import CircuitConfig
from adeqnn.train import (
    OptimizerConfig,
    RunRecord,
    ShotSchedule,
    SpsaConfig,
    eval_rng,
    train_loop,
)

TASKS = ("circle", "spiral", "glass")
GRID_SIZE = 101


@dataclass(frozen=True)
class ClassifyHyper:
    epochs: int = 100
    batch_size: int = 50
    spsa: SpsaConfig = SpsaConfig(avg_draws=16)
    optimizer: OptimizerConfig = OptimizerConfig.amsgrad(lr=0.05)
    shots_s0: int = 256
    shots_doublings: int = 5

    @classmethod
    def for_task(cls, task: str, **kw) -> "ClassifyHyper":
        if task == "glass":
            kw = {"epochs": 70, "batch_size": 32, **kw}
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "spsa": vars(self.spsa).copy(),
            "optimizer": vars(self.optimizer).copy(),
            "shots_s0": self.shots_s0,
            "shots_doublings": self.shots_doublings,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifyHyper":
        return cls(
            epochs=d["epochs"],
            batch_size=d["batch_size"],
            spsa=SpsaConfig(**d["spsa"]),
            optimizer=OptimizerConfig(**d["optimizer"]),
            shots_s0=d["shots_s0"],
            shots_doublings=d["shots_doublings"],
        )


@dataclass
class ClassifyResult:
    record: RunRecord
    train_accuracy: float
    test_accuracy: float
    confusion: np.ndarray
    grid: np.ndarray | None = None  # rows (x, y, scores..., pred)
    extra: dict = field(default_factory=dict)


def load_task(task: str, seed: int, glass_path=None) -> tuple[datasets.Dataset, datasets.Dataset]:
    if task == "circle":
        return datasets.gen_circle(seed=seed)
    if task == "spiral":
        return datasets.gen_spiral(seed=seed)
    if task == "glass":
        return datasets.load_glass(glass_path, seed=seed)
    raise ValueError(f"unknown task {task!r}")


def task_config(task: str, variant: str, shots_mode: str = "exact") -> CircuitConfig:
    """Circuit switches per task and variant.

    The ADE-QNN tiles two features over the four qubits and re-uploads them
    as RZ phases. The linear baseline encodes each feature once, with no
    re-upload and no MCRY. Glass has four features, one per qubit, in both.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    readout = "three_class" if task == "glass" else "two_class"
    if task == "glass":
        input_map = (0, 1, 2, 3)
    elif variant == "ade":
        input_map = (0, 1, 0, 1)
    else:
        input_map = (0, 1, None, None)
    if variant == "ade":
        return CircuitConfig.ade(readout=readout, input_map=input_map, shots_mode=shots_mode)
    if variant == "baseline":
        return CircuitConfig.baseline(readout=readout, input_map=input_map, shots_mode=shots_mode)
    raise ValueError(f"unknown variant {variant!r}")


def initial_params(config: CircuitConfig, seed: int) -> np.ndarray:
    theta = circuit.random_params(eval_rng(seed, 7))
    if not config.mcry_enabled:
        theta = circuit.with_mcry(theta, circuit.MCRY_IDENTITY)
    return theta


def predict_scores(config: CircuitConfig, theta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Exact class scores for a feature matrix."""
    p, _ = circuit.forward_batch(circuit.build_circuit(config, theta), circuit.data_angles(x, config.input_map))
    return circuit.readout_scores(p, config.readout)


def batch_cost(config: CircuitConfig, theta: np.ndarray, angles: np.ndarray, onehot: np.ndarray) -> float:
    """Exact MSE between class scores and one-hot targets over a batch."""
    if not config.mcry_enabled:
        theta = circuit.with_mcry(theta, circuit.MCRY_IDENTITY)
    p, _ = circuit.forward_batch(circuit.build_circuit(config, theta), angles)
    return float(np.mean((circuit.readout_scores(p, config.readout) - onehot) ** 2))


def decision_grid(config: CircuitConfig, theta: np.ndarray, n: int = GRID_SIZE) -> np.ndarray:
    """``(n*n, 2 + k + 1)`` rows ``x, y, score_0..score_{k-1}, pred`` over ``[-1, 1]^2``."""
    axis = np.linspace(-1, 1, n)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    scores = predict_scores(config, theta, pts)
    return np.column_stack([pts, scores, metrics.predict(scores)])


def run_classification(
    task: str,
    config: CircuitConfig,
    hyper: ClassifyHyper | None = None,
    seed: int = 0,
    data: tuple[datasets.Dataset, datasets.Dataset] | None = None,
    workers: int = 1,
    with_grid: bool = True,
) -> ClassifyResult:
    """Mini-batch SPSA training on the MSE between class scores and one-hot labels."""
    hyper = hyper or ClassifyHyper.for_task(task)
    train, test = data if data is not None else load_task(task, seed)
    k = train.n_classes
    angles = circuit.data_angles(train.x, config.input_map)
    onehot = np.eye(k)[train.y]
    n = len(train)
    per_epoch = int(np.ceil(n / hyper.batch_size))
    iters = hyper.epochs * per_epoch
    sampled = config.shots_mode == "sampled"
    schedule = ShotSchedule(hyper.shots_s0, hyper.shots_doublings, max(iters, 1)) if sampled else None
    orders: dict[int, np.ndarray] = {}

    def batch(it: int) -> np.ndarray:
        ep, b = divmod(it, per_epoch)
        if ep not in orders:
            orders[ep] = eval_rng(seed, 3, ep).permutation(n)
        return orders[ep][b * hyper.batch_size : (b + 1) * hyper.batch_size]

    def cost_builder(it: int, shots: int):
        idx = batch(it)
        a, target = angles[idx], onehot[idx]

        def cost(theta, rng):
            if not sampled:
                return batch_cost(config, theta, a, target)
            if not config.mcry_enabled:
                theta = circuit.with_mcry(theta, circuit.MCRY_IDENTITY)
            p, success = circuit.forward_batch(circuit.build_circuit(config, theta), a)
            p = circuit.estimate_probs(p, success, shots, rng)
            return float(np.mean((circuit.readout_scores(p, config.readout) - target) ** 2))

        return cost

    def metric(it, theta):
        return float(np.mean(metrics.predict(predict_scores(config, theta, train.x)) == train.y))

    record = train_loop(
        cost_builder,
        initial_params(config, seed),
        hyper.optimizer,
        hyper.spsa,
        schedule,
        iters,
        seed,
        metric=metric,
        workers=workers,
        config={"task": task, "circuit": config.to_dict(), "hyper": hyper.to_dict()},
    )
    theta = record.final_params
    if not config.mcry_enabled:
        theta = circuit.with_mcry(theta, circuit.MCRY_IDENTITY)
        record.final_params = theta
    train_acc, _ = metrics.accuracy_and_confusion(predict_scores(config, theta, train.x), train.y, k)
    test_acc, cm = metrics.accuracy_and_confusion(predict_scores(config, theta, test.x), test.y, k)
    grid = decision_grid(config, theta) if with_grid and train.x.shape[1] == 2 else None
    return ClassifyResult(record, train_acc, test_acc, cm, grid)
