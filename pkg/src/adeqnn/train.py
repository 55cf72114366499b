"""Hybrid training loop: SPSA gradients, AMSGrad / RMSProp updates, shot schedule."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from adeqnn.circuit import NullPostSelection

MAX_NULL_RETRIES = 3


@dataclass(frozen=True)
class SpsaConfig:
    c0: float = 0.1
    gamma: float = 0.101
    avg_draws: int = 4

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must lie in [0, 1)")
        if self.avg_draws < 1:
            raise ValueError("avg_draws must be >= 1")

    def c_at(self, k: int) -> float:
        return self.c0 / (k + 1) ** self.gamma


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "amsgrad"
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.99
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("amsgrad", "rmsprop"):
            raise ValueError(f"unknown optimizer {self.kind!r}")

    @classmethod
    def amsgrad(cls, lr: float = 0.05, beta1: float = 0.9, beta2: float = 0.99) -> "OptimizerConfig":
        return cls("amsgrad", lr, beta1, beta2)

    @classmethod
    def rmsprop(cls, lr: float = 0.01, beta2: float = 0.9) -> "OptimizerConfig":
        return cls("rmsprop", lr, 0.0, beta2)


@dataclass
class OptimizerState:
    config: OptimizerConfig
    first_moment: np.ndarray
    second_moment: np.ndarray
    max_second_moment: np.ndarray
    step: int = 0

    @classmethod
    def fresh(cls, config: OptimizerConfig, n: int) -> "OptimizerState":
        return cls(config, np.zeros(n), np.zeros(n), np.zeros(n))

    @property
    def kind(self) -> str:
        return self.config.kind


def amsgrad_step(state: OptimizerState, theta: np.ndarray, g: np.ndarray):
    if state.kind != "amsgrad":
        raise ValueError("amsgrad_step needs an AMSGrad state")
    c = state.config
    m = c.beta1 * state.first_moment + (1 - c.beta1) * g
    v = c.beta2 * state.second_moment + (1 - c.beta2) * g**2
    vhat = np.maximum(state.max_second_moment, v)
    new_theta = theta - c.lr * m / (np.sqrt(vhat) + c.eps)
    return new_theta, OptimizerState(c, m, v, vhat, state.step + 1)


def rmsprop_step(state: OptimizerState, theta: np.ndarray, g: np.ndarray):
    if state.kind != "rmsprop":
        raise ValueError("rmsprop_step needs an RMSProp state")
    c = state.config
    v = c.beta2 * state.second_moment + (1 - c.beta2) * g**2
    new_theta = theta - c.lr * g / (np.sqrt(v) + c.eps)
    return new_theta, OptimizerState(c, state.first_moment, v, state.max_second_moment, state.step + 1)


def optimizer_step(state: OptimizerState, theta: np.ndarray, g: np.ndarray):
    if state.kind == "amsgrad":
        return amsgrad_step(state, theta, g)
    return rmsprop_step(state, theta, g)


@dataclass(frozen=True)
class ShotSchedule:
    """Geometric shot schedule: doubles ``doublings`` times over the run."""

    s0: int = 256
    doublings: int = 5
    total_iters: int = 300

    def __post_init__(self):
        if self.s0 < 1 or self.doublings < 0 or self.total_iters < 1:
            raise ValueError("invalid shot schedule")


def shots_at(schedule: ShotSchedule, it: int) -> int:
    if not 0 <= it < schedule.total_iters:
        raise ValueError(f"iteration {it} outside [0, {schedule.total_iters})")
    e = it * (schedule.doublings + 1) // schedule.total_iters
    return schedule.s0 * 2 ** min(e, schedule.doublings)


def mse_loss(scores, target) -> float:
    scores = np.asarray(scores, dtype=float)
    target = np.asarray(target, dtype=float)
    if scores.shape != target.shape:
        raise ValueError(f"length mismatch: {scores.shape} vs {target.shape}")
    return float(np.mean((scores - target) ** 2))


# ---------------------------------------------------------------- SPSA


def spsa_points(theta: np.ndarray, k: int, cfg: SpsaConfig, rng: np.random.Generator):
    """Perturbation scale, Rademacher directions and the ``2*avg_draws`` probe points.

    Points are ordered ``[theta + c*d_0, theta - c*d_0, theta + c*d_1, ...]``.
    """
    ck = cfg.c_at(k)
    deltas = rng.choice(np.array([-1.0, 1.0]), size=(cfg.avg_draws, theta.size))
    points = []
    for d in deltas:
        points.append(theta + ck * d)
        points.append(theta - ck * d)
    return ck, deltas, points


def spsa_combine(ck: float, deltas: np.ndarray, values) -> np.ndarray:
    values = np.asarray(values, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("cost returned a non-finite value")
    diff = (values[:, 0] - values[:, 1]) / (2 * ck)
    # Rademacher entries are their own inverses
    return np.mean(diff[:, None] * deltas, axis=0)


def spsa_gradient(
    cost: Callable[[np.ndarray], float],
    theta: np.ndarray,
    k: int,
    cfg: SpsaConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Two-sided SPSA estimate averaged over ``cfg.avg_draws`` directions."""
    theta = np.asarray(theta, dtype=float)
    ck, deltas, points = spsa_points(theta, k, cfg, rng)
    return spsa_combine(ck, deltas, [cost(p) for p in points])


# ---------------------------------------------------------------- run record


@dataclass
class IterationRecord:
    iteration: int
    cost: float
    shots: int
    metric: float = float("nan")


@dataclass
class RunRecord:
    config: dict
    seed: int
    history: list[IterationRecord] = field(default_factory=list)
    final_params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    wall_times: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "seed": self.seed,
            "history": [asdict(h) for h in self.history],
            "final_params": [float(v) for v in self.final_params],
            "wall_times": list(self.wall_times),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            config=d["config"],
            seed=d["seed"],
            history=[IterationRecord(**h) for h in d["history"]],
            final_params=np.asarray(d["final_params"], dtype=float),
            wall_times=list(d.get("wall_times", [])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=True)

    @classmethod
    def from_json(cls, s: str) -> "RunRecord":
        return cls.from_dict(json.loads(s))

    @property
    def costs(self) -> np.ndarray:
        return np.array([h.cost for h in self.history])

    @property
    def metrics(self) -> np.ndarray:
        return np.array([h.metric for h in self.history])


def eval_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator keyed by a fixed path, independent of evaluation order."""
    return np.random.default_rng(np.random.SeedSequence([seed, *path]))


CostBuilder = Callable[[int, int], Callable[[np.ndarray, np.random.Generator], float]]


def train_loop(
    cost_builder: CostBuilder,
    theta0: np.ndarray,
    optimizer: OptimizerConfig,
    spsa: SpsaConfig,
    schedule: ShotSchedule | None,
    iters: int,
    seed: int,
    metric: Optional[Callable[[int, np.ndarray], float]] = None,
    workers: int = 1,
    config: dict | None = None,
    callback: Optional[Callable[[int, np.ndarray], None]] = None,
) -> RunRecord:
    """Run ``iters`` SPSA + optimizer steps.

    ``cost_builder(it, shots)`` returns ``cost(theta, rng)`` for iteration ``it``;
    exact-mode costs may ignore ``rng``. Every evaluation gets its own generator
    keyed by ``(seed, it, attempt, draw, sign)``, so the history does not depend
    on ``workers``.
    """
    theta = np.array(theta0, dtype=float)
    state = OptimizerState.fresh(optimizer, theta.size)
    record = RunRecord(config=dict(config or {}), seed=seed)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for it in range(iters):
            t0 = time.perf_counter()
            shots = shots_at(schedule, it) if schedule is not None else 0
            cost = cost_builder(it, shots)
            current = float(cost(theta, eval_rng(seed, it, 99)))

            failures = 0
            while True:
                delta_rng = eval_rng(seed, it, failures, 0)
                ck, deltas, points = spsa_points(theta, it, spsa, delta_rng)
                jobs = [(p, eval_rng(seed, it, failures, 1, n)) for n, p in enumerate(points)]
                try:
                    if pool is None:
                        values = [cost(p, r) for p, r in jobs]
                    else:
                        values = list(pool.map(lambda job: cost(*job), jobs))
                    break
                except NullPostSelection:
                    failures += 1
                    if failures >= MAX_NULL_RETRIES:
                        raise
            g = spsa_combine(ck, deltas, values)
            theta, state = optimizer_step(state, theta, g)

            m = float(metric(it, theta)) if metric is not None else float("nan")
            record.history.append(IterationRecord(it, current, shots, m))
            record.wall_times.append(time.perf_counter() - t0)
            if callback is not None:
                callback(it, theta)
    finally:
        if pool is not None:
            pool.shutdown()
    record.final_params = theta
    return record
