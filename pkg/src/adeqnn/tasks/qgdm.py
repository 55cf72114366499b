"""Quantum generative diffusion: per-step denoisers that undo a depolarising trajectory."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from adeqnn import circuit, datasets, qcore
from adeqnn.train import (
    OptimizerConfig,
    RunRecord,
    ShotSchedule,
    SpsaConfig,
    eval_rng,
    train_loop,
)

VARIANTS = ("ade", "baseline")


@dataclass(frozen=True)
class QgdmHyper:
    iters: int = 300
    spsa: SpsaConfig = SpsaConfig()
    optimizer: OptimizerConfig = OptimizerConfig.amsgrad()
    exact: bool = True
    shots: ShotSchedule | None = None

    def to_dict(self) -> dict:
        return {
            "iters": self.iters,
            "spsa": vars(self.spsa).copy(),
            "optimizer": vars(self.optimizer).copy(),
            "exact": self.exact,
            "shots": None if self.shots is None else vars(self.shots).copy(),
        }


@dataclass
class QgdmStepResult:
    """One trained denoising step ``rho~_t -> rho~_{t-1}``.

    ``achieved_fidelity`` compares the output with the step's own target
    ``rho_{t-1}``; ``target_fidelity`` compares it with the clean state ``rho_0``.
    ``history`` holds the step-target fidelity after every update and
    ``target_history`` the clean-state fidelity.
    """

    t: int
    params: np.ndarray
    achieved_fidelity: float
    target_fidelity: float
    history: list[float] = field(default_factory=list)
    target_history: list[float] = field(default_factory=list)
    output: np.ndarray | None = None
    record: RunRecord | None = None


def _mcry_on(variant: str) -> bool:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    return variant == "ade"


def baseline_params(theta: np.ndarray) -> np.ndarray:
    """The linear baseline keeps its MCRY slice pinned at the identity setting."""
    return circuit.with_mcry(theta, circuit.MCRY_IDENTITY)


def train_qgdm(
    target: np.ndarray,
    T: int,
    variant: str = "ade",
    seed: int = 0,
    hyper: QgdmHyper | None = None,
) -> tuple[list[QgdmStepResult], np.ndarray]:
    """Train denoisers for ``t = T..1`` in order, feeding each output forward.

    Returns the per-step results (in training order) and the final state ``rho~_0``.
    """
    hyper = hyper or QgdmHyper()
    mcry = _mcry_on(variant)
    target = qcore.check_density_matrix(target, atol=1e-9)
    traj = [target] + datasets.forward_diffuse(target, datasets.linear_schedule(T))
    rho_t = np.eye(4, dtype=complex) / 4  # rho~_T
    results = []

    for t in range(T, 0, -1):
        goal = traj[t - 1]
        rho_in = rho_t

        def evaluate(theta, rng=None, exact=hyper.exact, shots=0):
            if not mcry:
                theta = baseline_params(theta)
            return circuit.denoiser_forward(theta, rho_in, exact, shots, rng, mcry_enabled=mcry)

        def cost_builder(it, shots):
            def cost(theta, rng):
                return 1.0 - qcore.uhlmann_fidelity(evaluate(theta, rng, shots=shots), goal)

            return cost

        hist, target_hist = [], []

        def metric(it, theta):
            out = evaluate(theta, exact=True)
            target_hist.append(qcore.uhlmann_fidelity(out, target))
            f = qcore.uhlmann_fidelity(out, goal)
            hist.append(f)
            return f

        theta0 = circuit.random_params(eval_rng(seed, 1000 + t))
        if not mcry:
            theta0 = baseline_params(theta0)
        record = train_loop(
            cost_builder,
            theta0,
            hyper.optimizer,
            hyper.spsa,
            hyper.shots if not hyper.exact else None,
            hyper.iters,
            seed=int(np.random.SeedSequence([seed, t]).generate_state(1)[0]),
            metric=metric,
            config={"variant": variant, "T": T, "t": t, **hyper.to_dict()},
        )
        theta = record.final_params if mcry else baseline_params(record.final_params)
        out = evaluate(theta, exact=True)
        results.append(
            QgdmStepResult(
                t=t,
                params=theta,
                achieved_fidelity=qcore.uhlmann_fidelity(out, goal),
                target_fidelity=qcore.uhlmann_fidelity(out, target),
                history=hist,
                target_history=target_hist,
                output=out,
                record=record,
            )
        )
        rho_t = out
    return results, rho_t
