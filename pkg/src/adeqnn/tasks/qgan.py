"""Patched quantum GAN: four circuit patches generate an 8x8 image, an MLP critic scores it."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from adeqnn import circuit, datasets, metrics
from adeqnn.circuit import CircuitConfig
from adeqnn.tasks import discriminator as disc
from adeqnn.train import (
    MAX_NULL_RETRIES,
    IterationRecord,
    OptimizerConfig,
    OptimizerState,
    RunRecord,
    ShotSchedule,
    SpsaConfig,
    eval_rng,
    optimizer_step,
    shots_at,
    spsa_combine,
    spsa_points,
)

N_PATCHES = 4
PATCH_PIXELS = 16
NOISE_QUBITS = (0, 2)


@dataclass(frozen=True)
class QganHyper:
    iters: int = 300
    batch: int = 4
    n_critic: int = 5
    critic_lr: float = 0.001
    generator_lr: float = 0.05
    spsa: SpsaConfig = SpsaConfig(avg_draws=8)
    gp_weight: float = disc.GP_WEIGHT
    noise_in_rz: bool = True
    eval_size: int = 32
    snapshot_every: int = 50
    exact: bool = True
    shots_s0: int = 256
    shots_doublings: int = 5

    def to_dict(self) -> dict:
        d = dict(vars(self))
        d["spsa"] = vars(self.spsa).copy()
        return d


def generator_config(noise_in_rz: bool = True) -> CircuitConfig:
    """Noise drives the RY input gates on q0 and q2, and the RZ re-upload unless disabled."""
    return CircuitConfig(replication_enabled=noise_in_rz, mcry_enabled=True, readout="tomography")


def noise_angles(noise: np.ndarray) -> np.ndarray:
    """``(B, 2)`` noise in ``[0, 1]`` to ``(B, 4)`` per-qubit angles ``noise*pi``."""
    z = np.atleast_2d(np.asarray(noise, dtype=float))
    if z.shape[1] != 2:
        raise ValueError("noise must have two components")
    if np.any(z < -1e-12) or np.any(z > 1 + 1e-12):
        raise ValueError("noise must lie in [0, 1]")
    out = np.zeros((z.shape[0], 4))
    out[:, NOISE_QUBITS[0]] = z[:, 0] * np.pi
    out[:, NOISE_QUBITS[1]] = z[:, 1] * np.pi
    return out


def patch_pixels(p: np.ndarray) -> np.ndarray:
    """Per-patch intensities ``p_j / max_j p_j``."""
    p = np.asarray(p, dtype=float)
    return p / np.max(p, axis=-1, keepdims=True)


def generator_images(
    params_per_patch: np.ndarray,
    noise: np.ndarray,
    exact: bool = True,
    shots: int = 0,
    rng: np.random.Generator | None = None,
    noise_in_rz: bool = True,
) -> np.ndarray:
    """Images ``(B, 64)`` for a batch of noise vectors; patch k fills rows 2k and 2k+1."""
    params_per_patch = np.asarray(params_per_patch, dtype=float).reshape(N_PATCHES, circuit.N_PARAMS)
    angles = noise_angles(noise)
    cfg = generator_config(noise_in_rz)
    out = np.empty((angles.shape[0], N_PATCHES * PATCH_PIXELS))
    for k in range(N_PATCHES):
        p, success = circuit.forward_batch(circuit.build_circuit(cfg, params_per_patch[k]), angles)
        if not exact:
            if rng is None or shots < 1:
                raise ValueError("sampled mode needs shots >= 1 and a generator")
            p = circuit.estimate_probs(p, success, shots, rng)
        out[:, k * PATCH_PIXELS : (k + 1) * PATCH_PIXELS] = patch_pixels(p)
    return out


def generator_forward(params_per_patch, noise, exact: bool = True, shots: int = 0, rng=None) -> np.ndarray:
    """One 64-pixel image from a single noise pair."""
    return generator_images(params_per_patch, np.asarray(noise, dtype=float)[None, :], exact, shots, rng)[0]


def initial_generator(seed: int) -> np.ndarray:
    return np.concatenate([circuit.random_params(eval_rng(seed, 11, k)) for k in range(N_PATCHES)])


@dataclass
class GanBatchReport:
    critic_loss: float
    generator_loss: float
    wasserstein_estimate: float
    gradient_penalty: float


@dataclass
class QganResult:
    record: RunRecord
    reports: list[GanBatchReport]
    eval_wasserstein: list[float]
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    critic: disc.MlpDiscriminator | None = None
    ssim_vs_prototype: float = float("nan")
    ssim_vs_nearest: float = float("nan")
    prototype: np.ndarray | None = None


def _rmsprop(lr: float) -> OptimizerConfig:
    return OptimizerConfig.rmsprop(lr=lr)


def sample_quality(images: np.ndarray, real: np.ndarray) -> tuple[float, float]:
    """Mean SSIM against the class-mean image, and mean best-match SSIM against real images."""
    proto = real.mean(axis=0)
    vs_proto = float(np.mean([metrics.ssim(g, proto) for g in images]))
    vs_real = float(np.mean([max(metrics.ssim(g, r) for r in real) for g in images]))
    return vs_proto, vs_real


def _with_retries(fn):
    """Call ``fn(attempt)`` again on an empty post-selection, up to the training retry limit."""
    for attempt in range(MAX_NULL_RETRIES):
        try:
            return fn(attempt)
        except circuit.NullPostSelection:
            if attempt + 1 == MAX_NULL_RETRIES:
                raise


def train_qgan(
    digit: int = 0,
    hyper: QganHyper | None = None,
    seed: int = 0,
    digits_path=None,
) -> QganResult:
    """Alternate RMSProp critic updates (exact backprop) and SPSA + RMSProp generator updates.

    ``record.history[i].metric`` is the critic's Wasserstein estimate on the
    training batch of iteration ``i``; ``eval_wasserstein`` is the same
    estimate on a fixed evaluation set.
    """
    hyper = hyper or QganHyper()
    real, _ = datasets.load_digits(digits_path, classes=(digit,))
    if len(real) == 0:
        raise ValueError(f"no images of digit {digit}")
    critic = disc.MlpDiscriminator.init(eval_rng(seed, 21))
    c_state = OptimizerState.fresh(_rmsprop(hyper.critic_lr), critic.flat().size)
    theta = initial_generator(seed)
    g_state = OptimizerState.fresh(_rmsprop(hyper.generator_lr), theta.size)
    schedule = None if hyper.exact else ShotSchedule(hyper.shots_s0, hyper.shots_doublings, max(hyper.iters, 1))

    eval_rng_ = eval_rng(seed, 31)
    eval_noise = eval_rng_.uniform(0, 1, size=(hyper.eval_size, 2))
    eval_real = real[eval_rng_.choice(len(real), size=min(hyper.eval_size, len(real)), replace=False)]

    def images(th, noise, shots=0, rng=None):
        return generator_images(th, noise, hyper.exact, shots, rng, hyper.noise_in_rz)

    record = RunRecord(config={"digit": digit, **hyper.to_dict()}, seed=seed)
    reports, eval_w, snapshots = [], [], {}
    snapshots[0] = images(theta, eval_noise[:4]) if hyper.exact else images(theta, eval_noise[:4], 1 << 16, eval_rng(seed, 41))

    for it in range(hyper.iters):
        shots = shots_at(schedule, it) if schedule is not None else 0
        # critic
        for c in range(hyper.n_critic):
            r = eval_rng(seed, it, 50, c)
            real_b = real[r.choice(len(real), size=hyper.batch, replace=False)]
            z = r.uniform(0, 1, size=(hyper.batch, 2))
            fake_b = _with_retries(lambda a: images(theta, z, shots, eval_rng(seed, it, 51, c, a)))
            loss, grads, w_est, gp = disc.critic_loss_and_grads(critic, real_b, fake_b, r, hyper.gp_weight)
            flat, c_state = optimizer_step(c_state, critic.flat(), disc.flatten_grads(grads))
            critic.set_flat(flat)

        # generator
        r = eval_rng(seed, it, 60)
        noise = r.uniform(0, 1, size=(hyper.batch, 2))

        def g_cost(th, rng):
            return -float(np.mean(critic(images(th, noise, shots, rng))))

        def probe(a):
            ck, deltas, points = spsa_points(theta, it, hyper.spsa, eval_rng(seed, it, 61, a))
            return ck, deltas, [g_cost(p, eval_rng(seed, it, 62, a, n)) for n, p in enumerate(points)]

        ck, deltas, values = _with_retries(probe)
        g_loss = _with_retries(lambda a: g_cost(theta, eval_rng(seed, it, 63, a)))
        theta, g_state = optimizer_step(g_state, theta, spsa_combine(ck, deltas, values))

        reports.append(GanBatchReport(loss, g_loss, w_est, gp))
        fake_eval = _with_retries(lambda a: images(theta, eval_noise, shots, eval_rng(seed, it, 64, a)))
        eval_w.append(metrics.wasserstein_estimate(critic, eval_real, fake_eval))
        record.history.append(IterationRecord(it, loss, shots, w_est))
        if (it + 1) % hyper.snapshot_every == 0 or it + 1 == hyper.iters:
            snapshots[it + 1] = fake_eval[:4]

    record.final_params = theta
    final = generator_images(theta, eval_noise, True, noise_in_rz=hyper.noise_in_rz)
    vs_proto, vs_real = sample_quality(final, real)
    return QganResult(
        record,
        reports,
        eval_w,
        snapshots,
        critic,
        vs_proto,
        vs_real,
        real.mean(axis=0),
    )
