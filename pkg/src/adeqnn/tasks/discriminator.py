"""Two-hidden-layer MLP critic with hand-written gradients.

Shapes: ``x (B, 64) -> z1 = x W1^T + b1 -> h1 = lrelu(z1) -> z2 = h1 W2^T + b2
-> h2 = lrelu(z2) -> s = h2 . w3 + b3``. The critic output is not squashed.

The gradient penalty needs derivatives of ``||ds/dx||`` with respect to the
weights. Leaky-rectifier slopes are piecewise constant, so with the masks
``m1 = lrelu'(z1)`` and ``m2 = lrelu'(z2)`` held fixed,
``ds/dx = W1^T (m1 * W2^T (m2 * w3))`` is multilinear in the weights and the
second-order terms through the masks vanish almost everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SLOPE = 0.2
GP_WEIGHT = 10.0
PARAM_NAMES = ("w1", "b1", "w2", "b2", "w3", "b3")


class StaleCacheError(RuntimeError):
    pass


@dataclass
class MlpDiscriminator:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    slope: float = SLOPE
    version: int = 0

    @classmethod
    def init(cls, rng: np.random.Generator, sizes=(64, 64, 32)) -> "MlpDiscriminator":
        n_in, h1, h2 = sizes

        def he(fan_out, fan_in):
            return rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in)

        return cls(he(h1, n_in), np.zeros(h1), he(h2, h1), np.zeros(h2), he(1, h2)[0], np.zeros(()))

    @classmethod
    def zeros(cls, sizes=(64, 64, 32)) -> "MlpDiscriminator":
        n_in, h1, h2 = sizes
        return cls(np.zeros((h1, n_in)), np.zeros(h1), np.zeros((h2, h1)), np.zeros(h2), np.zeros(h2), np.zeros(()))

    def params(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in PARAM_NAMES}

    def flat(self) -> np.ndarray:
        return np.concatenate([np.ravel(getattr(self, k)) for k in PARAM_NAMES])

    def set_flat(self, v: np.ndarray) -> None:
        v = np.asarray(v, dtype=float)
        i = 0
        for k in PARAM_NAMES:
            cur = getattr(self, k)
            n = cur.size
            setattr(self, k, v[i : i + n].reshape(cur.shape).copy())
            i += n
        self.version += 1

    def copy(self) -> "MlpDiscriminator":
        return MlpDiscriminator(*(getattr(self, k).copy() for k in PARAM_NAMES), slope=self.slope)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return mlp_forward(self, x)[0]


@dataclass(frozen=True)
class ForwardCache:
    x: np.ndarray
    z1: np.ndarray
    h1: np.ndarray
    z2: np.ndarray
    h2: np.ndarray
    owner_id: int
    version: int


def _lrelu(z, slope):
    return np.where(z > 0, z, slope * z)


def _lrelu_grad(z, slope):
    return np.where(z > 0, 1.0, slope)


def flatten_grads(grads: dict[str, np.ndarray]) -> np.ndarray:
    return np.concatenate([np.ravel(grads[k]) for k in PARAM_NAMES])


def mlp_forward(d: MlpDiscriminator, x: np.ndarray):
    """Scores for one image ``(64,)`` or a batch ``(B, 64)``, plus the backprop cache."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    if xb.shape[1] != d.w1.shape[1]:
        raise ValueError(f"expected images of length {d.w1.shape[1]}, got {xb.shape[1]}")
    z1 = xb @ d.w1.T + d.b1
    h1 = _lrelu(z1, d.slope)
    z2 = h1 @ d.w2.T + d.b2
    h2 = _lrelu(z2, d.slope)
    s = h2 @ d.w3 + d.b3
    cache = ForwardCache(xb, z1, h1, z2, h2, id(d), d.version)
    return (float(s[0]) if single else s), cache


def mlp_backward(d: MlpDiscriminator, cache: ForwardCache, upstream):
    """Weight gradients (summed over the batch) and input gradients.

    ``upstream`` is ``dL/ds`` per batch item (scalar broadcasts).
    """
    if cache.owner_id != id(d) or cache.version != d.version:
        raise StaleCacheError("cache does not belong to the current discriminator weights")
    B = cache.x.shape[0]
    up = np.broadcast_to(np.asarray(upstream, dtype=float), (B,))
    g_h2 = up[:, None] * d.w3[None, :]
    g_z2 = g_h2 * _lrelu_grad(cache.z2, d.slope)
    g_h1 = g_z2 @ d.w2
    g_z1 = g_h1 * _lrelu_grad(cache.z1, d.slope)
    g_x = g_z1 @ d.w1
    grads = {
        "w1": g_z1.T @ cache.x,
        "b1": g_z1.sum(axis=0),
        "w2": g_z2.T @ cache.h1,
        "b2": g_z2.sum(axis=0),
        "w3": up @ cache.h2,
        "b3": np.asarray(up.sum()),
    }
    return grads, (g_x[0] if B == 1 and np.ndim(upstream) == 0 else g_x)


def input_gradient(d: MlpDiscriminator, x: np.ndarray) -> np.ndarray:
    _, cache = mlp_forward(d, np.atleast_2d(x))
    return mlp_backward(d, cache, np.ones(cache.x.shape[0]))[1]


def penalty_and_grads(d: MlpDiscriminator, xhat: np.ndarray):
    """Mean of ``(||dD/dx(xhat_b)|| - 1)**2`` and its weight gradients."""
    xhat = np.atleast_2d(xhat)
    _, cache = mlp_forward(d, xhat)
    m1 = _lrelu_grad(cache.z1, d.slope)
    m2 = _lrelu_grad(cache.z2, d.slope)
    a = m2 * d.w3[None, :]  # (B, h2)
    bvec = m1 * (a @ d.w2)  # (B, h1)
    g = bvec @ d.w1  # (B, 64)
    norm = np.linalg.norm(g, axis=1)
    B = xhat.shape[0]
    penalty = float(np.mean((norm - 1) ** 2))

    safe = np.where(norm > 0, norm, 1.0)
    r = (2 * (norm - 1) / safe / B)[:, None] * g  # dP/dg
    rb = r @ d.w1.T  # dP/dbvec, (B, h1)
    rz = m1 * rb
    ra = rz @ d.w2.T  # dP/da, (B, h2)
    grads = {
        "w1": bvec.T @ r,
        "b1": np.zeros_like(d.b1),
        "w2": a.T @ rz,
        "b2": np.zeros_like(d.b2),
        "w3": np.sum(m2 * ra, axis=0),
        "b3": np.zeros(()),
    }
    return penalty, grads


def gradient_penalty(d: MlpDiscriminator, real_img, fake_img, rng: np.random.Generator):
    """Penalty at random interpolates ``u*real + (1-u)*fake`` with ``u ~ U[0, 1]``."""
    real = np.atleast_2d(real_img)
    fake = np.atleast_2d(fake_img)
    if real.shape != fake.shape or real.shape[1] != 64:
        raise ValueError("real and fake batches must both be (B, 64)")
    u = rng.uniform(0, 1, size=(real.shape[0], 1))
    return penalty_and_grads(d, u * real + (1 - u) * fake)


def critic_loss_and_grads(d: MlpDiscriminator, real, fake, rng, gp_weight: float = GP_WEIGHT):
    """``E[D(fake)] - E[D(real)] + gp_weight * GP`` with exact weight gradients."""
    real = np.atleast_2d(real)
    fake = np.atleast_2d(fake)
    B = real.shape[0]
    s_real, c_real = mlp_forward(d, real)
    s_fake, c_fake = mlp_forward(d, fake)
    g_real, _ = mlp_backward(d, c_real, -np.ones(B) / B)
    g_fake, _ = mlp_backward(d, c_fake, np.ones(fake.shape[0]) / fake.shape[0])
    gp, g_gp = gradient_penalty(d, real, fake, rng)
    loss = float(np.mean(s_fake) - np.mean(s_real) + gp_weight * gp)
    grads = {k: g_real[k] + g_fake[k] + gp_weight * g_gp[k] for k in PARAM_NAMES}
    return loss, grads, float(np.mean(s_real) - np.mean(s_fake)), gp
