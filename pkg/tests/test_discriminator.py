import numpy as np
import pytest

from adeqnn import verify
from adeqnn.tasks import discriminator as disc


def linear_critic(w, scale=1.0) -> disc.MlpDiscriminator:
    """An MLP that computes ``scale * w.x`` on inputs in ``[0, 1]``.

    One hidden unit per layer carries the value with a large positive offset,
    so both leaky rectifiers stay in their identity branch.
    """
    d = disc.MlpDiscriminator.zeros()
    d.w1[0] = scale * np.asarray(w)
    d.b1[0] = 100.0
    d.w2[0, 0] = 1.0
    d.w3[0] = 1.0
    d.b3 = np.asarray(-100.0)
    return d


def _fd_weights(d, f, idx, h=1e-6):
    flat = d.flat()
    out = []
    for i in idx:
        e = np.zeros_like(flat)
        e[i] = h
        d.set_flat(flat + e)
        up = f(d)
        d.set_flat(flat - e)
        dn = f(d)
        out.append((up - dn) / (2 * h))
    d.set_flat(flat)
    return np.array(out)


def test_zero_weights_give_final_bias():
    d = disc.MlpDiscriminator.zeros()
    d.b3 = np.asarray(0.7)
    assert d(np.random.default_rng(0).uniform(0, 1, 64)) == 0.7


def test_zero_input_zero_bias():
    d = disc.MlpDiscriminator.init(np.random.default_rng(1))
    assert d(np.zeros(64)) == 0


def test_length_mismatch():
    d = disc.MlpDiscriminator.init(np.random.default_rng(1))
    with pytest.raises(ValueError):
        disc.mlp_forward(d, np.zeros(63))


def test_linear_critic_input_gradient_is_w():
    w = np.random.default_rng(2).standard_normal(64)
    d = linear_critic(w)
    x = np.random.default_rng(3).uniform(0, 1, 64)
    assert abs(d(x) - w @ x) < 1e-9
    _, cache = disc.mlp_forward(d, x)
    _, gx = disc.mlp_backward(d, cache, 1.0)
    assert np.array_equal(gx, w)


def test_zero_upstream_zero_grads():
    d = disc.MlpDiscriminator.init(np.random.default_rng(4))
    _, cache = disc.mlp_forward(d, np.random.default_rng(5).uniform(0, 1, (3, 64)))
    grads, gx = disc.mlp_backward(d, cache, np.zeros(3))
    assert not np.any(disc.flatten_grads(grads)) and not np.any(gx)


def test_stale_cache():
    d = disc.MlpDiscriminator.init(np.random.default_rng(6))
    _, cache = disc.mlp_forward(d, np.zeros(64))
    d.set_flat(d.flat())
    with pytest.raises(disc.StaleCacheError):
        disc.mlp_backward(d, cache, 1.0)
    with pytest.raises(disc.StaleCacheError):
        disc.mlp_backward(d.copy(), disc.mlp_forward(d, np.zeros(64))[1], 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_backprop_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    d = disc.MlpDiscriminator.init(rng)
    x = rng.uniform(0, 1, (4, 64))
    up = rng.standard_normal(4)
    _, cache = disc.mlp_forward(d, x)
    grads, gx = disc.mlp_backward(d, cache, up)
    analytic = disc.flatten_grads(grads)
    idx = rng.choice(analytic.size, 60, replace=False)
    fd = _fd_weights(d, lambda m: float(up @ m(x)), idx)
    assert np.max(np.abs(fd - analytic[idx]) / np.maximum(np.abs(fd), 1e-3)) < 1e-5
    h = 1e-6
    for _ in range(10):
        b, i = rng.integers(4), rng.integers(64)
        xp, xm = x.copy(), x.copy()
        xp[b, i] += h
        xm[b, i] -= h
        fdx = up[b] * (d(xp[b]) - d(xm[b])) / (2 * h)
        assert abs(fdx - gx[b, i]) / max(abs(fdx), 1e-3) < 1e-5


def test_penalty_examples():
    w = np.random.default_rng(7).standard_normal(64)
    w /= np.linalg.norm(w)
    real, fake = np.full((2, 64), 0.8), np.full((2, 64), 0.1)
    p, _ = disc.gradient_penalty(linear_critic(w), real, fake, np.random.default_rng(0))
    assert abs(p) < 1e-18
    p, _ = disc.gradient_penalty(linear_critic(w, 2.0), real, fake, np.random.default_rng(0))
    assert abs(p - 1) < 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_penalty_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed + 10)
    d = disc.MlpDiscriminator.init(rng)
    xhat = rng.uniform(0, 1, (3, 64))
    _, grads = disc.penalty_and_grads(d, xhat)
    analytic = disc.flatten_grads(grads)
    idx = rng.choice(analytic.size, 60, replace=False)
    fd = _fd_weights(d, lambda m: disc.penalty_and_grads(m, xhat)[0], idx)
    assert np.max(np.abs(fd - analytic[idx]) / np.maximum(np.abs(fd), 1e-3)) < 1e-4


def test_critic_loss_matches_finite_differences():
    rng = np.random.default_rng(20)
    d = disc.MlpDiscriminator.init(rng)
    real, fake = rng.uniform(0, 1, (4, 64)), rng.uniform(0, 1, (4, 64))
    loss, grads, w_est, gp = disc.critic_loss_and_grads(d, real, fake, np.random.default_rng(1))
    assert abs(loss - (-w_est + disc.GP_WEIGHT * gp)) < 1e-12
    analytic = disc.flatten_grads(grads)
    idx = rng.choice(analytic.size, 40, replace=False)
    fd = _fd_weights(d, lambda m: disc.critic_loss_and_grads(m, real, fake, np.random.default_rng(1))[0], idx)
    assert np.max(np.abs(fd - analytic[idx]) / np.maximum(np.abs(fd), 1e-3)) < 1e-4


def test_verify_gradient_check_passes():
    ok, detail = verify.check_discriminator_gradients()
    assert ok, detail
