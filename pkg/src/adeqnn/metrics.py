"""Scalar evaluation metrics."""

from __future__ import annotations

import numpy as np

SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def statistical_fidelity(p, q) -> float:
    """Classical fidelity ``(sum_i sqrt(p_i q_i))**2``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("distributions must be non-negative")
    for d in (p, q):
        if abs(d.sum() - 1) > 1e-9:
            raise ValueError(f"distribution sums to {d.sum()!r}, expected 1")
    # sqrt(p*q) rather than sqrt(p)*sqrt(q) keeps the result exactly symmetric
    return float(min(np.sum(np.sqrt(p * q)) ** 2, 1.0))


def truth_table_fidelity(table, ideal) -> float:
    """Mean per-input statistical fidelity of two column-stochastic tables."""
    table = np.asarray(table, dtype=float)
    ideal = np.asarray(ideal, dtype=float)
    return float(np.mean([statistical_fidelity(table[:, k], ideal[:, k]) for k in range(table.shape[1])]))


def ssim(x, y) -> float:
    """Single-window SSIM over the whole image (dynamic range 1)."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mx, my = x.mean(), y.mean()
    vx = np.sum((x - mx) ** 2) / (x.size - 1)
    vy = np.sum((y - my) ** 2) / (y.size - 1)
    cov = np.sum((x - mx) * (y - my)) / (x.size - 1)
    num = (2 * mx * my + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mx**2 + my**2 + SSIM_C1) * (vx + vy + SSIM_C2)
    return float(num / den)


def predict(scores) -> np.ndarray:
    """Argmax over the last axis; ties go to the lower class index."""
    return np.argmax(np.asarray(scores), axis=-1)


def confusion_matrix(preds, truths, k: int) -> np.ndarray:
    """Counts with rows = true label, columns = predicted label."""
    preds = np.asarray(preds, dtype=int)
    truths = np.asarray(truths, dtype=int)
    if preds.shape != truths.shape:
        raise ValueError("predictions and labels differ in length")
    for arr in (preds, truths):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ValueError(f"label outside 0..{k - 1}")
    cm = np.zeros((k, k), dtype=int)
    np.add.at(cm, (truths, preds), 1)
    return cm


def accuracy_and_confusion(preds, truths, k: int) -> tuple[float, np.ndarray]:
    """``preds`` may be labels ``(N,)`` or score rows ``(N, k)``."""
    preds = np.asarray(preds)
    if preds.ndim == 2:
        preds = predict(preds)
    cm = confusion_matrix(preds, truths, k)
    total = cm.sum()
    return (float(np.trace(cm) / total) if total else float("nan")), cm


def wasserstein_estimate(critic, real_batch, fake_batch) -> float:
    """Critic estimate ``mean D(real) - mean D(fake)``.

    ``critic`` is any callable mapping a ``(B, 64)`` batch to ``(B,)`` scores.
    """
    real_batch = np.atleast_2d(real_batch)
    fake_batch = np.atleast_2d(fake_batch)
    if len(real_batch) == 0 or len(fake_batch) == 0:
        raise ValueError("batches must be non-empty")
    return float(np.mean(critic(real_batch)) - np.mean(critic(fake_batch)))
