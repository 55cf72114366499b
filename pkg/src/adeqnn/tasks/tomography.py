"""Two-qubit Pauli-basis measurements and maximum-likelihood state reconstruction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from adeqnn import qcore

MLE_TOL = 1e-10
MLE_MAX_ITERS = 10_000

_S_DAG = np.diag([1, -1j])
_PRE_ROTATION = {
    "X": qcore.HADAMARD,
    "Y": qcore.HADAMARD @ _S_DAG,
    "Z": qcore.PAULI_I,
}


@dataclass(frozen=True)
class PauliSetting:
    """Measure ``basis[0]`` on the high qubit and ``basis[1]`` on the low qubit.

    ``rotation`` maps the chosen eigenbasis onto the computational basis, so
    outcome ``k`` (``2*hi + lo``, bit 0 meaning eigenvalue +1) has projector
    ``R^dag |k><k| R``.
    """

    basis: str
    rotation: np.ndarray

    @property
    def projectors(self) -> np.ndarray:
        r = self.rotation
        return np.einsum("ki,kj->kij", r.conj(), r)  # (4, 4, 4), Pi_k = r[k]^dag r[k]

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        p = np.real(np.einsum("ki,ij,kj->k", self.rotation, rho, self.rotation.conj()))
        return np.clip(p, 0.0, None)


def pauli_settings() -> list[PauliSetting]:
    out = []
    for a in "XYZ":
        for b in "XYZ":
            out.append(PauliSetting(a + b, np.kron(_PRE_ROTATION[a], _PRE_ROTATION[b])))
    return out


SETTINGS = pauli_settings()


def setting_probabilities(rho: np.ndarray) -> np.ndarray:
    """Outcome probabilities ``(9, 4)`` for all settings."""
    return np.array([s.probabilities(rho) for s in SETTINGS])


def mle_tomography(counts, tol: float = MLE_TOL, max_iters: int = MLE_MAX_ITERS) -> np.ndarray:
    """Iterate ``rho <- N[R rho R]`` with ``R = sum_k f_k / p_k(rho) Pi_k``, from ``I/4``."""
    counts = np.asarray(counts, dtype=float)
    if counts.shape != (9, 4):
        raise ValueError(f"expected a 9x4 count table, got {counts.shape}")
    if np.any(counts < 0):
        raise ValueError("counts must be non-negative")
    totals = counts.sum(axis=1)
    if np.any(totals <= 0):
        raise ValueError("every measurement setting needs at least one count")
    freqs = counts / totals[:, None]
    proj = np.array([s.projectors for s in SETTINGS])  # (9, 4, 4, 4)
    rot = np.array([s.rotation for s in SETTINGS])  # (9, 4, 4)
    mask = freqs > 0

    rho = np.eye(4, dtype=complex) / 4
    for _ in range(max_iters):
        p = np.real(np.einsum("ski,ij,skj->sk", rot, rho, rot.conj()))
        weights = np.where(mask, freqs / np.where(mask, np.maximum(p, 1e-300), 1.0), 0.0)
        r = np.einsum("sk,skij->ij", weights, proj)
        new = r @ rho @ r
        new = 0.5 * (new + new.conj().T)
        new /= np.trace(new).real
        done = np.max(np.abs(new - rho)) < tol
        rho = new
        if done:
            break
    return qcore.clamp_psd(rho)


def sample_setting_counts(rho: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial counts ``(9, 4)`` with ``shots`` per setting."""
    return np.array([qcore.sample_counts(p / p.sum(), shots, rng) for p in setting_probabilities(rho)])


def density_to_csv(rho: np.ndarray) -> str:
    """Row-major CSV with interleaved ``re,im`` columns for each entry."""
    lines = []
    for row in np.asarray(rho, dtype=complex):
        lines.append(",".join(f"{v.real:.17g},{v.imag:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def density_from_csv(text: str) -> np.ndarray:
    rows = []
    for line in text.strip().splitlines():
        vals = [float(v) for v in line.split(",")]
        rows.append([complex(vals[2 * k], vals[2 * k + 1]) for k in range(len(vals) // 2)])
    return np.array(rows, dtype=complex)
