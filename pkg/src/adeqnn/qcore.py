"""Dense state-vector and density-matrix primitives for small qubit registers.

Conventions used throughout the package:

* Qubit ``k`` is bit ``k`` of the basis index, so for four qubits
  ``b = 8*q3 + 4*q2 + 2*q1 + q0``.
* A gate acting on ``targets = (a, b, ...)`` is indexed with the first target
  as the most significant bit. A 4x4 gate on ``(3, 1)`` therefore sees the
  index ``2*q3 + q1``.
* States are complex numpy arrays of shape ``(..., 2**n)``; leading axes are
  batch axes and are carried through every operation.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

ATOL_UNITARY = 1e-10
ATOL_HERMITIAN = 1e-10
PSD_CLAMP = 1e-9

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def basis_index(q3: int, q2: int, q1: int, q0: int) -> int:
    for q in (q3, q2, q1, q0):
        if q not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {q!r}")
    return 8 * q3 + 4 * q2 + 2 * q1 + q0


def basis_bits(index: int) -> tuple[int, int, int, int]:
    """Inverse of :func:`basis_index`; returns ``(q3, q2, q1, q0)``."""
    if not 0 <= index < 16:
        raise ValueError(f"index out of range: {index}")
    return (index >> 3) & 1, (index >> 2) & 1, (index >> 1) & 1, index & 1


def basis_state(index: int, n_qubits: int = 4) -> np.ndarray:
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def check_unitary(u: np.ndarray, atol: float = ATOL_UNITARY) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary must be square, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("unitary has non-finite entries")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > atol:
        raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {err:.3e})")
    return u


def rotation_gate(axis: str, theta: float) -> np.ndarray:
    """Standard rotation ``exp(-i theta sigma/2)`` about Y or Z.

    This is the encoding / trainable-gate convention. The interferometer
    transfer matrix used inside the MCRY module lives in
    :func:`adeqnn.circuit.mzi_amplitude`.
    """
    if not np.isfinite(theta):
        raise ValueError(f"rotation angle must be finite, got {theta!r}")
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    axis = axis.upper()
    if axis == "Y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "Z":
        return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])
    raise ValueError(f"axis must be 'Y' or 'Z', got {axis!r}")


def su2(a: float, b: float, c: float) -> np.ndarray:
    """General single-qubit unitary ``RZ(a) RY(b) RZ(c)``; identity at zeros."""
    return rotation_gate("Z", a) @ rotation_gate("Y", b) @ rotation_gate("Z", c)


def _check_targets(targets: Sequence[int], n_qubits: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits: {targets}")
    for t in targets:
        if not 0 <= t < n_qubits:
            raise ValueError(f"target qubit {t} out of range for {n_qubits} qubits")
    return targets


def apply_gate(state: np.ndarray, gate: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply ``gate`` to the listed target qubits of ``state``.

    ``state`` may carry leading batch axes; the last axis has length ``2**n``.
    """
    state = np.asarray(state, dtype=complex)
    dim = state.shape[-1]
    n = dim.bit_length() - 1
    if 2**n != dim:
        raise ValueError(f"state length {dim} is not a power of two")
    targets = _check_targets(targets, n)
    gate = np.asarray(gate, dtype=complex)
    k = len(targets)
    if gate.shape != (2**k, 2**k):
        raise ValueError(f"gate of shape {gate.shape} does not match {k} target qubit(s)")

    batch = state.shape[:-1]
    nb = len(batch)
    psi = state.reshape(batch + (2,) * n)
    # tensor axis of qubit q (after the batch axes) is n - 1 - q
    axes = [nb + n - 1 - t for t in targets]
    g = gate.reshape((2,) * (2 * k))
    out = np.tensordot(psi, g, axes=(axes, list(range(k, 2 * k))))
    # tensordot appends the gate's output axes at the end, in target order
    out = np.moveaxis(out, list(range(out.ndim - k, out.ndim)), axes)
    return out.reshape(state.shape)


def embed_gate(gate: np.ndarray, targets: Sequence[int], n_qubits: int = 4) -> np.ndarray:
    """Full ``2**n`` square matrix of ``gate`` acting on ``targets``."""
    eye = np.eye(2**n_qubits, dtype=complex)
    # rows of eye are basis states; applying the gate to each gives rows of M^T
    return apply_gate(eye, gate, targets).T


def controlled(gate: np.ndarray) -> np.ndarray:
    """Two-qubit controlled version of a single-qubit gate, control first."""
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = gate
    return out


def density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return np.einsum("...i,...j->...ij", state, state.conj())


def check_density_matrix(rho: np.ndarray, atol: float = ATOL_HERMITIAN) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho`` as complex."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > atol:
        raise ValueError(f"density matrix is not Hermitian (deviation {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > atol:
        raise ValueError(f"density matrix trace is {tr!r}, expected 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if lam[0] < -PSD_CLAMP:
        raise ValueError(f"density matrix has negative eigenvalue {lam[0]:.3e}")
    return rho


def clamp_psd(rho: np.ndarray) -> np.ndarray:
    """Zero eigenvalues in ``[-1e-9, 0)``, renormalise to unit trace.

    Larger negative eigenvalues are an error, not float noise.
    """
    lam, vec = hermitian_eig(0.5 * (rho + np.conj(rho).T), atol=1e-8)
    if lam[0] < -PSD_CLAMP:
        raise ValueError(f"matrix is not PSD within tolerance (min eigenvalue {lam[0]:.3e})")
    lam = np.clip(lam, 0.0, None)
    out = (vec * lam) @ vec.conj().T
    return out / np.trace(out).real


def hermitian_eig(h: np.ndarray, atol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvector matrix (columns) of ``h``."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"matrix must be square, got shape {h.shape}")
    dev = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if dev > atol:
        raise ValueError(f"matrix is not Hermitian (deviation {dev:.3e})")
    return np.linalg.eigh(h)


def partial_trace(rho: np.ndarray, keep: Sequence[int], n_qubits: int = 4) -> np.ndarray:
    """Reduced density matrix on ``keep``; output index uses ``keep[0]`` as MSB."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2**n_qubits, 2**n_qubits):
        raise ValueError(f"expected a {2**n_qubits}x{2**n_qubits} matrix, got {rho.shape}")
    keep = _check_targets(keep, n_qubits)
    if len(keep) != 2:
        raise ValueError("keep must name exactly two qubits")
    letters = "abcdefghijkl"
    ket = [letters[a] for a in range(n_qubits)]
    bra = [c if (n_qubits - 1 - a) not in keep else c.upper() for a, c in enumerate(ket)]
    out = [ket[n_qubits - 1 - q] for q in keep] + [bra[n_qubits - 1 - q] for q in keep]
    spec = "".join(ket) + "".join(bra) + "->" + "".join(out)
    return np.einsum(spec, rho.reshape((2,) * (2 * n_qubits))).reshape(4, 4)


def purify(rho: np.ndarray) -> np.ndarray:
    """Four-qubit purification with system on ``(q3, q1)`` and purifier on ``(q2, q0)``.

    ``|psi> = sum_i sqrt(lam_i) |e_i>_(31) |i>_(20)``, so that
    ``partial_trace(|psi><psi|, keep=(3, 1)) == rho``.
    """
    rho = check_density_matrix(rho, atol=1e-9)
    if rho.shape != (4, 4):
        raise ValueError(f"purify expects a 4x4 density matrix, got {rho.shape}")
    lam, vec = hermitian_eig(rho)
    if lam[0] < -PSD_CLAMP:
        raise ValueError(f"density matrix is not PSD (min eigenvalue {lam[0]:.3e})")
    lam = np.clip(lam, 0.0, None)
    # largest eigenvalue pairs with purifier |00>
    lam, vec = lam[::-1], vec[:, ::-1]
    psi = np.zeros(16, dtype=complex)
    for i in range(4):
        p2, p0 = i >> 1, i & 1
        for s in range(4):
            q3, q1 = s >> 1, s & 1
            psi[basis_index(q3, p2, q1, p0)] += np.sqrt(lam[i]) * vec[s, i]
    return psi


def _numerical_zero(lam: np.ndarray) -> np.ndarray:
    """Clip eigenvalues at or below eigensolver accuracy, which is a few ulps of the largest.

    Without this, a rank-one matrix's noise eigenvalues (~1e-17) turn into
    ~1e-8 errors once square-rooted.
    """
    floor = 16 * np.finfo(float).eps * max(float(np.max(np.abs(lam))), 1e-300)
    return np.where(lam > floor, lam, 0.0)


def sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    lam, vec = hermitian_eig(0.5 * (rho + np.conj(rho).T), atol=1e-8)
    return (vec * np.sqrt(_numerical_zero(lam))) @ vec.conj().T


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2`` clamped to ``[0, 1]``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    sr = sqrtm_psd(rho)
    inner = sr @ sigma @ sr
    lam = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    f = float(np.sum(np.sqrt(_numerical_zero(lam))) ** 2)
    if f > 1 + 1e-9 or f < -1e-9:
        raise ValueError(f"fidelity {f} outside [0, 1]; inputs are not valid states")
    return min(max(f, 0.0), 1.0)


def sample_counts(p: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(p.sum() - 1) > 1e-9:
        raise ValueError(f"probabilities sum to {p.sum()!r}, expected 1")
    return rng.multinomial(shots, p / p.sum())


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(2**n_qubits) + 1j * rng.standard_normal(2**n_qubits)
    return psi / np.linalg.norm(psi)
