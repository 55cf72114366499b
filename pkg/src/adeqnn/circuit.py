"""The two-hidden-layer ADE-QNN circuit on four computational qubits.

Photon 1 carries ``(q1, q0)`` and photon 2 carries ``(q3, q2)``. Each photon's
qubit pair is a four-level ququart with index ``2*q_hi + q_lo``, so the flat
basis index is ``4*i + j`` with ``i`` the photon-2 level and ``j`` the
photon-1 level.

Forward pass for one data point::

    |0000>  -> RY(data) on every qubit                       (input layer)
            -> W on (q3, q1), controlled (V_x (x) U_x) on (q2, q0)
            -> RZ(data) on every qubit  [replication]        (hidden layer 1)
            -> U4 on (q3, q2)  (x)  U4 on (q1, q0)
            -> MCRY diagonal + post-selection  [mcry]
            -> CRY q1->q0, CRY q3->q2                        (hidden layer 2)
            -> p_j = |amp_j|^2

Everything that does not depend on the data is folded into 16x16 matrices by
:func:`build_circuit`, so a batch of inputs costs a handful of small matmuls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from adeqnn import qcore
from adeqnn.qcore import apply_gate, embed_gate, rotation_gate, su2

LAYOUT_VERSION = 1
LAYOUT: tuple[tuple[str, int], ...] = (
    ("layer1_W", 16),
    ("layer1_CU", 24),
    ("u4_photon1", 16),
    ("u4_photon2", 16),
    ("mcry", 7),
    ("cry", 2),
)
N_PARAMS = sum(n for _, n in LAYOUT)

CCCZ_ANGLE = 2 * np.arcsin(1 / np.sqrt(3))
MCRY_IDENTITY = np.full(7, np.pi)

# Clements column order for four modes; each entry is the upper mode of an MZI.
CLEMENTS_BLOCKS = (0, 2, 1, 0, 2, 1)


class NullPostSelection(RuntimeError):
    """Post-selection kept (numerically) no probability mass."""


def param_slices() -> dict[str, slice]:
    out, start = {}, 0
    for name, n in LAYOUT:
        out[name] = slice(start, start + n)
        start += n
    return out


SLICES = param_slices()


def unpack(theta: np.ndarray) -> dict[str, np.ndarray]:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (N_PARAMS,):
        raise ValueError(f"expected {N_PARAMS} parameters, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameter vector has non-finite entries")
    return {name: theta[s] for name, s in SLICES.items()}


@dataclass(frozen=True)
class CircuitConfig:
    """Switches for the ADE-QNN and its linear baseline.

    ``input_map`` lists, for qubits ``q0..q3``, which feature index feeds that
    qubit's encoding gates (``None`` leaves the qubit unencoded).
    """

    replication_enabled: bool = True
    mcry_enabled: bool = True
    readout: str = "two_class"
    input_map: tuple[int | None, ...] = (0, 1, 0, 1)
    shots_mode: str = "exact"

    def __post_init__(self):
        if self.readout not in ("two_class", "three_class", "tomography"):
            raise ValueError(f"unknown readout {self.readout!r}")
        if self.shots_mode not in ("exact", "sampled"):
            raise ValueError(f"unknown shots_mode {self.shots_mode!r}")
        if len(self.input_map) != 4:
            raise ValueError("input_map must name a feature (or None) for each of 4 qubits")

    @classmethod
    def ade(cls, **kw) -> "CircuitConfig":
        return cls(replication_enabled=True, mcry_enabled=True, **kw)

    @classmethod
    def baseline(cls, **kw) -> "CircuitConfig":
        return cls(replication_enabled=False, mcry_enabled=False, **kw)

    def to_dict(self) -> dict:
        return {
            "replication_enabled": self.replication_enabled,
            "mcry_enabled": self.mcry_enabled,
            "readout": self.readout,
            "input_map": list(self.input_map),
            "shots_mode": self.shots_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CircuitConfig":
        d = dict(d)
        d["input_map"] = tuple(d["input_map"])
        return cls(**d)


@dataclass(frozen=True)
class OutputDistribution:
    p: np.ndarray
    success_prob: float = 1.0


# ---------------------------------------------------------------- encoding


def encode_features(features: Sequence[float], n_qubits: int = 4) -> np.ndarray:
    """Tile features cyclically over the register and map ``x -> x*pi``."""
    f = np.asarray(features, dtype=float)
    if f.ndim != 1 or not 1 <= f.size <= n_qubits:
        raise ValueError(f"need 1..{n_qubits} features, got {f.size}")
    if np.any(np.abs(f) > 1 + 1e-9):
        raise ValueError("features must lie in [-1, 1]")
    return np.resize(np.clip(f, -1, 1), n_qubits) * np.pi


def data_angles(features: np.ndarray, input_map: Sequence[int | None]) -> np.ndarray:
    """Per-qubit encoding angles for a batch of feature rows, shape ``(B, 4)``."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if np.any(np.abs(x) > 1 + 1e-9):
        raise ValueError("features must lie in [-1, 1]")
    out = np.zeros((x.shape[0], 4))
    for q, k in enumerate(input_map):
        if k is not None:
            out[:, q] = np.clip(x[:, k], -1, 1) * np.pi
    return out


# ---------------------------------------------------------------- linear optics


def mzi_block(theta: float, phi: float) -> np.ndarray:
    """Two-mode interferometer with an input phase ``phi`` on the upper arm.

    Transfer matrix ``[[e^{i phi} sin(t/2), cos(t/2)], [e^{i phi} cos(t/2), -sin(t/2)]]``.
    """
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    e = np.exp(1j * phi)
    return np.array([[e * s, c], [e * c, -s]], dtype=complex)


def clements_u4(angles: Sequence[float]) -> np.ndarray:
    """Four-mode rectangular mesh: six MZIs ``(theta, phi)`` then four output phases.

    Angles are laid out as ``[theta_0, phi_0, ..., theta_5, phi_5, out_0..out_3]``.
    """
    a = np.asarray(angles, dtype=float)
    if a.shape != (16,):
        raise ValueError(f"clements_u4 needs 16 angles, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("mesh angles must be finite")
    u = np.eye(4, dtype=complex)
    for k, m in enumerate(CLEMENTS_BLOCKS):
        t = np.eye(4, dtype=complex)
        t[m : m + 2, m : m + 2] = mzi_block(a[2 * k], a[2 * k + 1])
        u = t @ u
    return np.diag(np.exp(1j * a[12:])) @ u


def clements_identity_angles() -> np.ndarray:
    """Mesh setting that realises the 4x4 identity.

    Each MZI at ``theta = pi`` is ``diag(e^{i phi}, -1)``; choosing ``phi = pi``
    makes every block ``-I`` on its two modes. Every mode is crossed by an even
    number of blocks, so the signs cancel and the output phases stay at zero.
    """
    theta = np.zeros(16)
    theta[0:12:2] = np.pi
    theta[1:12:2] = np.pi
    return theta


CLEMENTS_IDENTITY = clements_identity_angles()


def identity_params() -> np.ndarray:
    """Parameter vector for which every trainable block is the identity."""
    theta = np.zeros(N_PARAMS)
    theta[SLICES["layer1_W"]] = CLEMENTS_IDENTITY
    theta[SLICES["u4_photon1"]] = CLEMENTS_IDENTITY
    theta[SLICES["u4_photon2"]] = CLEMENTS_IDENTITY
    theta[SLICES["mcry"]] = MCRY_IDENTITY
    return theta


def random_params(rng: np.random.Generator, spread: float = np.pi / 8) -> np.ndarray:
    """Near-identity start for the meshes and single-qubit blocks, uniform angles elsewhere."""
    theta = identity_params()
    near = slice(SLICES["layer1_W"].start, SLICES["u4_photon2"].stop)
    theta[near] += rng.uniform(-spread, spread, size=near.stop - near.start)
    for name in ("mcry", "cry"):
        s = SLICES[name]
        theta[s] = rng.uniform(-np.pi, np.pi, size=s.stop - s.start)
    return theta


# ---------------------------------------------------------------- hidden layer 1


def controlled_pair(cu_angles: Sequence[float]) -> np.ndarray:
    """``sum_x |x><x|_(31) (x) (V_x (x) U_x)_(20)`` as a 16x16 matrix.

    ``cu_angles`` holds, for x = 0..3, three angles for V_x then three for U_x.
    """
    a = np.asarray(cu_angles, dtype=float).reshape(4, 2, 3)
    m = np.zeros((16, 16), dtype=complex)
    for x in range(4):
        q3, q1 = x >> 1, x & 1
        local = np.kron(su2(*a[x, 0]), su2(*a[x, 1]))  # index 2*q2 + q0
        for r in range(4):
            for c in range(4):
                row = qcore.basis_index(q3, r >> 1, q1, r & 1)
                col = qcore.basis_index(q3, c >> 1, q1, c & 1)
                m[row, col] = local[r, c]
    return m


def ry_product_states(angles: np.ndarray) -> np.ndarray:
    """Batch of ``(x)_k RY(angles[:, k])|0>`` states, shape ``(B, 16)``."""
    angles = np.atleast_2d(angles)
    c, s = np.cos(angles / 2), np.sin(angles / 2)
    out = np.ones((angles.shape[0], 1), dtype=complex)
    for q in (3, 2, 1, 0):
        amp = np.stack([c[:, q], s[:, q]], axis=1)
        out = np.einsum("bi,bj->bij", out, amp).reshape(angles.shape[0], -1)
    return out


def rz_phases(angles: np.ndarray) -> np.ndarray:
    """Diagonal of ``(x)_k RZ(angles[:, k])`` for a batch, shape ``(B, 16)``."""
    angles = np.atleast_2d(angles)
    bits = np.array([qcore.basis_bits(b)[::-1] for b in range(16)])  # (16, 4) as q0..q3
    sign = 2 * bits - 1  # RZ phase is exp(+i theta/2) on |1>, exp(-i theta/2) on |0>
    return np.exp(0.5j * angles @ sign.T)


def layer1_apply(
    state: np.ndarray,
    params: np.ndarray,
    data: Sequence[float],
    replication_enabled: bool = True,
) -> np.ndarray:
    """Input layer plus first hidden layer on a single normalised state."""
    p = unpack(params)
    data = np.asarray(data, dtype=float)
    if data.shape != (4,):
        raise ValueError("layer1_apply needs 4 data angles")
    psi = np.asarray(state, dtype=complex)
    for q in range(4):
        psi = apply_gate(psi, rotation_gate("Y", data[q]), [q])
    psi = apply_gate(psi, clements_u4(p["layer1_W"]), [3, 1])
    psi = controlled_pair(p["layer1_CU"]) @ psi
    if replication_enabled:
        for q in range(4):
            psi = apply_gate(psi, rotation_gate("Z", data[q]), [q])
    return psi / np.linalg.norm(psi)


# ---------------------------------------------------------------- MCRY


def mzi_amplitude(theta: float) -> float:
    """Transmission amplitude kept by post-selection on the original path."""
    return float(np.sin(theta / 2))


def two_photon_amplitude(theta_z: float) -> float:
    """Coincidence amplitude when both photons meet at the shared MZI.

    ``t**2 - r**2 = sin^2(theta/2) - cos^2(theta/2) = -cos(theta)``; this is +1 at
    ``theta = pi`` and -1/3 at ``2 arcsin(1/sqrt 3)``.
    """
    return float(-np.cos(theta_z))


def mcry_diagonal(mcry_angles: Sequence[float]) -> np.ndarray:
    """4x4 amplitude multipliers ``D[i, j]`` (photon-2 level i, photon-1 level j).

    Angle order: ``(t0_p1, t1_p1, t2_p1, t1_p2, t2_p2, t3_p2, t_z)``.
    """
    a = np.asarray(mcry_angles, dtype=float)
    if a.shape != (7,):
        raise ValueError(f"MCRY needs 7 angles, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("MCRY angles must be finite")
    tz = a[6]
    a1 = np.sin(np.array([a[0], a[1], a[2], tz]) / 2)
    a2 = np.sin(np.array([tz, a[3], a[4], a[5]]) / 2)
    d = np.outer(a2, a1)
    d[0, 3] = two_photon_amplitude(tz)
    return d


def apply_mcry(
    state: np.ndarray, mcry_angles: Sequence[float], d: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Scale amplitudes by the MCRY diagonal and renormalise.

    Works on a single state or a ``(B, 16)`` batch; returns the renormalised
    state(s) and the post-selection success probability (per batch item).
    """
    d = mcry_diagonal(mcry_angles) if d is None else d
    out = np.asarray(state, dtype=complex) * d.reshape(16)
    success = np.sum(np.abs(out) ** 2, axis=-1)
    if np.any(success <= 1e-12):
        raise NullPostSelection("MCRY post-selection kept no probability mass")
    return out / np.sqrt(success)[..., None], success


def _mzi_ry(theta: float) -> np.ndarray:
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    return np.array([[s, c], [c, -s]])


def _two_photon_branch_angle(theta_z: float) -> float:
    # branch angle whose MZI transmission equals the coincidence amplitude:
    # pi at theta_z = pi, 2 arcsin(1/3) + 2 pi at the CCCZ setting
    return 2 * np.pi + 2 * np.arcsin(np.clip(np.cos(theta_z), -1.0, 1.0))


def mcry_expanded_oracle(state: np.ndarray, mcry_angles: Sequence[float]) -> tuple[np.ndarray, float]:
    """MCRY by explicit evolution in the 64-dim space with two virtual qubits.

    Index layout of the enlarged register: ``64-dim = 16 (computational) x 2 (v2) x 2 (v1)``.
    Every computational branch ``(i, j)`` rotates ``v2`` and ``v1`` with its own
    interferometer, then the projector ``|00><00|`` on the virtual pair is applied.
    """
    a = np.asarray(mcry_angles, dtype=float)
    if a.shape != (7,):
        raise ValueError(f"MCRY needs 7 angles, got {a.shape}")
    t_p1 = {0: a[0], 1: a[1], 2: a[2]}
    t_p2 = {1: a[3], 2: a[4], 3: a[5]}
    tz = a[6]

    big = np.zeros((64, 64))
    for i in range(4):
        for j in range(4):
            if (i, j) == (0, 3):
                th2, th1 = _two_photon_branch_angle(tz), np.pi
            else:
                th2 = tz if i == 0 else t_p2[i]
                th1 = tz if j == 3 else t_p1[j]
            b = 4 * i + j
            big[4 * b : 4 * b + 4, 4 * b : 4 * b + 4] = np.kron(_mzi_ry(th2), _mzi_ry(th1))

    vin = np.zeros(64, dtype=complex)
    vin[0::4] = np.asarray(state, dtype=complex)  # virtual qubits start in |00>
    vout = big @ vin
    proj = np.zeros(64)
    proj[0::4] = 1.0
    kept = proj * vout
    success = float(np.vdot(kept, kept).real)
    if success <= 1e-12:
        raise NullPostSelection("MCRY post-selection kept no probability mass")
    return kept[0::4] / np.sqrt(success), success


# ---------------------------------------------------------------- hidden layer 2


def cry_matrix(cry_angles: Sequence[float]) -> np.ndarray:
    """CRY q1->q0 with ``cry[0]`` followed by CRY q3->q2 with ``cry[1]``."""
    a = np.asarray(cry_angles, dtype=float)
    m1 = embed_gate(qcore.controlled(rotation_gate("Y", a[0])), [1, 0])
    m2 = embed_gate(qcore.controlled(rotation_gate("Y", a[1])), [3, 2])
    return m2 @ m1


@dataclass(frozen=True)
class CompiledCircuit:
    """Data-independent pieces of the circuit for one parameter vector."""

    front: np.ndarray  # controlled-pair . W, 16x16
    middle: np.ndarray  # U4_p2 (x) U4_p1, 16x16
    d: np.ndarray | None  # MCRY diagonal, flattened, or None when disabled
    back: np.ndarray  # CRY pair, 16x16
    config: CircuitConfig = field(default_factory=CircuitConfig)


def build_circuit(config: CircuitConfig, params: np.ndarray) -> CompiledCircuit:
    p = unpack(params)
    w = embed_gate(clements_u4(p["layer1_W"]), [3, 1])
    front = controlled_pair(p["layer1_CU"]) @ w
    middle = np.kron(clements_u4(p["u4_photon2"]), clements_u4(p["u4_photon1"]))
    d = mcry_diagonal(p["mcry"]).reshape(16) if config.mcry_enabled else None
    if d is not None and np.all(d == 1.0):
        d = None  # identity diagonal; skipping it avoids a 1-ulp renormalisation drift
    return CompiledCircuit(front, middle, d, cry_matrix(p["cry"]), config)


def _propagate(cc: CompiledCircuit, psi: np.ndarray, angles: np.ndarray | None):
    psi = psi @ cc.front.T
    if cc.config.replication_enabled and angles is not None:
        psi = psi * rz_phases(angles)
    psi = psi @ cc.middle.T
    if cc.d is not None:
        psi = psi * cc.d
        success = np.sum(np.abs(psi) ** 2, axis=-1)
        if np.any(success <= 1e-12):
            raise NullPostSelection("MCRY post-selection kept no probability mass")
        psi = psi / np.sqrt(success)[..., None]
    else:
        success = np.ones(psi.shape[:-1])
    return psi @ cc.back.T, success


def output_states(cc: CompiledCircuit, angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Post-selected output states for a batch of data angles ``(B, 4)``."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    return _propagate(cc, ry_product_states(angles), angles)


def forward_batch(cc: CompiledCircuit, angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Output probabilities ``(B, 16)`` and success probabilities ``(B,)``."""
    psi, success = output_states(cc, angles)
    p = np.abs(psi) ** 2
    return p / p.sum(axis=-1, keepdims=True), success


def forward(config: CircuitConfig, params: np.ndarray, data: Sequence[float]) -> OutputDistribution:
    p, success = forward_batch(build_circuit(config, params), np.asarray(data, dtype=float)[None, :])
    return OutputDistribution(p[0], float(success[0]))


def forward_reference(config: CircuitConfig, params: np.ndarray, data: Sequence[float]) -> OutputDistribution:
    """Gate-by-gate evaluation of :func:`forward`, kept as an independent check."""
    prm = unpack(params)
    psi = layer1_apply(qcore.basis_state(0), params, data, config.replication_enabled)
    psi = apply_gate(psi, clements_u4(prm["u4_photon2"]), [3, 2])
    psi = apply_gate(psi, clements_u4(prm["u4_photon1"]), [1, 0])
    success = 1.0
    if config.mcry_enabled:
        psi, success = apply_mcry(psi, prm["mcry"])
    psi = apply_gate(psi, qcore.controlled(rotation_gate("Y", prm["cry"][0])), [1, 0])
    psi = apply_gate(psi, qcore.controlled(rotation_gate("Y", prm["cry"][1])), [3, 2])
    return OutputDistribution(np.abs(psi) ** 2, float(success))


def sample_distribution(
    p: np.ndarray, success_prob: float, shots: int, rng: np.random.Generator
) -> tuple[np.ndarray, int]:
    """Accepted events ``~ Binomial(shots, success)`` then counts ``~ Multinomial(accepted, p)``."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    accepted = int(rng.binomial(shots, min(max(success_prob, 0.0), 1.0)))
    if accepted == 0:
        return np.zeros(len(p), dtype=np.int64), 0
    return qcore.sample_counts(p, accepted, rng), accepted


def forward_sampled(
    config: CircuitConfig,
    params: np.ndarray,
    data: Sequence[float],
    shots: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, int]:
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    dist = forward(config, params, data)
    return sample_distribution(dist.p, dist.success_prob, shots, rng)


def estimate_probs(
    p: np.ndarray, success: np.ndarray, shots: int, rng: np.random.Generator
) -> np.ndarray:
    """Replace a batch of exact distributions by shot-noise frequency estimates."""
    out = np.empty_like(p)
    for b in range(p.shape[0]):
        counts, accepted = sample_distribution(p[b], success[b], shots, rng)
        if accepted == 0:
            raise NullPostSelection(f"no events survived post-selection out of {shots} shots")
        out[b] = counts / accepted
    return out


# ---------------------------------------------------------------- gate configurations


def cccz_angles() -> np.ndarray:
    return np.full(7, CCCZ_ANGLE)


def cccx_truth_table(mcry_angles: Sequence[float] | None = None) -> np.ndarray:
    """16x16 table ``T[out, in]`` of H_q2 . MCRY(CCCZ) . H_q2 on basis inputs."""
    angles = cccz_angles() if mcry_angles is None else np.asarray(mcry_angles)
    d = mcry_diagonal(angles)
    table = np.zeros((16, 16))
    for b in range(16):
        psi = apply_gate(qcore.basis_state(b), qcore.HADAMARD, [2])
        psi, _ = apply_mcry(psi, angles, d)
        psi = apply_gate(psi, qcore.HADAMARD, [2])
        table[:, b] = np.abs(psi) ** 2
    return table


def ideal_cccx_table() -> np.ndarray:
    perm = np.arange(16)
    a, b = qcore.basis_index(0, 0, 1, 1), qcore.basis_index(0, 1, 1, 1)
    perm[a], perm[b] = b, a
    table = np.zeros((16, 16))
    table[perm, np.arange(16)] = 1.0
    return table


# ---------------------------------------------------------------- denoiser


def denoiser_state(params: np.ndarray, rho_in: np.ndarray, mcry_enabled: bool = True):
    """Post-selected four-qubit state of the denoiser and its success probability.

    ``rho_in`` is loaded as a purification on system ``(q3, q1)`` with purifier
    ``(q2, q0)``; no data gates are applied.
    """
    p = unpack(params)
    psi = controlled_pair(p["layer1_CU"]) @ qcore.purify(rho_in)
    psi = np.kron(clements_u4(p["u4_photon2"]), clements_u4(p["u4_photon1"])) @ psi
    success = 1.0
    if mcry_enabled:
        psi, success = apply_mcry(psi, p["mcry"])
    return cry_matrix(p["cry"]) @ psi, float(success)


def reduced_output(psi: np.ndarray) -> np.ndarray:
    """State of ``(q1, q0)`` after tracing out photon 2."""
    m = np.asarray(psi, dtype=complex).reshape(4, 4)  # rows (q3, q2), columns (q1, q0)
    rho = m.T @ m.conj()
    return 0.5 * (rho + rho.conj().T)


def denoiser_forward(
    params: np.ndarray,
    rho_in: np.ndarray,
    exact: bool = True,
    shots: int = 0,
    rng: np.random.Generator | None = None,
    mcry_enabled: bool = True,
) -> np.ndarray:
    """Denoised two-qubit state on ``(q1, q0)``.

    Exact mode traces out ``(q3, q2)``. Sampled mode runs the nine Pauli
    settings with ``shots`` heralded trials each and reconstructs the state by
    maximum likelihood.
    """
    psi, success = denoiser_state(params, rho_in, mcry_enabled)
    rho = reduced_output(psi)
    if exact:
        return rho
    if shots < 1 or rng is None:
        raise ValueError("sampled mode needs shots >= 1 and a generator")
    from adeqnn.tasks.tomography import SETTINGS, mle_tomography

    counts = np.zeros((9, 4), dtype=np.int64)
    for k, s in enumerate(SETTINGS):
        probs = s.probabilities(rho)
        c, accepted = sample_distribution(probs / probs.sum(), success, shots, rng)
        if accepted == 0:
            raise NullPostSelection(f"no heralded events in setting {s.basis}")
        counts[k] = c
    return mle_tomography(counts)


# ---------------------------------------------------------------- readout


def readout_scores(p: np.ndarray, mode: str) -> np.ndarray:
    """Class scores from output probabilities; accepts ``(16,)`` or ``(B, 16)``.

    ``two_class`` gives ``(P(q2=1), P(q3=1))``. ``three_class`` gives the
    probabilities of ``(q3, q2) = 00, 01, 10`` renormalised over those three.
    """
    p = np.asarray(p, dtype=float)
    pq = p.reshape(p.shape[:-1] + (4, 4)).sum(axis=-1)  # marginal over (q3, q2)
    if mode == "two_class":
        return np.stack([pq[..., 1] + pq[..., 3], pq[..., 2] + pq[..., 3]], axis=-1)
    if mode == "three_class":
        s = pq[..., :3]
        tot = s.sum(axis=-1, keepdims=True)
        if np.any(tot < 1e-9):
            raise ValueError("three-class readout has no weight on the retained outcomes")
        return s / tot
    raise ValueError(f"unknown readout mode {mode!r}")


def with_mcry(params: np.ndarray, mcry_angles: Sequence[float]) -> np.ndarray:
    out = np.array(params, dtype=float)
    out[SLICES["mcry"]] = mcry_angles
    return out


__all__ = [
    "CircuitConfig",
    "CompiledCircuit",
    "NullPostSelection",
    "OutputDistribution",
    "LAYOUT",
    "LAYOUT_VERSION",
    "N_PARAMS",
    "apply_mcry",
    "build_circuit",
    "cccx_truth_table",
    "clements_u4",
    "denoiser_forward",
    "encode_features",
    "forward",
    "forward_batch",
    "forward_sampled",
    "identity_params",
    "layer1_apply",
    "mcry_diagonal",
    "mcry_expanded_oracle",
    "mzi_amplitude",
    "readout_scores",
    "two_photon_amplitude",
]
