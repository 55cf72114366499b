"""Dataset generators, file loaders, Gibbs targets and the forward diffusion process."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from adeqnn import qcore

CIRCLE_RADIUS_SQ = 2 / np.pi
GLASS_CLASSES = (1, 2, 7)
GLASS_ROWS = 214
GLASS_TEST_SIZE = 44


@dataclass(frozen=True)
class Dataset:
    """Feature matrix in ``[-1, 1]`` and integer labels."""

    x: np.ndarray
    y: np.ndarray
    n_classes: int

    def __len__(self) -> int:
        return len(self.y)

    def __post_init__(self):
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError("features and labels differ in length")
        if np.any(np.abs(self.x) > 1 + 1e-12):
            raise ValueError("features must lie in [-1, 1]")
        if np.any((self.y < 0) | (self.y >= self.n_classes)):
            raise ValueError("label outside the class set")

    def to_csv(self) -> str:
        """CSV with header ``f0,...,label`` and 9 significant digits."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"f{k}" for k in range(self.x.shape[1])] + ["label"])
        for row, lab in zip(self.x, self.y):
            w.writerow([f"{v:.9g}" for v in row] + [int(lab)])
        return buf.getvalue()


def data_path(name: str) -> Path:
    return Path(str(resources.files("adeqnn") / "data" / name))


# ---------------------------------------------------------------- synthetic sets


def circle_label(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    return (np.sum(x**2, axis=1) < CIRCLE_RADIUS_SQ).astype(int)


def gen_circle(n_train: int = 50, n_test: int = 200, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Uniform points on ``[-1, 1]^2``; label 1 inside the circle of area 2."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, size=(n_train + n_test, 2))
    y = circle_label(x)
    return Dataset(x[:n_train], y[:n_train], 2), Dataset(x[n_train:], y[n_train:], 2)


def spiral_points(u: np.ndarray, cls: np.ndarray, turns: float = 1.5) -> np.ndarray:
    angle = 2 * turns * np.pi * u + cls * np.pi
    return np.column_stack([u * np.sin(angle), u * np.cos(angle)])


def gen_spiral(
    n_train: int = 50,
    n_test: int = 200,
    seed: int = 0,
    noise: float = 0.05,
    turns: float = 1.5,
) -> tuple[Dataset, Dataset]:
    """Two interleaved arms; class 1 is class 0 rotated by pi."""
    rng = np.random.default_rng(seed)
    out = []
    for n in (n_train, n_test):
        cls = np.arange(n) % 2
        rng.shuffle(cls)
        u = rng.uniform(0, 1, size=n)
        x = spiral_points(u, cls, turns) + noise * rng.standard_normal((n, 2))
        out.append(Dataset(np.clip(x, -1, 1), cls, 2))
    return out[0], out[1]


# ---------------------------------------------------------------- glass


def _read_glass(path: Path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"glass data file not found: {path}")
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 11:
                raise ValueError(f"{path}:{lineno}: expected 11 columns, got {len(parts)}")
            try:
                rows.append([float(v) for v in parts])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if len(rows) != GLASS_ROWS:
        raise ValueError(f"{path}: expected {GLASS_ROWS} rows, got {len(rows)}")
    return np.array(rows)


def stratified_split(y: np.ndarray, test_size: int, rng: np.random.Generator):
    """Index arrays ``(train, test)`` with per-class test counts by largest remainder."""
    classes, counts = np.unique(y, return_counts=True)
    quota = counts * test_size / len(y)
    take = np.floor(quota).astype(int)
    order = np.argsort(-(quota - take), kind="stable")
    take[order[: test_size - take.sum()]] += 1
    train, test = [], []
    for c, k in zip(classes, take):
        idx = rng.permutation(np.flatnonzero(y == c))
        test.extend(idx[:k])
        train.extend(idx[k:])
    return np.sort(np.array(train)), np.sort(np.array(test))


@dataclass(frozen=True)
class GlassProjection:
    mean: np.ndarray
    std: np.ndarray
    components: np.ndarray  # (4, 9), orthonormal rows
    lo: np.ndarray
    hi: np.ndarray

    def transform(self, raw: np.ndarray) -> np.ndarray:
        z = (raw - self.mean) / self.std
        proj = z @ self.components.T
        scaled = 2 * (proj - self.lo) / (self.hi - self.lo) - 1
        return np.clip(scaled, -1, 1)


def load_glass(path: str | Path | None = None, seed: int = 0, with_projection: bool = False):
    """Classes {1, 2, 7} of UCI Glass, PCA-4 features scaled to ``[-1, 1]``.

    Standardisation, principal axes and min/max scaling all come from the
    training split; test features are clipped into range.
    """
    data = _read_glass(data_path("glass.data") if path is None else path)
    keep = np.isin(data[:, 10], GLASS_CLASSES)
    raw, cls = data[keep, 1:10], data[keep, 10].astype(int)
    y = np.searchsorted(GLASS_CLASSES, cls)
    rng = np.random.default_rng(seed)
    tr, te = stratified_split(y, GLASS_TEST_SIZE, rng)

    mean = raw[tr].mean(axis=0)
    std = raw[tr].std(axis=0)
    std[std == 0] = 1.0
    z = (raw[tr] - mean) / std
    _, _, vt = np.linalg.svd(z - z.mean(axis=0), full_matrices=False)
    comps = vt[:4]
    # sign convention: largest-magnitude loading positive
    comps = comps * np.sign(comps[np.arange(4), np.argmax(np.abs(comps), axis=1)])[:, None]
    proj = z @ comps.T
    proj_obj = GlassProjection(mean, std, comps, proj.min(axis=0), proj.max(axis=0))

    train = Dataset(proj_obj.transform(raw[tr]), y[tr], 3)
    test = Dataset(proj_obj.transform(raw[te]), y[te], 3)
    if with_projection:
        return train, test, proj_obj
    return train, test


# ---------------------------------------------------------------- digits


def load_digits(path: str | Path | None = None, classes=(0, 1)) -> tuple[np.ndarray, np.ndarray]:
    """8x8 digit images scaled to ``[0, 1]`` and their labels, filtered to ``classes``."""
    path = data_path("digits.csv") if path is None else Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"digits file not found: {path}")
    images, labels = [], []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 65:
                raise ValueError(f"{path}:{lineno}: expected 65 columns, got {len(parts)}")
            vals = [int(v) for v in parts]
            pix, lab = vals[:64], vals[64]
            if min(pix) < 0 or max(pix) > 16:
                raise ValueError(f"{path}:{lineno}: intensity outside 0..16")
            if lab in classes:
                images.append(pix)
                labels.append(lab)
    return np.array(images, dtype=float).reshape(-1, 64) / 16.0, np.array(labels, dtype=int)


# ---------------------------------------------------------------- quantum targets


def default_hamiltonian() -> np.ndarray:
    """``Z(x)Z + 0.5 (X(x)I + I(x)X)`` on two qubits."""
    z, x, i = qcore.PAULI_Z, qcore.PAULI_X, qcore.PAULI_I
    return np.kron(z, z) + 0.5 * (np.kron(x, i) + np.kron(i, x))


def gibbs_state(h: np.ndarray | None = None, beta: float = 1.0) -> np.ndarray:
    h = default_hamiltonian() if h is None else np.asarray(h, dtype=complex)
    if beta < 0:
        raise ValueError("beta must be non-negative")
    lam, vec = qcore.hermitian_eig(h)
    w = np.exp(-beta * (lam - lam.min()))
    rho = (vec * (w / w.sum())) @ vec.conj().T
    return 0.5 * (rho + rho.conj().T)


@dataclass(frozen=True)
class DiffusionSchedule:
    gammas: tuple[float, ...]

    def __post_init__(self):
        if len(self.gammas) < 1:
            raise ValueError("schedule needs at least one step")
        if any(not 0 < g <= 1 for g in self.gammas):
            raise ValueError("every gamma must lie in (0, 1]")
        if self.gammas[-1] != 1.0:
            raise ValueError("the last gamma must be exactly 1")

    @property
    def T(self) -> int:
        return len(self.gammas)


def linear_schedule(T: int) -> DiffusionSchedule:
    if T < 1:
        raise ValueError("T must be >= 1")
    return DiffusionSchedule(tuple(t / T for t in range(1, T + 1)))


def forward_diffuse(rho0: np.ndarray, schedule: DiffusionSchedule) -> list[np.ndarray]:
    """Depolarising trajectory ``[rho_1, ..., rho_T]``; ``rho_T`` is exactly ``I/d``."""
    rho = np.asarray(rho0, dtype=complex)
    d = rho.shape[0]
    mixed = np.eye(d, dtype=complex) / d
    out = []
    for g in schedule.gammas:
        rho = mixed.copy() if g == 1.0 else (1 - g) * rho + g * mixed
        out.append(rho)
    return out
