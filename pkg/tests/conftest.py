"""Suite-wide validity guard: every density matrix and post-selected distribution
produced through the public producers is checked as it is created."""

import functools

import numpy as np
import pytest

from adeqnn import circuit, datasets, qcore
from adeqnn.tasks import tomography

VALIDITY_COUNTS = {"density": 0, "distribution": 0}


def assert_density(rho, atol=1e-9):
    rho = np.asarray(rho)
    assert np.max(np.abs(rho - rho.conj().T)) < atol, "not Hermitian"
    assert abs(np.trace(rho).real - 1) < atol, "trace is not 1"
    assert np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] > -1e-9, "not PSD"
    VALIDITY_COUNTS["density"] += 1


def _guard(module, name, check):
    original = getattr(module, name)

    @functools.wraps(original)
    def wrapper(*a, **kw):
        out = original(*a, **kw)
        check(out)
        return out

    return original, wrapper


def _check_traj(traj):
    for rho in traj:
        assert_density(rho)


def _check_batch(out):
    p, success = out
    assert np.max(np.abs(p.sum(axis=-1) - 1)) < 1e-10
    assert np.all(success > 0) and np.all(success <= 1 + 1e-12)
    VALIDITY_COUNTS["distribution"] += len(p)


@pytest.fixture(autouse=True)
def validity_guard(monkeypatch):
    for module, name, check in (
        (datasets, "forward_diffuse", _check_traj),
        (datasets, "gibbs_state", assert_density),
        (circuit, "denoiser_forward", assert_density),
        (tomography, "mle_tomography", assert_density),
        (circuit, "forward_batch", _check_batch),
    ):
        _, wrapper = _guard(module, name, check)
        monkeypatch.setattr(module, name, wrapper)
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(rng, n=4):
    return qcore.random_state(n, rng)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
