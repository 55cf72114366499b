"""Fast invariant suite: each check returns ``(ok, detail)``."""

from __future__ import annotations

import contextlib
import time
from typing import Callable

import numpy as np

from adeqnn import circuit, metrics, qcore, train
from adeqnn.tasks import discriminator as disc


def check_mcry_oracle(n: int = 1000, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        psi = qcore.random_state(4, rng)
        angles = rng.uniform(-2 * np.pi, 2 * np.pi, size=7)
        a, pa = circuit.apply_mcry(psi, angles)
        b, pb = circuit.mcry_expanded_oracle(psi, angles)
        worst = max(worst, np.max(np.abs(a - b)), abs(float(pa) - pb))
    return worst < 1e-12, f"max deviation {worst:.2e} over {n} cases"


def check_cccz(n: int = 200, seed: int = 1) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        _, p = circuit.apply_mcry(qcore.random_state(4, rng), circuit.cccz_angles())
        worst = max(worst, abs(float(p) - 1 / 9))
    fid = metrics.truth_table_fidelity(circuit.cccx_truth_table(), circuit.ideal_cccx_table())
    ok = worst < 1e-12 and abs(fid - 1) < 1e-12
    return ok, f"success-prob deviation {worst:.2e}, CCCX fidelity {fid:.12f}"


def check_unitarity(n: int = 100, seed: int = 2) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        mats = [
            circuit.clements_u4(rng.uniform(-np.pi, np.pi, 16)),
            circuit.controlled_pair(rng.uniform(-np.pi, np.pi, 24)),
            circuit.cry_matrix(rng.uniform(-np.pi, np.pi, 2)),
            qcore.rotation_gate("Y", rng.uniform(-np.pi, np.pi)),
            qcore.rotation_gate("Z", rng.uniform(-np.pi, np.pi)),
        ]
        for u in mats:
            worst = max(worst, np.max(np.abs(u.conj().T @ u - np.eye(len(u)))))
    return worst < 1e-10, f"max |U^dag U - I| {worst:.2e}"


def check_forward_normalisation(n: int = 200, seed: int = 3) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    cfg = circuit.CircuitConfig.ade()
    for _ in range(n):
        theta = rng.uniform(-np.pi, np.pi, circuit.N_PARAMS)
        p, _ = circuit.forward_batch(circuit.build_circuit(cfg, theta), rng.uniform(-np.pi, np.pi, (4, 4)))
        worst = max(worst, np.max(np.abs(p.sum(axis=1) - 1)))
    return worst < 1e-10, f"max |sum p - 1| {worst:.2e}"


def check_partial_trace(n: int = 50, seed: int = 4) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        rho = qcore.random_density_matrix(16, rng)
        keep = tuple(rng.choice(4, size=2, replace=False))
        worst = max(worst, np.max(np.abs(qcore.partial_trace(rho, keep) - partial_trace_oracle(rho, keep))))
    return worst < 1e-12, f"max deviation from index-sum oracle {worst:.2e}"


def partial_trace_oracle(rho: np.ndarray, keep) -> np.ndarray:
    """Explicit sum over basis labels; ``keep[0]`` is the high bit of the result."""
    out = np.zeros((4, 4), dtype=complex)
    for r in range(16):
        for c in range(16):
            br, bc = qcore.basis_bits(r)[::-1], qcore.basis_bits(c)[::-1]  # index by qubit number
            if any(br[q] != bc[q] for q in range(4) if q not in keep):
                continue
            out[2 * br[keep[0]] + br[keep[1]], 2 * bc[keep[0]] + bc[keep[1]]] += rho[r, c]
    return out


def check_discriminator_gradients(seed: int = 5) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    d = disc.MlpDiscriminator.init(rng)
    x = rng.uniform(0, 1, size=(3, 64))
    _, cache = disc.mlp_forward(d, x)
    grads, gx = disc.mlp_backward(d, cache, np.ones(3))
    flat = d.flat()
    analytic = disc.flatten_grads(grads)
    h = 1e-6
    worst = 0.0
    for i in rng.choice(flat.size, size=40, replace=False):
        e = np.zeros_like(flat)
        e[i] = h
        d.set_flat(flat + e)
        up = float(np.sum(d(x)))
        d.set_flat(flat - e)
        dn = float(np.sum(d(x)))
        fd = (up - dn) / (2 * h)
        worst = max(worst, abs(fd - analytic[i]) / max(abs(fd), 1e-3))
    d.set_flat(flat)
    for k in range(3):
        i = rng.integers(64)
        xp, xm = x.copy(), x.copy()
        xp[k, i] += h
        xm[k, i] -= h
        fd = (float(d(xp[k])) - float(d(xm[k]))) / (2 * h)
        worst = max(worst, abs(fd - gx[k, i]) / max(abs(fd), 1e-3))
    return worst < 1e-5, f"max relative error {worst:.2e}"


def check_spsa_quadratic() -> tuple[bool, str]:
    ck, delta = 0.1, np.array([1.0])
    g = train.spsa_combine(ck, delta[None, :], [(1 + ck) ** 2, (1 - ck) ** 2])
    return abs(g[0] - 2.0) < 1e-12, f"estimate {g[0]:.12f} (exact 2)"


def check_purify(n: int = 100, seed: int = 6) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        rho = qcore.random_density_matrix(4, rng)
        back = qcore.partial_trace(qcore.density(qcore.purify(rho)), (3, 1))
        worst = max(worst, np.max(np.abs(back - rho)))
    return worst < 1e-9, f"max round-trip error {worst:.2e}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "mcry_oracle_equivalence": check_mcry_oracle,
    "cccz_cccx": check_cccz,
    "unitarity": check_unitarity,
    "forward_normalisation": check_forward_normalisation,
    "partial_trace_oracle": check_partial_trace,
    "purify_round_trip": check_purify,
    "discriminator_gradients": check_discriminator_gradients,
    "spsa_quadratic": check_spsa_quadratic,
}

FAULTS = ("d03-sign",)


@contextlib.contextmanager
def injected_fault(name: str | None):
    """Temporarily corrupt the fast path so the suite can prove it notices."""
    if name is None:
        yield
        return
    if name != "d03-sign":
        raise ValueError(f"unknown fault {name!r}")
    original = circuit.two_photon_amplitude
    circuit.two_photon_amplitude = lambda tz: -original(tz)
    try:
        yield
    finally:
        circuit.two_photon_amplitude = original


def run_all(fault: str | None = None, report=print) -> bool:
    ok_all = True
    with injected_fault(fault):
        for name, fn in CHECKS.items():
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failure, not an abort
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            ok_all &= ok
            report(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({time.perf_counter() - t0:.2f}s)")
    return ok_all
