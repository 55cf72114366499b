"""Denoise a two-qubit Gibbs state back out of the maximally mixed state.

The forward process depolarises the target in T steps. Each reverse step is a
separately trained chip setting that maps the previous output closer to the
clean state. Compare the nonlinear (MCRY) denoiser with the partial-trace-only one.

    python demos/04_diffusion_denoiser.py [T]
"""

import sys

import numpy as np

from adeqnn import datasets, qcore
from adeqnn.tasks import qgdm

T = int(sys.argv[1]) if len(sys.argv) > 1 else 2
target = datasets.gibbs_state()
np.set_printoptions(precision=3, suppress=True)
print("target populations", np.real(np.diag(target)))

for variant in ("ade", "baseline"):
    steps, final = qgdm.train_qgdm(target, T, variant, seed=0)
    path = " -> ".join(f"{s.target_fidelity:.3f}" for s in steps)
    print(f"{variant:9s} fidelity to target after each step: {path}")
    print("          reconstructed populations", np.real(np.diag(final)))
    assert abs(qcore.uhlmann_fidelity(final, target) - steps[-1].target_fidelity) < 1e-12
