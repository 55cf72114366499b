"""The MCRY module as a gate: attenuate amplitudes, post-select, renormalise.

With every MZI at pi nothing happens. At 2*arcsin(1/sqrt 3) each photon path
passes with amplitude 1/sqrt 3 and the two-photon coincidence picks up -1/3,
which is a CCCZ kept with probability 1/9. Sandwiching the target qubit in
Hadamards turns it into a CCCX.
"""

import numpy as np

from adeqnn import circuit, metrics, qcore

np.set_printoptions(precision=3, suppress=True)

print("diagonal at the identity setting:")
print(circuit.mcry_diagonal(circuit.MCRY_IDENTITY))

d = circuit.mcry_diagonal(circuit.cccz_angles())
print("\ndiagonal at the CCCZ setting (rows: photon 2 level, cols: photon 1 level):")
print(d)

# any input works: the kept branch is always 1/9 of the mass
rng = np.random.default_rng(0)
psi = qcore.random_state(4, rng)
out, p = circuit.apply_mcry(psi, circuit.cccz_angles())
print(f"\nsuccess probability {p:.6f}")
print("phase flip on |0011> only:", np.allclose(out * np.where(np.arange(16) == 3, -1, 1), psi))

# the 64-mode picture agrees with the 16-entry diagonal
ref, pref = circuit.mcry_expanded_oracle(psi, circuit.cccz_angles())
print("matches the virtual-qubit expansion:", np.allclose(out, ref, atol=1e-12), abs(p - pref) < 1e-12)

table = circuit.cccx_truth_table()
print("\nCCCX truth table (columns are inputs):")
print(table.astype(int))
print("fidelity with the ideal table:", metrics.truth_table_fidelity(table, circuit.ideal_cccx_table()))
