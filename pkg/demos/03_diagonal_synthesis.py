"""Exact circuits for non-unitary diagonals: dilation, then Walsh angles."""
import numpy as np

from nmqsim.circuit import to_text, unitary_of
from nmqsim.synthesis import DiagonalOp, dilate, synthesize_diagonal, walsh_circuit, walsh_coefficients

rng = np.random.default_rng(0)

# a diagonal unitary on three qubits
phases = rng.uniform(-np.pi, np.pi, 8)
spec = walsh_coefficients(phases)
circ = walsh_circuit(spec, [0, 1, 2], dense=True)
print(to_text(circ))
print("RZ + CNOT:", circ.native_gate_count())  # 2**(q+1) - 3 = 13
err = np.abs(np.diag(unitary_of(circ)) - np.exp(1j * phases)).max()
print("max error:", err)

# gate count grows like 2**(q+1)
for q in range(1, 7):
    c = walsh_circuit(walsh_coefficients(rng.uniform(-1, 1, 2**q)), list(range(q)), dense=True)
    print(q, c.native_gate_count())

# now a contraction: entries anywhere in the unit disk, one of them zero
d = np.array([0.9, 0.5j, 0.0, -0.3 + 0.3j])
print("\nD+ / D- pairs:")
print(dilate(d).reshape(2, -1).T.round(4))

op = DiagonalOp.from_entries(d)
u = unitary_of(synthesize_diagonal(op, [1, 2], ancilla=0))
print("ancilla-0 block:\n", np.diag(u[:4, :4]).round(12))

# entries above one get rescaled; the scale is kept on the operator
big = DiagonalOp.from_entries([2.0, 1.0, 0.5, 0.0])
print("scale:", big.scale, "rescaled:", big.entries)
