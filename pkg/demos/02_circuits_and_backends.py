"""Build a QCNN ansatz and run it on both simulator backends.

The statevector backend tracks 2**n amplitudes and ignores noise markers; the
density backend conjugates a 2**n x 2**n matrix and can apply Kraus channels.
Without noise, the two agree to machine precision.
"""

import numpy as np

from qcnnlab import AnsatzSpec, build_qcnn, param_count, run_density, run_statevector
from qcnnlab.ansatz import init_params, readout_qubit
from qcnnlab.circuit import prob_one
from qcnnlab.linalg import projector, trace_distance

spec = AnsatzSpec(conv_id=5, pooling=True)
circuit = build_qcnn(spec)
print(f"ansatz {spec.name}: {param_count(spec)} parameters, readout qubit {readout_qubit(spec)}")
print("first few ops:")
print("\n".join(circuit.dump().splitlines()[:6]), "\n...")

params = init_params(spec, np.random.default_rng(7))
psi = run_statevector(circuit, params)
rho = run_density(circuit, params)

print(f"\nP(readout=1) from statevector: {prob_one(psi, readout_qubit(spec), 8):.6f}")
print(f"trace distance between backends: {trace_distance(rho, projector(psi)):.2e}")
