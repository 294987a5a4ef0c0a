"""The four single-qubit Kraus channels and what they do to states.

Bit flip swaps populations, phase flip kills coherences, amplitude damping
relaxes |1> toward |0>, and depolarizing pulls everything toward I/2.
"""

import numpy as np

from qcnnlab import AnsatzSpec, NoiseSpec, apply_channel, build_qcnn, kraus_ops, run_density
from qcnnlab.ansatz import init_params
from qcnnlab.noise import NOISE_KINDS

plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)  # |+><+|
excited = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)  # |1><1|

for kind in NOISE_KINDS:
    spec = NoiseSpec(kind, 0.2)
    ops = kraus_ops(spec)
    completeness = sum(k.conj().T @ k for k in ops)
    out = apply_channel(plus, spec, 0)
    print(f"{kind:18s} kraus terms={len(ops)} "
          f"completeness err={np.abs(completeness - np.eye(2)).max():.1e} "
          f"coherence of |+>: 0.5 -> {out[0, 1].real:.3f}")

print("\namplitude damping at p=1 fully relaxes |1>:")
print(apply_channel(excited, NoiseSpec("amplitude-damping", 1.0), 0).real)

# Noise inside a QCNN: channels fire after every convolution (and pooling)
# sub-layer, on every still-active qubit.
spec = AnsatzSpec(3, pooling=False)
circuit = build_qcnn(spec)
params = init_params(spec, np.random.default_rng(1))
for p in (0.0, 0.01, 0.05):
    rho = run_density(circuit, params, noise=NoiseSpec("depolarizing", p))
    purity = np.trace(rho @ rho).real
    print(f"depolarizing p={p:<5} purity of the 8-qubit output: {purity:.4f}")
