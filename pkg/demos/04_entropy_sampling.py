"""Monte-Carlo entanglement profiles of the convolution units and full QCNNs.

Convolution unit 2 (H, H, CZ + local rotations) creates a maximally entangled
pair no matter the angles, so its entropy is pinned at 1 bit. The others
spread over [0, 1]. Stacking layers drives the classification qubit's
entanglement up: information converges toward the readout.
"""

import numpy as np

from qcnnlab import AnsatzSpec, conv_unit_entropy_sample, qcnn_layerwise_entropy_sample

print("convolution-unit entropy over 2000 random parameter draws:")
print(f"{'unit':>4} {'mean':>7} {'std':>7} {'min':>7} {'max':>7}")
for conv_id in range(1, 10):
    s = conv_unit_entropy_sample(conv_id, 2000, seed=0)
    print(
        f"{conv_id:>4} {s.mean:>7.3f} {s.std:>7.3f} "
        f"{s.entropies.min():>7.3f} {s.entropies.max():>7.3f}"
    )

print("\nclassification-qubit entropy per layer (ansatz 8 no-pooling, 2000 draws):")
for sample in qcnn_layerwise_entropy_sample(AnsatzSpec(8, pooling=False), 2000, seed=0):
    print(f"  {sample.identifier}: mean {sample.mean:.3f}")
print("the per-layer means ramp up as convolution/pooling layers stack")
