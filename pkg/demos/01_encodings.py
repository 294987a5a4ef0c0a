"""Three ways to put a classical vector into a quantum register.

Amplitude encoding packs 2**n values into n qubits; angle encoding spends one
qubit per value; dense-angle packs two values per qubit with an Rx then an Ry.
"""

import numpy as np

from qcnnlab import amplitude_encode, angle_encode, dense_angle_encode

x = np.array([3.0, 4.0])
print("amplitude_encode([3, 4], 1 qubit) ->", amplitude_encode(x, 1))
print("  (the 3-4-5 triangle normalizes to 0.6, 0.8)\n")

angles = np.array([np.pi / 2, np.pi / 2])
print("angle_encode([pi/2, pi/2]) ->", angle_encode(angles).round(4))
print("  (two equal superpositions; every basis amplitude is 1/2)\n")

pairs = np.array([np.pi, 0.0])
print("dense_angle_encode([pi, 0]) ->", dense_angle_encode(pairs).round(4))
print("  (a full Rx flip; one qubit holds both values)\n")

# A 256-dimensional feature vector needs only 8 qubits under amplitude
# encoding; angle encoding would need 256 of them.
features = np.random.default_rng(0).normal(size=256)
state = amplitude_encode(features, 8)
print(f"256 features -> {int(np.log2(state.size))} qubits, norm {np.linalg.norm(state):.12f}")
