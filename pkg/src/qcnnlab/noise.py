"""Single-qubit Kraus channels and their insertion protocol.

Four channels with a single intensity p: bit flip (1-p) rho + p X rho X,
phase flip (1-p) rho + p Z rho Z, amplitude damping (|1> decays to |0> with
probability p), and depolarizing (1-p) rho + p/3 sum_i sigma_i rho sigma_i.

During a noisy run the channel fires at each noise-point marker,
independently on every still-active qubit. Pooling ansatzes carry markers
after both the convolution and pooling sub-layers; no-pooling ansatzes only
after the convolution sub-layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, NoisePoint, _apply_1q
from .linalg import IDENTITY_2, PAULI_X, PAULI_Y, PAULI_Z

NOISE_KINDS = ("bit-flip", "phase-flip", "amplitude-damping", "depolarizing")

# Short channel names used on the command line.
CLI_NOISE_NAMES = {
    "bitflip": "bit-flip",
    "phaseflip": "phase-flip",
    "ampdamp": "amplitude-damping",
    "depol": "depolarizing",
}


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"noise intensity must be in [0, 1], got {self.p}")


def parse_noise_name(name: str) -> str:
    if name in CLI_NOISE_NAMES:
        return CLI_NOISE_NAMES[name]
    if name in NOISE_KINDS:
        return name
    raise ValueError(f"unknown noise name {name!r}")


def kraus_ops(spec: NoiseSpec) -> list[np.ndarray]:
    """Kraus operators of the channel; sum_k K^dag K = I."""
    p = spec.p
    if spec.kind == "bit-flip":
        return [np.sqrt(1 - p) * IDENTITY_2, np.sqrt(p) * PAULI_X]
    if spec.kind == "phase-flip":
        return [np.sqrt(1 - p) * IDENTITY_2, np.sqrt(p) * PAULI_Z]
    if spec.kind == "amplitude-damping":
        k0 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
        k1 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
        return [k0, k1]
    if spec.kind == "depolarizing":
        return [
            np.sqrt(1 - p) * IDENTITY_2,
            np.sqrt(p / 3) * PAULI_X,
            np.sqrt(p / 3) * PAULI_Y,
            np.sqrt(p / 3) * PAULI_Z,
        ]
    raise ValueError(f"unknown noise kind {spec.kind!r}")


def apply_channel(rho: np.ndarray, spec: NoiseSpec, qubit: int) -> np.ndarray:
    """sum_k (K_k on qubit) rho (K_k on qubit)^dag; trace preserving."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[-1]
    n = dim.bit_length() - 1
    if rho.shape[-2:] != (dim, dim) or (1 << n) != dim:
        raise ValueError(f"density matrix shape {rho.shape} is not 2^n x 2^n")
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} is not an active qubit of a {n}-qubit state")
    out = np.zeros_like(rho)
    for k in kraus_ops(spec):
        term = rho.reshape(rho.shape[:-2] + (dim * dim,)).copy()
        term = _apply_1q(term, k, qubit, 2 * n)
        term = _apply_1q(term, k.conj(), n + qubit, 2 * n)
        out += term.reshape(rho.shape)
    return out


def noise_points(ansatz_spec) -> list[str]:
    """Marker tags where a channel fires for one ansatz, in circuit order.

    Pooling ansatzes fire after both the convolution and pooling sub-layers;
    no-pooling ansatzes only after the convolution sub-layer. Built circuits
    carry exactly the markers that fire, so this lists the circuit's markers.
    """
    from .ansatz import build_qcnn

    circuit = ansatz_spec if isinstance(ansatz_spec, Circuit) else build_qcnn(ansatz_spec)
    return [op.tag for op in circuit.ops if isinstance(op, NoisePoint)]
