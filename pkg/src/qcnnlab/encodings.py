"""Classical-to-quantum feature maps: amplitude, angle, and dense-angle.

Amplitude encoding stores x / ||x|| as the 2**n amplitudes (zero-padded).
Angle encoding puts one value per qubit via Ry(x_i)|0>; dense-angle packs two
values per qubit as Ry(x_{N/2+j}) Rx(x_j) |0>, pairing the first half of the
vector with the second half. Angle-family inputs must lie in [0, pi); range
rescaling is the data layer's job.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import rx_matrix, ry_matrix

ENCODING_KINDS = ("amplitude", "angle", "dense-angle")


@dataclass(frozen=True)
class EncodingSpec:
    kind: str
    n_qubits: int

    def __post_init__(self):
        if self.kind not in ENCODING_KINDS:
            raise ValueError(f"unknown encoding kind {self.kind!r}")
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")

    def feature_dim(self) -> int:
        """Expected input dimension (maximum, for amplitude)."""
        if self.kind == "amplitude":
            return 1 << self.n_qubits
        if self.kind == "angle":
            return self.n_qubits
        return 2 * self.n_qubits


def amplitude_encode(x: np.ndarray, n_qubits: int) -> np.ndarray:
    """x / ||x||_2 zero-padded into 2**n amplitudes."""
    batch = _encode_batch_amplitude(np.atleast_2d(np.asarray(x, dtype=float)), n_qubits)
    return batch[0] if np.ndim(x) == 1 else batch


def _encode_batch_amplitude(x: np.ndarray, n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    if x.shape[1] > dim:
        raise ValueError(f"{x.shape[1]} features exceed 2**{n_qubits} amplitudes")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        bad = int(np.flatnonzero(norms == 0)[0])
        raise ValueError(f"all-zero feature vector (record {bad}) cannot be amplitude-encoded")
    out = np.zeros((x.shape[0], dim), dtype=complex)
    out[:, : x.shape[1]] = x / norms[:, None]
    return out


def _product_state(factors: np.ndarray) -> np.ndarray:
    """Tensor product of per-qubit (batch, n, 2) single-qubit states."""
    batch, n = factors.shape[0], factors.shape[1]
    state = np.ones((batch, 1), dtype=complex)
    for q in range(n):
        state = (state[:, :, None] * factors[:, q, None, :]).reshape(batch, -1)
    return state


def angle_encode(x: np.ndarray) -> np.ndarray:
    """tensor_i Ry(x_i)|0> = tensor_i (cos(x_i/2)|0> + sin(x_i/2)|1>)."""
    arr = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(arr < 0) or np.any(arr >= np.pi):
        raise ValueError("angle encoding requires components in [0, pi); rescale first")
    factors = np.stack([np.cos(arr / 2), np.sin(arr / 2)], axis=-1).astype(complex)
    state = _product_state(factors)
    return state[0] if np.ndim(x) == 1 else state


def dense_angle_encode(x: np.ndarray) -> np.ndarray:
    """Two values per qubit: qubit j gets Ry(x_{N/2+j}) Rx(x_j) |0>."""
    arr = np.atleast_2d(np.asarray(x, dtype=float))
    if arr.shape[1] % 2 != 0:
        raise ValueError("dense-angle encoding requires an even feature count")
    half = arr.shape[1] // 2
    zero = np.zeros(arr.shape[:1] + (half, 2, 1), dtype=complex)
    zero[..., 0, 0] = 1.0
    rot = ry_matrix(arr[:, half:]) @ rx_matrix(arr[:, :half])
    factors = (rot @ zero)[..., 0]
    state = _product_state(factors)
    return state[0] if np.ndim(x) == 1 else state


def encode(spec: EncodingSpec, x: np.ndarray) -> np.ndarray:
    """Dispatch on the encoding kind; validates the width against the spec."""
    arr = np.atleast_2d(np.asarray(x, dtype=float))
    if spec.kind == "amplitude":
        out = _encode_batch_amplitude(arr, spec.n_qubits)
    elif spec.kind == "angle":
        if arr.shape[1] != spec.n_qubits:
            raise ValueError(f"angle encoding on {spec.n_qubits} qubits needs exactly that many features")
        out = angle_encode(arr)
    else:
        if arr.shape[1] != 2 * spec.n_qubits:
            raise ValueError(f"dense-angle encoding on {spec.n_qubits} qubits needs {2 * spec.n_qubits} features")
        out = dense_angle_encode(arr)
    return out[0] if np.ndim(x) == 1 else out
