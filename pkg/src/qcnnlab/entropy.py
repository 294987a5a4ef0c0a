"""Von Neumann entropy and Monte-Carlo entanglement sampling.

Entropies are in bits (log base 2). Convolution units are sampled on |00>
with parameters drawn uniformly from [0, 2pi); the entropy of the first
qubit's marginal measures the bipartite entanglement the unit creates. The
layer-wise study runs a full QCNN noiselessly from |0...0> and tracks the
classification qubit's marginal entropy after each layer.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import ansatz as qa
from .circuit import run_statevector_batch, single_qubit_marginals, zero_state
from .linalg import eig_hermitian_2x2, is_hermitian

EIG_CLAMP = 1e-12
_SAMPLE_CHUNK = 4096


@dataclass
class EntropySample:
    """Sampled entanglement entropies for one circuit identifier."""

    identifier: str
    entropies: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return int(self.entropies.size)

    @property
    def mean(self) -> float:
        return float(self.entropies.mean()) if self.n else 0.0

    @property
    def std(self) -> float:
        return float(self.entropies.std()) if self.n else 0.0

    def summary(self) -> dict:
        return {"id": self.identifier, "n": self.n, "mean": self.mean, "std": self.std}


def _binary_entropy(lam: np.ndarray) -> np.ndarray:
    """-lam log2 lam - (1-lam) log2 (1-lam) with 0 log 0 := 0, elementwise."""
    lam = np.clip(lam, 0.0, 1.0)
    out = np.zeros_like(lam)
    for p in (lam, 1.0 - lam):
        mask = p > 0.0
        out[mask] -= p[mask] * np.log2(p[mask])
    return out


def von_neumann_entropy(rho_reduced: np.ndarray) -> float:
    """Entropy in bits of a single-qubit density matrix."""
    rho = np.asarray(rho_reduced, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 reduced density matrix, got {rho.shape}")
    if not is_hermitian(rho):
        raise ValueError("reduced state is not Hermitian within tolerance")
    if abs(rho.trace().real - 1.0) > 1e-9 or abs(rho.trace().imag) > 1e-9:
        raise ValueError("reduced state does not have unit trace")
    hi, lo = eig_hermitian_2x2(rho)
    if lo < -1e-9 or hi > 1.0 + 1e-9:
        raise ValueError("reduced state has eigenvalues outside [0, 1]")
    return float(_binary_entropy(np.array([np.clip(hi, EIG_CLAMP, 1.0)]))[0])


def _marginal_entropies(states: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Batched single-qubit marginal entropies from pure states."""
    rhos = single_qubit_marginals(states, qubit, n_qubits)
    # Closed-form spectrum: trace is 1, so lambda = (1 +- sqrt(1 - 4 det)) / 2.
    det = (rhos[:, 0, 0] * rhos[:, 1, 1] - rhos[:, 0, 1] * rhos[:, 1, 0]).real
    disc = np.sqrt(np.clip(1.0 - 4.0 * det, 0.0, None))
    return _binary_entropy((1.0 + disc) / 2.0)


def conv_unit_entropy_sample(conv_id: int, n_samples: int, seed: int) -> EntropySample:
    """Entropy of qubit a's marginal after one convolution unit on |00>."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    circuit = qa.build_conv_unit(conv_id)
    rng = np.random.default_rng(seed)
    params = rng.uniform(0.0, 2.0 * np.pi, size=(n_samples, circuit.n_params))
    inputs = np.tile(zero_state(2), (n_samples, 1))
    out = run_statevector_batch(circuit, params, inputs)
    return EntropySample(f"conv{conv_id}", _marginal_entropies(out, 0, 2), seed)


def qcnn_layerwise_entropy_sample(
    spec: qa.AnsatzSpec, n_samples: int, seed: int
) -> list[EntropySample]:
    """Classification-qubit entropy after each layer, over random full-QCNN draws."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    circuit = qa.build_qcnn(spec)
    boundaries = qa.layer_snapshot_positions(spec, circuit)
    target = qa.readout_qubit(spec)
    rng = np.random.default_rng(seed)
    params = rng.uniform(0.0, 2.0 * np.pi, size=(n_samples, circuit.n_params))
    per_layer: list[list[np.ndarray]] = [[] for _ in boundaries]
    for lo in range(0, n_samples, _SAMPLE_CHUNK):
        chunk = params[lo : lo + _SAMPLE_CHUNK]
        states = np.tile(zero_state(spec.n_qubits), (chunk.shape[0], 1))
        prev = 0
        for li, pos in enumerate(boundaries):
            states = run_statevector_batch(circuit, chunk, states, start=prev, stop=pos)
            prev = pos
            per_layer[li].append(_marginal_entropies(states, target, spec.n_qubits))
    return [
        EntropySample(f"{spec.name}-layer{li + 1}", np.concatenate(vals), seed)
        for li, vals in enumerate(per_layer)
    ]


def export_histogram(sample: EntropySample, bins: int, path) -> None:
    """Write bin edges and counts over [0, 1] as CSV (bin_lo,bin_hi,count)."""
    if bins < 2:
        raise ValueError("need at least 2 bins")
    values = np.clip(sample.entropies, 0.0, 1.0)
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for i in range(bins):
            writer.writerow([f"{edges[i]:.12g}", f"{edges[i + 1]:.12g}", int(counts[i])])
