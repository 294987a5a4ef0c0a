"""Readout, binary cross-entropy, parameter-shift gradients, and training.

The model output is the probability of |1> on the classification qubit's
marginal. Noiseless forward passes run the statevector backend; noisy ones
use the density-matrix semantics, evaluated by pulling the readout projector
back through the channel (Heisenberg picture), which is exact and
input-independent, so one pullback serves a whole batch.

Gradients follow the chain rule through the loss with dp/dtheta from the
parameter-shift rule. A slot shared across convolution applications (weight
sharing) accumulates one shift-rule term per gate occurrence. Slots feeding
plain rotations use the two-term +-pi/2 rule; controlled-rotation slots use
the exact four-term rule, unless the paper-compatible two-term behaviour is
forced for replication.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass

import numpy as np

from . import ansatz as qa
from .circuit import (
    SINGLE_FREQ_KINDS,
    Circuit,
    Discard,
    GateOp,
    NoisePoint,
    Slot,
    _apply_1q,
    _apply_2ax,
    _apply_ctrl,
    _apply_gate_sv,
    _local_matrix,
    channel_superop,
    evolve_observable,
    expectation,
    prob_one,
    resolve_angles,
    run_statevector_batch,
    single_qubit_marginals,
)
from .data import FeatureRecord, records_to_arrays
from .encodings import EncodingSpec, encode
from .noise import NoiseSpec

PROB_CLIP = 1e-12
FD_STEP = 1e-4
# Four-term shift-rule coefficients for generators with {0, +-1/2} spectrum.
_SHIFT_C1 = (np.sqrt(2.0) + 1.0) / (4.0 * np.sqrt(2.0))
_SHIFT_C2 = (np.sqrt(2.0) - 1.0) / (4.0 * np.sqrt(2.0))

GRADIENT_MODES = ("parameter-shift", "finite-difference")


@dataclass(frozen=True)
class TrainConfig:
    encoding: EncodingSpec
    ansatz: qa.AnsatzSpec
    noise: NoiseSpec | None = None
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    gradient_mode: str = "parameter-shift"
    paper_shift_rule: bool = False  # force two-term shifts on controlled rotations

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValueError(f"gradient_mode must be one of {GRADIENT_MODES}")
        if self.encoding.n_qubits != self.ansatz.n_qubits:
            raise ValueError("encoding and ansatz qubit counts differ")

    def to_dict(self) -> dict:
        return {
            "model": "qcnn",
            "encoding": {"kind": self.encoding.kind, "n_qubits": self.encoding.n_qubits},
            "ansatz": {
                "name": self.ansatz.name,
                "conv_id": self.ansatz.conv_id,
                "pooling": self.ansatz.pooling,
                "n_qubits": self.ansatz.n_qubits,
            },
            "param_count": qa.param_count(self.ansatz),
            "noise": None if self.noise is None else {"kind": self.noise.kind, "p": self.noise.p},
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "gradient_mode": self.gradient_mode,
        }


@dataclass
class TrainReport:
    config: dict
    losses: list[float]
    final_params: np.ndarray
    train_acc: float
    test_acc: float
    wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "losses": [float(v) for v in self.losses],
            "final_params": [float(v) for v in np.asarray(self.final_params)],
            "train_acc": float(self.train_acc),
            "test_acc": float(self.test_acc),
            "wall_time_s": float(self.wall_time_s),
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


class QcnnModel:
    """Built circuit plus cached readout machinery for one configuration."""

    def __init__(self, config: TrainConfig):
        self.config = config
        self.circuit = qa.build_qcnn(config.ansatz)
        self.n_qubits = config.ansatz.n_qubits
        self.readout = qa.readout_qubit(config.ansatz)
        dim = 1 << self.n_qubits
        mask = (np.arange(dim) >> (self.n_qubits - 1 - self.readout)) & 1
        self.projector = np.diag(mask.astype(complex))
        # One entry per parameterized gate angle; shared slots repeat. The
        # unrolled twin gives every occurrence its own slot so whole groups of
        # shifted evaluations run as one batch with per-sample angles.
        self.occurrences: list[tuple[int, int, int, str]] = []
        unrolled_ops: list = []
        occ_slots: list[int] = []
        for idx, op in enumerate(self.circuit.ops):
            if not isinstance(op, GateOp):
                unrolled_ops.append(op)
                continue
            angles = []
            for aidx, a in enumerate(op.angles):
                if isinstance(a, Slot):
                    self.occurrences.append((idx, aidx, a.index, op.kind))
                    angles.append(Slot(len(occ_slots)))
                    occ_slots.append(a.index)
                else:
                    angles.append(a)
            unrolled_ops.append(GateOp(op.kind, op.qubits, tuple(angles)))
        self.unrolled = Circuit(self.n_qubits, unrolled_ops, len(occ_slots))
        self.occ_slots = np.array(occ_slots, dtype=int)
        self._scratch: dict[int, np.ndarray] = {}

    def scratch(self, shape: tuple[int, ...]) -> np.ndarray:
        """Reused complex work buffer (per model; not thread-safe)."""
        size = int(np.prod(shape))
        buf = self._scratch.get(size)
        if buf is None:
            buf = self._scratch[size] = np.empty(size, dtype=complex)
        return buf.reshape(shape)

    def encode_records(self, records: list[FeatureRecord]) -> tuple[np.ndarray, np.ndarray]:
        x, y = records_to_arrays(records)
        if np.any((y != 0) & (y != 1)):
            raise ValueError("labels must be 0 or 1")
        return encode(self.config.encoding, x), y

    def probs(self, params, states: np.ndarray, overrides: dict | None = None) -> np.ndarray:
        """P(readout = 1) for a batch of encoded input states."""
        if self.config.noise is None:
            out = run_statevector_batch(self.circuit, params, states, overrides)
            return prob_one(out, self.readout, self.n_qubits)
        obs = evolve_observable(
            self.circuit, params, self.projector, self.config.noise, overrides
        )
        return np.clip(expectation(obs, states), 0.0, 1.0)


def predict_prob(config: TrainConfig, params, x: np.ndarray) -> float:
    """Probability of class 1 for a single feature vector."""
    model = QcnnModel(config)
    states = encode(config.encoding, np.atleast_2d(np.asarray(x, dtype=float)))
    return float(model.probs(np.asarray(params, dtype=float), states)[0])


def bce_loss(probs, labels) -> float:
    """Binary cross-entropy with probabilities clipped away from {0, 1}."""
    p = np.asarray(probs, dtype=float)
    y = np.asarray(labels, dtype=float)
    if p.shape != y.shape or p.size == 0:
        raise ValueError("probs and labels must be equal-length and nonempty")
    p = np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _bce_dprob(probs, labels) -> np.ndarray:
    """dL/dp per sample (including the 1/M factor)."""
    p = np.clip(np.asarray(probs, dtype=float), PROB_CLIP, 1.0 - PROB_CLIP)
    y = np.asarray(labels, dtype=float)
    return -(y / p - (1.0 - y) / (1.0 - p)) / p.size


def sgd_step(params, grad, lr: float) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if params.shape != grad.shape:
        raise ValueError("params and grad must have equal length")
    return params - lr * grad


def _occurrence_shifts(kind: str, two_term_all: bool) -> list[tuple[float, float]]:
    """(shift, coefficient) pairs so that dp = sum_s c_s * p(theta + s)."""
    if kind in SINGLE_FREQ_KINDS or two_term_all:
        return [(np.pi / 2, 0.5), (-np.pi / 2, -0.5)]
    return [
        (np.pi / 2, _SHIFT_C1),
        (-np.pi / 2, -_SHIFT_C1),
        (3 * np.pi / 2, -_SHIFT_C2),
        (-3 * np.pi / 2, _SHIFT_C2),
    ]


# Keep work arrays well under 32 MiB (2M complex entries): larger blocks are
# served by mmap on glibc and page-fault on every gate application.
_NOISY_SAMPLE_CHUNK = 8


def _shift_gradient(model: QcnnModel, params: np.ndarray, states, labels) -> np.ndarray:
    """Noiseless shift-rule gradient with prefix sharing.

    All shifted evaluations ride in one growing batch: when the forward pass
    reaches a parameterized gate it forks the current base states, applies the
    shifted gate to the fork once, and from then on every fork advances
    through the remaining circuit together with the base (the gates after the
    fork point are identical across evaluations).
    """
    if model.config.noise is not None:
        return _noisy_shift_gradient(model, params, states, labels)
    two_term_all = model.config.paper_shift_rule
    occ_by_op: dict[int, list[tuple[int, int, str]]] = {}
    n_forks = 0
    for op_idx, aidx, slot, kind in model.occurrences:
        occ_by_op.setdefault(op_idx, []).append((aidx, slot, kind))
        n_forks += len(_occurrence_shifts(kind, two_term_all))
    grad = np.zeros_like(params)
    if n_forks == 0:
        return grad
    n_batch, dim = states.shape
    n = model.n_qubits
    buf = model.scratch((n_forks, n_batch, dim))
    base = np.array(states, dtype=complex)
    filled = 0
    meta: list[tuple[int, float]] = []  # (slot, coefficient) per fork row
    for idx, op in enumerate(model.circuit.ops):
        if not isinstance(op, GateOp):
            continue
        angles = resolve_angles(op, params)
        # Advance the forks created at earlier gates (base angles for this op).
        if filled:
            live = buf[:filled]
            out = _apply_gate_sv(live, op, angles, n)
            if out is not live:
                live[...] = out
        # Fork the pre-gate base once per shifted evaluation of this gate.
        for aidx, slot, kind in occ_by_op.get(idx, ()):
            for shift, coeff in _occurrence_shifts(kind, two_term_all):
                buf[filled] = base
                shifted = list(angles)
                shifted[aidx] = shifted[aidx] + shift
                fork = buf[filled : filled + 1]
                out = _apply_gate_sv(fork, op, shifted, n)
                if out is not fork:
                    fork[...] = out
                filled += 1
                meta.append((slot, coeff))
        base = _apply_gate_sv(base, op, angles, n)
    probs = prob_one(base, model.readout, model.n_qubits)
    dldp = _bce_dprob(probs, labels)
    contrib = prob_one(buf, model.readout, model.n_qubits) @ dldp  # (n_forks,)
    for fi, (slot, coeff) in enumerate(meta):
        grad[slot] += coeff * contrib[fi]
    return grad


def _noisy_shift_gradient(model: QcnnModel, params: np.ndarray, states, labels) -> np.ndarray:
    """Parameter-shift gradient under noise without re-running whole circuits.

    The readout projector is pulled back once through every circuit suffix
    (Heisenberg picture) while the batch densities advance forward once;
    a shifted evaluation then only conjugates the cached suffix observable
    through the single shifted gate and takes a Frobenius inner product.
    """
    from .noise import kraus_ops

    circuit = model.circuit
    noise = model.config.noise
    n = circuit.n_qubits
    dim = 1 << n
    n2 = 2 * n
    sup_fwd = channel_superop(kraus_ops(noise))
    sup_adj = channel_superop([k.conj().T for k in kraus_ops(noise)])
    alive = set(range(n))
    marker_alive: dict[int, list[int]] = {}
    for idx, op in enumerate(circuit.ops):
        if isinstance(op, Discard):
            alive.discard(op.qubit)
        elif isinstance(op, NoisePoint):
            marker_alive[idx] = sorted(alive)
    occ_by_op: dict[int, list[tuple[int, int, str]]] = {}
    for op_idx, aidx, slot, kind in model.occurrences:
        occ_by_op.setdefault(op_idx, []).append((aidx, slot, kind))

    def pull_back(obs_flat, op, angles):
        mat = _local_matrix(op, angles).conj().swapaxes(-1, -2)
        if len(op.qubits) == 1:
            q = op.qubits[0]
            obs_flat = _apply_1q(obs_flat, mat, q, n2)
            obs_flat = _apply_1q(obs_flat, mat.conj(), n + q, n2)
        else:
            qc, qt = op.qubits
            obs_flat = _apply_ctrl(obs_flat, mat, qc, qt, n2)
            obs_flat = _apply_ctrl(obs_flat, mat.conj(), n + qc, n + qt, n2)
        return obs_flat

    # Backward pass: cache the observable pulled through ops[idx+1:].
    suffix: dict[int, np.ndarray] = {}
    obs = model.projector.reshape(-1).copy()
    for idx in range(len(circuit.ops) - 1, -1, -1):
        op = circuit.ops[idx]
        if idx in occ_by_op:
            suffix[idx] = obs.copy()
        if isinstance(op, Discard):
            continue
        if isinstance(op, NoisePoint):
            for q in marker_alive[idx]:
                obs = _apply_2ax(obs, sup_adj, q, n + q, n2)
        elif isinstance(op, GateOp):
            obs = pull_back(obs, op, resolve_angles(op, params))

    p_base = np.clip(expectation(obs.reshape(dim, dim), states), 0.0, 1.0)
    dldp = _bce_dprob(p_base, labels)
    grad = np.zeros_like(params)
    two_term_all = model.config.paper_shift_rule

    # Pre-pull every shifted suffix observable once (shared by sample chunks);
    # the shifts of one occurrence ride as one batch with per-row angles.
    shifted_all: dict[int, list[tuple[int, float, np.ndarray]]] = {}
    for idx, occs in occ_by_op.items():
        op = circuit.ops[idx]
        base_angles = resolve_angles(op, params)
        entries = []
        for aidx, slot, kind in occs:
            shifts = _occurrence_shifts(kind, two_term_all)
            angles = list(base_angles)
            angles[aidx] = np.array([angles[aidx] + sh for sh, _ in shifts])
            obs_batch = pull_back(np.tile(suffix[idx], (len(shifts), 1)), op, angles)
            for row, (_, coeff) in enumerate(shifts):
                entries.append((slot, coeff, obs_batch[row].conj()))
        shifted_all[idx] = entries

    # Forward pass per sample chunk: advance densities; contract where cached.
    for lo in range(0, len(labels), _NOISY_SAMPLE_CHUNK):
        chunk = states[lo : lo + _NOISY_SAMPLE_CHUNK]
        weights = dldp[lo : lo + _NOISY_SAMPLE_CHUNK]
        dens = np.einsum("bi,bj->bij", chunk, chunk.conj()).reshape(chunk.shape[0], dim * dim)
        for idx, op in enumerate(circuit.ops):
            if idx in shifted_all:
                for slot, coeff, obs_conj in shifted_all[idx]:
                    # Tr[F O'] with Hermitian O' equals Re <F, conj(O')>.
                    p = np.clip((dens @ obs_conj).real, 0.0, 1.0)
                    grad[slot] += coeff * float(np.dot(weights, p))
            if isinstance(op, Discard):
                continue
            if isinstance(op, NoisePoint):
                for q in marker_alive[idx]:
                    dens = _apply_2ax(dens, sup_fwd, q, n + q, n2)
            elif isinstance(op, GateOp):
                angles = resolve_angles(op, params)
                mat = _local_matrix(op, angles)
                if len(op.qubits) == 1:
                    q = op.qubits[0]
                    dens = _apply_1q(dens, mat, q, n2)
                    dens = _apply_1q(dens, mat.conj(), n + q, n2)
                else:
                    qc, qt = op.qubits
                    dens = _apply_ctrl(dens, mat, qc, qt, n2)
                    dens = _apply_ctrl(dens, mat.conj(), n + qc, n + qt, n2)
    return grad


def _fd_gradient(model: QcnnModel, params: np.ndarray, states, labels) -> np.ndarray:
    grad = np.zeros_like(params)
    for j in range(params.size):
        shifted = params.copy()
        shifted[j] = params[j] + FD_STEP
        hi = bce_loss(model.probs(shifted, states), labels)
        shifted[j] = params[j] - FD_STEP
        lo = bce_loss(model.probs(shifted, states), labels)
        grad[j] = (hi - lo) / (2.0 * FD_STEP)
    return grad


def gradient(config: TrainConfig, params, batch: list[FeatureRecord]) -> np.ndarray:
    """dL/dtheta over a batch, by parameter shift or central finite differences."""
    if not batch:
        raise ValueError("gradient requires a nonempty batch")
    model = QcnnModel(config)
    states, labels = model.encode_records(batch)
    return _gradient_arrays(model, np.asarray(params, dtype=float), states, labels)


def _gradient_arrays(model: QcnnModel, params, states, labels) -> np.ndarray:
    if model.config.gradient_mode == "finite-difference":
        return _fd_gradient(model, params, states, labels)
    return _shift_gradient(model, params, states, labels)


def evaluate(config: TrainConfig, params, records: list[FeatureRecord]):
    """(accuracy, per-sample probabilities); p >= 0.5 classifies as 1."""
    if not records:
        raise ValueError("evaluate requires a nonempty dataset")
    model = QcnnModel(config)
    states, labels = model.encode_records(records)
    probs = model.probs(np.asarray(params, dtype=float), states)
    predicted = (probs >= 0.5).astype(int)
    return float(np.mean(predicted == labels)), probs


def train(
    config: TrainConfig,
    train_set: list[FeatureRecord],
    test_set: list[FeatureRecord],
) -> TrainReport:
    """Mini-batch gradient descent; deterministic given the config seed."""
    if not train_set or not test_set:
        raise ValueError("train and test sets must be nonempty")
    started = time.perf_counter()
    model = QcnnModel(config)
    train_states, train_labels = model.encode_records(train_set)
    test_states, test_labels = model.encode_records(test_set)
    rng = np.random.default_rng(config.seed)
    params = qa.init_params(config.ansatz, rng)
    losses: list[float] = []
    n = len(train_set)
    for _ in range(config.epochs):
        losses.append(bce_loss(model.probs(params, train_states), train_labels))
        order = rng.permutation(n)
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            grad = _gradient_arrays(model, params, train_states[idx], train_labels[idx])
            params = sgd_step(params, grad, config.learning_rate)
    train_probs = model.probs(params, train_states)
    test_probs = model.probs(params, test_states)
    train_acc = float(np.mean((train_probs >= 0.5).astype(int) == train_labels))
    test_acc = float(np.mean((test_probs >= 0.5).astype(int) == test_labels))
    return TrainReport(
        config=config.to_dict(),
        losses=losses,
        final_params=params,
        train_acc=train_acc,
        test_acc=test_acc,
        wall_time_s=time.perf_counter() - started,
    )


def export_intermediate_states(
    config: TrainConfig, params, records: list[FeatureRecord], layer: int, path
) -> None:
    """Per-sample single-qubit marginals (z-expectation and p1) of the qubits
    still active after the given layer, as CSV for external embedding tools."""
    model = QcnnModel(config)
    circuit = model.circuit
    boundaries = qa.layer_snapshot_positions(config.ansatz, circuit)
    plans = qa.layer_plans(config.ansatz.n_qubits)
    if not 1 <= layer <= len(boundaries):
        raise ValueError(f"layer must be in 1..{len(boundaries)}")
    surviving = (
        list(plans[layer].active) if layer < len(plans) else [qa.readout_qubit(config.ansatz)]
    )
    states, labels = model.encode_records(records)
    params = np.asarray(params, dtype=float)
    n = config.ansatz.n_qubits
    stop = boundaries[layer - 1] + 1  # include the layer's trailing noise marker
    if config.noise is None:
        out = run_statevector_batch(circuit, params, states, stop=stop)
        marginals = {q: single_qubit_marginals(out, q, n) for q in surviving}
    else:
        from .circuit import run_density

        rho = np.einsum("bi,bj->bij", states, states.conj())
        out = run_density(circuit, params, rho, noise=config.noise, stop=stop)
        marginals = {}
        for q in surviving:
            pre, post = 1 << q, 1 << (n - q - 1)
            t = out.reshape(-1, pre, 2, post, pre, 2, post)
            marginals[q] = np.einsum("bpiqpjq->bij", t)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["label"]
        for q in surviving:
            header += [f"q{q}_z", f"q{q}_p1"]
        writer.writerow(header)
        for i in range(len(records)):
            row: list = [int(labels[i])]
            for q in surviving:
                m = marginals[q][i]
                p1 = float(m[1, 1].real)
                row += [f"{1.0 - 2.0 * p1:.12g}", f"{p1:.12g}"]
            writer.writerow(row)


@dataclass
class GradientVarianceProbe:
    variances: np.ndarray
    min: float
    median: float


def gradient_variance_probe(
    spec: qa.AnsatzSpec, n_draws: int, seed: int
) -> GradientVarianceProbe:
    """Var[dL/dtheta_k] per slot over random parameter draws on a fixed input.

    Diagnostic only; uses the zero state with label 1 as the probe sample.
    """
    if n_draws < 2:
        raise ValueError("need at least 2 draws to estimate a variance")
    config = TrainConfig(
        encoding=EncodingSpec("amplitude", spec.n_qubits),
        ansatz=spec,
        epochs=0,
    )
    model = QcnnModel(config)
    states = np.zeros((1, 1 << spec.n_qubits), dtype=complex)
    states[0, 0] = 1.0
    labels = np.array([1])
    rng = np.random.default_rng(seed)
    grads = np.empty((n_draws, qa.param_count(spec)))
    for i in range(n_draws):
        params = qa.init_params(spec, rng)
        grads[i] = _shift_gradient(model, params, states, labels)
    variances = grads.var(axis=0)
    return GradientVarianceProbe(
        variances=variances,
        min=float(variances.min()),
        median=float(np.median(variances)),
    )
