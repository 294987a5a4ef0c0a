"""Parameterized circuit representation and dual-backend execution.

Two backends share one gate set:

- statevector: pure states as (..., 2**n) complex amplitude arrays; noise
  markers are ignored, discard markers are recorded but deferred (callers
  read marginals).
- density matrix: mixed states as 2**n x 2**n arrays; noise markers apply a
  Kraus channel to every still-active qubit; discarded qubits are traced out
  lazily when a marginal is requested.

Gate application is strided and in-place (O(2**n) per single-qubit gate),
never via full 2**n unitaries. The density backend treats rho as a state of
2n index bits (row bits then column bits) and conjugates both sides. A
leading batch axis is supported throughout, including per-sample gate angles.

Qubit 0 is the most significant bit of the basis index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import HADAMARD, PAULI_X, PAULI_Z

GATE_KINDS = {
    # kind: (number of qubits, number of angles)
    "h": (1, 0),
    "x": (1, 0),
    "rx": (1, 1),
    "ry": (1, 1),
    "rz": (1, 1),
    "u3": (1, 3),
    "cnot": (2, 0),
    "cz": (2, 0),
    "crx": (2, 1),
    "crz": (2, 1),
}

# Parameterized kinds whose probability response is a single-frequency
# trigonometric polynomial (exact two-term +-pi/2 shift rule). Controlled
# rotations carry an extra half frequency and need the four-term rule.
SINGLE_FREQ_KINDS = {"rx", "ry", "rz", "u3"}
CONTROLLED_ROT_KINDS = {"crx", "crz"}


@dataclass(frozen=True)
class Slot:
    """Reference to a trainable parameter slot; shared slots express weight sharing."""

    index: int


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple[int, ...]
    angles: tuple[float | Slot, ...] = ()


@dataclass(frozen=True)
class NoisePoint:
    """Marker where a noise channel fires on every still-active qubit."""

    tag: str


@dataclass(frozen=True)
class Discard:
    """Marker ending quantum operation on one qubit (traced out lazily)."""

    qubit: int


Op = GateOp | NoisePoint | Discard


class Circuit:
    """Immutable ordered gate program with parameter slots and markers."""

    def __init__(self, n_qubits: int, ops: list[Op] | tuple[Op, ...], n_params: int = 0):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if n_params < 0:
            raise ValueError("n_params must be nonnegative")
        self.n_qubits = int(n_qubits)
        self.n_params = int(n_params)
        self.ops: tuple[Op, ...] = tuple(ops)
        self._validate()

    def _validate(self) -> None:
        discarded: set[int] = set()
        seen_slots: set[int] = set()
        for op in self.ops:
            if isinstance(op, Discard):
                if not 0 <= op.qubit < self.n_qubits:
                    raise ValueError(f"discard of invalid qubit {op.qubit}")
                if op.qubit in discarded:
                    raise ValueError(f"qubit {op.qubit} discarded twice")
                discarded.add(op.qubit)
            elif isinstance(op, NoisePoint):
                continue
            elif isinstance(op, GateOp):
                if op.kind not in GATE_KINDS:
                    raise ValueError(f"unknown gate kind {op.kind!r}")
                nq, na = GATE_KINDS[op.kind]
                if len(op.qubits) != nq:
                    raise ValueError(f"{op.kind} takes {nq} qubit(s), got {op.qubits}")
                if len(op.angles) != na:
                    raise ValueError(f"{op.kind} takes {na} angle(s), got {len(op.angles)}")
                if len(set(op.qubits)) != len(op.qubits):
                    raise ValueError(f"repeated qubit in {op}")
                for q in op.qubits:
                    if not 0 <= q < self.n_qubits:
                        raise ValueError(f"qubit {q} out of range")
                    if q in discarded:
                        raise ValueError(f"gate on discarded qubit {q}")
                for a in op.angles:
                    if isinstance(a, Slot):
                        if not 0 <= a.index < self.n_params:
                            raise ValueError(f"slot {a.index} out of range")
                        seen_slots.add(a.index)
            else:
                raise TypeError(f"unsupported op {op!r}")
        missing = set(range(self.n_params)) - seen_slots
        if missing:
            raise ValueError(f"parameter slots never referenced: {sorted(missing)}")

    def gate_ops(self) -> list[tuple[int, GateOp]]:
        return [(i, op) for i, op in enumerate(self.ops) if isinstance(op, GateOp)]

    def dump(self) -> str:
        """One op per line, for debugging; not a stability-guaranteed format."""
        lines = []
        for op in self.ops:
            if isinstance(op, NoisePoint):
                lines.append(f"noise-point {op.tag}")
            elif isinstance(op, Discard):
                lines.append(f"discard q{op.qubit}")
            else:
                qs = "->".join(f"q{q}" for q in op.qubits)
                angs = ",".join(
                    f"slot{a.index}" if isinstance(a, Slot) else f"{a:.6g}" for a in op.angles
                )
                lines.append(f"{op.kind} {qs}" + (f" [{angs}]" if angs else ""))
        return "\n".join(lines)


def active_qubits(circuit: Circuit, upto: int | None = None) -> set[int]:
    """Qubits not yet discarded among circuit.ops[:upto]."""
    if upto is None:
        upto = len(circuit.ops)
    if not 0 <= upto <= len(circuit.ops):
        raise ValueError(f"position {upto} out of range")
    alive = set(range(circuit.n_qubits))
    for op in circuit.ops[:upto]:
        if isinstance(op, Discard):
            alive.discard(op.qubit)
    return alive


# ---------------------------------------------------------------------------
# Gate matrices


def rx_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m = np.empty(theta.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = c
    m[..., 0, 1] = -1j * s
    m[..., 1, 0] = -1j * s
    m[..., 1, 1] = c
    return m


def ry_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m = np.empty(theta.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = c
    m[..., 0, 1] = -s
    m[..., 1, 0] = s
    m[..., 1, 1] = c
    return m


def rz_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    ph = np.exp(-0.5j * theta)
    m = np.zeros(theta.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = ph
    m[..., 1, 1] = ph.conj()
    return m


def u3_matrix(theta, phi, lam) -> np.ndarray:
    """General single-qubit gate; equals Rz(phi) Ry(theta) Rz(lam) up to global phase."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    lam = np.asarray(lam, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m = np.empty(np.broadcast(theta, phi, lam).shape + (2, 2), dtype=complex)
    m[..., 0, 0] = c
    m[..., 0, 1] = -np.exp(1j * lam) * s
    m[..., 1, 0] = np.exp(1j * phi) * s
    m[..., 1, 1] = np.exp(1j * (phi + lam)) * c
    return m


def _local_matrix(op: GateOp, angles) -> np.ndarray:
    """2x2 matrix acting on the (last-listed) target qubit; for controlled
    kinds this is the controlled sub-block."""
    k = op.kind
    if k == "h":
        return HADAMARD
    if k == "x" or k == "cnot":
        return PAULI_X
    if k == "cz":
        return PAULI_Z
    if k == "rx" or k == "crx":
        return rx_matrix(angles[0])
    if k == "ry":
        return ry_matrix(angles[0])
    if k == "rz" or k == "crz":
        return rz_matrix(angles[0])
    if k == "u3":
        return u3_matrix(angles[0], angles[1], angles[2])
    raise ValueError(f"unknown gate kind {k!r}")


def resolve_angles(op: GateOp, params, overrides=None, op_index: int | None = None):
    """Bind an op's angles against a parameter vector.

    overrides maps (op_index, angle_index) -> absolute angle value and is used
    by the per-occurrence parameter-shift evaluation.
    """
    out = []
    for j, a in enumerate(op.angles):
        if overrides is not None and (op_index, j) in overrides:
            out.append(overrides[(op_index, j)])
        elif isinstance(a, Slot):
            out.append(params[..., a.index] if np.ndim(params) > 1 else params[a.index])
        else:
            out.append(a)
    return out


def gate_matrix(op: GateOp, params=()) -> np.ndarray:
    """Full unitary of one gate: 2x2, or 4x4 in (control, target) bit order."""
    for a in op.angles:
        if isinstance(a, Slot) and a.index >= len(params):
            raise ValueError(f"unresolved parameter slot {a.index}")
    angles = resolve_angles(op, np.asarray(params, dtype=float))
    local = _local_matrix(op, angles)
    if len(op.qubits) == 1:
        return local
    full = np.eye(4, dtype=complex)
    full[2:, 2:] = local
    return full


# ---------------------------------------------------------------------------
# Strided kernels, GEMM-backed. `state` is (..., 2**n); callers must reassign
# the result (it may be a new array or the input updated in place). A batched
# matrix (one per row of the leading axis) is supported for per-sample angles:
# mat (G, d, d) with state (G, ..., 2**n).


def _kernel(state: np.ndarray, mat: np.ndarray, post: int) -> np.ndarray:
    """Apply a d x d matrix along the bit axis whose trailing block is `post`.

    state is (..., flat) and contiguous; a batched mat (G, d, d) requires the
    leading state axis to be G. The strategy is chosen by block size: post==1
    turns into one skinny right-side GEMM, small d*post folds an identity on
    post into the matrix (per-block matmul dispatch would dominate), and wide
    post uses a plain broadcasted matmul.
    """
    batched = mat.ndim == 3
    mats = mat if batched else mat[None]
    g, d = mats.shape[0], mats.shape[-1]
    if post == 1:
        s = state.reshape(g, -1, d)
        out = np.matmul(s, mats.transpose(0, 2, 1))
        return out.reshape(state.shape)
    if d * post <= 32:
        wide = d * post
        if batched:
            big = np.einsum("gij,pq->gipjq", mats, np.eye(post)).reshape(g, wide, wide)
        else:
            big = np.kron(mats[0], np.eye(post))[None]
        out = np.matmul(state.reshape(g, -1, wide), big.transpose(0, 2, 1))
        return out.reshape(state.shape)
    out = np.matmul(mats[:, None], state.reshape(g, -1, d, post))
    return out.reshape(state.shape)


def _apply_1q(state: np.ndarray, mat: np.ndarray, q: int, n: int) -> np.ndarray:
    return _kernel(state, mat, 1 << (n - q - 1))


def _apply_ctrl(state: np.ndarray, mat: np.ndarray, qc: int, qt: int, n: int) -> np.ndarray:
    """Apply 2x2 mat on qt within the qc=1 subspace (updates state in place)."""
    p, r = (qc, qt) if qc < qt else (qt, qc)
    pre, mid, post = 1 << p, 1 << (r - p - 1), 1 << (n - r - 1)
    s = state.reshape(state.shape[:-1] + (pre, 2, mid, 2, post))
    is_x = mat.ndim == 2 and mat[0, 0] == 0 and mat[1, 1] == 0 and mat[0, 1] == 1 and mat[1, 0] == 1
    if qc < qt:
        if is_x:  # controlled-X: swap the target slices, no arithmetic
            flipped = s[..., 1, :, ::-1, :].copy()
            s[..., 1, :, :, :] = flipped
            return state
        block = s[..., 1, :, :, :]  # (..., pre, mid, 2, post); target at -2
        s[..., 1, :, :, :] = _kernel(np.ascontiguousarray(block), mat, post)
    else:
        if is_x:
            flipped = s[..., ::-1, :, 1, :].copy()
            s[..., :, :, 1, :] = flipped
            return state
        block = s[..., 1, :]  # (..., pre, 2, mid, post); target at -3
        moved = np.ascontiguousarray(np.moveaxis(block, -3, -2))
        s[..., 1, :] = np.moveaxis(_kernel(moved, mat, post), -2, -3)
    return state


def _apply_2ax(state: np.ndarray, mat4: np.ndarray, q1: int, q2: int, n: int) -> np.ndarray:
    """Apply a general 4x4 matrix on the (q1, q2) bit pair (superoperator use)."""
    swap = q1 > q2
    p, r = (q2, q1) if swap else (q1, q2)
    pre, mid, post = 1 << p, 1 << (r - p - 1), 1 << (n - r - 1)
    if swap:
        # mat4 is indexed by (b_q1, b_q2); relabel to the (b_p, b_r) layout.
        perm = (0, 2, 1, 3)
        mat4 = mat4[np.ix_(perm, perm)]
    s = state.reshape(state.shape[:-1] + (pre, 2, mid, 2, post))
    moved = np.ascontiguousarray(np.moveaxis(s, -3, -4))  # (..., pre, mid, b_p, b_r, post)
    t = _kernel(moved, mat4, post).reshape(moved.shape)
    return np.ascontiguousarray(np.moveaxis(t, -4, -3)).reshape(state.shape)


# ---------------------------------------------------------------------------
# Statevector backend


def zero_state(n_qubits: int) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def _apply_gate_sv(state: np.ndarray, op: GateOp, angles, n: int) -> np.ndarray:
    mat = _local_matrix(op, angles)
    if len(op.qubits) == 1:
        return _apply_1q(state, mat, op.qubits[0], n)
    return _apply_ctrl(state, mat, op.qubits[0], op.qubits[1], n)


def run_statevector_batch(
    circuit: Circuit,
    params,
    states: np.ndarray,
    angle_overrides: dict | None = None,
    start: int = 0,
    stop: int | None = None,
) -> np.ndarray:
    """Run ops[start:stop] on a (..., 2**n) batch of input states.

    Returns a new array. `params` may be a flat vector or a (..., n_params)
    batch matching the leading axes of `states` (per-sample angles).
    """
    n = circuit.n_qubits
    states = np.array(states, dtype=complex)
    if states.shape[-1] != 1 << n:
        raise ValueError(f"state dim {states.shape[-1]} != 2**{n}")
    params = np.asarray(params, dtype=float)
    if params.shape[-1:] != (circuit.n_params,) and circuit.n_params > 0:
        raise ValueError(f"expected {circuit.n_params} parameters, got {params.shape}")
    stop = len(circuit.ops) if stop is None else stop
    for idx in range(start, stop):
        op = circuit.ops[idx]
        if not isinstance(op, GateOp):
            continue  # noise points ignored; discards deferred
        angles = resolve_angles(op, params, angle_overrides, idx)
        states = _apply_gate_sv(states, op, angles, n)
    return states


def run_statevector(
    circuit: Circuit,
    params=(),
    input_state: np.ndarray | None = None,
    angle_overrides: dict | None = None,
) -> np.ndarray:
    """Apply each gate in order to a single pure state."""
    psi = zero_state(circuit.n_qubits) if input_state is None else np.asarray(input_state)
    if psi.ndim != 1:
        raise ValueError("input_state must be a vector; use run_statevector_batch for batches")
    return run_statevector_batch(circuit, params, psi, angle_overrides)


def prob_one(states: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """P(qubit = 1) marginal of (..., 2**n) amplitude arrays."""
    pre, post = 1 << qubit, 1 << (n_qubits - qubit - 1)
    s = states.reshape(states.shape[:-1] + (pre, 2, post))
    return np.sum(np.abs(s[..., 1, :]) ** 2, axis=(-2, -1))


def single_qubit_marginals(states: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Batched 2x2 reduced density matrices of one qubit from pure states."""
    pre, post = 1 << qubit, 1 << (n_qubits - qubit - 1)
    s = states.reshape((-1, pre, 2, post))
    return np.einsum("bpiq,bpjq->bij", s, s.conj())


# ---------------------------------------------------------------------------
# Density-matrix backend. rho is reshaped to a 4**n flat array whose first n
# index bits are rows and last n are columns; row qubit q lives on axis q and
# column qubit q on axis n+q, so the statevector kernels apply unchanged.


def zero_density(n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def _apply_gate_dm(flat: np.ndarray, op: GateOp, angles, n: int) -> np.ndarray:
    mat = _local_matrix(op, angles)
    if len(op.qubits) == 1:
        q = op.qubits[0]
        flat = _apply_1q(flat, mat, q, 2 * n)
        flat = _apply_1q(flat, mat.conj(), n + q, 2 * n)
    else:
        qc, qt = op.qubits
        flat = _apply_ctrl(flat, mat, qc, qt, 2 * n)
        flat = _apply_ctrl(flat, mat.conj(), n + qc, n + qt, 2 * n)
    return flat


def channel_superop(kraus: list[np.ndarray]) -> np.ndarray:
    """4x4 map on the (row bit, column bit) pair of one qubit: sum_k K (.) K^dag."""
    s = np.zeros((4, 4), dtype=complex)
    for k in kraus:
        s += np.kron(k, k.conj())
    return s


def run_density(
    circuit: Circuit,
    params=(),
    input_rho: np.ndarray | None = None,
    noise=None,
    angle_overrides: dict | None = None,
    stop: int | None = None,
) -> np.ndarray:
    """Conjugate rho through ops[:stop]; noise (a NoiseSpec) fires at every
    noise-point marker on every still-active qubit."""
    n = circuit.n_qubits
    dim = 1 << n
    rho = zero_density(n) if input_rho is None else np.asarray(input_rho, dtype=complex)
    if rho.shape[-2:] != (dim, dim):
        raise ValueError(f"density matrix must be {dim}x{dim}, got {rho.shape}")
    batch = rho.shape[:-2]
    flat = rho.reshape(batch + (dim * dim,)).copy()
    params = np.asarray(params, dtype=float)
    superop = None
    if noise is not None:
        from .noise import kraus_ops  # local import to avoid a cycle

        superop = channel_superop(kraus_ops(noise))
    alive = set(range(n))
    stop = len(circuit.ops) if stop is None else stop
    for idx in range(stop):
        op = circuit.ops[idx]
        if isinstance(op, Discard):
            alive.discard(op.qubit)
        elif isinstance(op, NoisePoint):
            if superop is not None:
                for q in sorted(alive):
                    flat = _apply_2ax(flat, superop, q, n + q, 2 * n)
        else:
            angles = resolve_angles(op, params, angle_overrides, idx)
            flat = _apply_gate_dm(flat, op, angles, n)
    return flat.reshape(batch + (dim, dim))


def evolve_observable(
    circuit: Circuit,
    params,
    observable: np.ndarray,
    noise=None,
    angle_overrides: dict | None = None,
) -> np.ndarray:
    """Heisenberg-picture pullback of an observable through the circuit.

    Returns O' with Tr[E(rho) O] = Tr[rho O'] for every input rho, where E is
    the (noisy) channel the circuit implements. Used for input-independent
    probability evaluation: p_i = <psi_i| O' |psi_i>.
    """
    n = circuit.n_qubits
    dim = 1 << n
    obs = np.asarray(observable, dtype=complex)
    if obs.shape != (dim, dim):
        raise ValueError(f"observable must be {dim}x{dim}, got {obs.shape}")
    params = np.asarray(params, dtype=float)
    superop_adj = None
    if noise is not None:
        from .noise import kraus_ops

        superop_adj = channel_superop([k.conj().T for k in kraus_ops(noise)])
    # Forward scan: active qubit set at each noise marker.
    alive = set(range(n))
    marker_alive: dict[int, list[int]] = {}
    for idx, op in enumerate(circuit.ops):
        if isinstance(op, Discard):
            alive.discard(op.qubit)
        elif isinstance(op, NoisePoint):
            marker_alive[idx] = sorted(alive)
    flat = obs.reshape(-1).copy()
    for idx in range(len(circuit.ops) - 1, -1, -1):
        op = circuit.ops[idx]
        if isinstance(op, Discard):
            continue
        if isinstance(op, NoisePoint):
            if superop_adj is not None:
                for q in marker_alive[idx]:
                    flat = _apply_2ax(flat, superop_adj, q, n + q, 2 * n)
            continue
        angles = resolve_angles(op, params, angle_overrides, idx)
        mat = _local_matrix(op, angles).conj().T
        if len(op.qubits) == 1:
            q = op.qubits[0]
            flat = _apply_1q(flat, mat, q, 2 * n)
            flat = _apply_1q(flat, mat.conj(), n + q, 2 * n)
        else:
            qc, qt = op.qubits
            flat = _apply_ctrl(flat, mat, qc, qt, 2 * n)
            flat = _apply_ctrl(flat, mat.conj(), n + qc, n + qt, 2 * n)
    return flat.reshape(dim, dim)


def expectation(observable: np.ndarray, states: np.ndarray) -> np.ndarray:
    """<psi|O|psi> for a (..., dim) batch of pure states (real part)."""
    applied = states @ observable.T
    return np.einsum("...i,...i->...", states.conj(), applied).real
