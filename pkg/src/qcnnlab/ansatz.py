"""The 18 QCNN circuit templates: convolution units 1-9 x {pooling, no-pooling}.

Each layer applies one two-qubit convolution unit to adjacent pairs of the
still-active qubits arranged on a ring, in two sub-layers (even pairs, then
odd pairs including the wrap-around), with every application in the layer
sharing one parameter block (translational weight sharing). Pooling layers
apply a two-parameter controlled-rotation unit per pair and discard one qubit
of each pair; no-pooling layers discard the same qubits by bare partial
trace. The 8-qubit schedule keeps {0,2,4,6} after layer 1, {0,4} after
layer 2, and qubit 4 - the classification qubit - after layer 3.

Parameter counts per convolution unit: 2, 2, 4, 6, 6, 6, 10, 10, 15;
pooling adds 2 per layer. An 8-qubit circuit has 3 layers, so e.g. unit 9
gives 45 parameters without pooling and 51 with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Discard, GateOp, NoisePoint, Slot

CONV_UNIT_PARAMS = {1: 2, 2: 2, 3: 4, 4: 6, 5: 6, 6: 6, 7: 10, 8: 10, 9: 15}
POOL_UNIT_PARAMS = 2
SUPPORTED_QUBITS = (8, 10, 12)


@dataclass(frozen=True)
class AnsatzSpec:
    conv_id: int
    pooling: bool
    n_qubits: int = 8

    def __post_init__(self):
        if self.conv_id not in CONV_UNIT_PARAMS:
            raise ValueError(f"convolution unit id must be 1..9, got {self.conv_id}")
        if self.n_qubits not in SUPPORTED_QUBITS:
            raise ValueError(f"n_qubits must be one of {SUPPORTED_QUBITS}, got {self.n_qubits}")

    @property
    def name(self) -> str:
        return f"a{self.conv_id}-{'pool' if self.pooling else 'nopool'}"


def parse_ansatz_name(name: str, n_qubits: int = 8) -> AnsatzSpec:
    """Parse stable CLI names: a{1..9}-pool / a{1..9}-nopool."""
    try:
        head, tail = name.split("-", 1)
        conv_id = int(head.removeprefix("a"))
        pooling = {"pool": True, "nopool": False}[tail]
    except (ValueError, KeyError, IndexError):
        raise ValueError(f"unknown ansatz name {name!r}; expected a<1-9>-pool or a<1-9>-nopool")
    return AnsatzSpec(conv_id=conv_id, pooling=pooling, n_qubits=n_qubits)


def all_ansatz_specs(n_qubits: int = 8) -> list[AnsatzSpec]:
    return [
        AnsatzSpec(conv_id=c, pooling=p, n_qubits=n_qubits)
        for p in (True, False)
        for c in range(1, 10)
    ]


def conv_unit_ops(conv_id: int, a: int, b: int, slots: list[Slot]) -> list[GateOp]:
    """Gate sequence of one convolution unit on the qubit pair (a, b).

    slots must hold CONV_UNIT_PARAMS[conv_id] parameter references.
    """
    if conv_id not in CONV_UNIT_PARAMS:
        raise ValueError(f"convolution unit id must be 1..9, got {conv_id}")
    s = slots
    if len(s) != CONV_UNIT_PARAMS[conv_id]:
        raise ValueError(f"unit {conv_id} takes {CONV_UNIT_PARAMS[conv_id]} slots, got {len(s)}")
    if conv_id == 1:
        return [
            GateOp("ry", (a,), (s[0],)),
            GateOp("ry", (b,), (s[1],)),
            GateOp("cnot", (a, b)),
        ]
    if conv_id == 2:
        # Maximal entangler: the marginal entropy on product inputs stays at 1.
        return [
            GateOp("h", (a,)),
            GateOp("h", (b,)),
            GateOp("cz", (a, b)),
            GateOp("ry", (a,), (s[0],)),
            GateOp("ry", (b,), (s[1],)),
        ]
    if conv_id == 3:
        # Rz before Rx in time: the Rx(.)Rz(.) products are operator notation.
        # The reversed order would leave single-qubit x-coherence invisible to
        # the z readout (Rz fixes z, Rx only attenuates it).
        return [
            GateOp("rz", (a,), (s[2],)),
            GateOp("rz", (b,), (s[3],)),
            GateOp("rx", (a,), (s[0],)),
            GateOp("rx", (b,), (s[1],)),
            GateOp("cnot", (a, b)),
        ]
    if conv_id in (4, 5):
        kind = "crz" if conv_id == 4 else "crx"
        return [
            GateOp("ry", (a,), (s[0],)),
            GateOp("ry", (b,), (s[1],)),
            GateOp(kind, (b, a), (s[2],)),
            GateOp("ry", (a,), (s[3],)),
            GateOp("ry", (b,), (s[4],)),
            GateOp(kind, (a, b), (s[5],)),
        ]
    if conv_id == 6:
        # Real-valued SO(4)-style two-body entangler.
        return [
            GateOp("ry", (a,), (s[0],)),
            GateOp("ry", (b,), (s[1],)),
            GateOp("cnot", (a, b)),
            GateOp("ry", (a,), (s[2],)),
            GateOp("ry", (b,), (s[3],)),
            GateOp("cnot", (b, a)),
            GateOp("ry", (a,), (s[4],)),
            GateOp("ry", (b,), (s[5],)),
        ]
    if conv_id in (7, 8):
        # Per-qubit Rx(.)Rz(.) products applied as operators: Rz first in time.
        kind = "crz" if conv_id == 7 else "crx"
        return [
            GateOp("rz", (a,), (s[1],)),
            GateOp("rx", (a,), (s[0],)),
            GateOp("rz", (b,), (s[3],)),
            GateOp("rx", (b,), (s[2],)),
            GateOp(kind, (b, a), (s[4],)),
            GateOp("rz", (a,), (s[6],)),
            GateOp("rx", (a,), (s[5],)),
            GateOp("rz", (b,), (s[8],)),
            GateOp("rx", (b,), (s[7],)),
            GateOp(kind, (a, b), (s[9],)),
        ]
    # conv_id == 9: arbitrary SU(4) up to global phase.
    return [
        GateOp("u3", (a,), (s[0], s[1], s[2])),
        GateOp("u3", (b,), (s[3], s[4], s[5])),
        GateOp("cnot", (b, a)),
        GateOp("rz", (a,), (s[6],)),
        GateOp("ry", (b,), (s[7],)),
        GateOp("cnot", (a, b)),
        GateOp("ry", (b,), (s[8],)),
        GateOp("cnot", (b, a)),
        GateOp("u3", (a,), (s[9], s[10], s[11])),
        GateOp("u3", (b,), (s[12], s[13], s[14])),
    ]


def pooling_unit_ops(discard_q: int, keep_q: int, slots: list[Slot]) -> list[GateOp]:
    """Two-parameter pooling unit; the discard marker is added by the caller."""
    if len(slots) != POOL_UNIT_PARAMS:
        raise ValueError(f"pooling unit takes {POOL_UNIT_PARAMS} slots, got {len(slots)}")
    return [
        GateOp("crz", (discard_q, keep_q), (slots[0],)),
        GateOp("x", (discard_q,)),
        GateOp("crx", (discard_q, keep_q), (slots[1],)),
    ]


def build_conv_unit(conv_id: int) -> Circuit:
    """Standalone two-qubit circuit of one convolution unit (qubits 0, 1)."""
    if conv_id not in CONV_UNIT_PARAMS:
        raise ValueError(f"convolution unit id must be 1..9, got {conv_id}")
    n = CONV_UNIT_PARAMS[conv_id]
    return Circuit(2, conv_unit_ops(conv_id, 0, 1, [Slot(i) for i in range(n)]), n_params=n)


def build_pooling_unit() -> Circuit:
    """Standalone two-qubit pooling circuit (discard qubit 0, keep qubit 1)."""
    ops = pooling_unit_ops(0, 1, [Slot(0), Slot(1)]) + [Discard(0)]
    return Circuit(2, ops, n_params=POOL_UNIT_PARAMS)


@dataclass(frozen=True)
class LayerPlan:
    """Qubit pairings of one layer over the active qubits at its start."""

    active: tuple[int, ...]
    conv_pairs_a: tuple[tuple[int, int], ...]
    conv_pairs_b: tuple[tuple[int, int], ...]
    pool_pairs: tuple[tuple[int, int], ...]  # (discard, keep)


def layer_plans(n_qubits: int) -> list[LayerPlan]:
    """Halving schedule down to a single classification qubit.

    Even layers pair neighbours (keep the first of each pair, discard the
    second); an odd count carries its last qubit forward unpaired. The final
    two-qubit layer applies a single convolution and keeps the second qubit,
    so 8 qubits leave qubit 4 (the 5th) for readout.
    """
    if n_qubits not in SUPPORTED_QUBITS:
        raise ValueError(f"n_qubits must be one of {SUPPORTED_QUBITS}, got {n_qubits}")
    active = list(range(n_qubits))
    plans = []
    while len(active) > 1:
        k = len(active)
        start = tuple(active)
        if k == 2:
            conv_a = [(active[0], active[1])]
            conv_b = []
            pool = [(active[0], active[1])]
            active = [active[1]]
        else:
            conv_a = [(active[i], active[i + 1]) for i in range(0, k - 1, 2)]
            conv_b = [(active[i], active[i + 1]) for i in range(1, k - 1, 2)]
            conv_b.append((active[-1], active[0]))
            pool = [(active[i + 1], active[i]) for i in range(0, k - 1, 2)]
            active = active[::2]
        plans.append(
            LayerPlan(
                active=start,
                conv_pairs_a=tuple(conv_a),
                conv_pairs_b=tuple(conv_b),
                pool_pairs=tuple(pool),
            )
        )
    return plans


def param_count(spec: AnsatzSpec) -> int:
    layers = len(layer_plans(spec.n_qubits))
    per_layer = CONV_UNIT_PARAMS[spec.conv_id] + (POOL_UNIT_PARAMS if spec.pooling else 0)
    return layers * per_layer


def readout_qubit(spec: AnsatzSpec) -> int:
    """The single qubit left active at the end (qubit 4 for 8 qubits)."""
    alive = set(range(spec.n_qubits))
    for plan in layer_plans(spec.n_qubits):
        alive -= {d for d, _ in plan.pool_pairs}
    (q,) = alive
    return q


def build_qcnn(spec: AnsatzSpec) -> Circuit:
    """Assemble the full QCNN circuit for one of the 18 ansatz configurations."""
    n_conv = CONV_UNIT_PARAMS[spec.conv_id]
    ops: list = []
    next_slot = 0
    for layer_idx, plan in enumerate(layer_plans(spec.n_qubits), start=1):
        conv_slots = [Slot(next_slot + i) for i in range(n_conv)]
        next_slot += n_conv
        for a, b in plan.conv_pairs_a + plan.conv_pairs_b:
            ops.extend(conv_unit_ops(spec.conv_id, a, b, conv_slots))
        ops.append(NoisePoint(f"conv-layer-{layer_idx}"))
        if spec.pooling:
            pool_slots = [Slot(next_slot), Slot(next_slot + 1)]
            next_slot += POOL_UNIT_PARAMS
            for discard_q, keep_q in plan.pool_pairs:
                ops.extend(pooling_unit_ops(discard_q, keep_q, pool_slots))
            ops.append(NoisePoint(f"pool-layer-{layer_idx}"))
        for discard_q, _ in plan.pool_pairs:
            ops.append(Discard(discard_q))
    circuit = Circuit(spec.n_qubits, ops, n_params=next_slot)
    assert next_slot == param_count(spec)
    return circuit


def layer_snapshot_positions(spec: AnsatzSpec, circuit: Circuit) -> list[int]:
    """Op indices marking the end of each layer's gates (at its last marker)."""
    tag_prefix = "pool-layer-" if spec.pooling else "conv-layer-"
    return [
        i
        for i, op in enumerate(circuit.ops)
        if isinstance(op, NoisePoint) and op.tag.startswith(tag_prefix)
    ]


def init_params(spec: AnsatzSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform [0, 2pi) per slot."""
    return rng.uniform(0.0, 2.0 * np.pi, size=param_count(spec))
