import numpy as np
import pytest

from qcnnlab.ansatz import (
    CONV_UNIT_PARAMS,
    AnsatzSpec,
    all_ansatz_specs,
    build_conv_unit,
    build_pooling_unit,
    build_qcnn,
    init_params,
    layer_plans,
    param_count,
    parse_ansatz_name,
    readout_qubit,
)
from qcnnlab.circuit import (
    Discard,
    GateOp,
    Slot,
    active_qubits,
    gate_matrix,
    prob_one,
    run_density,
    run_statevector,
    run_statevector_batch,
    zero_state,
)
from qcnnlab.entropy import von_neumann_entropy
from qcnnlab.linalg import PAULI_X, kron, partial_trace, projector

TABLE_POOLING = [12, 12, 18, 24, 24, 24, 36, 36, 51]
TABLE_NO_POOLING = [6, 6, 12, 18, 18, 18, 30, 30, 45]


class TestParamCounts:
    def test_conv_unit_slots(self):
        assert [CONV_UNIT_PARAMS[i] for i in range(1, 10)] == [2, 2, 4, 6, 6, 6, 10, 10, 15]
        assert build_conv_unit(9).n_params == 15

    def test_full_table_at_8_qubits(self):
        pooling = [param_count(AnsatzSpec(c, True)) for c in range(1, 10)]
        no_pooling = [param_count(AnsatzSpec(c, False)) for c in range(1, 10)]
        assert pooling == TABLE_POOLING
        assert no_pooling == TABLE_NO_POOLING

    @pytest.mark.parametrize("conv_id,expected", [(3, 12), (9, 51), (1, 6)])
    def test_spot_values(self, conv_id, expected):
        pooling = conv_id == 9
        assert param_count(AnsatzSpec(conv_id, pooling)) == expected

    def test_pooling_delta_is_two_per_layer(self):
        for c in range(1, 10):
            delta = param_count(AnsatzSpec(c, True)) - param_count(AnsatzSpec(c, False))
            assert delta == 2 * len(layer_plans(8))

    def test_built_circuit_matches_param_count(self):
        for spec in all_ansatz_specs():
            assert build_qcnn(spec).n_params == param_count(spec)


class TestConvUnits:
    def test_conv1_identity_at_zero_angles(self):
        circuit = build_conv_unit(1)
        out = run_statevector(circuit, np.zeros(2))
        assert np.allclose(out, zero_state(2))

    def test_conv2_pins_entropy_at_one(self):
        circuit = build_conv_unit(2)
        rng = np.random.default_rng(0)
        for _ in range(20):
            out = run_statevector(circuit, rng.uniform(0, 2 * np.pi, 2))
            rho = partial_trace(projector(out), 2, {0})
            assert abs(von_neumann_entropy(rho) - 1.0) < 1e-9

    def test_units_are_unitary_for_random_draws(self):
        rng = np.random.default_rng(1)
        basis = np.eye(4, dtype=complex)
        for conv_id in range(1, 10):
            circuit = build_conv_unit(conv_id)
            for _ in range(25):
                params = rng.uniform(0, 2 * np.pi, circuit.n_params)
                cols = [run_statevector(circuit, params, b) for b in basis]
                u = np.stack(cols, axis=1)
                assert np.abs(u @ u.conj().T - np.eye(4)).max() < 1e-10

    def test_invalid_id_rejected(self):
        with pytest.raises(ValueError):
            build_conv_unit(0)
        with pytest.raises(ValueError):
            build_conv_unit(10)


class TestPoolingUnit:
    def test_zero_angles_reduce_to_x_then_trace(self):
        circuit = build_pooling_unit()
        rng = np.random.default_rng(2)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a @ a.conj().T
        rho /= rho.trace()
        pooled = run_density(circuit, np.zeros(2), rho)
        kept = partial_trace(pooled, 2, {1})
        x0 = kron(PAULI_X, np.eye(2))
        expected = partial_trace(x0 @ rho @ x0.conj().T, 2, {1})
        assert np.abs(kept - expected).max() < 1e-12

    def test_trace_preserved(self):
        circuit = build_pooling_unit()
        rng = np.random.default_rng(3)
        for _ in range(10):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = a @ a.conj().T
            rho /= rho.trace()
            pooled = run_density(circuit, rng.uniform(0, 2 * np.pi, 2), rho)
            kept = partial_trace(pooled, 2, {1})
            assert abs(kept.trace() - 1.0) < 1e-10

    def test_pooling_params_total_six_over_three_layers(self):
        spec = AnsatzSpec(1, pooling=True)
        assert param_count(spec) - param_count(AnsatzSpec(1, pooling=False)) == 6


class TestSchedule:
    def test_discard_sets_for_8_qubits(self):
        circuit = build_qcnn(AnsatzSpec(3, True))
        seen = []
        alive = set(range(8))
        for op in circuit.ops:
            if isinstance(op, Discard):
                alive = alive - {op.qubit}
                seen.append(frozenset(alive))
        distinct = sorted(set(seen), key=lambda s: -len(s))
        assert {0, 2, 4, 6} in distinct
        assert {0, 4} in distinct
        assert {4} in distinct
        assert active_qubits(circuit) == {4}

    def test_readout_qubit_is_4(self):
        assert readout_qubit(AnsatzSpec(1, True)) == 4
        assert readout_qubit(AnsatzSpec(9, False)) == 4

    def test_larger_registers_reduce_to_one_qubit(self):
        for n in (10, 12):
            spec = AnsatzSpec(2, True, n_qubits=n)
            circuit = build_qcnn(spec)
            assert len(active_qubits(circuit)) == 1

    def test_ring_sublayers_cover_all_pairs(self):
        plans = layer_plans(8)
        first = plans[0]
        assert first.conv_pairs_a == ((0, 1), (2, 3), (4, 5), (6, 7))
        assert first.conv_pairs_b == ((1, 2), (3, 4), (5, 6), (7, 0))
        assert first.pool_pairs == ((1, 0), (3, 2), (5, 4), (7, 6))

    def test_unsupported_qubit_count(self):
        with pytest.raises(ValueError):
            layer_plans(6)
        with pytest.raises(ValueError):
            AnsatzSpec(1, True, n_qubits=9)


class TestWeightSharing:
    def test_slots_shared_within_layer_only(self):
        circuit = build_qcnn(AnsatzSpec(4, True))
        plans = layer_plans(8)
        n_conv = CONV_UNIT_PARAMS[4]
        layer_of_slot = {}
        for li in range(len(plans)):
            offset = li * (n_conv + 2)
            for j in range(n_conv + 2):
                layer_of_slot[offset + j] = li
        # Count gate occurrences per slot; conv slots appear once per pair.
        per_slot: dict[int, int] = {}
        for op in circuit.ops:
            if isinstance(op, GateOp):
                for a in op.angles:
                    if isinstance(a, Slot):
                        per_slot[a.index] = per_slot.get(a.index, 0) + 1
        for li, plan in enumerate(plans):
            n_pairs = len(plan.conv_pairs_a) + len(plan.conv_pairs_b)
            offset = li * (n_conv + 2)
            for j in range(n_conv):
                assert per_slot[offset + j] == n_pairs
            for j in range(n_conv, n_conv + 2):
                assert per_slot[offset + j] == len(plan.pool_pairs)

    def test_perturbing_one_slot_only_changes_its_layer(self):
        spec = AnsatzSpec(1, False)
        circuit = build_qcnn(spec)
        rng = np.random.default_rng(4)
        params = init_params(spec, rng)
        # Layer-3 slots (indices 4, 5) act after the layer-1/2 gates; the
        # state right before the first layer-3 rotation must be unchanged
        # when they move.
        shifted = params.copy()
        shifted[4] += 1.0
        boundary = min(
            i
            for i, op in enumerate(circuit.ops)
            if isinstance(op, GateOp)
            and any(isinstance(a, Slot) and a.index >= 4 for a in op.angles)
        )
        a = run_statevector_batch(circuit, params, zero_state(8), stop=boundary)
        b = run_statevector_batch(circuit, shifted, zero_state(8), stop=boundary)
        assert np.abs(a - b).max() < 1e-12
        full_a = run_statevector(circuit, params)
        full_b = run_statevector(circuit, shifted)
        assert np.abs(full_a - full_b).max() > 1e-6


class TestNames:
    def test_round_trip(self):
        for spec in all_ansatz_specs():
            assert parse_ansatz_name(spec.name) == spec

    def test_bad_names(self):
        for bad in ("a0-pool", "a10-pool", "a3-dense", "b3-pool", "a3"):
            with pytest.raises(ValueError):
                parse_ansatz_name(bad)


class TestEndToEndExamples:
    def test_a1_nopool_zero_params_readout_zero(self):
        spec = AnsatzSpec(1, False)
        circuit = build_qcnn(spec)
        out = run_statevector(circuit, np.zeros(circuit.n_params))
        assert prob_one(out, readout_qubit(spec), 8) < 1e-12
