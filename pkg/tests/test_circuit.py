import numpy as np
import pytest

from qcnnlab.ansatz import AnsatzSpec, build_qcnn, init_params
from qcnnlab.circuit import (
    Circuit,
    Discard,
    GateOp,
    NoisePoint,
    Slot,
    active_qubits,
    gate_matrix,
    prob_one,
    run_density,
    run_statevector,
    run_statevector_batch,
    rx_matrix,
    rz_matrix,
    zero_state,
)
from qcnnlab.linalg import projector, trace_distance


def dense_unitary(circuit, params=()):
    """Independent oracle: build the full 2**n unitary via basis-state embedding."""
    n = circuit.n_qubits
    dim = 1 << n
    total = np.eye(dim, dtype=complex)
    for op in circuit.ops:
        if not isinstance(op, GateOp):
            continue
        u = gate_matrix(op, params)
        k = len(op.qubits)
        full = np.zeros((dim, dim), dtype=complex)
        for col in range(dim):
            bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
            sub_in = 0
            for q in op.qubits:
                sub_in = (sub_in << 1) | bits[q]
            for sub_out in range(1 << k):
                amp = u[sub_out, sub_in]
                if amp == 0:
                    continue
                out_bits = bits[:]
                tmp = sub_out
                for q in reversed(op.qubits):
                    out_bits[q] = tmp & 1
                    tmp >>= 1
                row = 0
                for b in out_bits:
                    row = (row << 1) | b
                full[row, col] += amp
        total = full @ total
    return total


class TestGateMatrix:
    def test_ry_zero_is_identity(self):
        assert np.allclose(gate_matrix(GateOp("ry", (0,), (0.0,))), np.eye(2))

    def test_ry_pi(self):
        assert np.allclose(gate_matrix(GateOp("ry", (0,), (np.pi,))), [[0, -1], [1, 0]])

    def test_u3_matches_composed_product(self):
        # ZXZXZ decomposition oracle, up to the global phase e^{i(phi+lam)/2}.
        rng = np.random.default_rng(0)
        for _ in range(10):
            theta, phi, lam = rng.uniform(-np.pi, np.pi, 3)
            got = gate_matrix(GateOp("u3", (0,), (theta, phi, lam)))
            product = (
                rz_matrix(phi)
                @ rx_matrix(-np.pi / 2)
                @ rz_matrix(theta)
                @ rx_matrix(np.pi / 2)
                @ rz_matrix(lam)
            )
            assert np.allclose(got, np.exp(0.5j * (phi + lam)) * product)

    def test_unresolved_slot_rejected(self):
        with pytest.raises(ValueError):
            gate_matrix(GateOp("ry", (0,), (Slot(3),)), params=(0.1,))

    def test_controlled_matrix_layout(self):
        crz = gate_matrix(GateOp("crz", (0, 1), (1.0,)))
        assert np.allclose(crz[:2, :2], np.eye(2))
        assert np.allclose(crz[2:, 2:], rz_matrix(1.0))


class TestCircuitValidation:
    def test_gate_on_discarded_qubit_rejected_at_build_time(self):
        ops = [Discard(1), GateOp("h", (1,))]
        with pytest.raises(ValueError, match="discarded"):
            Circuit(2, ops)

    def test_unreferenced_slot_rejected(self):
        with pytest.raises(ValueError, match="never referenced"):
            Circuit(1, [GateOp("ry", (0,), (Slot(0),))], n_params=2)

    def test_angle_arity_enforced(self):
        with pytest.raises(ValueError):
            Circuit(1, [GateOp("ry", (0,), (0.1, 0.2))])

    def test_control_equals_target_rejected(self):
        with pytest.raises(ValueError):
            Circuit(2, [GateOp("cnot", (1, 1))])

    def test_dump_lists_every_op(self):
        c = Circuit(
            2,
            [GateOp("ry", (0,), (Slot(0),)), NoisePoint("conv-layer-1"), Discard(1)],
            n_params=1,
        )
        lines = c.dump().splitlines()
        assert lines == ["ry q0 [slot0]", "noise-point conv-layer-1", "discard q1"]


class TestStatevector:
    def test_empty_circuit_is_identity(self):
        c = Circuit(3, [])
        assert np.allclose(run_statevector(c), zero_state(3))

    def test_hadamard(self):
        c = Circuit(1, [GateOp("h", (0,))])
        assert np.allclose(run_statevector(c), [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_matches_dense_unitary_oracle(self):
        rng = np.random.default_rng(1)
        ops = [
            GateOp("ry", (0,), (0.7,)),
            GateOp("cnot", (2, 0)),
            GateOp("u3", (1,), (0.3, 1.1, -0.4)),
            GateOp("crx", (1, 2), (0.9,)),
            GateOp("cz", (0, 2)),
            GateOp("rz", (2,), (2.2,)),
        ]
        c = Circuit(3, ops)
        psi_in = rng.normal(size=8) + 1j * rng.normal(size=8)
        psi_in /= np.linalg.norm(psi_in)
        expected = dense_unitary(c) @ psi_in
        assert np.abs(run_statevector(c, (), psi_in) - expected).max() < 1e-12

    def test_norm_preserved_over_random_parameterizations(self):
        spec = AnsatzSpec(7, pooling=True)
        circuit = build_qcnn(spec)
        rng = np.random.default_rng(2)
        params = rng.uniform(0, 2 * np.pi, size=(1000, circuit.n_params))
        states = np.tile(zero_state(8), (1000, 1))
        out = run_statevector_batch(circuit, params, states)
        norms = np.linalg.norm(out, axis=1)
        assert np.abs(norms - 1).max() < 1e-9

    def test_cnot_twice_is_identity(self):
        rng = np.random.default_rng(3)
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        psi /= np.linalg.norm(psi)
        c = Circuit(3, [GateOp("cnot", (0, 2)), GateOp("cnot", (0, 2))])
        assert np.abs(run_statevector(c, (), psi) - psi).max() < 1e-12

    def test_prob_one_sums_readout_bit(self):
        c = Circuit(2, [GateOp("h", (0,))])
        out = run_statevector(c)
        assert abs(prob_one(out, 0, 2) - 0.5) < 1e-12
        assert abs(prob_one(out, 1, 2)) < 1e-12


class TestDensityBackend:
    def test_empty_circuit_identity(self):
        c = Circuit(2, [])
        rho = np.diag([0.25, 0.25, 0.25, 0.25]).astype(complex)
        assert np.allclose(run_density(c, (), rho), rho)

    def test_x_gate_flips(self):
        c = Circuit(1, [GateOp("x", (0,))])
        out = run_density(c)
        assert np.allclose(out, [[0, 0], [0, 1]])

    def test_matches_statevector_projector_for_random_ansatz(self):
        spec = AnsatzSpec(6, pooling=True)
        circuit = build_qcnn(spec)
        rng = np.random.default_rng(4)
        params = init_params(spec, rng)
        psi = run_statevector(circuit, params)
        rho = run_density(circuit, params)
        assert trace_distance(rho, projector(psi)) < 1e-10


class TestActiveQubits:
    def test_fresh_circuit(self):
        c = Circuit(8, [])
        assert active_qubits(c) == set(range(8))

    def test_after_discards(self):
        ops = [Discard(q) for q in (1, 3, 5, 7)]
        c = Circuit(8, ops)
        assert active_qubits(c) == {0, 2, 4, 6}
        assert active_qubits(c, upto=1) == {0, 2, 3, 4, 5, 6, 7}

    def test_qcnn_pooling_layers(self):
        spec = AnsatzSpec(1, pooling=True)
        circuit = build_qcnn(spec)
        assert active_qubits(circuit) == {4}
