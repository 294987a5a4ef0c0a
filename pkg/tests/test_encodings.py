import numpy as np
import pytest

from qcnnlab.circuit import rx_matrix, ry_matrix, single_qubit_marginals
from qcnnlab.encodings import (
    EncodingSpec,
    amplitude_encode,
    angle_encode,
    dense_angle_encode,
    encode,
)


class TestAmplitudeEncoding:
    def test_basis_vector(self):
        assert np.allclose(amplitude_encode(np.array([1, 0, 0, 0]), 2), [1, 0, 0, 0])

    def test_three_four_five(self):
        assert np.allclose(amplitude_encode(np.array([3.0, 4.0]), 1), [0.6, 0.8])

    def test_uniform_256(self):
        state = amplitude_encode(np.ones(256), 8)
        assert np.allclose(state, 1 / 16)

    def test_zero_padding(self):
        state = amplitude_encode(np.array([1.0, 1.0]), 2)
        assert np.allclose(state, [1 / np.sqrt(2), 1 / np.sqrt(2), 0, 0])

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=30)
        a = amplitude_encode(x, 5)
        b = amplitude_encode(7.3 * x, 5)
        assert np.abs(a - b).max() < 1e-12

    def test_rejects_zero_vector_and_oversize(self):
        with pytest.raises(ValueError):
            amplitude_encode(np.zeros(4), 2)
        with pytest.raises(ValueError):
            amplitude_encode(np.ones(5), 2)

    def test_qubit_count_accounting(self):
        # 1024 features fit 10 qubits; 256 fit 8.
        assert amplitude_encode(np.ones(1024), 10).size == 1024
        assert amplitude_encode(np.ones(256), 8).size == 256
        with pytest.raises(ValueError):
            amplitude_encode(np.ones(1024), 8)


class TestAngleEncoding:
    def test_zero_angles(self):
        assert np.allclose(angle_encode(np.array([0.0, 0.0])), [1, 0, 0, 0])

    def test_equal_superposition(self):
        assert np.allclose(angle_encode(np.array([np.pi / 2])), [1, 1] / np.sqrt(2))

    def test_tensor_product_expansion(self):
        state = angle_encode(np.array([np.pi / 2, np.pi / 2]))
        assert np.allclose(state, 0.5)

    def test_range_check(self):
        with pytest.raises(ValueError):
            angle_encode(np.array([np.pi]))
        with pytest.raises(ValueError):
            angle_encode(np.array([-0.1]))

    def test_single_component_change_is_local(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(0, np.pi - 1e-6, size=4)
        y = x.copy()
        y[2] = rng.uniform(0, np.pi - 1e-6)
        a = angle_encode(x)[None]
        b = angle_encode(y)[None]
        for q in (0, 1, 3):
            ma = single_qubit_marginals(a, q, 4)
            mb = single_qubit_marginals(b, q, 4)
            assert np.abs(ma - mb).max() < 1e-12
        mc = single_qubit_marginals(a, 2, 4)
        md = single_qubit_marginals(b, 2, 4)
        assert np.abs(mc - md).max() > 1e-6


class TestDenseAngleEncoding:
    def test_zero_angles(self):
        assert np.allclose(dense_angle_encode(np.array([0.0, 0.0])), [1, 0])

    def test_full_x_rotation(self):
        state = dense_angle_encode(np.array([np.pi, 0.0]))
        assert abs(state[1]) ** 2 == pytest.approx(1.0)
        assert np.allclose(state, [0, -1j])

    def test_matches_gate_matrix_oracle(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(0, np.pi, size=4)
        # qubit 0 gets (x0, x2); qubit 1 gets (x1, x3)
        q0 = ry_matrix(x[2]) @ rx_matrix(x[0]) @ np.array([1, 0], dtype=complex)
        q1 = ry_matrix(x[3]) @ rx_matrix(x[1]) @ np.array([1, 0], dtype=complex)
        assert np.allclose(dense_angle_encode(x), np.kron(q0, q1))

    def test_rejects_odd_length(self):
        with pytest.raises(ValueError):
            dense_angle_encode(np.ones(3))


class TestEncodeDispatch:
    @pytest.mark.parametrize(
        "kind,n_qubits,width",
        [("amplitude", 3, 5), ("angle", 3, 3), ("dense-angle", 3, 6)],
    )
    def test_unit_norm(self, kind, n_qubits, width):
        rng = np.random.default_rng(3)
        x = rng.uniform(0.1, np.pi - 0.1, size=width)
        state = encode(EncodingSpec(kind, n_qubits), x)
        assert abs(np.linalg.norm(state) - 1.0) < 1e-12

    def test_width_validation(self):
        with pytest.raises(ValueError):
            encode(EncodingSpec("angle", 3), np.ones(4) * 0.5)
        with pytest.raises(ValueError):
            encode(EncodingSpec("dense-angle", 3), np.ones(4) * 0.5)

    def test_batched_matches_single(self):
        rng = np.random.default_rng(4)
        xs = rng.uniform(0.1, 3.0, size=(6, 8))
        spec = EncodingSpec("amplitude", 3)
        batch = encode(spec, xs)
        for i, x in enumerate(xs):
            assert np.allclose(batch[i], encode(spec, x))
