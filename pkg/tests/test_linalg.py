import numpy as np
import pytest

from qcnnlab.linalg import (
    IDENTITY_2,
    PAULI_X,
    eig_hermitian_2x2,
    is_hermitian,
    kron,
    partial_trace,
    projector,
    trace_distance,
)


def random_density(n_qubits, rng):
    dim = 1 << n_qubits
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / rho.trace()


def brute_force_partial_trace(rho, n, keep):
    """Independent index-contraction oracle."""
    keep = sorted(keep)
    k = len(keep)
    drop = [q for q in range(n) if q not in keep]
    out = np.zeros((1 << k, 1 << k), dtype=complex)
    for i in range(1 << n):
        for j in range(1 << n):
            if any((i >> (n - 1 - q)) & 1 != (j >> (n - 1 - q)) & 1 for q in drop):
                continue
            ik = sum(((i >> (n - 1 - q)) & 1) << (k - 1 - pos) for pos, q in enumerate(keep))
            jk = sum(((j >> (n - 1 - q)) & 1) << (k - 1 - pos) for pos, q in enumerate(keep))
            out[ik, jk] += rho[i, j]
    return out


class TestKron:
    def test_identity(self):
        assert np.allclose(kron(IDENTITY_2, IDENTITY_2), np.eye(4))

    def test_pauli_x_with_projector(self):
        p0 = np.array([[1, 0], [0, 0]], dtype=complex)
        expected = np.zeros((4, 4), dtype=complex)
        expected[2, 0] = 1.0
        expected[0, 2] = 1.0
        assert np.allclose(kron(PAULI_X, p0), expected)

    def test_associativity(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
            assert np.allclose(kron(a, kron(b, c)), kron(kron(a, b), c))

    def test_preserves_unitarity(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            u, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
            v, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
            w = kron(u, v)
            assert np.abs(w @ w.conj().T - np.eye(8)).max() < 1e-10


class TestPartialTrace:
    def test_product_state(self):
        rho = projector(np.array([1, 0, 0, 0], dtype=complex))  # |00><00|
        assert np.allclose(partial_trace(rho, 2, {0}), [[1, 0], [0, 0]])

    def test_bell_state_marginal_is_maximally_mixed(self):
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        reduced = partial_trace(projector(bell), 2, {0})
        assert np.abs(reduced - np.eye(2) / 2).max() < 1e-12

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(2)
        for keep in ({0}, {1}, {0, 2}, {1, 2}):
            rho = random_density(3, rng)
            got = partial_trace(rho, 3, keep)
            want = brute_force_partial_trace(rho, 3, keep)
            assert np.abs(got - want).max() < 1e-12

    def test_unit_trace_and_hermitian(self):
        rng = np.random.default_rng(3)
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        reduced = partial_trace(projector(psi), 2, {0})
        assert abs(reduced.trace() - 1) < 1e-10
        assert is_hermitian(reduced, 1e-10)

    def test_composes_over_subsets(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            rho = random_density(3, rng)
            step1 = partial_trace(rho, 3, {0, 2})  # trace out qubit 1
            step2 = partial_trace(step1, 2, {0})  # then qubit 2 (now index 1)
            direct = partial_trace(rho, 3, {0})
            assert np.abs(step2 - direct).max() < 1e-10

    def test_rejects_bad_arguments(self):
        rho = np.eye(4) / 4
        with pytest.raises(ValueError):
            partial_trace(rho, 3, {0})
        with pytest.raises(ValueError):
            partial_trace(rho, 2, set())
        with pytest.raises(ValueError):
            partial_trace(rho, 2, {5})


class TestEigHermitian2x2:
    @pytest.mark.parametrize(
        "diag,expected",
        [((1.0, 0.0), (1.0, 0.0)), ((0.5, 0.5), (0.5, 0.5)), ((0.75, 0.25), (0.75, 0.25))],
    )
    def test_diagonal_cases(self, diag, expected):
        got = eig_hermitian_2x2(np.diag(diag).astype(complex))
        assert np.allclose(got, expected)

    def test_reproduces_trace_and_determinant(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            m = (a + a.conj().T) / 2
            hi, lo = eig_hermitian_2x2(m)
            assert hi >= lo
            assert abs((hi + lo) - m.trace().real) < 1e-10
            assert abs(hi * lo - np.linalg.det(m).real) < 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            eig_hermitian_2x2(np.array([[0, 1], [0, 0]], dtype=complex))


class TestTraceDistance:
    def test_identical_states(self):
        rho = random_density(2, np.random.default_rng(6))
        assert trace_distance(rho, rho) == 0.0

    def test_orthogonal_pure_states(self):
        p0 = np.diag([1.0, 0.0]).astype(complex)
        p1 = np.diag([0.0, 1.0]).astype(complex)
        assert abs(trace_distance(p0, p1) - 1.0) < 1e-12

    def test_pure_vs_maximally_mixed(self):
        p0 = np.diag([1.0, 0.0]).astype(complex)
        assert abs(trace_distance(p0, np.eye(2) / 2) - 0.5) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            trace_distance(np.eye(2), np.eye(4))
