import numpy as np
import pytest

from qcnnlab.ansatz import AnsatzSpec, build_qcnn, init_params
from qcnnlab.circuit import run_density
from qcnnlab.noise import NOISE_KINDS, NoiseSpec, apply_channel, kraus_ops, noise_points, parse_noise_name


def random_single_qubit_density(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    return rho / rho.trace()


class TestKrausOps:
    @pytest.mark.parametrize("kind", NOISE_KINDS)
    @pytest.mark.parametrize("p", [0.0, 0.01, 0.05, 0.5, 1.0])
    def test_completeness(self, kind, p):
        total = sum(k.conj().T @ k for k in kraus_ops(NoiseSpec(kind, p)))
        assert np.abs(total - np.eye(2)).max() < 1e-12

    def test_p_zero_is_identity_channel(self):
        rng = np.random.default_rng(0)
        rho = random_single_qubit_density(rng)
        for kind in NOISE_KINDS:
            out = apply_channel(rho, NoiseSpec(kind, 0.0), 0)
            assert np.abs(out - rho).max() < 1e-14

    def test_bit_flip_deterministic_at_p_one(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        out = apply_channel(rho, NoiseSpec("bit-flip", 1.0), 0)
        assert np.allclose(out, np.diag([0.0, 1.0]))

    def test_amplitude_damping_decays_excited_state(self):
        rho = np.diag([0.0, 1.0]).astype(complex)
        out = apply_channel(rho, NoiseSpec("amplitude-damping", 1.0), 0)
        assert np.array_equal(out, np.diag([1.0, 0.0]).astype(complex))

    def test_invalid_intensity_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec("bit-flip", 1.5)
        with pytest.raises(ValueError):
            NoiseSpec("bit-flip", -0.1)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec("thermal", 0.1)


class TestApplyChannel:
    def test_depolarizing_fixed_point(self):
        rho = np.eye(2, dtype=complex) / 2
        out = apply_channel(rho, NoiseSpec("depolarizing", 0.3), 0)
        assert np.abs(out - rho).max() < 1e-14

    def test_depolarizing_three_quarters_gives_maximally_mixed(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            rho = random_single_qubit_density(rng)
            out = apply_channel(rho, NoiseSpec("depolarizing", 0.75), 0)
            assert np.abs(out - np.eye(2) / 2).max() < 1e-10

    def test_phase_flip_preserves_diagonal_states(self):
        rho = np.diag([0.3, 0.7]).astype(complex)
        out = apply_channel(rho, NoiseSpec("phase-flip", 0.4), 0)
        assert np.abs(out - rho).max() < 1e-14

    def test_trace_and_hermiticity_preserved(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rho = a @ a.conj().T
        rho /= rho.trace()
        for kind in NOISE_KINDS:
            out = apply_channel(rho, NoiseSpec(kind, 0.2), qubit=1)
            assert abs(out.trace() - 1.0) < 1e-12
            assert np.abs(out - out.conj().T).max() < 1e-12

    def test_inactive_qubit_rejected(self):
        rho = np.eye(4, dtype=complex) / 4
        with pytest.raises(ValueError):
            apply_channel(rho, NoiseSpec("bit-flip", 0.1), qubit=5)

    def test_depolarizing_purity_nonincreasing(self):
        rng = np.random.default_rng(3)
        rho = random_single_qubit_density(rng)
        spec = NoiseSpec("depolarizing", 0.1)
        purity = (rho @ rho).trace().real
        for _ in range(5):
            rho = apply_channel(rho, spec, 0)
            new_purity = (rho @ rho).trace().real
            assert new_purity <= purity + 1e-12
            purity = new_purity


class TestNoisePoints:
    def test_pooling_ansatz_fires_at_both_marker_kinds(self):
        tags = noise_points(AnsatzSpec(3, pooling=True))
        assert len(tags) == 6
        assert tags == [
            "conv-layer-1",
            "pool-layer-1",
            "conv-layer-2",
            "pool-layer-2",
            "conv-layer-3",
            "pool-layer-3",
        ]

    def test_no_pooling_fires_after_conv_only(self):
        tags = noise_points(AnsatzSpec(3, pooling=False))
        assert tags == ["conv-layer-1", "conv-layer-2", "conv-layer-3"]

    def test_zero_intensity_matches_noiseless_run(self):
        spec = AnsatzSpec(2, pooling=True)
        circuit = build_qcnn(spec)
        params = init_params(spec, np.random.default_rng(4))
        quiet = run_density(circuit, params)
        zero_noise = run_density(circuit, params, noise=NoiseSpec("depolarizing", 0.0))
        assert np.abs(quiet - zero_noise).max() < 1e-12

    def test_noise_changes_the_state(self):
        spec = AnsatzSpec(2, pooling=True)
        circuit = build_qcnn(spec)
        params = init_params(spec, np.random.default_rng(5))
        quiet = run_density(circuit, params)
        noisy = run_density(circuit, params, noise=NoiseSpec("depolarizing", 0.05))
        assert np.abs(quiet - noisy).max() > 1e-4
        assert abs(noisy.trace() - 1.0) < 1e-10


class TestCliNames:
    def test_short_names_map_to_kinds(self):
        assert parse_noise_name("bitflip") == "bit-flip"
        assert parse_noise_name("phaseflip") == "phase-flip"
        assert parse_noise_name("ampdamp") == "amplitude-damping"
        assert parse_noise_name("depol") == "depolarizing"
        assert parse_noise_name("bit-flip") == "bit-flip"
        with pytest.raises(ValueError):
            parse_noise_name("gamma")
