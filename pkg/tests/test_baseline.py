import numpy as np
import pytest

from qcnnlab.baseline import (
    BASELINE_VARIANTS,
    BaselineConfig,
    TinyCnn,
    build_tiny_cnn,
    param_count,
    train_baseline,
)
from qcnnlab.data import synthesize_gaussians, split


class TestArchitectures:
    def test_exact_parameter_budgets(self):
        assert param_count("cnn1") == 12
        assert param_count("cnn2") == 12
        for variant in ("cnn3", "cnn4", "cnn5", "cnn6"):
            assert param_count(variant) == 39

    def test_build_asserts_counts(self):
        for variant in BASELINE_VARIANTS:
            model = build_tiny_cnn(variant)
            assert model.param_count == param_count(variant)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            build_tiny_cnn("cnn9")
        with pytest.raises(ValueError):
            BaselineConfig("cnn0")

    def test_zero_weights_give_half_probability(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(6, 256))
        for variant in BASELINE_VARIANTS:
            model = build_tiny_cnn(variant)
            assert np.allclose(model.predict_proba(x), 0.5)

    def test_params_round_trip(self):
        model = build_tiny_cnn("cnn4")
        model.init_params(np.random.default_rng(1))
        flat = model.get_params()
        other = build_tiny_cnn("cnn4")
        other.set_params(flat)
        assert np.array_equal(other.get_params(), flat)


class TestGradients:
    @pytest.mark.parametrize("variant", BASELINE_VARIANTS)
    def test_backprop_matches_finite_difference(self, variant):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(5, 64))
        y = np.array([0, 1, 1, 0, 1], dtype=float)
        model = build_tiny_cnn(variant)
        model.init_params(rng)
        p0 = model.get_params()
        model.set_params(p0)
        _, grad = model.loss_and_grad(x, y)
        h = 1e-6
        fd = np.zeros_like(grad)
        for j in range(p0.size):
            for sign, store in ((1, "hi"), (-1, "lo")):
                shifted = p0.copy()
                shifted[j] += sign * h
                model.set_params(shifted)
                loss, _ = model.loss_and_grad(x, y)
                if sign > 0:
                    hi = loss
                else:
                    lo = loss
            fd[j] = (hi - lo) / (2 * h)
        assert np.abs(grad - fd).max() < 1e-6


@pytest.fixture(scope="module")
def dataset():
    records = synthesize_gaussians(256, 100, 8.0, seed=0)
    return split(records, 0.8, seed=0)


@pytest.fixture(scope="module")
def dense_dataset():
    # Separable synthetic data with a dense class direction, the regime a
    # mean-pooling convolution stack handles well.
    from qcnnlab.data import FeatureRecord

    rng = np.random.default_rng(0)
    dim = 64
    direction = np.ones(dim) / np.sqrt(dim)
    records = []
    for label, sign in ((0, -1.0), (1, 1.0)):
        centers = sign * 4.0 * direction
        records.extend(
            FeatureRecord(label, centers + rng.normal(size=dim)) for _ in range(100)
        )
    return split(records, 0.8, seed=0)


class TestTraining:

    def test_epochs_zero(self, dataset):
        train_set, test_set = dataset
        report = train_baseline(BaselineConfig("cnn1", epochs=0), train_set, test_set)
        assert report.losses == []
        assert 0.0 <= report.test_acc <= 1.0

    def test_cnn3_learns_separable_data(self, dense_dataset):
        train_set, test_set = dense_dataset
        config = BaselineConfig("cnn3", learning_rate=0.1, epochs=150, batch_size=16, seed=0)
        report = train_baseline(config, train_set, test_set)
        assert report.test_acc >= 0.8

    def test_report_schema_matches_quantum(self, dataset):
        train_set, test_set = dataset
        report = train_baseline(BaselineConfig("cnn1", epochs=1), train_set, test_set)
        payload = report.to_dict()
        assert sorted(payload) == [
            "config",
            "final_params",
            "losses",
            "test_acc",
            "train_acc",
            "wall_time_s",
        ]
        assert payload["config"]["model"] == "cnn1"
        assert payload["config"]["param_count"] == 12

    def test_deterministic(self, dataset):
        train_set, test_set = dataset
        config = BaselineConfig("cnn2", epochs=3, seed=11)
        a = train_baseline(config, train_set, test_set)
        b = train_baseline(config, train_set, test_set)
        assert a.losses == b.losses
        assert np.array_equal(a.final_params, b.final_params)
