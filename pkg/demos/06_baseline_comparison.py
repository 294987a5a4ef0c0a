"""Quantum vs parameter-matched classical: the efficiency comparison.

The 12-parameter QCNN (ansatz 3 no-pooling) is trained against cnn1, a tiny
classical network with exactly the same trainable-parameter budget, on the
same data with the same loss and report format. Shortened epochs for a quick
demo run.
"""

from qcnnlab import AnsatzSpec, EncodingSpec, TrainConfig, train
from qcnnlab.baseline import BaselineConfig, train_baseline
from qcnnlab.data import split, synthesize_gaussians

records = synthesize_gaussians(dim=256, n_per_class=100, separation=8.0, seed=0)
train_set, test_set = split(records, 0.8, seed=0)

quantum = train(
    TrainConfig(
        encoding=EncodingSpec("amplitude", 8),
        ansatz=AnsatzSpec(conv_id=3, pooling=False),
        learning_rate=0.05,
        epochs=30,
        batch_size=4,
        seed=0,
    ),
    train_set,
    test_set,
)
classical = train_baseline(
    BaselineConfig("cnn1", learning_rate=0.05, epochs=30, batch_size=4, seed=0),
    train_set,
    test_set,
)

print(f"{'model':<12} {'params':>6} {'train acc':>10} {'test acc':>9}")
print(f"{'a3-nopool':<12} {quantum.config['param_count']:>6} "
      f"{quantum.train_acc:>10.3f} {quantum.test_acc:>9.3f}")
print(f"{'cnn1':<12} {classical.config['param_count']:>6} "
      f"{classical.train_acc:>10.3f} {classical.test_acc:>9.3f}")
print("\nboth reports share one JSON schema; only the architecture fields differ")
