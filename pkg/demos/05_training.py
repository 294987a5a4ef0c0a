"""Train a QCNN classifier end to end on synthetic features.

Features are amplitude-encoded, the readout qubit's |1> probability is the
class-1 score, and parameters follow parameter-shift gradient descent on
binary cross-entropy. Shortened here for demo purposes; the acceptance suite
runs the full 200-epoch configuration.
"""

import numpy as np

from qcnnlab import AnsatzSpec, EncodingSpec, TrainConfig, evaluate, train
from qcnnlab.data import split, synthesize_gaussians

records = synthesize_gaussians(dim=256, n_per_class=100, separation=8.0, seed=0)
train_set, test_set = split(records, 0.8, seed=0)
print(f"dataset: {len(records)} records, dim 256 -> train {len(train_set)} / test {len(test_set)}")

config = TrainConfig(
    encoding=EncodingSpec("amplitude", 8),
    ansatz=AnsatzSpec(conv_id=3, pooling=False),
    learning_rate=0.05,
    epochs=30,
    batch_size=4,
    seed=0,
)
report = train(config, train_set, test_set)
print(f"loss: {report.losses[0]:.4f} -> {report.losses[-1]:.4f} over {config.epochs} epochs")
print(f"train accuracy {report.train_acc:.3f}, test accuracy {report.test_acc:.3f}")
print(f"wall time {report.wall_time_s:.1f}s for {report.final_params.size} parameters")

acc, probs = evaluate(config, report.final_params, test_set)
print(f"re-evaluated test accuracy: {acc:.3f}; score range [{probs.min():.3f}, {probs.max():.3f}]")
