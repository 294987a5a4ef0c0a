"""qcnnlab: a desk-scale workbench for quantum convolutional neural networks.

Simulates hybrid classical-quantum classification pipelines: classical
feature vectors are encoded into quantum states (amplitude, angle, or
dense-angle), processed by one of 18 QCNN ansatz configurations under ideal
or noisy conditions, and trained with parameter-shift gradient descent
against binary cross-entropy. Includes entanglement-entropy analysis of the
ansatzes and parameter-matched tiny classical CNN baselines.
"""

from .ansatz import AnsatzSpec, all_ansatz_specs, build_qcnn, param_count, parse_ansatz_name
from .circuit import Circuit, Discard, GateOp, NoisePoint, Slot, run_density, run_statevector
from .encodings import EncodingSpec, amplitude_encode, angle_encode, dense_angle_encode
from .entropy import conv_unit_entropy_sample, qcnn_layerwise_entropy_sample, von_neumann_entropy
from .noise import NoiseSpec, apply_channel, kraus_ops
from .training import TrainConfig, TrainReport, evaluate, predict_prob, train

__all__ = [
    "AnsatzSpec",
    "Circuit",
    "Discard",
    "EncodingSpec",
    "GateOp",
    "NoisePoint",
    "NoiseSpec",
    "Slot",
    "TrainConfig",
    "TrainReport",
    "all_ansatz_specs",
    "amplitude_encode",
    "angle_encode",
    "apply_channel",
    "build_qcnn",
    "conv_unit_entropy_sample",
    "dense_angle_encode",
    "evaluate",
    "kraus_ops",
    "param_count",
    "parse_ansatz_name",
    "predict_prob",
    "qcnn_layerwise_entropy_sample",
    "run_density",
    "run_statevector",
    "train",
    "von_neumann_entropy",
]

__version__ = "0.1.0"
