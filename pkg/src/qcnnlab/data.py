"""Feature-file ingestion, per-encoding preprocessing, synthetic data, splits.

The on-disk feature format is CSV, UTF-8, header ``label,f0,...,f{D-1}``,
one record per line, binary labels. This is the handoff contract with any
external feature exporter.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .encodings import EncodingSpec

ANGLE_MARGIN = 1e-6  # angle-family features are rescaled into [0, pi - margin]


@dataclass(frozen=True)
class FeatureRecord:
    label: int
    features: np.ndarray


@dataclass(frozen=True)
class DatasetManifest:
    n_records: int
    feature_dim: int
    class_counts: dict[int, int]
    source: str
    checksum: str

    def to_json(self) -> str:
        payload = {
            "n_records": self.n_records,
            "feature_dim": self.feature_dim,
            "class_counts": {str(k): v for k, v in sorted(self.class_counts.items())},
            "source": self.source,
            "checksum": self.checksum,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def records_to_arrays(records: list[FeatureRecord]) -> tuple[np.ndarray, np.ndarray]:
    """(features matrix, label vector) view of a dataset."""
    if not records:
        return np.zeros((0, 0)), np.zeros(0, dtype=int)
    x = np.stack([r.features for r in records]).astype(float)
    y = np.array([r.label for r in records], dtype=int)
    return x, y


def _class_counts(records: list[FeatureRecord]) -> dict[int, int]:
    counts: dict[int, int] = {}
    for r in records:
        counts[r.label] = counts.get(r.label, 0) + 1
    return counts


def _file_checksum(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def load_features(path) -> tuple[list[FeatureRecord], DatasetManifest]:
    """Parse a feature CSV; malformed rows raise with their line number."""
    records: list[FeatureRecord] = []
    dim: int | None = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not header or header[0] != "label":
            raise ValueError(f"{path}: missing or malformed header (expected label,f0,...)")
        dim = len(header) - 1
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) - 1 != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} features, found {len(row) - 1}")
            try:
                label = int(row[0])
                feats = np.array([float(v) for v in row[1:]], dtype=float)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric field ({exc})") from None
            if label not in (0, 1):
                raise ValueError(f"{path}:{lineno}: label must be 0 or 1, got {label}")
            if not np.all(np.isfinite(feats)):
                raise ValueError(f"{path}:{lineno}: non-finite feature value")
            records.append(FeatureRecord(label, feats))
    manifest = DatasetManifest(
        n_records=len(records),
        feature_dim=dim,
        class_counts=_class_counts(records),
        source=str(path),
        checksum=_file_checksum(path),
    )
    return records, manifest


def save_features(records: list[FeatureRecord], path) -> DatasetManifest:
    """Write the CSV schema; floats round-trip bit-exactly via repr."""
    if not records:
        raise ValueError("refusing to write an empty dataset")
    dim = records[0].features.size
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + [f"f{i}" for i in range(dim)])
        for r in records:
            if r.features.size != dim:
                raise ValueError("inconsistent feature dimension across records")
            writer.writerow([r.label] + [repr(float(v)) for v in r.features])
    return DatasetManifest(
        n_records=len(records),
        feature_dim=dim,
        class_counts=_class_counts(records),
        source=str(path),
        checksum=_file_checksum(path),
    )


@dataclass(frozen=True)
class AngleRescaler:
    """Per-dimension min-max map onto [0, pi - margin], fit on training data."""

    lo: np.ndarray
    hi: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        span = self.hi - self.lo
        scale = np.where(span > 0, (np.pi - ANGLE_MARGIN) / np.where(span > 0, span, 1.0), 0.0)
        scaled = (x - self.lo) * scale
        return np.clip(scaled, 0.0, np.pi - ANGLE_MARGIN)


def fit_rescaler(records: list[FeatureRecord]) -> AngleRescaler:
    x, _ = records_to_arrays(records)
    if x.size == 0:
        raise ValueError("cannot fit a rescaler on an empty dataset")
    return AngleRescaler(lo=x.min(axis=0), hi=x.max(axis=0))


def preprocess(
    records: list[FeatureRecord],
    encoding: EncodingSpec,
    rescaler: AngleRescaler | None = None,
) -> list[FeatureRecord]:
    """Normalize (amplitude) or rescale (angle family) features for encoding.

    Amplitude: L2-normalize each record and zero-pad to 2**n; zero-norm
    records are an error naming the offending index. Angle family: min-max
    rescale per dimension into [0, pi - margin]; pass the rescaler fit on the
    training split when preprocessing test data.
    """
    if not records:
        raise ValueError("cannot preprocess an empty dataset")
    x, y = records_to_arrays(records)
    if encoding.kind == "amplitude":
        dim = 1 << encoding.n_qubits
        if x.shape[1] > dim:
            raise ValueError(f"{x.shape[1]} features exceed 2**{encoding.n_qubits}")
        norms = np.linalg.norm(x, axis=1)
        bad = np.flatnonzero(norms == 0)
        if bad.size:
            raise ValueError(f"zero-norm record(s) at index {bad.tolist()} cannot be normalized")
        padded = np.zeros((x.shape[0], dim))
        padded[:, : x.shape[1]] = x / norms[:, None]
        x = padded
    else:
        if rescaler is None:
            rescaler = fit_rescaler(records)
        x = rescaler.apply(x)
    return [FeatureRecord(int(label), row) for label, row in zip(y, x)]


def synthesize_gaussians(
    dim: int, n_per_class: int, separation: float, seed: int
) -> list[FeatureRecord]:
    """Two isotropic unit-variance Gaussian classes, mean distance = separation.

    The class signal lives on the two leading coordinates, like an embedding
    with a dominant anchor component: both means carry 2*separation on
    feature 0 and +-separation/2 on feature 1. The nonzero anchor matters
    twice for normalization-based encodings: means at +-mu would differ only
    by a global sign (indistinguishable), and the anchor-signal cross term is
    what a quadratic readout measures (strongest near anchor ~ sqrt(dim)).
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    if n_per_class < 1:
        raise ValueError("n_per_class must be at least 1")
    rng = np.random.default_rng(seed)
    base = np.zeros(dim)
    base[0] = 2.0 * separation
    offset = np.zeros(dim)
    offset[1] = 0.5 * separation
    records = []
    for label, center in ((0, base - offset), (1, base + offset)):
        samples = center + rng.normal(size=(n_per_class, dim))
        records.extend(FeatureRecord(label, row) for row in samples)
    return records


def split(
    records: list[FeatureRecord], train_fraction: float, seed: int
) -> tuple[list[FeatureRecord], list[FeatureRecord]]:
    """Stratified seeded shuffle into disjoint, exhaustive train/test lists."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be strictly between 0 and 1")
    by_label: dict[int, list[int]] = {}
    for i, r in enumerate(records):
        by_label.setdefault(r.label, []).append(i)
    for label, idxs in by_label.items():
        if len(idxs) < 2:
            raise ValueError(f"class {label} has fewer than 2 records; cannot split")
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in sorted(by_label):
        idxs = np.array(by_label[label])
        rng.shuffle(idxs)
        cut = int(round(train_fraction * len(idxs)))
        cut = min(max(cut, 1), len(idxs) - 1)
        train_idx.extend(idxs[:cut])
        test_idx.extend(idxs[cut:])
    return [records[i] for i in sorted(train_idx)], [records[i] for i in sorted(test_idx)]
