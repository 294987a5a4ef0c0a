"""Experiment driver: train, sweep, entropy, baseline, synth, encode-dump.

Every command accepts ``--config <file>`` (JSON object whose keys are the
long option names with underscores) whose values override the parsed flags;
the effective configuration is echoed into every output artifact. All
randomness flows from explicit seeds. Exit codes: 0 success, 2 usage error,
1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import ansatz as qa
from . import baseline as bl
from . import data as dio
from . import entropy as ent
from . import training as qt
from .encodings import ENCODING_KINDS, EncodingSpec
from .noise import NoiseSpec, parse_noise_name


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


class UsageError(Exception):
    pass


def _apply_config_file(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    with open(args.config, encoding="utf-8") as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise UsageError(f"{args.config}: config file must hold a JSON object")
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise UsageError(f"{args.config}: unknown config key {key!r}")
        setattr(args, attr, value)


def _load_dataset(data: str, seed: int) -> tuple[list[dio.FeatureRecord], str]:
    """Parse --data: either a CSV path or synth:dim=...,n=...,sep=...[,seed=...]."""
    if data.startswith("synth:"):
        fields = {}
        for part in data[len("synth:") :].split(","):
            if not part:
                continue
            try:
                key, value = part.split("=", 1)
                fields[key] = float(value)
            except ValueError:
                raise UsageError(f"malformed synth spec field {part!r}")
        unknown = set(fields) - {"dim", "n", "sep", "seed"}
        if unknown:
            raise UsageError(f"unknown synth spec keys {sorted(unknown)}")
        dim = int(fields.get("dim", 256))
        n = int(fields.get("n", 200))
        sep = float(fields.get("sep", 8.0))
        synth_seed = int(fields.get("seed", seed))
        records = dio.synthesize_gaussians(dim, n, sep, synth_seed)
        return records, f"synth:dim={dim},n={n},sep={sep},seed={synth_seed}"
    records, manifest = dio.load_features(data)
    return records, manifest.checksum


def _prepare_split(records, encoding: EncodingSpec, train_fraction: float, seed: int):
    train_recs, test_recs = dio.split(records, train_fraction, seed)
    if encoding.kind == "amplitude":
        return dio.preprocess(train_recs, encoding), dio.preprocess(test_recs, encoding)
    scaler = dio.fit_rescaler(train_recs)
    return (
        dio.preprocess(train_recs, encoding, scaler),
        dio.preprocess(test_recs, encoding, scaler),
    )


def _train_config_from_args(args, ansatz_name: str, noise_kind: str | None, p: float, seed: int):
    spec = qa.parse_ansatz_name(ansatz_name, n_qubits=args.qubits)
    encoding = EncodingSpec(args.encoding, args.qubits)
    noise = None if noise_kind in (None, "none") else NoiseSpec(parse_noise_name(noise_kind), p)
    return qt.TrainConfig(
        encoding=encoding,
        ansatz=spec,
        noise=noise,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=seed,
        gradient_mode=args.gradient_mode,
    )


def cmd_train(args) -> int:
    try:
        config = _train_config_from_args(args, args.ansatz, args.noise, args.p, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    records, source = _load_dataset(args.data, args.seed)
    train_recs, test_recs = _prepare_split(records, config.encoding, args.train_fraction, args.seed)
    report = qt.train(config, train_recs, test_recs)
    payload = report.to_dict()
    payload["config"]["data"] = source
    payload["config"]["train_fraction"] = args.train_fraction
    _atomic_write(args.out, _dump_json(payload))
    print(
        f"train {config.ansatz.name} {config.encoding.kind}: "
        f"train_acc={report.train_acc:.4f} test_acc={report.test_acc:.4f} -> {args.out}"
    )
    return 0


def _sweep_cell(payload: dict) -> dict:
    """Worker entry: one (ansatz, noise, p, seed) training cell."""
    args = argparse.Namespace(**payload["args"])
    records = [dio.FeatureRecord(r[0], np.asarray(r[1])) for r in payload["records"]]
    config = _train_config_from_args(
        args, payload["ansatz"], payload["noise"], payload["p"], payload["seed"]
    )
    train_recs, test_recs = _prepare_split(
        records, config.encoding, args.train_fraction, payload["seed"]
    )
    report = qt.train(config, train_recs, test_recs)
    out = report.to_dict()
    out["cell"] = {k: payload[k] for k in ("ansatz", "noise", "p", "seed")}
    return out


def _cell_key(cell_config: dict) -> str:
    canon = json.dumps(cell_config, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def cmd_sweep(args) -> int:
    ansatz_names = args.ansatz.split(",")
    if ansatz_names == ["all"]:
        ansatz_names = [s.name for s in qa.all_ansatz_specs()]
    noises = args.noise.split(",")
    intensities = [float(v) for v in args.p.split(",")]
    seeds = [int(v) for v in args.seeds.split(",")]
    for name in ansatz_names:
        qa.parse_ansatz_name(name)  # validate早 so usage errors exit 2
    for noise in noises:
        if noise != "none":
            parse_noise_name(noise)
    records, source = _load_dataset(args.data, seeds[0])
    cell_dir = os.path.join(args.out, "cells")
    os.makedirs(cell_dir, exist_ok=True)
    cells = []
    for name in ansatz_names:
        for noise in noises:
            for p in intensities if noise != "none" else [0.0]:
                for seed in seeds:
                    cell_cfg = {
                        "ansatz": name,
                        "noise": noise,
                        "p": p,
                        "seed": seed,
                        "data": source,
                        "encoding": args.encoding,
                        "qubits": args.qubits,
                        "lr": args.lr,
                        "epochs": args.epochs,
                        "batch_size": args.batch_size,
                        "train_fraction": args.train_fraction,
                        "gradient_mode": args.gradient_mode,
                    }
                    cells.append((cell_cfg, _cell_key(cell_cfg)))
    raw_records = [(r.label, r.features.tolist()) for r in records]
    shared_args = {
        "encoding": args.encoding,
        "qubits": args.qubits,
        "lr": args.lr,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "train_fraction": args.train_fraction,
        "gradient_mode": args.gradient_mode,
    }
    pending = []
    for cell_cfg, key in cells:
        path = os.path.join(cell_dir, f"{key}.json")
        if os.path.exists(path):
            continue  # resume: completed cells are keyed by config hash
        pending.append((cell_cfg, key))
    print(f"sweep: {len(cells)} cells, {len(pending)} to run")
    failures = []

    def handle(cell_cfg, key, result, error):
        path = os.path.join(cell_dir, f"{key}.json")
        if error is not None:
            failures.append({"cell": cell_cfg, "error": str(error)})
            _atomic_write(
                os.path.join(cell_dir, f"{key}.error.json"),
                _dump_json({"cell": cell_cfg, "error": str(error)}),
            )
            return
        _atomic_write(path, _dump_json(result))

    payloads = [
        {
            "args": shared_args,
            "records": raw_records,
            "ansatz": cfg["ansatz"],
            "noise": cfg["noise"],
            "p": cfg["p"],
            "seed": cfg["seed"],
        }
        for cfg, _ in pending
    ]
    if args.workers > 1 and pending:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [pool.submit(_sweep_cell, pl) for pl in payloads]
            for (cell_cfg, key), fut in zip(pending, futures):
                try:
                    handle(cell_cfg, key, fut.result(), None)
                except Exception as exc:
                    handle(cell_cfg, key, None, exc)
    else:
        for (cell_cfg, key), pl in zip(pending, payloads):
            try:
                handle(cell_cfg, key, _sweep_cell(pl), None)
            except Exception as exc:
                handle(cell_cfg, key, None, exc)

    # Aggregate all completed cells (including ones from earlier runs).
    by_row: dict[tuple, list[float]] = {}
    for cell_cfg, key in cells:
        path = os.path.join(cell_dir, f"{key}.json")
        if not os.path.exists(path):
            continue
        with open(path, encoding="utf-8") as fh:
            result = json.load(fh)
        row_key = (cell_cfg["ansatz"], cell_cfg["noise"], cell_cfg["p"])
        by_row.setdefault(row_key, []).append(float(result["test_acc"]))
    table_path = os.path.join(args.out, "results.csv")
    lines = ["ansatz,noise,p,n_seeds,mean_acc,std_acc"]
    for (name, noise, p), accs in sorted(by_row.items()):
        arr = np.array(accs)
        lines.append(f"{name},{noise},{p:g},{arr.size},{arr.mean():.6f},{arr.std():.6f}")
    _atomic_write(table_path, "\n".join(lines) + "\n")
    manifest = {
        "cells_total": len(cells),
        "cells_failed": len(failures),
        "failures": failures,
        "config": {**shared_args, "ansatz": ansatz_names, "noise": noises, "p": intensities,
                   "seeds": seeds, "data": source},
    }
    _atomic_write(os.path.join(args.out, "sweep.json"), _dump_json(manifest))
    print(f"sweep: wrote {table_path} with {len(by_row)} rows ({len(failures)} failed cells)")
    return 0


def cmd_entropy(args) -> int:
    if (args.conv is None) == (args.ansatz is None):
        raise UsageError("pass exactly one of --conv or --ansatz")
    os.makedirs(os.path.dirname(os.path.abspath(args.out + ".json")), exist_ok=True)
    if args.conv is not None:
        if args.conv not in qa.CONV_UNIT_PARAMS:
            raise UsageError(f"conv id must be 1..9, got {args.conv}")
        sample = ent.conv_unit_entropy_sample(args.conv, args.n, args.seed)
        samples = [sample]
    else:
        spec = qa.parse_ansatz_name(args.ansatz, n_qubits=args.qubits)
        if not args.layerwise:
            raise UsageError("--ansatz requires --layerwise")
        samples = ent.qcnn_layerwise_entropy_sample(spec, args.n, args.seed)
    summaries = []
    for sample in samples:
        ent.export_histogram(sample, args.bins, f"{args.out}.{sample.identifier}.csv")
        summaries.append(sample.summary())
    payload = {
        "config": {
            "conv": args.conv,
            "ansatz": args.ansatz,
            "layerwise": bool(args.layerwise),
            "n": args.n,
            "seed": args.seed,
            "bins": args.bins,
        },
        "summaries": summaries,
    }
    _atomic_write(args.out + ".json", _dump_json(payload))
    means = ", ".join(f"{s['id']}={s['mean']:.4f}" for s in summaries)
    print(f"entropy: {means} -> {args.out}.json")
    return 0


def cmd_baseline(args) -> int:
    try:
        config = bl.BaselineConfig(
            variant=args.variant,
            learning_rate=args.lr,
            epochs=args.epochs,
            batch_size=args.batch_size,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    records, source = _load_dataset(args.data, args.seed)
    train_recs, test_recs = dio.split(records, args.train_fraction, args.seed)
    report = bl.train_baseline(config, train_recs, test_recs)
    payload = report.to_dict()
    payload["config"]["data"] = source
    payload["config"]["train_fraction"] = args.train_fraction
    _atomic_write(args.out, _dump_json(payload))
    print(
        f"baseline {args.variant}: train_acc={report.train_acc:.4f} "
        f"test_acc={report.test_acc:.4f} -> {args.out}"
    )
    return 0


def cmd_synth(args) -> int:
    records = dio.synthesize_gaussians(args.dim, args.n, args.sep, args.seed)
    manifest = dio.save_features(records, args.out)
    _atomic_write(
        args.out + ".manifest.json",
        manifest.to_json() + "\n",
    )
    print(f"synth: wrote {manifest.n_records} records ({args.dim} features) -> {args.out}")
    return 0


def cmd_encode_dump(args) -> int:
    if (args.values is None) == (args.data is None):
        raise UsageError("pass exactly one of --values or --data")
    if args.values is not None:
        x = np.array([float(v) for v in args.values.split(",")])
        label = None
    else:
        records, _ = dio.load_features(args.data)
        if not 0 <= args.index < len(records):
            raise UsageError(f"--index {args.index} out of range for {len(records)} records")
        x = records[args.index].features
        label = records[args.index].label
    if args.encoding == "amplitude":
        n_qubits = args.qubits or max(1, int(np.ceil(np.log2(max(len(x), 2)))))
    elif args.encoding == "angle":
        n_qubits = len(x)
    else:
        if len(x) % 2:
            raise UsageError("dense-angle encoding needs an even number of values")
        n_qubits = len(x) // 2
    from .encodings import encode

    try:
        state = encode(EncodingSpec(args.encoding, n_qubits), x)
    except ValueError as exc:
        raise UsageError(str(exc))
    payload = {
        "config": {"encoding": args.encoding, "n_qubits": n_qubits, "label": label},
        "amplitudes": [[float(a.real), float(a.imag)] for a in state],
    }
    text = _dump_json(payload)
    if args.out:
        _atomic_write(args.out, text)
        print(f"encode-dump: {len(state)} amplitudes -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _add_common_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--encoding", choices=ENCODING_KINDS, default="amplitude")
    p.add_argument("--qubits", type=int, default=8)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument(
        "--gradient-mode",
        choices=qt.GRADIENT_MODES,
        default="parameter-shift",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcnnlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one QCNN configuration")
    p.add_argument("--ansatz", required=True, help="a<1-9>-pool or a<1-9>-nopool")
    p.add_argument("--data", required=True, help="feature CSV path or synth:dim=..,n=..,sep=..,seed=..")
    p.add_argument("--noise", default="none", help="none|bitflip|phaseflip|ampdamp|depol")
    p.add_argument("--p", type=float, default=0.0, help="noise intensity")
    _add_common_training_flags(p)
    p.add_argument("--out", default="report.json")
    p.add_argument("--config", help="JSON config file overriding flags")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="grid of ansatz x noise x intensity x seed")
    p.add_argument("--ansatz", required=True, help="comma list or 'all'")
    p.add_argument("--noise", default="none", help="comma list, may include 'none'")
    p.add_argument("--p", default="0.01,0.05", help="comma list of intensities")
    p.add_argument("--seeds", default="0", help="comma list of seeds")
    p.add_argument("--data", required=True)
    _add_common_training_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="sweep-results")
    p.add_argument("--config", help="JSON config file overriding flags")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("entropy", help="entanglement entropy sampling")
    p.add_argument("--conv", type=int, help="convolution unit id 1..9")
    p.add_argument("--ansatz", help="full QCNN name for --layerwise")
    p.add_argument("--layerwise", action="store_true")
    p.add_argument("--qubits", type=int, default=8)
    p.add_argument("-n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--out", default="entropy")
    p.add_argument("--config", help="JSON config file overriding flags")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("baseline", help="train a parameter-matched classical CNN")
    p.add_argument("--variant", required=True, help="cnn1..cnn6")
    p.add_argument("--data", required=True)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--out", default="baseline-report.json")
    p.add_argument("--config", help="JSON config file overriding flags")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("synth", help="generate the synthetic Gaussian dataset")
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--n", type=int, default=200, help="records per class")
    p.add_argument("--sep", type=float, default=8.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="synth.csv")
    p.add_argument("--config", help="JSON config file overriding flags")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode-dump", help="encode one record and dump amplitudes")
    p.add_argument("--encoding", choices=ENCODING_KINDS, required=True)
    p.add_argument("--qubits", type=int, help="qubit count (amplitude only; default fits input)")
    p.add_argument("--values", help="comma-separated feature values")
    p.add_argument("--data", help="feature CSV to read a record from")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--out", help="output JSON (default stdout)")
    p.add_argument("--config", help="JSON config file overriding flags")
    p.set_defaults(func=cmd_encode_dump)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
