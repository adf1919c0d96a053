"""On-disk formats: the recording directory layout and model.json.

Recording directory:
    meta.json         {"imu_rate_hz", "audio_rate_hz", "subject", "session"}
    imu.csv           header t,gx_l,gy_l,gz_l,gx_r,gy_r,gz_r
    audio_l.pcm       raw signed 16-bit little-endian mono PCM
    audio_r.pcm       raw signed 16-bit little-endian mono PCM
    annotations.jsonl one {"label", "t_start", "t_end"} object per line

Sample data round-trips bit-exactly: floats are written with shortest
round-trip repr, audio as raw PCM.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dtw_knn import DtwKnnClassifier
from .errors import InvariantViolation
from .svm import GESTURE, NOISE, LinearSvmGate
from .types import (
    Annotation,
    Recording,
    RecordingMeta,
    format_annotation_label,
    parse_annotation_label,
)
from .validation import SEGMENT_IMU_ROWS

IMU_CSV_HEADER = "t,gx_l,gy_l,gz_l,gx_r,gy_r,gz_r"

#: feature-vector lengths representable in a model file, per mode tag
MODEL_MODES = {"paper64": 64, "full": 107}


def _require(path: Path) -> Path:
    if not path.is_file():
        raise FileNotFoundError(f"missing recording file: {path}")
    return path


def save_recording(rec: Recording, path) -> None:
    """Write a validated recording; refuses invalid data."""
    rec.validate()
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "imu_rate_hz": rec.meta.imu_rate_hz,
        "audio_rate_hz": rec.meta.audio_rate_hz,
        "subject": rec.meta.subject,
        "session": rec.meta.session,
    }
    (root / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    lines = [IMU_CSV_HEADER]
    for t, row in zip(rec.imu_t, rec.imu):
        lines.append(
            ",".join([repr(float(t))] + [repr(float(v)) for v in row])
        )
    (root / "imu.csv").write_text("\n".join(lines) + "\n")
    rec.audio[:, 0].astype("<i2").tofile(root / "audio_l.pcm")
    rec.audio[:, 1].astype("<i2").tofile(root / "audio_r.pcm")
    with open(root / "annotations.jsonl", "w") as fh:
        for ann in rec.annotations:
            fh.write(json.dumps({
                "label": format_annotation_label(ann.label),
                "t_start": ann.t_start,
                "t_end": ann.t_end,
            }) + "\n")


def load_recording(path) -> Recording:
    """Read a recording directory, enforcing all type invariants."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"not a recording directory: {root}")
    meta_d = json.loads(_require(root / "meta.json").read_text())
    try:
        meta = RecordingMeta(
            imu_rate_hz=float(meta_d["imu_rate_hz"]),
            audio_rate_hz=float(meta_d["audio_rate_hz"]),
            subject=str(meta_d["subject"]),
            session=str(meta_d["session"]),
        )
    except KeyError as exc:
        raise InvariantViolation(f"meta.json missing field {exc}") from None

    csv_path = _require(root / "imu.csv")
    with open(csv_path) as fh:
        header = fh.readline().strip()
        if header != IMU_CSV_HEADER:
            raise InvariantViolation(
                f"imu.csv header {header!r} != {IMU_CSV_HEADER!r}"
            )
        table = np.loadtxt(fh, delimiter=",", ndmin=2)
    if table.size == 0:
        raise InvariantViolation("imu.csv has no rows")
    if table.shape[1] != 7:
        raise InvariantViolation(f"imu.csv must have 7 columns, got {table.shape[1]}")

    left = np.fromfile(_require(root / "audio_l.pcm"), dtype="<i2")
    right = np.fromfile(_require(root / "audio_r.pcm"), dtype="<i2")
    if left.shape != right.shape:
        raise InvariantViolation(
            f"audio channel lengths differ: {left.shape[0]} vs {right.shape[0]}"
        )

    annotations = []
    with open(_require(root / "annotations.jsonl")) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            annotations.append(Annotation(
                label=parse_annotation_label(d["label"]),
                t_start=float(d["t_start"]),
                t_end=float(d["t_end"]),
            ))

    rec = Recording(
        meta=meta,
        imu_t=table[:, 0].copy(),
        imu=table[:, 1:].copy(),
        audio=np.stack([left, right], axis=1),
        annotations=tuple(annotations),
    )
    return rec.validate()


def save_model(path, svm: LinearSvmGate, knn: DtwKnnClassifier,
               feature_mode: str) -> None:
    """Persist the trained gate + template bank as model.json."""
    if feature_mode not in MODEL_MODES:
        raise ValueError(f"feature_mode must be one of {sorted(MODEL_MODES)}")
    if not hasattr(svm, "weights_"):
        raise ValueError("gate SVM is not fitted")
    if svm.n_features_in_ != MODEL_MODES[feature_mode]:
        raise ValueError(
            f"a '{feature_mode}' model stores {MODEL_MODES[feature_mode]} "
            f"weights, the SVM has {svm.n_features_in_} (was it trained "
            "with a channel mask?)"
        )
    if not hasattr(knn, "templates_"):
        raise ValueError("template bank is not fitted")
    if knn.template_shape_ != (SEGMENT_IMU_ROWS, 6):
        raise ValueError(
            f"model files store {SEGMENT_IMU_ROWS}x6 templates, "
            f"got {knn.template_shape_}"
        )
    doc = {
        "svm": {
            "weights": svm.weights_.tolist(),
            "bias": svm.bias_,
            "mode": feature_mode,
        },
        "norm": {
            "mean": svm.mean_.tolist(),
            "std": svm.scale_.tolist(),
        },
        "templates": [
            {"label": label, "matrix": tpl.tolist()}
            for tpl, label in zip(knn.templates_, knn.labels_)
        ],
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_model(path) -> tuple[LinearSvmGate, DtwKnnClassifier, str]:
    """Inverse of save_model; returns (svm, knn, feature_mode)."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"missing model file: {p}")
    doc = json.loads(p.read_text())
    mode = doc["svm"]["mode"]
    if mode not in MODEL_MODES:
        raise InvariantViolation(f"unknown model mode {mode!r}")
    weights = np.asarray(doc["svm"]["weights"], dtype=np.float64)
    mean = np.asarray(doc["norm"]["mean"], dtype=np.float64)
    std = np.asarray(doc["norm"]["std"], dtype=np.float64)
    if not (weights.shape == mean.shape == std.shape == (MODEL_MODES[mode],)):
        raise InvariantViolation(
            f"model arrays must all have length {MODEL_MODES[mode]}"
        )
    svm = LinearSvmGate()
    svm.weights_ = weights
    svm.bias_ = float(doc["svm"]["bias"])
    svm.mean_ = mean
    svm.scale_ = std
    svm.n_features_in_ = weights.shape[0]
    svm.converged_ = True
    svm.classes_ = np.array([NOISE, GESTURE])

    entries = doc["templates"]
    if not entries:
        raise InvariantViolation("model contains no templates")
    templates = [np.asarray(e["matrix"], dtype=np.float64) for e in entries]
    labels = [e["label"] for e in entries]
    for tpl in templates:
        if tpl.shape != (SEGMENT_IMU_ROWS, 6):
            raise InvariantViolation(
                f"template must be {SEGMENT_IMU_ROWS}x6, got {tpl.shape}"
            )
    knn = DtwKnnClassifier().fit(templates, labels)
    return svm, knn, mode
