"""Evaluation harness: train/test runs, confusion matrices, channel
ablations and label regroupings.

Events are scored against annotations by center proximity; only matched
events enter the confusion matrix, unmatched emissions are logged as
false positives and unmatched annotations as misses. Ablations reuse the
training segments extracted once and re-run the pipeline with the ear
mask applied to both the template bank and the gate features.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .errors import MissingLabelInTrain, NoEventsDetected
from .pipeline import (
    GestureRecognizer,
    PipelineConfig,
    TrainingSegments,
    match_by_center,
)
from .types import ALL_LABELS, GestureLabel, Manner, NoiseKind, Recording
from .validation import normalize_channel_mask

GROUP_NONE = "none"
GROUP_MANNER3 = "manner3"
GROUP_PLACE4 = "place4"

MANNER3_LABELS = ("single", "double", "hold")
PLACE4_LABELS = ("front", "back", "left", "right")


@dataclass(frozen=True)
class EventLogRow:
    t: float
    truth: str | None
    predicted: str | None
    distance: float | None

    def to_json_dict(self) -> dict:
        return {"t": self.t, "truth": self.truth,
                "predicted": self.predicted, "distance": self.distance}


@dataclass(frozen=True)
class EvalReport:
    labels: tuple[str, ...]
    confusion: np.ndarray
    channel_mask: str
    grouping: str
    log: tuple[EventLogRow, ...]
    counts: dict

    def __post_init__(self):
        self.confusion.setflags(write=False)
        n = len(self.labels)
        if self.confusion.shape != (n, n):
            raise ValueError("confusion matrix does not match label set")

    @property
    def total_scored(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        total = self.total_scored
        return float(np.trace(self.confusion)) / total if total else 0.0

    @property
    def per_label_accuracy(self) -> dict[str, float | None]:
        out: dict[str, float | None] = {}
        for i, name in enumerate(self.labels):
            row = int(self.confusion[i].sum())
            out[name] = (float(self.confusion[i, i]) / row) if row else None
        return out

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "confusion": self.confusion.tolist(),
            "channel_mask": self.channel_mask,
            "grouping": self.grouping,
            "accuracy": self.accuracy,
            "per_label_accuracy": self.per_label_accuracy,
            "counts": dict(self.counts),
            "events": [row.to_json_dict() for row in self.log],
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_json_dict(), sort_keys=True,
                          separators=(",", ":")).encode()

    def format_confusion(self) -> str:
        width = max(9, max(len(n) for n in self.labels) + 1)
        head = " " * width + "".join(f"{n:>{width}}" for n in self.labels)
        lines = [head]
        for i, name in enumerate(self.labels):
            cells = "".join(f"{int(v):>{width}}" for v in self.confusion[i])
            lines.append(f"{name:>{width}}{cells}")
        lines.append(f"accuracy: {self.accuracy:.4f} "
                     f"({int(np.trace(self.confusion))}/{self.total_scored})")
        return "\n".join(lines)

    def save_log_csv(self, path) -> None:
        lines = ["t,truth,predicted,distance"]
        for row in self.log:
            lines.append(",".join([
                repr(row.t),
                row.truth or "",
                row.predicted or "",
                repr(row.distance) if row.distance is not None else "",
            ]))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


@dataclass
class EvalInputs:
    """Training segments extracted once, reusable across ablation masks."""

    training: TrainingSegments
    test_recording: Recording
    config: PipelineConfig


def _mask_name(mask: tuple[str, ...]) -> str:
    return "both" if len(mask) == 2 else mask[0]


def prepare_eval(train: Recording, test: Recording,
                 config: PipelineConfig | None = None) -> EvalInputs:
    config = config or PipelineConfig()
    extractor = GestureRecognizer(config)
    return EvalInputs(extractor.extract_training_segments(train),
                      test, config)


def _score(events, recording: Recording, window_s: float
           ) -> tuple[tuple[EventLogRow, ...], dict]:
    gesture_anns = recording.gesture_annotations()
    noise_anns = recording.noise_annotations()
    pairs = match_by_center(list(events), gesture_anns, window_s)
    matched_events = set(pairs.values())
    rows: list[EventLogRow] = []
    for ai, ann in enumerate(gesture_anns):
        if ai in pairs:
            ev = events[pairs[ai]]
            rows.append(EventLogRow(ev.t_center, str(ann.label),
                                    str(ev.label), ev.nn_distance))
        else:
            rows.append(EventLogRow(ann.center, str(ann.label), None, None))
    false_positives = 0
    for j, ev in enumerate(events):
        if j in matched_events:
            continue
        false_positives += 1
        truth = None
        for ann in noise_anns:
            if ann.t_start <= ev.t_center <= ann.t_end:
                truth = f"noise_{ann.label.value}" \
                    if isinstance(ann.label, NoiseKind) else None
                break
        rows.append(EventLogRow(ev.t_center, truth, str(ev.label),
                                ev.nn_distance))
    rows.sort(key=lambda r: r.t)
    counts = {
        "annotations": len(gesture_anns),
        "matched": len(pairs),
        "missed": len(gesture_anns) - len(pairs),
        "false_positives": false_positives,
        "excluded": 0,
    }
    return tuple(rows), counts


def _confusion_from_log(log, labels: tuple[str, ...]) -> np.ndarray:
    index = {name: i for i, name in enumerate(labels)}
    mat = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for row in log:
        if row.truth in index and row.predicted in index:
            mat[index[row.truth], index[row.predicted]] += 1
    return mat


def run_eval_masked(inputs: EvalInputs, mask="both") -> EvalReport:
    """Train from the cached segments under the given ear mask, run the
    full pipeline over the test recording, and score it."""
    mask = normalize_channel_mask(mask)
    config = dataclasses.replace(inputs.config, channel_mask=mask)
    recognizer = GestureRecognizer(config).fit_from_segments(inputs.training)

    test_labels = {str(a.label)
                   for a in inputs.test_recording.gesture_annotations()}
    train_labels = set(recognizer.knn_.labels_)
    missing = sorted(test_labels - train_labels)
    if missing:
        raise MissingLabelInTrain(f"no training templates for: {missing}")

    events, _diags = recognizer.process(inputs.test_recording)
    if not events:
        raise NoEventsDetected("pipeline emitted no events on the test data")
    log, counts = _score(events, inputs.test_recording,
                         inputs.config.match_window_s)
    labels = tuple(str(l) for l in ALL_LABELS)
    return EvalReport(
        labels=labels,
        confusion=_confusion_from_log(log, labels),
        channel_mask=_mask_name(mask),
        grouping=GROUP_NONE,
        log=log,
        counts=counts,
    )


def run_eval(train: Recording, test: Recording,
             config: PipelineConfig | None = None) -> EvalReport:
    """Full train-then-test evaluation with both ears."""
    return run_eval_masked(prepare_eval(train, test, config), "both")


def report_from_events(events, recording: Recording,
                       window_s: float = 0.25,
                       channel_mask: str = "both") -> EvalReport:
    """Score an already-computed event stream against a recording's
    annotations (used when evaluating a persisted model)."""
    log, counts = _score(list(events), recording, window_s)
    labels = tuple(str(l) for l in ALL_LABELS)
    return EvalReport(
        labels=labels,
        confusion=_confusion_from_log(log, labels),
        channel_mask=channel_mask,
        grouping=GROUP_NONE,
        log=log,
        counts=counts,
    )


def ablate_channels(inputs: EvalInputs, mask) -> EvalReport:
    """Same pipeline restricted to one ear (or both for the baseline)."""
    return run_eval_masked(inputs, mask)


def _group_label(name: str | None, scheme: str,
                 triple_policy: str) -> tuple[str | None, bool]:
    """(grouped name, excluded?) for one label string."""
    if name is None:
        return None, False
    label = GestureLabel.parse(name)
    if scheme == GROUP_PLACE4:
        return label.place.value, False
    if scheme == GROUP_MANNER3:
        if label.manner is Manner.TRIPLE:
            if triple_policy == "exclude":
                return None, True
            if triple_policy == "double":
                return "double", False
            raise ValueError(f"unknown triple_policy {triple_policy!r}")
        return label.manner.value, False
    raise ValueError(f"unknown grouping scheme {scheme!r}")


def regroup(report: EvalReport, scheme: str,
            triple_policy: str = "exclude") -> EvalReport:
    """Re-score the per-event log under a coarser label set.

    manner3 groups single/double/hold; the triple wake gesture is either
    excluded from scoring (default) or folded into double. place4 groups
    by contact place with triple counting as back.
    """
    if scheme == GROUP_NONE:
        return report
    rows: list[EventLogRow] = []
    excluded = report.counts.get("excluded", 0)
    for row in report.log:
        truth_is_gesture = row.truth is not None \
            and not row.truth.startswith("noise_")
        truth, drop_t = _group_label(
            row.truth if truth_is_gesture else None, scheme, triple_policy)
        predicted, drop_p = _group_label(row.predicted, scheme, triple_policy)
        if drop_t or drop_p:
            excluded += 1
            continue
        if truth is None and row.truth is not None:
            truth = row.truth      # keep noise tags on false positives
        rows.append(EventLogRow(row.t, truth, predicted, row.distance))
    labels = MANNER3_LABELS if scheme == GROUP_MANNER3 else PLACE4_LABELS
    confusion = _confusion_from_log(rows, labels)
    counts = dict(report.counts)
    counts["excluded"] = excluded
    counts["matched"] = int(confusion.sum())
    return EvalReport(
        labels=labels,
        confusion=confusion,
        channel_mask=report.channel_mask,
        grouping=scheme,
        log=tuple(rows),
        counts=counts,
    )
