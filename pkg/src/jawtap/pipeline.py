"""End-to-end recognizer: replay, train, and classify recordings.

The recognizer owns the trained state (template bank, gate SVM,
activation threshold) and runs the full chain over a recording:
windows -> energy gates -> event region -> feature gate -> template
classification -> session (hold/release, timeouts, activation).
"""
from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from . import io as model_io
from .dtw_knn import DtwKnnClassifier, activation_threshold
from .errors import TruncatedEvent, UncalibratedThreshold
from .features import feature_matrix, feature_vector
from .segment import EventDetector, EventSegment, GateConfig, extract_segment
from .session import (
    ACTIVATION_MODE,
    FULL_MODE,
    SessionConfig,
    SessionTracker,
    y_abs_of_row,
)
from .streaming import StreamBuffer
from .svm import NOISE, LinearSvmGate
from .types import (
    Annotation,
    Diagnostic,
    GestureEvent,
    GestureLabel,
    ImuFrame,
    Recording,
)
from .validation import normalize_channel_mask


@dataclass
class PipelineConfig:
    gate: GateConfig = field(default_factory=GateConfig)
    feature_mode: str = "full"
    channel_mask: tuple[str, ...] = ("left", "right")
    band: int | None = None
    svm_c: float = 1.0
    svm_tol: float = 1e-3
    svm_max_passes: int = 100
    use_noise_gate: bool = True
    activation_factor: float = 1.2
    release_threshold_ratio: float = 0.6
    release_lockout_s: float = 0.3
    hold_timeout_s: float = 5.0
    match_window_s: float = 0.25


@dataclass
class TrainingSegments:
    """Pipeline-extracted training material from one labeled recording."""

    gesture_segments: list[EventSegment]
    gesture_labels: list[str]
    noise_segments: list[EventSegment]
    diagnostics: list[Diagnostic]


def match_by_center(segments: list[EventSegment],
                    annotations: tuple[Annotation, ...],
                    window_s: float) -> dict[int, int]:
    """Greedy pairing annotation-index -> segment-index by center
    proximity; each segment is used at most once."""
    used: set[int] = set()
    pairs: dict[int, int] = {}
    order = sorted(range(len(annotations)),
                   key=lambda i: annotations[i].center)
    for ai in order:
        center = annotations[ai].center
        best_j, best_d = None, window_s
        for j, seg in enumerate(segments):
            if j in used:
                continue
            d = abs(seg.t_center - center)
            if d <= best_d:
                best_j, best_d = j, d
        if best_j is not None:
            used.add(best_j)
            pairs[ai] = best_j
    return pairs


class GestureRecognizer:
    """Trainable full-pipeline recognizer with a fit/process interface."""

    def __init__(self, config: PipelineConfig | None = None):
        self.config = config or PipelineConfig()
        self.config.channel_mask = normalize_channel_mask(
            self.config.channel_mask)
        self.knn_: DtwKnnClassifier | None = None
        self.svm_: LinearSvmGate | None = None
        self.svm_mask_: tuple[str, ...] = self.config.channel_mask
        self.activation_threshold_: float | None = None

    # -- detection ------------------------------------------------------

    def _gate_config(self) -> GateConfig:
        return dataclasses.replace(self.config.gate)

    def detect_segments(self, recording: Recording
                        ) -> tuple[list[EventSegment], list[Diagnostic]]:
        """Replay a recording through the segmentation stage only."""
        segments: list[EventSegment] = []

        def on_segment(seg, det, session):
            segments.append(seg)

        diagnostics = self._replay(recording, on_segment, session=None)
        return segments, diagnostics

    def _replay(self, recording: Recording, on_segment,
                session: SessionTracker | None,
                events_out: list[GestureEvent] | None = None,
                realtime: bool = False) -> list[Diagnostic]:
        buf = StreamBuffer()
        det = EventDetector(self._gate_config())
        imu_t = recording.imu_t
        imu = recording.imu
        audio = recording.audio
        n = imu.shape[0]
        hop_frames = 6
        hop_samples = 400
        audio_rate = recording.meta.audio_rate_hz
        wall_start = time.monotonic()
        hop_index = 0
        for lo in range(0, n, hop_frames):
            hi = min(lo + hop_frames, n)
            for k in range(lo, hi):
                t = float(imu_t[k])
                if session is not None:
                    hits = session.on_imu(t, y_abs_of_row(imu[k]))
                    if events_out is not None:
                        events_out.extend(hits)
                buf.push_imu(ImuFrame(
                    t=t,
                    gyro_left=(imu[k, 0], imu[k, 1], imu[k, 2]),
                    gyro_right=(imu[k, 3], imu[k, 4], imu[k, 5]),
                ))
            a_lo = hop_index * hop_samples
            a_hi = min(a_lo + hop_samples, audio.shape[0])
            if a_lo < a_hi:
                buf.push_audio_block(a_lo / audio_rate, audio[a_lo:a_hi])
            for window in buf.drain():
                seg = det.process(window)
                if seg is not None:
                    self._after_calibration(det, session)
                    on_segment(seg, det, session)
            if realtime:
                target = wall_start + (hop_index + 1) * 0.05
                delay = target - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
            hop_index += 1
        # trailing audio not aligned to a full hop
        a_lo = hop_index * hop_samples
        if a_lo < audio.shape[0]:
            buf.push_audio_block(a_lo / audio_rate, audio[a_lo:])
        for window in buf.drain():
            seg = det.process(window)
            if seg is not None:
                self._after_calibration(det, session)
                on_segment(seg, det, session)
        seg = det.flush()
        if seg is not None:
            self._after_calibration(det, session)
            on_segment(seg, det, session)
        if session is not None:
            hits = session.flush(float(imu_t[-1]) if n else 0.0)
            if events_out is not None:
                events_out.extend(hits)
        diags = list(buf.diagnostics) + list(det.diagnostics)
        if session is not None:
            diags += list(session.diagnostics)
        diags.sort(key=lambda d: d.t)
        return diags

    def _after_calibration(self, det: EventDetector,
                           session: SessionTracker | None):
        if session is not None \
                and session.config.release_threshold is None \
                and det.gyro_threshold is not None:
            session.config.release_threshold = (
                self.config.release_threshold_ratio * det.gyro_threshold)

    # -- training ---------------------------------------------------------

    def extract_training_segments(self, recording: Recording
                                  ) -> TrainingSegments:
        """Run segmentation and pair the results with the annotations."""
        segments, diagnostics = self.detect_segments(recording)
        gesture_anns = recording.gesture_annotations()
        pairs = match_by_center(segments, gesture_anns,
                                self.config.match_window_s)
        gesture_segments = []
        gesture_labels = []
        for ai, j in sorted(pairs.items()):
            gesture_segments.append(segments[j])
            gesture_labels.append(str(gesture_anns[ai].label))

        noise_segments = []
        fired = [segments[j] for j in range(len(segments))
                 if j not in set(pairs.values())]
        for ann in recording.noise_annotations():
            inside = [s for s in fired
                      if ann.t_start <= s.t_center <= ann.t_end]
            if inside:
                noise_segments.append(inside[0])
                continue
            try:
                noise_segments.append(extract_segment(recording, ann.center))
            except TruncatedEvent:
                continue
        return TrainingSegments(gesture_segments, gesture_labels,
                                noise_segments, diagnostics)

    def fit_from_segments(self, training: TrainingSegments
                          ) -> "GestureRecognizer":
        mask = self.config.channel_mask
        self.knn_ = DtwKnnClassifier(
            band=self.config.band, channel_mask=mask,
        ).fit([s.imu for s in training.gesture_segments],
              training.gesture_labels)
        self.svm_ = None
        self.svm_mask_ = mask
        if self.config.use_noise_gate and training.noise_segments:
            X = feature_matrix(
                training.gesture_segments + training.noise_segments,
                self.config.feature_mode, mask)
            y = (["gesture"] * len(training.gesture_segments)
                 + ["noise"] * len(training.noise_segments))
            self.svm_ = LinearSvmGate(
                C=self.config.svm_c, tol=self.config.svm_tol,
                max_passes=self.config.svm_max_passes,
            ).fit(X, y)
        try:
            self.activation_threshold_ = activation_threshold(
                self.knn_, factor=self.config.activation_factor)
        except UncalibratedThreshold:
            self.activation_threshold_ = None
        return self

    def fit(self, recording: Recording) -> "GestureRecognizer":
        """Train the gate and template bank from a labeled recording."""
        return self.fit_from_segments(
            self.extract_training_segments(recording))

    # -- inference --------------------------------------------------------

    def _classify(self, seg: EventSegment
                  ) -> tuple[GestureLabel, float] | None:
        if self.svm_ is not None:
            fv = feature_vector(seg, self.config.feature_mode,
                                self.svm_mask_)
            cls, _margin = self.svm_.gate(fv.values)
            if cls == NOISE:
                return None
        label_s, dist, _per_label = self.knn_.classify(seg.imu)
        return GestureLabel.parse(label_s), dist

    def process(self, recording: Recording, mode: str = FULL_MODE,
                realtime: bool = False
                ) -> tuple[list[GestureEvent], list[Diagnostic]]:
        """Run the full pipeline; returns (events, diagnostics)."""
        if self.knn_ is None:
            raise UncalibratedThreshold("fit or load a model first")
        if mode not in (FULL_MODE, ACTIVATION_MODE):
            raise ValueError(f"unknown mode {mode!r}")
        session = SessionTracker(SessionConfig(
            mode=mode,
            release_threshold=None,
            release_lockout_s=self.config.release_lockout_s,
            hold_timeout_s=self.config.hold_timeout_s,
            activation_threshold=self.activation_threshold_,
        ))
        if self.config.gate.gyro_y_threshold is not None:
            session.config.release_threshold = (
                self.config.release_threshold_ratio
                * self.config.gate.gyro_y_threshold)
        events: list[GestureEvent] = []
        rejected: list[Diagnostic] = []

        def on_segment(seg, det, sess):
            result = self._classify(seg)
            if result is None:
                rejected.append(Diagnostic(
                    "noise_gated", seg.t_center,
                    "segment rejected by the feature gate"))
                return
            label, dist = result
            events.extend(sess.on_classified(label, dist, seg.t_center))

        diagnostics = self._replay(recording, on_segment, session,
                                   events_out=events, realtime=realtime)
        diagnostics += rejected
        diagnostics.sort(key=lambda d: d.t)
        return events, diagnostics

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        if self.knn_ is None or self.svm_ is None:
            raise ValueError(
                "model files need both the template bank and the gate SVM; "
                "train on a recording with noise annotations")
        model_io.save_model(path, self.svm_, self.knn_,
                            self.config.feature_mode)

    @classmethod
    def load(cls, path, config: PipelineConfig | None = None
             ) -> "GestureRecognizer":
        rec = cls(config)
        svm, knn, mode = model_io.load_model(path)
        rec.config.feature_mode = mode
        knn.set_params(band=rec.config.band,
                       channel_mask=rec.config.channel_mask)
        rec.knn_ = knn
        rec.svm_ = svm
        # the stored SVM was trained on unmasked features
        rec.svm_mask_ = ("left", "right")
        try:
            rec.activation_threshold_ = activation_threshold(
                knn, factor=rec.config.activation_factor)
        except UncalibratedThreshold:
            rec.activation_threshold_ = None
        return rec
