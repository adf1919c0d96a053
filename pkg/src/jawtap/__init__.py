"""Teeth-tap gesture recognition from dual-ear gyro + contact-mic streams."""

from .dtw_knn import DtwKnnClassifier, activation_threshold, dtw_distance
from .evaluate import (
    EvalReport,
    ablate_channels,
    prepare_eval,
    regroup,
    run_eval,
    run_eval_masked,
)
from .features import FeatureLayout, FeatureVector, feature_layout, feature_vector
from .io import load_model, load_recording, save_model, save_recording
from .pipeline import GestureRecognizer, PipelineConfig
from .segment import EventDetector, EventSegment, GateConfig, detect_event
from .session import SessionConfig, SessionTracker
from .streaming import StreamBuffer, Window
from .svm import LinearSvmGate
from .synth import (
    GestureClip,
    SynthParams,
    TruthEvent,
    synth_dataset,
    synth_gesture,
    synth_noise,
)
from .types import (
    ALL_LABELS,
    Annotation,
    GestureEvent,
    GestureLabel,
    Manner,
    NoiseKind,
    Place,
    Recording,
    RecordingMeta,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_LABELS",
    "Annotation",
    "DtwKnnClassifier",
    "EvalReport",
    "EventDetector",
    "EventSegment",
    "FeatureLayout",
    "FeatureVector",
    "GateConfig",
    "GestureClip",
    "GestureEvent",
    "GestureLabel",
    "GestureRecognizer",
    "LinearSvmGate",
    "Manner",
    "NoiseKind",
    "PipelineConfig",
    "Place",
    "Recording",
    "RecordingMeta",
    "SessionConfig",
    "SessionTracker",
    "StreamBuffer",
    "SynthParams",
    "TruthEvent",
    "Window",
    "ablate_channels",
    "activation_threshold",
    "detect_event",
    "dtw_distance",
    "feature_layout",
    "feature_vector",
    "load_model",
    "load_recording",
    "prepare_eval",
    "regroup",
    "run_eval",
    "run_eval_masked",
    "save_model",
    "save_recording",
    "synth_dataset",
    "synth_gesture",
    "synth_noise",
]
