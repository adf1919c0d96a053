import numpy as np
import pytest

from jawtap.errors import InvariantViolation, NonMonotonicTimestamps, UnknownLabel
from jawtap.types import (
    ALL_LABELS,
    Annotation,
    GestureEvent,
    GestureLabel,
    Manner,
    NoiseKind,
    Place,
    Recording,
    RecordingMeta,
    format_annotation_label,
    parse_annotation_label,
)


def test_exactly_13_labels():
    assert len(ALL_LABELS) == 13
    assert len(set(ALL_LABELS)) == 13


def test_label_string_round_trip():
    for label in ALL_LABELS:
        assert GestureLabel.parse(str(label)) == label


def test_canonical_strings():
    names = {str(l) for l in ALL_LABELS}
    assert "back_triple" in names
    assert "left_hold" in names
    assert GestureLabel.parse("left_hold") == GestureLabel(Place.LEFT, Manner.HOLD)
    assert str(GestureLabel(Place.BACK, Manner.TRIPLE)) == "back_triple"


@pytest.mark.parametrize("bad", ["front_triple", "left_triple", "right_triple"])
def test_triple_only_with_back(bad):
    with pytest.raises(UnknownLabel):
        GestureLabel.parse(bad)


@pytest.mark.parametrize("bad", ["", "left", "left_", "banana", "left_hold_x"])
def test_unknown_label_strings(bad):
    with pytest.raises(UnknownLabel):
        GestureLabel.parse(bad)


def test_noise_label_round_trip():
    for kind in NoiseKind:
        text = format_annotation_label(kind)
        assert text.startswith("noise_")
        assert parse_annotation_label(text) is kind
    with pytest.raises(UnknownLabel):
        parse_annotation_label("noise_sleeping")


def test_annotation_requires_ordered_span():
    with pytest.raises(InvariantViolation):
        Annotation(NoiseKind.STATIC, 2.0, 1.0)


def test_hold_duration_presence_rules():
    hold = GestureLabel.parse("left_hold")
    single = GestureLabel.parse("left_single")
    GestureEvent(hold, 1.0, 0.5, hold_duration=2.0)
    with pytest.raises(InvariantViolation):
        GestureEvent(hold, 1.0, 0.5)
    with pytest.raises(InvariantViolation):
        GestureEvent(single, 1.0, 0.5, hold_duration=2.0)
    with pytest.raises(InvariantViolation):
        GestureEvent(hold, 1.0, 0.5, hold_duration=-1.0)


def _recording(n_imu=240, n_audio=16000, rate=120.0):
    return Recording(
        meta=RecordingMeta(),
        imu_t=np.arange(n_imu) / rate,
        imu=np.zeros((n_imu, 6)),
        audio=np.zeros((n_audio, 2), dtype=np.int16),
    )


def test_recording_durations_from_rates():
    rec = _recording().validate()
    assert rec.duration == pytest.approx(2.0)
    assert rec.audio_duration == pytest.approx(2.0)


def test_recording_rejects_rate_mismatch():
    # 60 frames spanning one second but declared 120 Hz
    rec = Recording(
        meta=RecordingMeta(),
        imu_t=np.arange(60) / 59.0,
        imu=np.zeros((60, 6)),
        audio=np.zeros((4000, 2), dtype=np.int16),
    )
    with pytest.raises(InvariantViolation):
        rec.validate()


def test_recording_rejects_non_monotonic_timestamps():
    t = np.arange(240) / 120.0
    t[5] = t[4]
    rec = Recording(meta=RecordingMeta(), imu_t=t, imu=np.zeros((240, 6)),
                    audio=np.zeros((16000, 2), dtype=np.int16))
    with pytest.raises(NonMonotonicTimestamps):
        rec.validate()


def test_recording_rejects_duration_gap():
    rec = _recording(n_audio=14000)   # audio 0.25 s shorter
    with pytest.raises(InvariantViolation):
        rec.validate()


def test_recording_rejects_overlapping_annotations():
    rec = Recording(
        meta=RecordingMeta(),
        imu_t=np.arange(240) / 120.0,
        imu=np.zeros((240, 6)),
        audio=np.zeros((16000, 2), dtype=np.int16),
        annotations=(
            Annotation(NoiseKind.STATIC, 0.0, 1.0),
            Annotation(NoiseKind.STATIC, 0.5, 1.5),
        ),
    )
    with pytest.raises(InvariantViolation):
        rec.validate()


def test_recording_arrays_immutable():
    rec = _recording()
    with pytest.raises(ValueError):
        rec.imu[0, 0] = 1.0
