"""Core domain types: gesture labels, sensor frames, recordings and events.

All value types are immutable after construction and safe to share across
threads. Arrays held by `Recording` are marked read-only.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvariantViolation,
    NonMonotonicTimestamps,
    RateMismatch,
    UnknownLabel,
)

IMU_RATE_HZ = 120.0
AUDIO_RATE_HZ = 8000.0

#: column order of the 6-axis gyro matrix everywhere in the package
IMU_CHANNELS = ("gx_l", "gy_l", "gz_l", "gx_r", "gy_r", "gz_r")
#: column indices of the y axis, one per ear
Y_AXIS_COLUMNS = (1, 4)
LEFT_COLUMNS = (0, 1, 2)
RIGHT_COLUMNS = (3, 4, 5)

#: signed 16-bit PCM full scale used when normalizing audio to [-1, 1]
AUDIO_FULL_SCALE = 32767.0


class Place(enum.Enum):
    """Where the teeth make contact."""

    FRONT = "front"
    BACK = "back"
    LEFT = "left"
    RIGHT = "right"


class Manner(enum.Enum):
    """How the teeth make contact."""

    SINGLE = "single"
    DOUBLE = "double"
    HOLD = "hold"
    TRIPLE = "triple"


class NoiseKind(enum.Enum):
    """Background-activity categories used for noise data."""

    TALKING = "talking"
    WALKING = "walking"
    EATING = "eating"
    STATIC = "static"


@dataclass(frozen=True, order=True)
class GestureLabel:
    """One of the 13 valid place/manner combinations.

    Triple is only producible with the back teeth, so (place, manner)
    pairs other than (BACK, TRIPLE) with manner TRIPLE are rejected.
    """

    place: Place
    manner: Manner

    def __post_init__(self):
        if self.manner is Manner.TRIPLE and self.place is not Place.BACK:
            raise UnknownLabel(
                f"triple is only valid with back, got place={self.place.value}"
            )

    def __str__(self) -> str:
        return f"{self.place.value}_{self.manner.value}"

    @classmethod
    def parse(cls, text: str) -> "GestureLabel":
        """Parse a canonical string such as ``"left_hold"``."""
        try:
            place_s, manner_s = text.split("_", 1)
            return cls(Place(place_s), Manner(manner_s))
        except (ValueError, UnknownLabel):
            raise UnknownLabel(f"not a gesture label: {text!r}") from None


def all_labels() -> tuple[GestureLabel, ...]:
    """The full 13-gesture vocabulary in canonical order."""
    labels = []
    for place in (Place.FRONT, Place.BACK, Place.LEFT, Place.RIGHT):
        for manner in (Manner.SINGLE, Manner.DOUBLE, Manner.HOLD):
            labels.append(GestureLabel(place, manner))
    labels.append(GestureLabel(Place.BACK, Manner.TRIPLE))
    return tuple(labels)


ALL_LABELS = all_labels()
BACK_TRIPLE = GestureLabel(Place.BACK, Manner.TRIPLE)

_NOISE_PREFIX = "noise_"


def format_annotation_label(label: "GestureLabel | NoiseKind") -> str:
    """Serialize a gesture or noise label for the annotation track."""
    if isinstance(label, GestureLabel):
        return str(label)
    if isinstance(label, NoiseKind):
        return _NOISE_PREFIX + label.value
    raise UnknownLabel(f"not a label: {label!r}")


def parse_annotation_label(text: str) -> "GestureLabel | NoiseKind":
    """Inverse of :func:`format_annotation_label`."""
    if text.startswith(_NOISE_PREFIX):
        try:
            return NoiseKind(text[len(_NOISE_PREFIX):])
        except ValueError:
            raise UnknownLabel(f"not a noise label: {text!r}") from None
    return GestureLabel.parse(text)


@dataclass(frozen=True)
class ImuFrame:
    """One 120 Hz gyro sample from both ears, in deg/s."""

    t: float
    gyro_left: tuple[float, float, float]
    gyro_right: tuple[float, float, float]

    def as_row(self) -> np.ndarray:
        return np.array(self.gyro_left + self.gyro_right, dtype=np.float64)


@dataclass(frozen=True)
class AudioFrame:
    """One 8 kHz stereo contact-microphone sample (signed 16-bit)."""

    t: float
    left: int
    right: int


@dataclass(frozen=True)
class Annotation:
    """Ground-truth span: a gesture or noise label over [t_start, t_end)."""

    label: GestureLabel | NoiseKind
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise InvariantViolation(
                f"annotation must have t_start < t_end, got "
                f"[{self.t_start}, {self.t_end}]"
            )

    @property
    def center(self) -> float:
        return 0.5 * (self.t_start + self.t_end)


@dataclass(frozen=True)
class RecordingMeta:
    imu_rate_hz: float = IMU_RATE_HZ
    audio_rate_hz: float = AUDIO_RATE_HZ
    subject: str = "synthetic"
    session: str = "default"


@dataclass(frozen=True)
class Recording:
    """A labeled multi-rate capture.

    imu_t: (n,) seconds, strictly increasing, nominally 1/imu_rate apart.
    imu:   (n, 6) gyro deg/s, columns per IMU_CHANNELS.
    audio: (m, 2) int16 samples at audio_rate; sample k is at t = k/rate.
    """

    meta: RecordingMeta
    imu_t: np.ndarray
    imu: np.ndarray
    audio: np.ndarray
    annotations: tuple[Annotation, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("imu_t", "imu", "audio"):
            arr = getattr(self, name)
            if not isinstance(arr, np.ndarray):
                raise InvariantViolation(f"{name} must be a numpy array")
            arr.setflags(write=False)
        object.__setattr__(self, "annotations", tuple(self.annotations))

    @property
    def imu_duration(self) -> float:
        return self.imu.shape[0] / self.meta.imu_rate_hz

    @property
    def audio_duration(self) -> float:
        return self.audio.shape[0] / self.meta.audio_rate_hz

    @property
    def duration(self) -> float:
        return self.imu_duration

    def validate(self) -> "Recording":
        """Raise InvariantViolation (or a subtype) if any invariant fails."""
        if self.imu_t.ndim != 1 or self.imu.shape != (self.imu_t.shape[0], 6):
            raise InvariantViolation(
                f"imu must be (n, 6) with matching imu_t, got "
                f"{self.imu.shape} vs {self.imu_t.shape}"
            )
        if self.audio.ndim != 2 or self.audio.shape[1] != 2:
            raise InvariantViolation(f"audio must be (m, 2), got {self.audio.shape}")
        if self.audio.dtype != np.int16:
            raise InvariantViolation(f"audio must be int16, got {self.audio.dtype}")
        if self.imu.shape[0] == 0 or self.audio.shape[0] == 0:
            raise InvariantViolation("empty recording")
        if not np.all(np.diff(self.imu_t) > 0):
            raise NonMonotonicTimestamps("imu timestamps must be strictly increasing")
        n = self.imu_t.shape[0]
        if n >= 2:
            span = float(self.imu_t[-1] - self.imu_t[0])
            effective = (n - 1) / span
            declared = self.meta.imu_rate_hz
            if abs(effective - declared) > 0.01 * declared:
                raise RateMismatch(
                    f"imu rate declared {declared} Hz but {n} frames span "
                    f"{span:.3f} s ({effective:.1f} Hz effective)"
                )
        if abs(self.imu_duration - self.audio_duration) > 0.100:
            raise InvariantViolation(
                f"imu ({self.imu_duration:.3f} s) and audio "
                f"({self.audio_duration:.3f} s) durations differ by more than 100 ms"
            )
        spans = sorted(self.annotations, key=lambda a: a.t_start)
        for prev, cur in zip(spans, spans[1:]):
            if cur.t_start < prev.t_end:
                raise InvariantViolation(
                    f"annotations overlap: [{prev.t_start}, {prev.t_end}] and "
                    f"[{cur.t_start}, {cur.t_end}]"
                )
        return self

    def iter_imu_frames(self):
        for k in range(self.imu.shape[0]):
            row = self.imu[k]
            yield ImuFrame(
                t=float(self.imu_t[k]),
                gyro_left=(float(row[0]), float(row[1]), float(row[2])),
                gyro_right=(float(row[3]), float(row[4]), float(row[5])),
            )

    def gesture_annotations(self) -> tuple[Annotation, ...]:
        return tuple(a for a in self.annotations if isinstance(a.label, GestureLabel))

    def noise_annotations(self) -> tuple[Annotation, ...]:
        return tuple(a for a in self.annotations if isinstance(a.label, NoiseKind))


@dataclass(frozen=True)
class GestureEvent:
    """An emitted recognition result.

    hold_duration is present exactly when the label's manner is HOLD;
    nn_distance is the nearest-template warping distance (lower = more
    confident).
    """

    label: GestureLabel
    t_center: float
    nn_distance: float
    hold_duration: float | None = None

    def __post_init__(self):
        is_hold = self.label.manner is Manner.HOLD
        if is_hold and self.hold_duration is None:
            raise InvariantViolation("hold event requires hold_duration")
        if not is_hold and self.hold_duration is not None:
            raise InvariantViolation("non-hold event cannot carry hold_duration")
        if self.hold_duration is not None and self.hold_duration < 0:
            raise InvariantViolation("hold_duration must be >= 0")
        if self.nn_distance < 0:
            raise InvariantViolation("nn_distance must be >= 0")

    def to_json_dict(self) -> dict:
        out: dict = {
            "label": str(self.label),
            "t_center": self.t_center,
            "nn_distance": self.nn_distance,
        }
        if self.hold_duration is not None:
            out["hold_duration"] = self.hold_duration
        return out


@dataclass(frozen=True)
class Diagnostic:
    """Non-event pipeline output (gaps, truncated events, hold timeouts)."""

    kind: str
    t: float
    message: str = ""

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "t": self.t, "message": self.message}
