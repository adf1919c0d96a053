"""Event segmentation: acoustic + motion energy gating and extraction of a
centered 1.5 s event region (180 gyro rows) from the 2 s sliding windows.

Both gate thresholds may be given explicitly or calibrated from the leading
noise floor of the stream: the audio threshold as a multiple of the median
window energy over the first seconds, the gyro threshold as a multiple of
the noise-floor absolute maximum (with a fixed lower bound).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TruncatedEvent
from .streaming import Window
from .types import (
    AUDIO_FULL_SCALE,
    AUDIO_RATE_HZ,
    IMU_RATE_HZ,
    Diagnostic,
    Recording,
    Y_AXIS_COLUMNS,
)
from .validation import SEGMENT_AUDIO_ROWS, SEGMENT_IMU_ROWS, WINDOW_IMU_ROWS

#: rows kept on each side of the detected center (1.5 s total at 120 Hz)
HALF_REGION = SEGMENT_IMU_ROWS // 2
#: env argmax must have slid at least to the window middle before emission
CENTER_TARGET = WINDOW_IMU_ROWS // 2


@dataclass(frozen=True)
class EventSegment:
    """A centered candidate gesture: 180x6 gyro rows plus the co-located
    1.5 s of stereo audio."""

    t_center: float
    imu: np.ndarray
    audio: np.ndarray
    trigger_energy: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.imu.shape != (SEGMENT_IMU_ROWS, 6):
            raise TruncatedEvent(
                f"event region must be {SEGMENT_IMU_ROWS}x6, got {self.imu.shape}"
            )
        if self.audio.shape != (SEGMENT_AUDIO_ROWS, 2):
            raise TruncatedEvent(
                f"event audio must be {SEGMENT_AUDIO_ROWS}x2, got {self.audio.shape}"
            )
        self.imu.setflags(write=False)
        self.audio.setflags(write=False)


@dataclass
class GateConfig:
    """Thresholds and timing for the two-stage energy gate.

    Thresholds left as None are calibrated from the first ``calibration_s``
    seconds of the stream; events inside the calibration span are not
    detected, so streams should lead in with background only.
    """

    audio_energy_threshold: float | None = None
    gyro_y_threshold: float | None = None
    smoothing_width: int = 15
    refractory_s: float = 0.75
    calibration_s: float = 3.0
    audio_floor_factor: float = 8.0
    gyro_floor_factor: float = 5.0
    gyro_min_threshold: float = 15.0

    def __post_init__(self):
        if self.smoothing_width <= 0 or self.smoothing_width % 2 == 0:
            raise ValueError("smoothing_width must be a positive odd integer")
        for name in ("audio_energy_threshold", "gyro_y_threshold"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
        if self.refractory_s <= 0 or self.calibration_s <= 0:
            raise ValueError("refractory_s and calibration_s must be positive")


def audio_energy(window: Window) -> float:
    """Mean squared sample over both channels, full scale = 1.0."""
    return audio_energy_of(window.audio)


def audio_energy_of(audio: np.ndarray) -> float:
    x = audio.astype(np.float64) / AUDIO_FULL_SCALE
    return float(np.mean(x * x))


def gyro_peak(window: Window) -> float:
    """Largest |y-axis| value across both ears in the window."""
    return gyro_peak_of(window.imu)


def gyro_peak_of(imu: np.ndarray) -> float:
    y = imu[:, list(Y_AXIS_COLUMNS)]
    return float(np.max(np.abs(y))) if y.size else 0.0


def smoothed_envelope(imu: np.ndarray, width: int) -> np.ndarray:
    """Centered moving average of the summed |y-axis| of both ears."""
    y = np.abs(imu[:, Y_AXIS_COLUMNS[0]]) + np.abs(imu[:, Y_AXIS_COLUMNS[1]])
    kernel = np.full(width, 1.0 / width)
    return np.convolve(y, kernel, mode="same")


def center_and_crop(imu_window: np.ndarray, audio_window: np.ndarray,
                    cfg: GateConfig, t_start: float = 0.0,
                    trigger_energy: tuple[float, float] = (0.0, 0.0),
                    ) -> EventSegment:
    """Crop the 1.5 s event region around the smoothed-envelope peak.

    Raises TruncatedEvent when the peak sits closer than 90 rows to either
    edge of the 2 s window.
    """
    env = smoothed_envelope(imu_window, cfg.smoothing_width)
    center = int(np.argmax(env))
    lo = center - HALF_REGION
    hi = center + HALF_REGION
    if lo < 0 or hi > imu_window.shape[0]:
        raise TruncatedEvent(
            f"center row {center} leaves no {HALF_REGION}-row buffer"
        )
    a_lo = round(lo * AUDIO_RATE_HZ / IMU_RATE_HZ)
    a_hi = a_lo + SEGMENT_AUDIO_ROWS
    return EventSegment(
        t_center=t_start + center / IMU_RATE_HZ,
        imu=imu_window[lo:hi].copy(),
        audio=audio_window[a_lo:a_hi].copy(),
        trigger_energy=trigger_energy,
    )


@dataclass
class _PendingWindow:
    window: Window
    energies: tuple[float, float]


class EventDetector:
    """Stateful gate over the window stream.

    Emits at most one EventSegment per physical event: a window triggers
    only when both energy gates pass, emission waits until the envelope
    peak has slid to the window middle, and a refractory period suppresses
    re-triggering on the same event.
    """

    def __init__(self, cfg: GateConfig | None = None):
        self.cfg = cfg or GateConfig()
        self.audio_threshold = self.cfg.audio_energy_threshold
        self.gyro_threshold = self.cfg.gyro_y_threshold
        self.diagnostics: list[Diagnostic] = []
        self._calibrating = (self.audio_threshold is None
                             or self.gyro_threshold is None)
        self._calib_energies: list[float] = []
        self._calib_peaks: list[float] = []
        self._stream_t0: float | None = None
        self._refractory_until: float | None = None
        self._pending: _PendingWindow | None = None

    def _calibrate_step(self, window: Window) -> bool:
        """Accumulate noise-floor stats; True while still calibrating."""
        if self._stream_t0 is None:
            self._stream_t0 = window.t_start
        horizon = self._stream_t0 + self.cfg.calibration_s - 2.0
        if window.t_start <= horizon + 1e-9:
            self._calib_energies.append(audio_energy(window))
            self._calib_peaks.append(gyro_peak(window))
            return True
        if not self._calib_energies:
            raise ValueError(
                "stream shorter than the calibration lead-in; "
                "set explicit gate thresholds"
            )
        if self.audio_threshold is None:
            self.audio_threshold = (self.cfg.audio_floor_factor
                                    * float(np.median(self._calib_energies)))
        if self.gyro_threshold is None:
            self.gyro_threshold = max(
                self.cfg.gyro_min_threshold,
                self.cfg.gyro_floor_factor * max(self._calib_peaks),
            )
        self._calibrating = False
        return False

    def process(self, window: Window) -> EventSegment | None:
        if self._calibrating and self._calibrate_step(window):
            return None
        ae = audio_energy(window)
        if ae <= self.audio_threshold:
            return None
        gp = gyro_peak(window)
        if gp <= self.gyro_threshold:
            return None
        env = smoothed_envelope(window.imu, self.cfg.smoothing_width)
        center = int(np.argmax(env))
        t_c = window.t_start + center / IMU_RATE_HZ
        if self._refractory_until is not None and t_c < self._refractory_until:
            return None
        if center > CENTER_TARGET:
            # event still right of middle; keep sliding
            self._pending = _PendingWindow(window, (ae, gp))
            return None
        self._pending = None
        self._refractory_until = t_c + self.cfg.refractory_s
        if center < HALF_REGION:
            self.diagnostics.append(Diagnostic(
                "truncated_event", t_c,
                f"event peak at row {center} cannot be centered",
            ))
            return None
        return center_and_crop(window.imu, window.audio, self.cfg,
                               t_start=window.t_start, trigger_energy=(ae, gp))

    def flush(self) -> EventSegment | None:
        """Resolve an event still waiting to be centered at stream end."""
        if self._pending is None:
            return None
        pending, self._pending = self._pending, None
        window, energies = pending.window, pending.energies
        env = smoothed_envelope(window.imu, self.cfg.smoothing_width)
        center = int(np.argmax(env))
        t_c = window.t_start + center / IMU_RATE_HZ
        self._refractory_until = t_c + self.cfg.refractory_s
        try:
            return center_and_crop(window.imu, window.audio, self.cfg,
                                   t_start=window.t_start,
                                   trigger_energy=energies)
        except TruncatedEvent:
            self.diagnostics.append(Diagnostic(
                "truncated_event", t_c,
                "stream ended before the event could be centered",
            ))
            return None


def detect_event(windows, cfg: GateConfig | None = None,
                 diagnostics: list | None = None):
    """Generator form of EventDetector over an iterable of windows."""
    det = EventDetector(cfg)
    for window in windows:
        seg = det.process(window)
        if seg is not None:
            yield seg
    seg = det.flush()
    if seg is not None:
        yield seg
    if diagnostics is not None:
        diagnostics.extend(det.diagnostics)


def extract_segment(rec: Recording, t_center: float) -> EventSegment:
    """Slice a 1.5 s event region directly out of a recording, bypassing
    the gates (used to harvest noise examples at annotated positions)."""
    t0 = float(rec.imu_t[0]) if rec.imu_t.shape[0] else 0.0
    center = round((t_center - t0) * rec.meta.imu_rate_hz)
    lo = center - HALF_REGION
    hi = center + HALF_REGION
    if lo < 0 or hi > rec.imu.shape[0]:
        raise TruncatedEvent(f"t_center={t_center} too close to recording edge")
    a_lo = round((t0 + lo / rec.meta.imu_rate_hz) * rec.meta.audio_rate_hz)
    a_hi = a_lo + SEGMENT_AUDIO_ROWS
    if a_lo < 0 or a_hi > rec.audio.shape[0]:
        raise TruncatedEvent(f"t_center={t_center} outside the audio span")
    imu = rec.imu[lo:hi].copy()
    audio = rec.audio[a_lo:a_hi].copy()
    return EventSegment(
        t_center=t0 + center / rec.meta.imu_rate_hz,
        imu=imu,
        audio=audio,
        trigger_energy=(audio_energy_of(audio), gyro_peak_of(imu)),
    )
