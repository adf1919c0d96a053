"""Runtime session layer: turns classified segments into gesture events.

Non-hold classifications become events immediately. A hold classification
goes pending until the release peak (the smaller y-axis peak when the
mouth re-opens) is seen on the raw gyro stream; the elapsed time becomes
the event's hold_duration. A pending hold with no release within the
timeout resolves to a hold_timeout diagnostic instead of an event.

In activation mode the session only ever emits the wake gesture
(back_triple), and only when its template distance clears the calibrated
bound.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfOrderInput, UncalibratedThreshold
from .types import (
    BACK_TRIPLE,
    Diagnostic,
    GestureEvent,
    GestureLabel,
    Manner,
    Y_AXIS_COLUMNS,
)

FULL_MODE = "full"
ACTIVATION_MODE = "activation"


class _ReleaseScan:
    """Finds the release peak: first |y| threshold crossing after the
    lockout, refined to the local maximum within the following window."""

    def __init__(self, t_start: float, threshold: float,
                 lockout_s: float, peak_window_s: float = 0.25):
        self.earliest = t_start + lockout_s
        self.threshold = threshold
        self.peak_window_s = peak_window_s
        self._cross_t: float | None = None
        self._best_t = 0.0
        self._best_v = -np.inf

    def feed(self, t: float, y_abs: float) -> float | None:
        """Returns the release time once resolved, else None."""
        if t < self.earliest:
            return None
        if self._cross_t is None:
            if y_abs > self.threshold:
                self._cross_t = t
                self._best_t, self._best_v = t, y_abs
            return None
        if t - self._cross_t > self.peak_window_s or y_abs <= self.threshold:
            return self._best_t
        if y_abs > self._best_v:
            self._best_t, self._best_v = t, y_abs
        return None


def detect_release(times, y_abs, t_start: float, threshold: float,
                   lockout_s: float = 0.3) -> float | None:
    """Batch release search over a y-magnitude series after a hold onset."""
    scan = _ReleaseScan(t_start, threshold, lockout_s)
    for t, v in zip(times, y_abs):
        hit = scan.feed(float(t), float(v))
        if hit is not None:
            return hit
    if scan._cross_t is not None:
        return scan._best_t
    return None


@dataclass
class _PendingHold:
    label: GestureLabel
    t_start: float
    nn_distance: float
    deadline: float
    scan: _ReleaseScan


@dataclass
class SessionConfig:
    mode: str = FULL_MODE
    release_threshold: float | None = None
    release_lockout_s: float = 0.3
    hold_timeout_s: float = 5.0
    activation_threshold: float | None = None
    history_s: float = 10.0


class SessionTracker:
    """Single consumer of the classification stream plus the raw gyro
    y-magnitudes; emits time-ordered GestureEvents."""

    def __init__(self, config: SessionConfig | None = None):
        self.config = config or SessionConfig()
        if self.config.mode not in (FULL_MODE, ACTIVATION_MODE):
            raise ValueError(f"unknown session mode {self.config.mode!r}")
        self._pending: list[_PendingHold] = []
        self._history: deque[tuple[float, float]] = deque()
        self._last_classified_t: float | None = None
        self.diagnostics: list[Diagnostic] = []

    # -- raw gyro feed -------------------------------------------------

    def on_imu(self, t: float, y_abs: float) -> list[GestureEvent]:
        self._history.append((t, y_abs))
        horizon = t - self.config.history_s
        while self._history and self._history[0][0] < horizon:
            self._history.popleft()
        return self._advance(t, y_abs)

    def on_imu_frame(self, frame) -> list[GestureEvent]:
        y = max(abs(frame.gyro_left[1]), abs(frame.gyro_right[1]))
        return self.on_imu(frame.t, y)

    def _advance(self, t: float, y_abs: float | None) -> list[GestureEvent]:
        events: list[GestureEvent] = []
        still: list[_PendingHold] = []
        for hold in self._pending:
            resolved = False
            if y_abs is not None:
                hit = hold.scan.feed(t, y_abs)
                if hit is not None:
                    events.append(GestureEvent(
                        label=hold.label,
                        t_center=hold.t_start,
                        nn_distance=hold.nn_distance,
                        hold_duration=hit - hold.t_start,
                    ))
                    resolved = True
            if not resolved and hold.scan._cross_t is None \
                    and t > hold.deadline:
                self.diagnostics.append(Diagnostic(
                    "hold_timeout", hold.deadline,
                    f"no release for {hold.label} within "
                    f"{self.config.hold_timeout_s} s",
                ))
                resolved = True
            if not resolved:
                still.append(hold)
        self._pending = still
        return events

    # -- classification feed -------------------------------------------

    def on_classified(self, label: GestureLabel, nn_distance: float,
                      t_center: float) -> list[GestureEvent]:
        if self._last_classified_t is not None \
                and t_center < self._last_classified_t:
            raise OutOfOrderInput(
                f"classification at t={t_center} after t={self._last_classified_t}"
            )
        self._last_classified_t = t_center

        if self.config.mode == ACTIVATION_MODE:
            if self.activation_check(label, nn_distance):
                return [GestureEvent(label=BACK_TRIPLE, t_center=t_center,
                                     nn_distance=nn_distance)]
            return []

        if label.manner is not Manner.HOLD:
            return [GestureEvent(label=label, t_center=t_center,
                                 nn_distance=nn_distance)]

        if self.config.release_threshold is None:
            raise UncalibratedThreshold(
                "release_threshold must be set before tracking holds"
            )
        hold = _PendingHold(
            label=label,
            t_start=t_center,
            nn_distance=nn_distance,
            deadline=t_center + self.config.hold_timeout_s,
            scan=_ReleaseScan(t_center, self.config.release_threshold,
                              self.config.release_lockout_s),
        )
        # the classification arrives after the window slid past the tap,
        # so replay buffered samples before going live
        events: list[GestureEvent] = []
        for t, v in list(self._history):
            hit = hold.scan.feed(t, v)
            if hit is not None:
                events.append(GestureEvent(
                    label=hold.label, t_center=hold.t_start,
                    nn_distance=hold.nn_distance,
                    hold_duration=hit - hold.t_start,
                ))
                return events
        self._pending.append(hold)
        return events

    def activation_check(self, label: GestureLabel, nn_distance: float) -> bool:
        """True only for the wake gesture within the distance bound."""
        if self.config.activation_threshold is None:
            raise UncalibratedThreshold(
                "activation_threshold must be calibrated first"
            )
        return (label == BACK_TRIPLE
                and nn_distance <= self.config.activation_threshold)

    def flush(self, t_end: float) -> list[GestureEvent]:
        """Resolve whatever is still pending at stream end."""
        events: list[GestureEvent] = []
        for hold in self._pending:
            if hold.scan._cross_t is not None:
                events.append(GestureEvent(
                    label=hold.label, t_center=hold.t_start,
                    nn_distance=hold.nn_distance,
                    hold_duration=hold.scan._best_t - hold.t_start,
                ))
            else:
                t = min(hold.deadline, t_end)
                self.diagnostics.append(Diagnostic(
                    "hold_timeout", t,
                    f"stream ended with {hold.label} unreleased",
                ))
        self._pending = []
        return events


def y_abs_of_row(row: np.ndarray) -> float:
    """Largest |y| across both ears of one 6-column gyro row."""
    return max(abs(float(row[Y_AXIS_COLUMNS[0]])),
               abs(float(row[Y_AXIS_COLUMNS[1]])))
