"""Multi-rate ingest: aligns the 120 Hz gyro and 8 kHz audio streams into
synchronized 2-second sliding windows.

Alignment is by nominal sample index (frame k sits at k/rate past the
stream anchor); real timestamps are only used to reject out-of-order
samples and to flag gaps. A gap larger than ``gap_s`` re-anchors the
stream and invalidates every window that would span it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfOrderSample
from .types import AudioFrame, Diagnostic, ImuFrame


@dataclass(frozen=True)
class Window:
    """One aligned 2-second view: 240x6 gyro rows and 16000x2 audio rows,
    both covering [t_start, t_start + 2.0)."""

    t_start: float
    imu: np.ndarray
    audio: np.ndarray

    def __post_init__(self):
        self.imu.setflags(write=False)
        self.audio.setflags(write=False)


class _StreamLane:
    """Growable buffer for one sample stream with absolute indexing."""

    def __init__(self, rate: float, width: int, dtype, capacity: int,
                 gap_s: float):
        self.rate = rate
        self.gap_s = gap_s
        self._data = np.zeros((capacity, width), dtype=dtype)
        self._base = 0      # absolute index of row 0 of _data
        self._len = 0
        self.count = 0      # absolute index one past the newest sample
        self.released = 0   # samples before this index may be evicted
        self._last_t: float | None = None
        # (abs_index, t) pairs; nominal time of sample k is taken from the
        # most recent anchor at or before k
        self.anchors: list[tuple[int, float]] = []
        self.gap_indices: list[int] = []

    def push_block(self, t0: float, rows: np.ndarray) -> bool:
        """Append rows whose first sample is at t0. Returns True if this
        push opened a gap."""
        n = rows.shape[0]
        if n == 0:
            return False
        gap = False
        if self._last_t is None:
            self.anchors.append((0, t0))
        else:
            if t0 <= self._last_t:
                raise OutOfOrderSample(
                    f"sample at t={t0} not after previous t={self._last_t}"
                )
            if t0 - self._last_t > self.gap_s:
                self.anchors.append((self.count, t0))
                self.gap_indices.append(self.count)
                gap = True
        self._last_t = t0 + (n - 1) / self.rate
        self._append(rows)
        return gap

    def _append(self, rows: np.ndarray):
        n = rows.shape[0]
        cap = self._data.shape[0]
        if self._len + n > cap:
            keep_from = max(self.released - self._base, 0)
            kept = self._len - keep_from
            if kept + n <= cap and keep_from > 0:
                self._data[:kept] = self._data[keep_from:self._len]
            else:
                new_cap = max(cap * 2, kept + n)
                grown = np.zeros((new_cap, self._data.shape[1]),
                                 dtype=self._data.dtype)
                grown[:kept] = self._data[keep_from:self._len]
                self._data = grown
            self._base += keep_from
            self._len = kept
        self._data[self._len:self._len + n] = rows
        self._len += n
        self.count += n

    def get(self, lo: int, hi: int) -> np.ndarray:
        if lo < self._base:
            raise IndexError(f"samples before {self._base} were evicted")
        return self._data[lo - self._base:hi - self._base].copy()

    def release(self, upto: int):
        self.released = max(self.released, min(upto, self.count))

    def nominal_time(self, idx: int) -> float:
        k0, t0 = self.anchors[0]
        for k, t in self.anchors:
            if k > idx:
                break
            k0, t0 = k, t
        return t0 + (idx - k0) / self.rate

    def index_at(self, t: float) -> int | None:
        """Sample index whose nominal time is closest to t, or None if t
        falls inside a gap."""
        k0, t0 = self.anchors[0]
        k_next = None
        for i, (k, ta) in enumerate(self.anchors):
            if ta > t + 0.5 / self.rate:
                k_next = k
                break
            k0, t0 = k, ta
        idx = k0 + round((t - t0) * self.rate)
        if k_next is not None and idx >= k_next:
            return None
        return idx

    def crosses_gap(self, lo: int, hi: int) -> bool:
        return any(lo < g < hi for g in self.gap_indices)


class StreamBuffer:
    """Single-producer / single-consumer window assembler.

    push_imu / push_audio append samples; next_window emits the earliest
    complete 2 s window, successive windows spaced exactly hop_s apart.
    """

    def __init__(self, window_s: float = 2.0, hop_s: float = 0.05,
                 imu_rate: float = 120.0, audio_rate: float = 8000.0,
                 imu_capacity: int = 480, audio_capacity: int = 32000,
                 gap_s: float = 0.025):
        self.window_s = window_s
        self.hop_s = hop_s
        self._win_imu = round(window_s * imu_rate)
        self._hop_imu = round(hop_s * imu_rate)
        self._win_audio = round(window_s * audio_rate)
        self._imu = _StreamLane(imu_rate, 6, np.float64, imu_capacity, gap_s)
        self._audio = _StreamLane(audio_rate, 2, np.int16, audio_capacity, gap_s)
        self._next_k = 0
        self.diagnostics: list[Diagnostic] = []

    @property
    def watermark(self) -> float | None:
        """Nominal start time of the last emitted window, if any."""
        if self._next_k == 0:
            return None
        return self._imu.nominal_time((self._next_k - 1) * self._hop_imu)

    def push_imu(self, frame: ImuFrame):
        gap = self._imu.push_block(frame.t, frame.as_row()[None, :])
        if gap:
            self.diagnostics.append(
                Diagnostic("gap_detected", frame.t, "imu stream gap")
            )

    def push_audio(self, frame: AudioFrame):
        block = np.array([[frame.left, frame.right]], dtype=np.int16)
        self.push_audio_block(frame.t, block)

    def push_audio_block(self, t0: float, block: np.ndarray):
        block = np.asarray(block, dtype=np.int16)
        if block.ndim != 2 or block.shape[1] != 2:
            raise ValueError(f"audio block must be (n, 2), got {block.shape}")
        gap = self._audio.push_block(t0, block)
        if gap:
            self.diagnostics.append(
                Diagnostic("gap_detected", t0, "audio stream gap")
            )

    def next_window(self) -> Window | None:
        """The earliest unemitted complete window, or None when not ready."""
        while True:
            k = self._next_k
            i_lo = k * self._hop_imu
            i_hi = i_lo + self._win_imu
            if i_hi > self._imu.count or not self._audio.anchors:
                return None
            t_start = self._imu.nominal_time(i_lo)
            a_lo = self._audio.index_at(t_start)
            skip = False
            if a_lo is None:
                skip = True     # window start falls in an audio gap
            elif a_lo < 0:
                skip = True     # audio stream starts later than this window
            else:
                a_hi = a_lo + self._win_audio
                if a_hi > self._audio.count:
                    return None
                if self._imu.crosses_gap(i_lo, i_hi) or \
                        self._audio.crosses_gap(a_lo, a_hi):
                    skip = True
            self._next_k += 1
            next_lo = self._next_k * self._hop_imu
            self._imu.release(next_lo)
            if not skip:
                self._audio.release(a_lo)
                return Window(t_start=t_start,
                              imu=self._imu.get(i_lo, i_hi),
                              audio=self._audio.get(a_lo, a_hi))

    def drain(self):
        """Yield every currently-ready window."""
        while (w := self.next_window()) is not None:
            yield w
