"""Fused motion + acoustic features for the gesture-vs-noise gate.

Two layouts are supported:

* ``full``: 7 statistics per gyro axis, the 9 left-x-right axis
  correlations, 30 low FFT bins and 26 mel-cepstral coefficients
  (107 values with both ears).
* ``paper64``: the same statistics reduced across axes to 7 values plus
  the mean correlation, giving 8 motion values and 64 in total.

Masking an ear restricts the statistics to that ear's three axes and
drops the cross-ear correlations; the acoustic features always use the
mixed-down stereo track.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .errors import ModeMismatch
from .segment import EventSegment
from .types import AUDIO_FULL_SCALE, AUDIO_RATE_HZ, IMU_CHANNELS
from .validation import mask_columns, normalize_channel_mask

FFT_FRAME = 512
FFT_HOP = 256
N_FFT_BINS = 30
N_MEL_FILTERS = 26
MEL_LOW_HZ = 0.0
MEL_HIGH_HZ = 4000.0
PREEMPHASIS = 0.97
LOG_FLOOR = 1e-10

PEAK_MEDIAN_RATIO = 3.0
PEAK_MIN_DISTANCE = 12

_STATS = ("n_peaks", "peak_value", "rms", "zcr", "std", "min", "max")


def find_peaks(x: np.ndarray, median_ratio: float = PEAK_MEDIAN_RATIO,
               min_distance: int = PEAK_MIN_DISTANCE) -> list[int]:
    """Indices of local maxima of |x| above median_ratio times the median
    absolute value, greedily thinned (highest first) to min_distance."""
    ax = np.abs(np.asarray(x, dtype=np.float64))
    if ax.size < 3:
        return []
    threshold = median_ratio * float(np.median(ax))
    interior = ax[1:-1]
    cand = np.flatnonzero(
        (interior > ax[:-2]) & (interior > ax[2:]) & (interior > threshold)
    ) + 1
    order = cand[np.argsort(-ax[cand], kind="stable")]
    kept: list[int] = []
    for i in order:
        if all(abs(int(i) - j) >= min_distance for j in kept):
            kept.append(int(i))
    kept.sort()
    return kept


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    # correlation of a constant axis is undefined; contribute 0 instead
    da = a - a.mean()
    db = b - b.mean()
    na = float(np.sqrt(np.dot(da, da)))
    nb = float(np.sqrt(np.dot(db, db)))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(da, db) / (na * nb))


def _axis_stats(x: np.ndarray) -> dict[str, float]:
    peaks = find_peaks(x)
    peak_value = float(np.max(np.abs(x[peaks]))) if peaks else 0.0
    zcr = float(np.mean(x[:-1] * x[1:] < 0.0)) if x.size > 1 else 0.0
    return {
        "n_peaks": float(len(peaks)),
        "peak_value": peak_value,
        "rms": float(np.sqrt(np.mean(x * x))),
        "zcr": zcr,
        "std": float(np.std(x)),
        "min": float(np.min(x)),
        "max": float(np.max(x)),
    }


def imu_stats(imu: np.ndarray, mode: str = "full",
              channel_mask=("left", "right")) -> np.ndarray:
    """Motion features of a 180x6 event region (see module docstring)."""
    mask = normalize_channel_mask(channel_mask)
    cols = mask_columns(mask)
    per_axis = [_axis_stats(imu[:, c]) for c in cols]
    corrs = []
    if "left" in mask and "right" in mask:
        for cl in (0, 1, 2):
            for cr in (3, 4, 5):
                corrs.append(_pearson(imu[:, cl], imu[:, cr]))
    if mode == "full":
        values = [s[name] for name in _STATS for s in per_axis]
        values.extend(corrs)
        return np.array(values, dtype=np.float64)
    if mode == "paper64":
        mean_sq = [np.mean(imu[:, c] ** 2) for c in cols]
        values = [
            sum(s["n_peaks"] for s in per_axis),
            max(s["peak_value"] for s in per_axis),
            float(np.sqrt(np.mean(mean_sq))),
            float(np.mean([s["zcr"] for s in per_axis])),
            float(np.mean([s["std"] for s in per_axis])),
            min(s["min"] for s in per_axis),
            max(s["max"] for s in per_axis),
        ]
        if corrs:
            values.append(float(np.mean(corrs)))
        return np.array(values, dtype=np.float64)
    raise ModeMismatch(f"unknown feature mode: {mode!r}")


def mixdown(audio: np.ndarray) -> np.ndarray:
    """Stereo int16 block to normalized mono float."""
    return audio.astype(np.float64).mean(axis=1) / AUDIO_FULL_SCALE


def _frame_signal(x: np.ndarray, frame: int = FFT_FRAME,
                  hop: int = FFT_HOP) -> np.ndarray:
    if x.size < frame:
        padded = np.zeros(frame, dtype=np.float64)
        padded[:x.size] = x
        return padded[None, :]
    n_frames = 1 + (x.size - frame) // hop
    idx = np.arange(frame)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx]


def fft_bins(audio: np.ndarray) -> np.ndarray:
    """The 30 lowest non-DC spectral magnitude bins, averaged over
    Hann-windowed 512-sample frames of the mixed-down track."""
    frames = _frame_signal(mixdown(audio)) * np.hanning(FFT_FRAME)
    mags = np.abs(np.fft.rfft(frames, axis=1))
    return mags.mean(axis=0)[1:N_FFT_BINS + 1]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_filters: int = N_MEL_FILTERS, n_fft: int = FFT_FRAME,
                   rate: float = AUDIO_RATE_HZ, f_lo: float = MEL_LOW_HZ,
                   f_hi: float = MEL_HIGH_HZ) -> np.ndarray:
    """(n_filters, n_fft//2 + 1) triangular filters, equal mel spacing."""
    pts = mel_to_hz(np.linspace(hz_to_mel(f_lo), hz_to_mel(f_hi), n_filters + 2))
    bin_f = np.arange(n_fft // 2 + 1) * rate / n_fft
    fb = np.zeros((n_filters, bin_f.size))
    for j in range(n_filters):
        left, center, right = pts[j], pts[j + 1], pts[j + 2]
        up = (bin_f - left) / (center - left)
        down = (right - bin_f) / (right - center)
        fb[j] = np.maximum(0.0, np.minimum(up, down))
    return fb


def mfcc(audio: np.ndarray) -> np.ndarray:
    """26 mel-frequency cepstral coefficients averaged over frames.

    Chain: pre-emphasis, Hann frames, power spectrum, 26-filter mel bank
    over 0-4 kHz, floored log, orthonormal DCT-II.
    """
    x = mixdown(audio)
    emphasized = np.empty_like(x)
    emphasized[0] = x[0]
    emphasized[1:] = x[1:] - PREEMPHASIS * x[:-1]
    frames = _frame_signal(emphasized) * np.hanning(FFT_FRAME)
    power = np.abs(np.fft.rfft(frames, axis=1)) ** 2
    mel_energy = power @ mel_filterbank().T
    log_mel = np.log(np.maximum(mel_energy, LOG_FLOOR))
    ceps = dct(log_mel, type=2, axis=1, norm="ortho")
    return ceps.mean(axis=0)


@dataclass(frozen=True)
class FeatureLayout:
    """Total index-to-name map for one (mode, mask) combination."""

    mode: str
    channel_mask: tuple[str, ...]
    names: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.names)

    def to_json(self) -> str:
        return json.dumps({
            "mode": self.mode,
            "channel_mask": list(self.channel_mask),
            "names": list(self.names),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FeatureLayout":
        d = json.loads(text)
        return cls(d["mode"], tuple(d["channel_mask"]), tuple(d["names"]))


def feature_layout(mode: str = "full",
                   channel_mask=("left", "right")) -> FeatureLayout:
    mask = normalize_channel_mask(channel_mask)
    cols = mask_columns(mask)
    names: list[str] = []
    if mode == "full":
        names += [f"{stat}_{IMU_CHANNELS[c]}" for stat in _STATS for c in cols]
        if "left" in mask and "right" in mask:
            names += [
                f"corr_{IMU_CHANNELS[cl]}_{IMU_CHANNELS[cr]}"
                for cl in (0, 1, 2) for cr in (3, 4, 5)
            ]
    elif mode == "paper64":
        names += [f"{stat}_reduced" for stat in _STATS]
        if "left" in mask and "right" in mask:
            names.append("corr_mean")
    else:
        raise ModeMismatch(f"unknown feature mode: {mode!r}")
    names += [f"fft_bin_{i:02d}" for i in range(1, N_FFT_BINS + 1)]
    names += [f"mfcc_{i:02d}" for i in range(N_MEL_FILTERS)]
    return FeatureLayout(mode, mask, tuple(names))


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    layout: FeatureLayout

    def __post_init__(self):
        if self.values.shape != (len(self.layout),):
            raise ModeMismatch(
                f"{self.values.shape[0]} values for a "
                f"{len(self.layout)}-feature layout"
            )
        self.values.setflags(write=False)


def feature_vector(segment: EventSegment, mode: str = "full",
                   channel_mask=("left", "right")) -> FeatureVector:
    """Concatenated [motion stats | fft bins | mfcc] feature vector."""
    layout = feature_layout(mode, channel_mask)
    values = np.concatenate([
        imu_stats(segment.imu, mode, layout.channel_mask),
        fft_bins(segment.audio),
        mfcc(segment.audio),
    ])
    if not np.all(np.isfinite(values)):
        raise ModeMismatch("feature extraction produced non-finite values")
    return FeatureVector(values, layout)


def feature_matrix(segments, mode: str = "full",
                   channel_mask=("left", "right")) -> np.ndarray:
    """Stack feature vectors for a sequence of segments into (n, d)."""
    return np.stack([
        feature_vector(s, mode, channel_mask).values for s in segments
    ])
