"""Parametric generator of labeled synthetic recordings.

Waveform morphology follows the sensing principle: each tap is a biphasic
pulse on the gyro y-axes whose polarity encodes the side (left place
pushes the left ear positive and the right ear negative, and vice versa;
front and back use symmetric y-polarity but distinct x/z profiles), taps
are accompanied by short damped clicks on the contact microphones, and
every non-hold gesture ends with a smaller release pulse. Hold gestures
delay the release by the hold interval.

All amplitudes and timings here are calibration choices for desk-scale
testing, not measured values; they are exposed as parameters.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .types import (
    AUDIO_RATE_HZ,
    IMU_RATE_HZ,
    Annotation,
    GestureLabel,
    Manner,
    NoiseKind,
    Place,
    Recording,
    RecordingMeta,
    parse_annotation_label,
)

HALF_REGION_S = 0.75   # annotation half-span, matches the event region
AUDIO_ADC_MAX = 2047   # simulated 12-bit converter range

#: per-axis pulse gains (gx_l, gy_l, gz_l, gx_r, gy_r, gz_r) by place
PLACE_PROFILES = {
    Place.LEFT: np.array([0.30, 1.00, 0.20, 0.25, -0.80, 0.15]),
    Place.RIGHT: np.array([0.25, -0.80, 0.15, 0.30, 1.00, 0.20]),
    Place.FRONT: np.array([0.75, 0.90, 0.15, 0.75, 0.90, 0.15]),
    Place.BACK: np.array([0.15, 0.85, 0.75, 0.15, 0.85, 0.75]),
}

_TAP_COUNT = {Manner.SINGLE: 1, Manner.HOLD: 1, Manner.DOUBLE: 2,
              Manner.TRIPLE: 3}


@dataclass(frozen=True)
class MotionParams:
    tap_amplitude: float = 60.0      # deg/s, first tap nominal peak
    tap_width_s: float = 0.08
    inter_tap_gap_s: float = 0.25
    tap_decay: float = 0.8           # successive taps weaken
    rebound_ratio: float = 0.35      # opposite lobe of the biphasic pulse
    release_ratio: float = 0.4       # release peak vs first tap
    release_delay_s: float = 0.35    # last tap to release, non-hold
    hold_range_s: tuple[float, float] = (2.0, 4.0)
    amp_jitter: float = 0.2          # whole-event gain
    per_tap_jitter: float = 0.05
    time_jitter: float = 0.1
    noise_rms: float = 0.8           # deg/s sensor floor


@dataclass(frozen=True)
class AudioParams:
    click_amplitude: float = 1600.0
    click_band_hz: tuple[float, float] = (1200.0, 1800.0)
    click_decay_s: float = 0.010
    click_length_s: float = 0.030
    release_click_ratio: float = 0.2
    floor_rms: float = 8.0


@dataclass(frozen=True)
class SynthParams:
    motion: MotionParams = field(default_factory=MotionParams)
    audio: AudioParams = field(default_factory=AudioParams)
    clip_margin_s: float = 0.8       # quiet lead/tail inside each clip
    smoothing_width: int = 15        # envelope used for the recorded center


@dataclass(frozen=True)
class GestureClip:
    label: GestureLabel
    imu: np.ndarray                  # (n, 6) float deg/s
    audio: np.ndarray                # (m, 2) int16
    t_center: float                  # envelope apex, relative to clip start
    t_release: float | None
    hold_duration: float | None

    @property
    def duration(self) -> float:
        return self.imu.shape[0] / IMU_RATE_HZ


@dataclass(frozen=True)
class TruthEvent:
    """Generator-side ground truth for one scheduled clip."""

    label: str
    t_start: float
    t_end: float
    t_center: float | None = None
    t_release: float | None = None
    hold_duration: float | None = None


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _envelope(imu: np.ndarray, width: int) -> np.ndarray:
    y = np.abs(imu[:, 1]) + np.abs(imu[:, 4])
    return np.convolve(y, np.full(width, 1.0 / width), mode="same")


def _biphasic(t_axis: np.ndarray, t0: float, width: float,
              rebound_ratio: float) -> np.ndarray:
    sigma = width / 4.0
    main = np.exp(-0.5 * ((t_axis - t0) / sigma) ** 2)
    rebound = np.exp(-0.5 * ((t_axis - t0 - 0.6 * width) / (1.2 * sigma)) ** 2)
    return main - rebound_ratio * rebound


def _pink_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n)
    f[0] = f[1] if n > 1 else 1.0
    shaped = np.fft.irfft(spec / np.sqrt(f), n)
    rms = np.sqrt(np.mean(shaped ** 2))
    return shaped / rms if rms > 0 else shaped


def _band_noise(n: int, lo_hz: float, hi_hz: float,
                rng: np.random.Generator,
                rate: float = AUDIO_RATE_HZ) -> np.ndarray:
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, d=1.0 / rate)
    spec[(f < lo_hz) | (f > hi_hz)] = 0.0
    shaped = np.fft.irfft(spec, n)
    rms = np.sqrt(np.mean(shaped ** 2))
    return shaped / rms if rms > 0 else shaped


def _to_pcm(x: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(x), -AUDIO_ADC_MAX, AUDIO_ADC_MAX).astype(np.int16)


def _add_click(track: np.ndarray, t0: float, amp: float, freq: float,
               decay_s: float, length_s: float):
    i0 = int(round(t0 * AUDIO_RATE_HZ))
    n = int(round(length_s * AUDIO_RATE_HZ))
    i1 = min(i0 + n, track.shape[0])
    if i0 >= i1 or i0 < 0:
        return
    t = np.arange(i1 - i0) / AUDIO_RATE_HZ
    track[i0:i1] += amp * np.exp(-t / decay_s) * np.sin(2 * np.pi * freq * t)


def synth_gesture(label: GestureLabel, params: SynthParams | None = None,
                  rng=0, suppress_release: bool = False) -> GestureClip:
    """One labeled gesture clip with its recorded ground truth."""
    p = params or SynthParams()
    mp, ap = p.motion, p.audio
    rng = _as_rng(rng)

    gain = 1.0 + rng.uniform(-mp.amp_jitter, mp.amp_jitter)
    tap_times = [p.clip_margin_s]
    for _ in range(_TAP_COUNT[label.manner] - 1):
        gap = mp.inter_tap_gap_s * (1.0 + rng.uniform(-mp.time_jitter,
                                                      mp.time_jitter))
        tap_times.append(tap_times[-1] + gap)
    tap_amps = [
        mp.tap_amplitude * gain * mp.tap_decay ** i
        * (1.0 + rng.uniform(-mp.per_tap_jitter, mp.per_tap_jitter))
        for i in range(len(tap_times))
    ]

    hold_duration = None
    if label.manner is Manner.HOLD:
        hold_duration = rng.uniform(*mp.hold_range_s)
        t_release = None if suppress_release else tap_times[0] + hold_duration
    else:
        t_release = tap_times[-1] + mp.release_delay_s * (
            1.0 + rng.uniform(-mp.time_jitter, mp.time_jitter))
        if suppress_release:
            t_release = None
    release_amp = mp.tap_amplitude * gain * mp.release_ratio * (
        1.0 + rng.uniform(-mp.per_tap_jitter, mp.per_tap_jitter))

    t_last = t_release if t_release is not None else (
        tap_times[0] + hold_duration if hold_duration is not None
        else tap_times[-1] + mp.tap_width_s)
    duration = t_last + p.clip_margin_s
    n = int(round(duration * IMU_RATE_HZ))
    m = int(round(n / IMU_RATE_HZ * AUDIO_RATE_HZ))
    t_imu = np.arange(n) / IMU_RATE_HZ

    shape = np.zeros(n)
    for t0, amp in zip(tap_times, tap_amps):
        shape += amp * _biphasic(t_imu, t0, mp.tap_width_s, mp.rebound_ratio)
    if t_release is not None:
        shape += release_amp * _biphasic(t_imu, t_release, mp.tap_width_s,
                                         mp.rebound_ratio)
    imu = shape[:, None] * PLACE_PROFILES[label.place][None, :]
    imu = imu + rng.normal(0.0, mp.noise_rms, size=(n, 6))

    audio = np.empty((m, 2))
    audio[:, 0] = _pink_noise(m, rng) * ap.floor_rms
    audio[:, 1] = _pink_noise(m, rng) * ap.floor_rms
    ear_gains = 1.0 + rng.uniform(-0.2, 0.2, size=2)
    click_moments = [(t0, a / mp.tap_amplitude) for t0, a in
                     zip(tap_times, tap_amps)]
    if t_release is not None:
        click_moments.append((t_release, gain * ap.release_click_ratio))
    for t0, rel_amp in click_moments:
        freq = rng.uniform(*ap.click_band_hz)
        for ch in (0, 1):
            _add_click(audio[:, ch], t0, ap.click_amplitude * rel_amp
                       * ear_gains[ch], freq, ap.click_decay_s,
                       ap.click_length_s)

    center_idx = int(np.argmax(_envelope(imu, p.smoothing_width)))
    return GestureClip(
        label=label,
        imu=imu,
        audio=_to_pcm(audio),
        t_center=center_idx / IMU_RATE_HZ,
        t_release=t_release,
        hold_duration=hold_duration,
    )


def synth_noise(kind: NoiseKind, duration_s: float,
                params: SynthParams | None = None,
                rng=0) -> tuple[np.ndarray, np.ndarray]:
    """A background-activity clip: (imu float, audio int16)."""
    p = params or SynthParams()
    mp, ap = p.motion, p.audio
    rng = _as_rng(rng)
    n = int(round(duration_s * IMU_RATE_HZ))
    m = int(round(n / IMU_RATE_HZ * AUDIO_RATE_HZ))
    t_imu = np.arange(n) / IMU_RATE_HZ

    imu = rng.normal(0.0, mp.noise_rms, size=(n, 6))
    audio = np.empty((m, 2))
    audio[:, 0] = _pink_noise(m, rng) * ap.floor_rms
    audio[:, 1] = _pink_noise(m, rng) * ap.floor_rms

    if kind is NoiseKind.STATIC:
        pass
    elif kind is NoiseKind.TALKING:
        speech = _band_noise(m, 100.0, 1000.0, rng)
        syllables = np.abs(_band_noise(m, 0.5, 4.0, rng))
        syllables /= max(np.mean(syllables), 1e-12)
        for ch in (0, 1):
            audio[:, ch] += speech * syllables * 350.0 * (
                1.0 + rng.uniform(-0.2, 0.2))
        imu += rng.normal(0.0, mp.noise_rms, size=(n, 6))
    elif kind is NoiseKind.WALKING:
        t = rng.uniform(0.1, 0.6)
        while t < duration_s - 0.2:
            gains = rng.uniform(12.0, 22.0, size=6) * rng.choice(
                [-1.0, 1.0], size=6)
            hump = np.exp(-0.5 * ((t_imu - t) / 0.06) ** 2)
            imu += hump[:, None] * gains[None, :]
            thud_freq = rng.uniform(90.0, 140.0)
            thud_amp = rng.uniform(500.0, 900.0)
            for ch in (0, 1):
                _add_click(audio[:, ch], t, thud_amp, thud_freq,
                           decay_s=0.030, length_s=0.080)
            t += 0.5 * (1.0 + rng.uniform(-0.1, 0.1))
    elif kind is NoiseKind.EATING:
        t = rng.uniform(0.2, 0.6)
        while t < duration_s - 0.4:
            width = rng.uniform(0.25, 0.40)
            gains = np.concatenate([
                rng.uniform(2.0, 8.0, 1), rng.uniform(8.0, 18.0, 1),
                rng.uniform(2.0, 8.0, 1), rng.uniform(2.0, 8.0, 1),
                rng.uniform(8.0, 18.0, 1), rng.uniform(2.0, 8.0, 1),
            ]) * rng.choice([-1.0, 1.0])
            hump = np.exp(-0.5 * ((t_imu - t) / (width / 3.0)) ** 2)
            imu += hump[:, None] * gains[None, :]
            crunch_len = rng.uniform(0.08, 0.20)
            crunch_amp = rng.uniform(250.0, 550.0)
            i0 = int(round(t * AUDIO_RATE_HZ))
            i1 = min(i0 + int(round(crunch_len * AUDIO_RATE_HZ)), m)
            if i1 > i0:
                burst = _band_noise(i1 - i0, 800.0, 3000.0, rng)
                decay = np.exp(-np.arange(i1 - i0) / (0.4 * (i1 - i0)))
                for ch in (0, 1):
                    audio[i0:i1, ch] += burst * decay * crunch_amp
            t += rng.uniform(0.4, 1.0)
    else:
        raise ValueError(f"unknown noise kind: {kind!r}")
    return imu, _to_pcm(audio)


def synth_dataset(counts: dict[str, int], seed=0,
                  params: SynthParams | None = None,
                  spacing_s: float = 1.5, lead_in_s: float = 4.0,
                  tail_s: float = 3.0, noise_clip_s: float = 2.0,
                  shuffle: bool = True, suppress_release: bool = False,
                  subject: str = "synthetic", session: str | None = None,
                  ) -> tuple[Recording, list[TruthEvent]]:
    """Schedule labeled clips on one timeline and return the recording
    plus generator-side truth (centers, release times) for every clip.

    counts maps label strings (gesture names or ``noise_*``) to clip
    counts; clips are spaced at least ``spacing_s`` apart over a shared
    sensor-floor bed.
    """
    if not counts:
        raise ValueError("counts must name at least one clip")
    p = params or SynthParams()
    rng = _as_rng(seed)
    entries: list[str] = []
    for name, count in counts.items():
        parse_annotation_label(name)   # fail fast on typos
        entries.extend([name] * int(count))
    if shuffle:
        rng.shuffle(entries)

    placed: list[tuple[float, np.ndarray, np.ndarray]] = []
    annotations: list[Annotation] = []
    truths: list[TruthEvent] = []
    t = lead_in_s
    for name in entries:
        t_aligned = round(t * IMU_RATE_HZ) / IMU_RATE_HZ
        label = parse_annotation_label(name)
        if isinstance(label, NoiseKind):
            imu, audio = synth_noise(label, noise_clip_s, p, rng)
            dur = imu.shape[0] / IMU_RATE_HZ
            annotations.append(Annotation(label, t_aligned, t_aligned + dur))
            truths.append(TruthEvent(name, t_aligned, t_aligned + dur))
        else:
            clip = synth_gesture(label, p, rng,
                                 suppress_release=suppress_release)
            imu, audio = clip.imu, clip.audio
            dur = clip.duration
            center = t_aligned + clip.t_center
            annotations.append(Annotation(
                label, center - HALF_REGION_S, center + HALF_REGION_S))
            truths.append(TruthEvent(
                name,
                t_start=center - HALF_REGION_S,
                t_end=center + HALF_REGION_S,
                t_center=center,
                t_release=(t_aligned + clip.t_release
                           if clip.t_release is not None else None),
                hold_duration=clip.hold_duration,
            ))
        placed.append((t_aligned, imu, audio))
        t = t_aligned + dur + spacing_s * (1.0 + rng.uniform(0.0, 0.4))

    total = (placed[-1][0] + placed[-1][1].shape[0] / IMU_RATE_HZ + tail_s
             if placed else lead_in_s + tail_s)
    n = int(round(total * IMU_RATE_HZ))
    m = int(round(n / IMU_RATE_HZ * AUDIO_RATE_HZ))
    imu = rng.normal(0.0, p.motion.noise_rms, size=(n, 6))
    audio = np.empty((m, 2))
    audio[:, 0] = _pink_noise(m, rng) * p.audio.floor_rms
    audio[:, 1] = _pink_noise(m, rng) * p.audio.floor_rms
    audio = _to_pcm(audio)
    for t0, clip_imu, clip_audio in placed:
        i0 = int(round(t0 * IMU_RATE_HZ))
        imu[i0:i0 + clip_imu.shape[0]] = clip_imu
        a0 = int(round(i0 / IMU_RATE_HZ * AUDIO_RATE_HZ))
        audio[a0:a0 + clip_audio.shape[0]] = clip_audio

    rec = Recording(
        meta=RecordingMeta(subject=subject,
                           session=session or f"seed{seed}"),
        imu_t=np.arange(n) / IMU_RATE_HZ,
        imu=imu,
        audio=audio,
        annotations=tuple(annotations),
    )
    return rec.validate(), truths


def truth_to_json_dict(truth: TruthEvent) -> dict:
    out: dict = {"label": truth.label, "t_start": truth.t_start,
                 "t_end": truth.t_end}
    if truth.t_center is not None:
        out["t_center"] = truth.t_center
    if truth.t_release is not None:
        out["t_release"] = truth.t_release
    if truth.hold_duration is not None:
        out["hold_duration"] = truth.hold_duration
    return out
