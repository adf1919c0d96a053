"""Independent reference implementations used to check the package.

Everything here is written from definitions, deliberately avoiding the
package's own code paths: exhaustive path enumeration for warping
distance, an O(n^2) DFT, an explicit cepstral chain, a primal subgradient
SVM, and plain-loop statistics.
"""
from __future__ import annotations

import math

import numpy as np

AUDIO_FULL_SCALE = 32767.0


# -- warping distance ----------------------------------------------------

def dtw_enumerate(a, b, band=None):
    """Minimal path cost by exhaustive enumeration of all monotone paths.

    Returns None when a band constraint admits no path. Only feasible for
    short sequences.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    n, m = a.shape[0], b.shape[0]

    def in_band(i, j):
        if band is None:
            return True
        return abs(i * m / n - j) <= band

    def cell_cost(i, j):
        d = a[i] - b[j]
        return float(np.dot(d, d))

    best = [None]

    def walk(i, j, acc):
        acc += cell_cost(i, j)
        if i == n - 1 and j == m - 1:
            if best[0] is None or acc < best[0]:
                best[0] = acc
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            ni, nj = i + di, j + dj
            if ni < n and nj < m and in_band(ni, nj):
                walk(ni, nj, acc)

    if in_band(0, 0):
        walk(0, 0, 0.0)
    return best[0]


def dtw_memo(a, b, band=None):
    """Same recurrence, independently coded as a dict-based iterative DP
    (usable at full sequence length)."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    n, m = a.shape[0], b.shape[0]

    def in_band(i, j):
        if band is None:
            return True
        return abs(i * m / n - j) <= band

    table: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(m):
            if not in_band(i, j):
                continue
            d = a[i] - b[j]
            c = float(np.dot(d, d))
            if i == 0 and j == 0:
                table[(i, j)] = c
                continue
            options = [table[p] for p in ((i - 1, j), (i, j - 1),
                                          (i - 1, j - 1)) if p in table]
            if options:
                table[(i, j)] = c + min(options)
    return table.get((n - 1, m - 1))


# -- spectral chain ------------------------------------------------------

def naive_dft_mag(frame: np.ndarray) -> np.ndarray:
    """|DFT| of one real frame by direct summation."""
    n = frame.shape[0]
    k = np.arange(n // 2 + 1)[:, None]
    t = np.arange(n)[None, :]
    basis = np.exp(-2j * np.pi * k * t / n)
    return np.abs(basis @ frame)


def hann_window(n: int) -> np.ndarray:
    i = np.arange(n)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * i / (n - 1))


def frame_starts(n_samples: int, frame: int, hop: int) -> list[int]:
    if n_samples < frame:
        return [0]
    return list(range(0, n_samples - frame + 1, hop))


def fft_bins_reference(audio: np.ndarray, frame: int = 512, hop: int = 256,
                       n_bins: int = 30) -> np.ndarray:
    """Low spectral bins via the naive DFT, mirroring the declared chain:
    mix down, Hann frames, magnitude, average, bins 1..n_bins."""
    x = audio.astype(np.float64).mean(axis=1) / AUDIO_FULL_SCALE
    if x.shape[0] < frame:
        x = np.concatenate([x, np.zeros(frame - x.shape[0])])
    w = hann_window(frame)
    mags = []
    for s in frame_starts(x.shape[0], frame, hop):
        mags.append(naive_dft_mag(x[s:s + frame] * w))
    return np.mean(mags, axis=0)[1:n_bins + 1]


def mel_of(f):
    return 2595.0 * math.log10(1.0 + f / 700.0)


def hz_of(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def mfcc_reference(audio: np.ndarray, frame: int = 512, hop: int = 256,
                   n_filters: int = 26, rate: float = 8000.0,
                   f_lo: float = 0.0, f_hi: float = 4000.0,
                   preemph: float = 0.97, floor: float = 1e-10) -> np.ndarray:
    """Cepstral coefficients from first principles: pre-emphasis loop,
    explicit window, naive DFT power, triangle filters, explicit DCT-II."""
    x = audio.astype(np.float64).mean(axis=1) / AUDIO_FULL_SCALE
    emphasized = np.zeros_like(x)
    emphasized[0] = x[0]
    for i in range(1, x.shape[0]):
        emphasized[i] = x[i] - preemph * x[i - 1]
    if emphasized.shape[0] < frame:
        emphasized = np.concatenate(
            [emphasized, np.zeros(frame - emphasized.shape[0])])
    w = hann_window(frame)

    mels = np.linspace(mel_of(f_lo), mel_of(f_hi), n_filters + 2)
    edges = np.array([hz_of(m) for m in mels])
    bin_f = np.arange(frame // 2 + 1) * rate / frame
    fbank = np.zeros((n_filters, bin_f.shape[0]))
    for j in range(n_filters):
        lo, mid, hi = edges[j], edges[j + 1], edges[j + 2]
        for k, f in enumerate(bin_f):
            if lo < f <= mid:
                fbank[j, k] = (f - lo) / (mid - lo)
            elif mid < f < hi:
                fbank[j, k] = (hi - f) / (hi - mid)

    coeff_sum = np.zeros(n_filters)
    starts = frame_starts(emphasized.shape[0], frame, hop)
    for s in starts:
        power = naive_dft_mag(emphasized[s:s + frame] * w) ** 2
        mel_e = np.maximum(fbank @ power, floor)
        log_e = np.log(mel_e)
        ceps = np.zeros(n_filters)
        for k in range(n_filters):
            acc = 0.0
            for n in range(n_filters):
                acc += log_e[n] * math.cos(
                    math.pi * k * (2 * n + 1) / (2 * n_filters))
            scale = math.sqrt(1.0 / n_filters) if k == 0 \
                else math.sqrt(2.0 / n_filters)
            ceps[k] = scale * acc
        coeff_sum += ceps
    return coeff_sum / len(starts)


# -- statistics ----------------------------------------------------------

def peaks_reference(x: np.ndarray, ratio: float = 3.0,
                    min_distance: int = 12) -> list[int]:
    """Greedy loudest-first peak picking, coded with plain loops."""
    ax = [abs(float(v)) for v in x]
    thr = ratio * float(np.median(np.abs(x)))
    candidates = [
        i for i in range(1, len(ax) - 1)
        if ax[i] > ax[i - 1] and ax[i] > ax[i + 1] and ax[i] > thr
    ]
    candidates.sort(key=lambda i: (-ax[i], i))
    kept: list[int] = []
    for i in candidates:
        if all(abs(i - j) >= min_distance for j in kept):
            kept.append(i)
    return sorted(kept)


def stats_reference(x: np.ndarray) -> dict[str, float]:
    xs = [float(v) for v in x]
    n = len(xs)
    peaks = peaks_reference(np.asarray(xs))
    mean = sum(xs) / n
    var = sum((v - mean) ** 2 for v in xs) / n
    crossings = sum(1 for i in range(n - 1) if xs[i] * xs[i + 1] < 0)
    return {
        "n_peaks": float(len(peaks)),
        "peak_value": max((abs(xs[i]) for i in peaks), default=0.0),
        "rms": math.sqrt(sum(v * v for v in xs) / n),
        "zcr": crossings / (n - 1),
        "std": math.sqrt(var),
        "min": min(xs),
        "max": max(xs),
    }


def pearson_reference(a: np.ndarray, b: np.ndarray) -> float:
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = math.sqrt(sum((x - ma) ** 2 for x in a))
    vb = math.sqrt(sum((y - mb) ** 2 for y in b))
    if va == 0.0 or vb == 0.0:
        return 0.0
    return cov / (va * vb)


# -- primal SVM ----------------------------------------------------------

def primal_svm(X: np.ndarray, y: np.ndarray, C: float = 1.0,
               iterations: int = 20000, lr0: float = 0.1):
    """Soft-margin linear SVM by deterministic batch subgradient descent
    on 0.5||w||^2 + C * sum hinge, on pre-standardized inputs."""
    X = np.asarray(X, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    for it in range(iterations):
        lr = lr0 / (1.0 + it / 200.0)
        margins = yv * (X @ w + b)
        active = margins < 1.0
        grad_w = w - C * (yv[active][:, None] * X[active]).sum(axis=0)
        grad_b = -C * yv[active].sum()
        w -= lr * grad_w
        b -= lr * grad_b
    return w, b


def window_count(duration_s: float, window_s: float = 2.0,
                 hop_s: float = 0.05) -> int:
    """Expected number of sliding windows for a stream of given length."""
    if duration_s < window_s:
        return 0
    return int(math.floor((duration_s - window_s) / hop_s + 1e-9)) + 1
