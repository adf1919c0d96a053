"""Gesture classification: 1-nearest-neighbor over multi-dimensional
dynamic time warping of the 180x6 gyro event region.

All signal dimensions share one warping path; the local cost is the
squared Euclidean distance between rows, which keeps the high-amplitude
peaks dominant. Sequences are deliberately not z-normalized: the sign and
size of the y-axis peaks carry the left/right information.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .errors import EmptyTemplates, InfeasibleBand, ShapeMismatch, UncalibratedThreshold
from .types import BACK_TRIPLE, GestureLabel
from .validation import mask_columns, normalize_channel_mask

_BIG = 1e18
_BIG_THRESHOLD = 1e17


def _band_range(i: int, n_rows: int, n_cols: int, band) -> tuple[int, int]:
    if band is None:
        return 0, n_cols
    anchor = i * n_cols / n_rows
    lo = max(0, int(np.ceil(anchor - band)))
    hi = min(n_cols, int(np.floor(anchor + band)) + 1)
    return lo, hi


def dtw_distance(a, b, band: int | None = None) -> float:
    """Minimal cumulative warping cost between two (T, D) sequences.

    Steps are (i-1,j), (i,j-1), (i-1,j-1); the local cost of aligning row
    i with row j is sum_d (a[i,d] - b[j,d])^2. ``band`` is a Sakoe-Chiba
    half-width on |i * S/T - j|; None means unconstrained.

    Raises ShapeMismatch when the dimensionalities differ and
    InfeasibleBand when the band admits no path.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ShapeMismatch(
            f"sequence dimensions differ: {a.shape[1]} vs {b.shape[1]}"
        )
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ShapeMismatch("sequences must be non-empty")
    if band is not None and band < 0:
        raise ValueError("band must be non-negative")
    n_rows, n_cols = a.shape[0], b.shape[0]
    # squared-euclidean cost matrix; exact for integer-valued inputs
    cost = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(cost, 0.0, out=cost)

    prev = None
    prev_lo = prev_hi = 0
    for i in range(n_rows):
        lo, hi = _band_range(i, n_rows, n_cols, band)
        if lo >= hi:
            raise InfeasibleBand(f"band {band} empties row {i}")
        row_cost = cost[i, lo:hi]
        seg_sum = np.cumsum(row_cost)
        if prev is None:
            cur = seg_sum.copy()
        else:
            width = hi - lo
            step_down = np.full(width, _BIG)
            s, e = max(lo, prev_lo), min(hi, prev_hi)
            if e > s:
                step_down[s - lo:e - lo] = prev[s - prev_lo:e - prev_lo]
            step_diag = np.full(width, _BIG)
            s, e = max(lo, prev_lo + 1), min(hi, prev_hi + 1)
            if e > s:
                step_diag[s - lo:e - lo] = prev[s - 1 - prev_lo:e - 1 - prev_lo]
            best_in = np.minimum(step_down, step_diag)
            shifted = np.concatenate(([0.0], seg_sum[:-1]))
            cur = seg_sum + np.minimum.accumulate(best_in - shifted)
        prev, prev_lo, prev_hi = cur, lo, hi
    if prev_hi != n_cols:
        raise InfeasibleBand(f"band {band} excludes the final alignment")
    result = float(prev[-1])
    if result >= _BIG_THRESHOLD:
        raise InfeasibleBand(f"band {band} admits no alignment path")
    return result


def _dtw_distances_batch(query: np.ndarray, bank: np.ndarray,
                         band: int | None) -> np.ndarray:
    """Distances from one query to a stack of same-shape templates.

    Performs the same per-row arithmetic as dtw_distance, vectorized over
    the template axis, so results are identical to calling it in a loop.
    """
    n_rows, n_cols = query.shape[0], bank.shape[1]
    q2 = np.sum(query * query, axis=1)
    b2 = np.sum(bank * bank, axis=2)
    cross = query[None, :, :] @ bank.transpose(0, 2, 1)
    cost = q2[None, :, None] + b2[:, None, :] - 2.0 * cross
    np.maximum(cost, 0.0, out=cost)

    prev = None
    prev_lo = prev_hi = 0
    for i in range(n_rows):
        lo, hi = _band_range(i, n_rows, n_cols, band)
        if lo >= hi:
            raise InfeasibleBand(f"band {band} empties row {i}")
        seg_sum = np.cumsum(cost[:, i, lo:hi], axis=1)
        if prev is None:
            cur = seg_sum.copy()
        else:
            width = hi - lo
            k = bank.shape[0]
            step_down = np.full((k, width), _BIG)
            s, e = max(lo, prev_lo), min(hi, prev_hi)
            if e > s:
                step_down[:, s - lo:e - lo] = prev[:, s - prev_lo:e - prev_lo]
            step_diag = np.full((k, width), _BIG)
            s, e = max(lo, prev_lo + 1), min(hi, prev_hi + 1)
            if e > s:
                step_diag[:, s - lo:e - lo] = \
                    prev[:, s - 1 - prev_lo:e - 1 - prev_lo]
            best_in = np.minimum(step_down, step_diag)
            best_in[:, 1:] -= seg_sum[:, :-1]
            cur = seg_sum + np.minimum.accumulate(best_in, axis=1)
        prev, prev_lo, prev_hi = cur, lo, hi
    if prev_hi != n_cols:
        raise InfeasibleBand(f"band {band} excludes the final alignment")
    out = prev[:, -1].astype(np.float64)
    if np.any(out >= _BIG_THRESHOLD):
        raise InfeasibleBand(f"band {band} admits no alignment path")
    return out


class DtwKnnClassifier(BaseEstimator, ClassifierMixin):
    """1-NN over a template bank with warping distance.

    Parameters
    ----------
    band : int or None
        Sakoe-Chiba half-width in samples; None leaves warping
        unconstrained.
    channel_mask : 'both' / 'left' / 'right' or tuple of ear names
        Columns compared at query time; templates are stored unmasked so
        the mask can change without refitting.
    """

    def __init__(self, band: int | None = None,
                 channel_mask=("left", "right")):
        self.band = band
        self.channel_mask = channel_mask

    def fit(self, X, y):
        templates = [np.asarray(t, dtype=np.float64) for t in X]
        if not templates:
            raise EmptyTemplates("at least one template is required")
        shape = templates[0].shape
        if len(shape) != 2:
            raise ShapeMismatch("templates must be (T, D) matrices")
        for t in templates:
            if t.shape != shape:
                raise ShapeMismatch(
                    f"inconsistent template shapes: {t.shape} vs {shape}"
                )
        labels = [str(v) for v in y]
        if len(labels) != len(templates):
            raise ValueError("X and y lengths differ")
        self.templates_ = templates
        self.labels_ = labels
        self.classes_ = np.array(sorted(set(labels)))
        self.template_shape_ = shape
        self._bank = np.stack(templates)
        return self

    def _columns(self) -> list[int]:
        mask = normalize_channel_mask(self.channel_mask)
        cols = [c for c in mask_columns(mask) if c < self.template_shape_[1]]
        if not cols:
            raise ShapeMismatch("channel mask selects no columns")
        return cols

    def classify(self, segment) -> tuple[str, float, dict[str, float]]:
        """Nearest template's label, its distance, and the per-label
        minima (ties go to the earliest-inserted template)."""
        if not hasattr(self, "templates_"):
            raise NotFittedError("fit the classifier before classifying")
        segment = np.asarray(segment, dtype=np.float64)
        if segment.shape != self.template_shape_:
            raise ShapeMismatch(
                f"segment shape {segment.shape} != template shape "
                f"{self.template_shape_}"
            )
        cols = self._columns()
        distances = _dtw_distances_batch(
            segment[:, cols], self._bank[:, :, cols], self.band)
        per_label: dict[str, float] = {}
        for d, label in zip(distances, self.labels_):
            if d < per_label.get(label, np.inf):
                per_label[label] = float(d)
        best = int(np.argmin(distances))
        return self.labels_[best], float(distances[best]), per_label

    def predict(self, X) -> np.ndarray:
        return np.array([self.classify(x)[0] for x in X])

    def nn_distances(self, X) -> np.ndarray:
        return np.array([self.classify(x)[1] for x in X])


def activation_threshold(knn: DtwKnnClassifier,
                         label: GestureLabel | str = BACK_TRIPLE,
                         factor: float = 1.2) -> float:
    """Distance bound for the wake-gesture check: ``factor`` times the
    largest leave-one-out nearest-neighbor distance among that label's
    own templates. Needs at least two such templates."""
    if not hasattr(knn, "templates_"):
        raise NotFittedError("fit the classifier before calibrating")
    name = str(label)
    cols = knn._columns()
    bank = [t[:, cols] for t, l in zip(knn.templates_, knn.labels_)
            if l == name]
    if len(bank) < 2:
        raise UncalibratedThreshold(
            f"need >= 2 '{name}' templates to calibrate, got {len(bank)}"
        )
    worst = 0.0
    for i, t in enumerate(bank):
        nearest = min(
            dtw_distance(t, other, band=knn.band)
            for j, other in enumerate(bank) if j != i
        )
        worst = max(worst, nearest)
    return factor * worst
