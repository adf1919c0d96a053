"""Input-validation helpers shared by the estimators and pipeline stages."""
from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch
from .types import LEFT_COLUMNS, RIGHT_COLUMNS

SEGMENT_IMU_ROWS = 180
SEGMENT_AUDIO_ROWS = 12000
WINDOW_IMU_ROWS = 240
WINDOW_AUDIO_ROWS = 16000


def as_float_matrix(x, name: str = "array", rows: int | None = None,
                    cols: int | None = None) -> np.ndarray:
    """Coerce to a finite 2-D float64 array, optionally pinning the shape."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got ndim={arr.ndim}")
    if rows is not None and arr.shape[0] != rows:
        raise ShapeMismatch(f"{name} must have {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise ShapeMismatch(f"{name} must have {cols} columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ShapeMismatch(f"{name} contains non-finite values")
    return arr


def check_segment_matrix(x, name: str = "segment") -> np.ndarray:
    """A 180x6 gyro event region."""
    return as_float_matrix(x, name, rows=SEGMENT_IMU_ROWS, cols=6)


def check_window_imu(x, name: str = "window imu") -> np.ndarray:
    """A 240x6 gyro sliding-window matrix."""
    return as_float_matrix(x, name, rows=WINDOW_IMU_ROWS, cols=6)


def check_audio_matrix(x, rows: int | None = None,
                       name: str = "audio") -> np.ndarray:
    """A (rows, 2) int16 stereo block."""
    arr = np.asarray(x)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ShapeMismatch(f"{name} must be (n, 2), got {arr.shape}")
    if rows is not None and arr.shape[0] != rows:
        raise ShapeMismatch(f"{name} must have {rows} rows, got {arr.shape[0]}")
    if arr.dtype != np.int16:
        arr = arr.astype(np.int16)
    return arr


def normalize_channel_mask(mask) -> tuple[str, ...]:
    """Accepts 'both' / 'left' / 'right' or an iterable of ear names."""
    if isinstance(mask, str):
        mask = ("left", "right") if mask == "both" else (mask,)
    ears = tuple(mask)
    if not ears or any(e not in ("left", "right") for e in ears):
        raise ValueError(f"channel mask must name left and/or right ears: {mask!r}")
    # canonical order, deduplicated
    return tuple(e for e in ("left", "right") if e in ears)


def mask_columns(mask: tuple[str, ...]) -> tuple[int, ...]:
    """Gyro-matrix column indices selected by a channel mask."""
    cols: tuple[int, ...] = ()
    if "left" in mask:
        cols += LEFT_COLUMNS
    if "right" in mask:
        cols += RIGHT_COLUMNS
    return cols
