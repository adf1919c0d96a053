import numpy as np
import pytest

from jawtap.segment import EventSegment
from jawtap.streaming import Window


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_window(imu=None, audio=None, t_start=0.0, rng=None):
    if imu is None:
        imu = np.zeros((240, 6))
        if rng is not None:
            imu = rng.normal(0.0, 1.0, size=(240, 6))
    if audio is None:
        audio = np.zeros((16000, 2), dtype=np.int16)
    return Window(t_start=t_start, imu=np.asarray(imu, dtype=np.float64),
                  audio=np.asarray(audio, dtype=np.int16))


def make_segment(imu=None, audio=None, t_center=0.75, rng=None,
                 imu_scale=1.0, audio_scale=100.0):
    if imu is None:
        imu = (rng.normal(0.0, imu_scale, size=(180, 6))
               if rng is not None else np.zeros((180, 6)))
    if audio is None:
        if rng is not None:
            audio = np.clip(
                rng.normal(0.0, audio_scale, size=(12000, 2)),
                -32768, 32767).astype(np.int16)
        else:
            audio = np.zeros((12000, 2), dtype=np.int16)
    return EventSegment(t_center=t_center,
                        imu=np.asarray(imu, dtype=np.float64),
                        audio=np.asarray(audio, dtype=np.int16))
