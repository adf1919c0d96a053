import numpy as np
import pytest

from jawtap.errors import OutOfOrderSample
from jawtap.streaming import StreamBuffer
from jawtap.types import AudioFrame, ImuFrame

from .oracles import window_count


def feed(buf, seconds, jitter=None, rng=None, t0=0.0):
    """Push a synthetic aligned stream of the given length."""
    n = round(seconds * 120)
    m = round(seconds * 8000)
    for k in range(n):
        t = t0 + k / 120.0
        if jitter is not None:
            t += rng.uniform(-jitter, jitter)
        buf.push_imu(ImuFrame(t=t, gyro_left=(float(k), 0.0, 0.0),
                              gyro_right=(0.0, 0.0, 0.0)))
    audio = np.arange(m, dtype=np.int16)
    buf.push_audio_block(t0, np.stack([audio, audio], axis=1))


def drain(buf):
    return list(buf.drain())


def test_one_full_window_after_240_frames():
    buf = StreamBuffer()
    feed(buf, 2.0)
    windows = drain(buf)
    assert len(windows) == 1
    assert windows[0].t_start == 0.0
    assert windows[0].imu.shape == (240, 6)
    assert windows[0].audio.shape == (16000, 2)


@pytest.mark.parametrize("seconds,expected", [
    (2.05, 2),
    (1.9, 0),
    (3.0, 21),
    (2.0, 1),
    (10.0, 161),
])
def test_window_counts_match_oracle(seconds, expected):
    assert window_count(seconds) == expected
    buf = StreamBuffer()
    feed(buf, seconds)
    windows = drain(buf)
    assert len(windows) == expected
    for k, w in enumerate(windows):
        assert w.t_start == pytest.approx(k * 0.05, abs=1e-12)


def test_not_ready_returns_none():
    buf = StreamBuffer()
    feed(buf, 1.9)
    assert buf.next_window() is None


def test_out_of_order_sample_rejected():
    buf = StreamBuffer()
    frame = ImuFrame(t=1.0, gyro_left=(0, 0, 0), gyro_right=(0, 0, 0))
    buf.push_imu(frame)
    with pytest.raises(OutOfOrderSample):
        buf.push_imu(frame)
    buf.push_audio(AudioFrame(t=0.0, left=0, right=0))
    with pytest.raises(OutOfOrderSample):
        buf.push_audio(AudioFrame(t=0.0, left=0, right=0))


def test_jittered_timestamps_keep_nominal_hop(rng):
    buf = StreamBuffer()
    n = 1000
    for k in range(n):
        t = k / 120.0 + rng.uniform(-0.001, 0.001)
        buf.push_imu(ImuFrame(t=t, gyro_left=(float(k), 0, 0),
                              gyro_right=(0, 0, 0)))
    m = round(n / 120.0 * 8000)
    buf.push_audio_block(0.0, np.zeros((m, 2), dtype=np.int16))
    windows = drain(buf)
    assert len(windows) == window_count(n / 120.0)
    # nominal re-binning: window k must hold source frames [6k, 6k+240)
    for k, w in enumerate(windows):
        assert w.imu[0, 0] == 6 * k
        assert w.imu[-1, 0] == 6 * k + 239


def test_windows_reproduce_source_rows_bit_exactly(rng):
    buf = StreamBuffer()
    rows = rng.normal(size=(480, 6))
    for k in range(480):
        buf.push_imu(ImuFrame(t=k / 120.0, gyro_left=tuple(rows[k, :3]),
                              gyro_right=tuple(rows[k, 3:])))
    buf.push_audio_block(0.0, np.zeros((32000, 2), dtype=np.int16))
    for k, w in enumerate(drain(buf)):
        assert np.array_equal(w.imu, rows[6 * k:6 * k + 240])


def test_audio_rows_cover_same_interval():
    buf = StreamBuffer()
    feed(buf, 3.0)
    for k, w in enumerate(drain(buf)):
        # sample values encode their index, so alignment is directly visible
        assert w.audio[0, 0] == (k * 400) % 65536
        assert w.audio.shape[0] == 16000


def test_gap_detection_skips_spanned_windows():
    buf = StreamBuffer()
    for k in range(240):
        buf.push_imu(ImuFrame(t=k / 120.0, gyro_left=(0, 0, 0),
                              gyro_right=(0, 0, 0)))
    # a 0.5 s dropout, then the stream resumes
    resume = 240 / 120.0 + 0.5
    for k in range(480):
        buf.push_imu(ImuFrame(t=resume + k / 120.0, gyro_left=(0, 0, 0),
                              gyro_right=(0, 0, 0)))
    buf.push_audio_block(0.0, np.zeros((8 * 8000, 2), dtype=np.int16))
    windows = drain(buf)
    assert any(d.kind == "gap_detected" for d in buf.diagnostics)
    # exactly one pre-gap window, then only windows entirely after the gap
    assert windows[0].t_start == 0.0
    assert windows[1].t_start >= 2.0
    assert len(windows) > 1


def test_unconsumed_data_survives_capacity_pressure(rng):
    buf = StreamBuffer(imu_capacity=480, audio_capacity=32000)
    feed(buf, 10.0)   # way beyond nominal ring capacity, nothing consumed
    windows = drain(buf)
    assert len(windows) == window_count(10.0)
    assert windows[0].t_start == 0.0


def test_watermark_advances_by_hop():
    buf = StreamBuffer()
    feed(buf, 2.2)
    assert buf.watermark is None
    first = buf.next_window()
    assert first is not None
    assert buf.watermark == pytest.approx(0.0)
    second = buf.next_window()
    assert second is not None
    assert buf.watermark == pytest.approx(0.05)
    assert second.t_start - first.t_start == pytest.approx(0.05, abs=1e-12)
