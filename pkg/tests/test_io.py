import json

import numpy as np
import pytest

from jawtap.dtw_knn import DtwKnnClassifier
from jawtap.errors import InvariantViolation
from jawtap.io import load_model, load_recording, save_model, save_recording
from jawtap.svm import LinearSvmGate
from jawtap.synth import synth_dataset
from jawtap.types import ALL_LABELS, Annotation, NoiseKind, Recording, RecordingMeta


def random_recording(rng, seconds=3.0, with_annotations=True):
    n = round(seconds * 120)
    m = round(seconds * 8000)
    annotations = ()
    if with_annotations:
        annotations = (
            Annotation(ALL_LABELS[int(rng.integers(13))], 0.3, 1.1),
            Annotation(NoiseKind.WALKING, 1.5, 2.5),
        )
    return Recording(
        meta=RecordingMeta(subject="s1", session="a"),
        imu_t=np.arange(n) / 120.0 + rng.uniform(-1e-4, 1e-4, size=n).cumsum() * 0,
        imu=rng.normal(0, 50, size=(n, 6)),
        audio=rng.integers(-2047, 2048, size=(m, 2)).astype(np.int16),
        annotations=annotations,
    )


def test_round_trip_random_recordings(tmp_path, rng):
    for i in range(3):
        rec = random_recording(rng, seconds=2.0 + i * 0.5)
        path = tmp_path / f"rec{i}"
        save_recording(rec, path)
        back = load_recording(path)
        assert np.array_equal(back.imu_t, rec.imu_t)
        assert np.array_equal(back.imu, rec.imu)
        assert np.array_equal(back.audio, rec.audio)
        assert back.annotations == rec.annotations
        assert back.meta == rec.meta


def test_round_trip_synthetic_labeled_dataset(tmp_path):
    rec, _ = synth_dataset({"left_single": 2, "back_triple": 1,
                            "noise_static": 1}, seed=5)
    save_recording(rec, tmp_path / "ds")
    back = load_recording(tmp_path / "ds")
    assert back.annotations == rec.annotations
    assert np.array_equal(back.audio, rec.audio)
    assert np.array_equal(back.imu, rec.imu)


def test_empty_annotations_written_and_required(tmp_path, rng):
    rec = random_recording(rng, with_annotations=False)
    save_recording(rec, tmp_path / "rec")
    assert (tmp_path / "rec" / "annotations.jsonl").exists()
    assert load_recording(tmp_path / "rec").annotations == ()
    (tmp_path / "rec" / "annotations.jsonl").unlink()
    with pytest.raises(FileNotFoundError):
        load_recording(tmp_path / "rec")


def test_missing_files_error(tmp_path, rng):
    rec = random_recording(rng)
    save_recording(rec, tmp_path / "rec")
    (tmp_path / "rec" / "audio_r.pcm").unlink()
    with pytest.raises(FileNotFoundError):
        load_recording(tmp_path / "rec")
    with pytest.raises(FileNotFoundError):
        load_recording(tmp_path / "nowhere")


def test_save_refuses_invalid_recording(tmp_path, rng):
    rec = random_recording(rng)
    t = rec.imu_t.copy()
    t[3] = t[2] - 0.01
    bad = Recording(meta=rec.meta, imu_t=t, imu=rec.imu.copy(),
                    audio=rec.audio.copy(), annotations=rec.annotations)
    with pytest.raises(InvariantViolation):
        save_recording(bad, tmp_path / "bad")


def test_load_rejects_rate_mismatch(tmp_path, rng):
    rec = random_recording(rng)
    save_recording(rec, tmp_path / "rec")
    meta = json.loads((tmp_path / "rec" / "meta.json").read_text())
    meta["imu_rate_hz"] = 240
    (tmp_path / "rec" / "meta.json").write_text(json.dumps(meta))
    with pytest.raises(InvariantViolation):
        load_recording(tmp_path / "rec")


def _toy_model(rng):
    X = np.vstack([rng.normal(0, 1, size=(20, 107)),
                   rng.normal(3, 1, size=(20, 107))])
    y = ["noise"] * 20 + ["gesture"] * 20
    svm = LinearSvmGate().fit(X, y)
    templates = [rng.normal(size=(180, 6)) for _ in range(4)]
    knn = DtwKnnClassifier().fit(
        templates, ["back_triple", "back_triple", "left_single", "left_hold"])
    return svm, knn


def test_model_round_trip(tmp_path, rng):
    svm, knn = _toy_model(rng)
    path = tmp_path / "model.json"
    save_model(path, svm, knn, "full")
    svm2, knn2, mode = load_model(path)
    assert mode == "full"
    assert np.array_equal(svm2.weights_, svm.weights_)
    assert svm2.bias_ == svm.bias_
    assert np.array_equal(svm2.mean_, svm.mean_)
    assert np.array_equal(svm2.scale_, svm.scale_)
    assert knn2.labels_ == knn.labels_
    for a, b in zip(knn2.templates_, knn.templates_):
        assert np.array_equal(a, b)
    X = rng.normal(size=(10, 107))
    assert np.array_equal(svm2.decision_function(X), svm.decision_function(X))


def test_model_file_schema(tmp_path, rng):
    svm, knn = _toy_model(rng)
    path = tmp_path / "model.json"
    save_model(path, svm, knn, "full")
    doc = json.loads(path.read_text())
    assert set(doc) == {"svm", "norm", "templates"}
    assert set(doc["svm"]) == {"weights", "bias", "mode"}
    assert doc["svm"]["mode"] == "full"
    assert len(doc["svm"]["weights"]) == 107
    assert set(doc["norm"]) == {"mean", "std"}
    assert len(doc["templates"]) == 4
    entry = doc["templates"][0]
    assert set(entry) == {"label", "matrix"}
    assert len(entry["matrix"]) == 180
    assert len(entry["matrix"][0]) == 6


def test_model_mode_length_enforced(tmp_path, rng):
    svm, knn = _toy_model(rng)
    with pytest.raises(ValueError):
        save_model(tmp_path / "m.json", svm, knn, "paper64")
