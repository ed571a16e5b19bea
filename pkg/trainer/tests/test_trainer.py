import json
import subprocess

import numpy as np
import pytest

from lutnn_trainer.data import load_split, synthetic_digits
from lutnn_trainer.formats import Bundle, write_idx
from lutnn_trainer.quantization import (
    classify,
    quantize_bias,
    quantize_input_image,
    quantize_weights,
    run_bundle,
)
from lutnn_trainer.train import (
    TrainingConfig,
    export_vectors,
    train_classifier,
    train_denoiser,
)


def test_quantize_weights_examples():
    qt = quantize_weights(np.array([-1.0, 0.5, 1.0]))
    assert qt.scale == pytest.approx(1 / 255)
    assert qt.magnitudes.tolist() == [255, 128, 255]
    assert qt.signs.tolist() == [-1, 1, 1]
    assert quantize_weights(np.zeros(3)).scale == 1.0


def test_quantize_bias_units():
    bias = quantize_bias(np.array([0.5, -0.25]), in_scale=0.1, w_scale=0.05)
    assert bias.tolist() == [100, -50]
    assert bias.dtype == np.int64


def test_synthetic_corpus_shapes_and_determinism():
    a = synthetic_digits(100, 20, seed=7)
    b = synthetic_digits(100, 20, seed=7)
    assert a.train_images.shape == (100, 16, 16)
    assert a.test_labels.shape == (20,)
    assert np.array_equal(a.train_images, b.train_images)
    assert np.array_equal(a.test_labels, b.test_labels)
    c = synthetic_digits(100, 20, seed=8)
    assert not np.array_equal(a.train_images, c.train_images)


def test_missing_dataset_directory_gives_fetch_instruction(tmp_path):
    with pytest.raises(FileNotFoundError, match="train-images.idx"):
        load_split(str(tmp_path / "nowhere"), 10, 10, seed=0)


def test_idx_directory_loading(tmp_path):
    rng = np.random.default_rng(0)
    for stem, n in (("train", 30), ("t10k", 10)):
        write_idx(tmp_path / f"{stem}-images.idx",
                  rng.integers(0, 256, size=(n, 16, 16), dtype=np.uint8))
        write_idx(tmp_path / f"{stem}-labels.idx",
                  rng.integers(0, 10, size=n, dtype=np.uint8))
    data = load_split(str(tmp_path), 20, 10, seed=0)
    assert data.train_images.shape == (20, 16, 16)
    with pytest.raises(ValueError, match="exceed dataset size"):
        load_split(str(tmp_path), 40, 10, seed=0)


def test_epochs_zero_bundle_is_schema_valid_and_deterministic(tmp_path):
    cfg = TrainingConfig(epochs=0, n_train=50, n_test=20)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    train_classifier(cfg, p1)
    train_classifier(cfg, p2)
    assert p1.read_bytes() == p2.read_bytes()
    bundle = Bundle.load(p1)
    kinds = [l.kind for l in bundle.layers]
    assert kinds == ["conv2d", "relu", "maxpool2", "flatten", "dense"]
    assert bundle.layers[0].magnitudes.dtype == np.uint8
    assert bundle.metadata["quant_scheme"] == "symmetric-per-tensor-v1"


def test_tiny_set_overfit(tmp_path):
    data = synthetic_digits(10, 10, seed=3)
    # train and evaluate on the same 10 images: must memorize them
    from lutnn_trainer.data import SplitData

    overfit = SplitData(data.train_images, data.train_labels,
                        data.train_images, data.train_labels)
    cfg = TrainingConfig(epochs=60, n_train=10, n_test=10)
    bundle = train_classifier(cfg, tmp_path / "overfit.json", data=overfit)
    assert bundle.metadata["float_test_accuracy_percent"] == 100.0


def test_denoiser_bundle_layers(tmp_path):
    cfg = TrainingConfig(epochs=1, n_train=100, n_test=20)
    bundle = train_denoiser(cfg, tmp_path / "d.json")
    kinds = [l.kind for l in Bundle.load(tmp_path / "d.json").layers]
    assert kinds == ["conv2d", "relu", "conv2d"]
    assert "float_mean_psnr_gain_db" in bundle.metadata


def test_export_vectors_round_trip(tmp_path):
    cfg = TrainingConfig(epochs=0, n_train=50, n_test=8)
    data = synthetic_digits(50, 8, seed=1)
    bundle = train_classifier(cfg, tmp_path / "b.json", data=data)
    doc = export_vectors(bundle, data.test_images, 8, tmp_path / "v.json")
    stored = json.loads((tmp_path / "v.json").read_text())
    assert stored == doc
    for rec in stored["vectors"]:
        acc = run_bundle(bundle.layers,
                         quantize_input_image(data.test_images[rec["index"]]))
        assert [int(v) for v in acc] == rec["accumulators"]
        assert int(np.argmax(acc)) == rec["prediction"]


def _consumer_cli_available():
    return subprocess.run(
        ["approxmul", "--version"], capture_output=True
    ).returncode == 0


@pytest.mark.skipif(not _consumer_cli_available(),
                    reason="consumer CLI not installed")
def test_cross_package_round_trip_via_cli(tmp_path):
    """Bundle + exact product table through the consumer CLI must reproduce
    this package's own quantized reference predictions exactly."""
    data = synthetic_digits(200, 16, seed=5)
    cfg = TrainingConfig(epochs=4, n_train=200, n_test=16)
    bundle = train_classifier(cfg, tmp_path / "bundle.json", data=data)
    write_idx(tmp_path / "imgs.idx", data.test_images)
    write_idx(tmp_path / "labels.idx", data.test_labels)
    subprocess.run(
        ["approxmul", "mult", "lut", "--family", "exact",
         "--out", str(tmp_path / "exact.lut")],
        check=True, capture_output=True,
    )
    result = subprocess.run(
        ["approxmul", "nn", "infer", "--bundle", str(tmp_path / "bundle.json"),
         "--images", str(tmp_path / "imgs.idx"),
         "--labels", str(tmp_path / "labels.idx"),
         "--lut", str(tmp_path / "exact.lut")],
        check=True, capture_output=True, text=True,
    )
    reference_correct = sum(
        int(classify(bundle.layers, img) == int(lab))
        for img, lab in zip(data.test_images, data.test_labels)
    )
    fields = dict(tok.split("=") for tok in result.stdout.split())
    assert int(fields["total"]) == 16
    assert int(fields["correct"]) == reference_correct
