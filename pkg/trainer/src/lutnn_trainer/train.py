"""Training, post-training quantization, and artifact export.

Everything is seed-deterministic: the same TrainingConfig reproduces the
same bundle byte-for-byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .data import SplitData, clean_test_card, load_split
from .formats import QUANT_SCHEME, Bundle, QuantLayer, write_idx, write_pgm
from .quantization import (
    classify,
    quantize_bias,
    quantize_weights,
    run_bundle,
    quantize_input_image,
)


@dataclass(frozen=True)
class TrainingConfig:
    dataset: str | None = None  # IDX directory; None -> offline synthetic corpus
    epochs: int = 40
    n_train: int = 5000
    n_test: int = 500
    learning_rate: float = 1e-3
    batch_size: int = 64
    seed: int = 42

    def __post_init__(self) -> None:
        if self.epochs < 0 or self.n_train < 1 or self.n_test < 1:
            raise ValueError("epochs must be >= 0 and subset sizes >= 1")


def _seed_everything(seed: int) -> torch.Generator:
    torch.manual_seed(seed)
    np.random.seed(seed)
    gen = torch.Generator()
    gen.manual_seed(seed)
    return gen


class SmallClassifier(nn.Module):
    """conv(16,3x3) -> relu -> maxpool2 -> dense(10) on 16x16 grayscale."""

    def __init__(self) -> None:
        super().__init__()
        self.conv = nn.Conv2d(1, 16, 3, padding=1)
        self.fc = nn.Linear(16 * 8 * 8, 10)

    def forward(self, x):
        x = torch.relu(self.conv(x))
        x = torch.max_pool2d(x, 2)
        return self.fc(x.flatten(1))


class SmallDenoiser(nn.Module):
    """conv(16,3x3) -> relu -> conv(1,3x3) image-to-image net."""

    def __init__(self) -> None:
        super().__init__()
        self.conv1 = nn.Conv2d(1, 16, 3, padding=1)
        self.conv2 = nn.Conv2d(16, 1, 3, padding=1)

    def forward(self, x):
        return self.conv2(torch.relu(self.conv1(x)))


def _calibrated_scale(acts: torch.Tensor) -> float:
    peak = float(acts.abs().max())
    return peak / 255.0 if peak > 0 else 1.0


def _conv_layer(conv: nn.Conv2d, in_scale: float, out_scale: float,
                padding: int) -> QuantLayer:
    w = quantize_weights(conv.weight.detach().numpy())
    return QuantLayer(
        kind="conv2d",
        magnitudes=w.magnitudes,
        signs=w.signs,
        weight_scale=w.scale,
        output_scale=out_scale,
        bias=quantize_bias(conv.bias.detach().numpy(), in_scale, w.scale),
        padding=padding,
    )


def _dense_layer(fc: nn.Linear, in_scale: float, out_scale: float) -> QuantLayer:
    w = quantize_weights(fc.weight.detach().numpy())
    return QuantLayer(
        kind="dense",
        magnitudes=w.magnitudes,
        signs=w.signs,
        weight_scale=w.scale,
        output_scale=out_scale,
        bias=quantize_bias(fc.bias.detach().numpy(), in_scale, w.scale),
    )


def train_classifier(cfg: TrainingConfig, out_path: str | Path,
                     data: SplitData | None = None) -> Bundle:
    """Train, quantize post-training, and save a classifier bundle.

    The recorded metadata includes the floating-point test accuracy and
    the quantized (exact-product) reference accuracy.
    """
    gen = _seed_everything(cfg.seed)
    if data is None:
        data = load_split(cfg.dataset, cfg.n_train, cfg.n_test, cfg.seed)
    x_train = torch.from_numpy(data.train_images).float().unsqueeze(1) / 255.0
    y_train = torch.from_numpy(data.train_labels).long()
    x_test = torch.from_numpy(data.test_images).float().unsqueeze(1) / 255.0
    y_test = torch.from_numpy(data.test_labels).long()

    model = SmallClassifier()
    opt = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    n = len(x_train)
    for _ in range(cfg.epochs):
        perm = torch.randperm(n, generator=gen)
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            opt.zero_grad()
            loss = loss_fn(model(x_train[idx]), y_train[idx])
            loss.backward()
            opt.step()

    model.eval()
    with torch.no_grad():
        float_acc = float((model(x_test).argmax(1) == y_test).float().mean()) * 100
        conv_acts = torch.relu(model.conv(x_train[:512]))
    in_scale = 1.0 / 255.0
    conv_scale = _calibrated_scale(conv_acts)
    layers = (
        _conv_layer(model.conv, in_scale, conv_scale, padding=1),
        QuantLayer(kind="relu"),
        QuantLayer(kind="maxpool2"),
        QuantLayer(kind="flatten"),
        _dense_layer(model.fc, conv_scale, 1.0),
    )
    quant_acc = 100.0 * float(np.mean([
        classify(layers, img) == int(lab)
        for img, lab in zip(data.test_images, data.test_labels)
    ]))
    bundle = Bundle(
        layers=layers,
        metadata={
            "task": "classification",
            "quant_scheme": QUANT_SCHEME,
            "seed": cfg.seed,
            "epochs": cfg.epochs,
            "train_size": cfg.n_train,
            "test_size": cfg.n_test,
            "float_test_accuracy_percent": round(float_acc, 2),
            "quantized_exact_accuracy_percent": round(quant_acc, 2),
        },
    )
    bundle.save(out_path)
    return bundle


def _psnr(ref: np.ndarray, test: np.ndarray) -> float:
    mse = float(np.mean((ref.astype(np.float64) - test.astype(np.float64)) ** 2))
    return math.inf if mse == 0 else 10 * math.log10(255.0**2 / mse)


def train_denoiser(cfg: TrainingConfig, out_path: str | Path,
                   sigmas: tuple[float, ...] = (25.0, 50.0),
                   data: SplitData | None = None) -> Bundle:
    """Train on Gaussian-noised patches and save a denoiser bundle.

    Metadata records the float PSNR improvement over the noisy input,
    which must be >= 3 dB for the run to be considered useful.
    """
    gen = _seed_everything(cfg.seed)
    if data is None:
        data = load_split(cfg.dataset, cfg.n_train, cfg.n_test, cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    clean = data.train_images.astype(np.float64)
    sigma_choice = rng.choice(sigmas, size=len(clean))
    noisy = np.clip(
        clean + rng.normal(0, 1.0, clean.shape) * sigma_choice[:, None, None],
        0, 255,
    )
    x = torch.from_numpy(noisy).float().unsqueeze(1) / 255.0
    y = torch.from_numpy(clean).float().unsqueeze(1) / 255.0

    model = SmallDenoiser()
    opt = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    n = len(x)
    for _ in range(cfg.epochs):
        perm = torch.randperm(n, generator=gen)
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            opt.zero_grad()
            loss = torch.mean((model(x[idx]) - y[idx]) ** 2)
            loss.backward()
            opt.step()

    model.eval()
    test_clean = data.test_images.astype(np.float64)
    per_sigma: dict[str, dict[str, float]] = {}
    gains = []
    for sigma in sigmas:
        test_noisy = np.clip(
            test_clean + rng.normal(0, sigma, test_clean.shape), 0, 255
        )
        with torch.no_grad():
            restored = model(
                torch.from_numpy(test_noisy).float().unsqueeze(1) / 255.0
            ).squeeze(1).numpy()
        restored = np.clip(np.rint(restored * 255.0), 0, 255).astype(np.uint8)
        noisy_psnr = float(np.mean([
            _psnr(c, nz) for c, nz in zip(test_clean, test_noisy)
        ]))
        restored_psnr = float(np.mean([
            _psnr(c, r) for c, r in zip(test_clean, restored)
        ]))
        per_sigma[str(int(sigma))] = {
            "noisy_psnr_db": round(noisy_psnr, 2),
            "restored_psnr_db": round(restored_psnr, 2),
            "gain_db": round(restored_psnr - noisy_psnr, 2),
        }
        gains.append(restored_psnr - noisy_psnr)

    with torch.no_grad():
        hidden_acts = torch.relu(model.conv1(x[:512]))
    in_scale = 1.0 / 255.0
    hidden_scale = _calibrated_scale(hidden_acts)
    layers = (
        _conv_layer(model.conv1, in_scale, hidden_scale, padding=1),
        QuantLayer(kind="relu"),
        _conv_layer(model.conv2, hidden_scale, 1.0 / 255.0, padding=1),
    )
    bundle = Bundle(
        layers=layers,
        metadata={
            "task": "denoising",
            "quant_scheme": QUANT_SCHEME,
            "seed": cfg.seed,
            "epochs": cfg.epochs,
            "noise_sigmas": list(sigmas),
            "float_psnr_by_sigma": per_sigma,
            "float_mean_psnr_gain_db": round(float(np.mean(gains)), 2),
        },
    )
    bundle.save(out_path)
    return bundle


def export_vectors(bundle: Bundle, images: np.ndarray, n: int,
                   out_path: str | Path) -> dict:
    """Save n paired fixtures: input image index, quantized-exact
    accumulators, and predicted class from the reference pipeline."""
    records = []
    for i in range(min(n, len(images))):
        acc = run_bundle(bundle.layers, quantize_input_image(images[i]))
        records.append({
            "index": i,
            "accumulators": [int(v) for v in np.asarray(acc).reshape(-1)],
            "prediction": int(np.argmax(acc)),
        })
    doc = {"quant_scheme": QUANT_SCHEME, "vectors": records}
    import json

    Path(out_path).write_text(json.dumps(doc, indent=1))
    return doc


def export_all(cfg: TrainingConfig, out_dir: str | Path) -> dict:
    """Train both models and write every artifact the consumer needs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = load_split(cfg.dataset, cfg.n_train, cfg.n_test, cfg.seed)

    clf = train_classifier(cfg, out / "classifier_bundle.json", data=data)
    write_idx(out / "test_images.idx", data.test_images)
    write_idx(out / "test_labels.idx", data.test_labels)
    export_vectors(clf, data.test_images, 32, out / "classifier_vectors.json")

    dnz = train_denoiser(cfg, out / "denoiser_bundle.json", data=data)
    card = clean_test_card(cfg.seed)
    write_pgm(out / "denoise_test.pgm", card)
    return {"classifier": clf.metadata, "denoiser": dnz.metadata}
