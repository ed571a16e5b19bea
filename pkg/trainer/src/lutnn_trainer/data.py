"""Dataset assembly.

Two sources are supported:

* a directory of IDX files (``train-images.idx``/``train-labels.idx`` and
  ``t10k-images.idx``/``t10k-labels.idx``) with 8-bit grayscale digits --
  never downloaded silently; a missing path raises with fetch
  instructions; or
* a fully offline synthetic digit corpus derived from scikit-learn's
  bundled 8x8 digits, upsampled to 16x16 and augmented with seeded
  shifts/noise to reach the requested subset sizes.

Train and test augmentations draw from disjoint base images, so no test
digit is a transform of a training digit.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits

from .formats import read_idx

FETCH_HELP = (
    "dataset directory {path} is missing IDX files; place "
    "train-images.idx/train-labels.idx/t10k-images.idx/t10k-labels.idx "
    "there (e.g. from an MNIST mirror, decompressed), or omit --dataset "
    "to use the offline synthetic digit corpus"
)


@dataclass(frozen=True)
class SplitData:
    train_images: np.ndarray  # uint8 (N,H,W)
    train_labels: np.ndarray  # uint8 (N,)
    test_images: np.ndarray
    test_labels: np.ndarray


def _augment(base_imgs, base_labels, count, rng):
    """Seeded random shift (+-2 px) and mild noise per sample."""
    n = len(base_imgs)
    out_imgs = np.empty((count,) + base_imgs.shape[1:], dtype=np.uint8)
    out_labels = np.empty(count, dtype=np.uint8)
    for i in range(count):
        k = int(rng.integers(0, n))
        img = base_imgs[k].astype(np.float64)
        dy, dx = rng.integers(-2, 3, size=2)
        img = np.roll(np.roll(img, dy, axis=0), dx, axis=1)
        img += rng.normal(0, 8.0, img.shape)
        out_imgs[i] = np.clip(np.rint(img), 0, 255).astype(np.uint8)
        out_labels[i] = base_labels[k]
    return out_imgs, out_labels


def synthetic_digits(n_train: int, n_test: int, seed: int) -> SplitData:
    """16x16 digit corpus built offline from the 8x8 scikit-learn digits."""
    digits = load_digits()
    imgs = np.kron(
        digits.images, np.ones((2, 2))
    )  # 8x8 -> 16x16 nearest-neighbor upsample
    imgs = np.clip(np.rint(imgs * (255.0 / 16.0)), 0, 255).astype(np.uint8)
    labels = digits.target.astype(np.uint8)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(imgs))
    split = int(0.8 * len(imgs))
    tr_idx, te_idx = order[:split], order[split:]
    train = _augment(imgs[tr_idx], labels[tr_idx], n_train, rng)
    test = _augment(imgs[te_idx], labels[te_idx], n_test, rng)
    return SplitData(train[0], train[1], test[0], test[1])


def idx_directory(path: str | Path, n_train: int, n_test: int) -> SplitData:
    path = Path(path)
    names = ["train-images.idx", "train-labels.idx", "t10k-images.idx",
             "t10k-labels.idx"]
    files = [path / n for n in names]
    if not all(f.exists() for f in files):
        raise FileNotFoundError(FETCH_HELP.format(path=path))
    tr_i, tr_l, te_i, te_l = (read_idx(f) for f in files)
    if n_train > len(tr_i) or n_test > len(te_i):
        raise ValueError(
            f"requested subsets ({n_train}/{n_test}) exceed dataset size "
            f"({len(tr_i)}/{len(te_i)})"
        )
    return SplitData(tr_i[:n_train], tr_l[:n_train], te_i[:n_test], te_l[:n_test])


def load_split(dataset: str | None, n_train: int, n_test: int, seed: int) -> SplitData:
    if dataset is None:
        return synthetic_digits(n_train, n_test, seed)
    return idx_directory(dataset, n_train, n_test)


def clean_test_card(seed: int, tiles: int = 4) -> np.ndarray:
    """A (16*tiles)^2 grayscale test image tiled from held-out digits."""
    data = synthetic_digits(1, tiles * tiles, seed + 1)
    grid = data.test_images.reshape(tiles, tiles, 16, 16)
    return grid.transpose(0, 2, 1, 3).reshape(16 * tiles, 16 * tiles)
