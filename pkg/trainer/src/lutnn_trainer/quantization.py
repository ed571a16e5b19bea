"""Post-training symmetric per-tensor quantization plus a numpy reference
for the quantized forward pass.

The reference mirrors the consumer's integer pipeline exactly (uint8
magnitudes with separate signs, exact int64 accumulation, rint-based
requantization) so exported bundles can be validated bit-for-bit before
they leave this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QTensor:
    magnitudes: np.ndarray  # uint8
    signs: np.ndarray  # int8 +-1
    scale: float

    def signed(self) -> np.ndarray:
        return self.signs.astype(np.int64) * self.magnitudes.astype(np.int64)


def quantize_weights(values: np.ndarray) -> QTensor:
    """scale = max|v|/255; all-zero tensors get scale 1."""
    values = np.asarray(values, dtype=np.float64)
    peak = float(np.abs(values).max()) if values.size else 0.0
    scale = peak / 255.0 if peak > 0 else 1.0
    mags = np.clip(np.rint(np.abs(values) / scale), 0, 255).astype(np.uint8)
    signs = np.where(values < 0, -1, 1).astype(np.int8)
    return QTensor(mags, signs, scale)


def quantize_bias(bias: np.ndarray, in_scale: float, w_scale: float) -> np.ndarray:
    """Float bias -> integer accumulator units at the layer's product scale."""
    return np.rint(np.asarray(bias, dtype=np.float64) / (in_scale * w_scale)).astype(
        np.int64
    )


def quantize_input_image(image: np.ndarray) -> QTensor:
    img = np.asarray(image, dtype=np.uint8)
    return QTensor(
        img[None, :, :].copy(),
        np.ones((1,) + img.shape, dtype=np.int8),
        1.0 / 255.0,
    )


def requantize(acc: np.ndarray, in_scale: float, w_scale: float,
               out_scale: float) -> QTensor:
    factor = in_scale * w_scale / out_scale
    mags = np.clip(np.rint(np.abs(acc).astype(np.float64) * factor), 0, 255)
    return QTensor(
        mags.astype(np.uint8),
        np.where(acc < 0, -1, 1).astype(np.int8),
        out_scale,
    )


def conv2d_int(inp: QTensor, mags: np.ndarray, signs: np.ndarray,
               bias: np.ndarray, padding: int) -> np.ndarray:
    """Exact-product integer convolution (C,H,W) x (O,C,kh,kw) -> int64."""
    iv = inp.signed()
    o, c, kh, kw = mags.shape
    w_signed = signs.astype(np.int64) * mags.astype(np.int64)
    pad = np.pad(iv, ((0, 0), (padding, padding), (padding, padding)))
    win = np.lib.stride_tricks.sliding_window_view(pad, (kh, kw), axis=(1, 2))
    # win: (C, H', W', kh, kw)
    out = np.einsum("chwyx,ocyx->ohw", win, w_signed, dtype=np.int64)
    return out + bias[:, None, None]


def dense_int(inp: QTensor, mags: np.ndarray, signs: np.ndarray,
              bias: np.ndarray) -> np.ndarray:
    w_signed = signs.astype(np.int64) * mags.astype(np.int64)
    return w_signed @ inp.signed() + bias


def relu_q(inp: QTensor) -> QTensor:
    mags = np.where(inp.signs < 0, 0, inp.magnitudes).astype(np.uint8)
    return QTensor(mags, np.ones_like(inp.signs), inp.scale)


def maxpool2_q(inp: QTensor) -> QTensor:
    c, h, w = inp.magnitudes.shape
    h2, w2 = h // 2, w // 2
    vals = inp.signed()[:, : 2 * h2, : 2 * w2].reshape(c, h2, 2, w2, 2).max(axis=(2, 4))
    return QTensor(
        np.abs(vals).astype(np.uint8),
        np.where(vals < 0, -1, 1).astype(np.int8),
        inp.scale,
    )


def flatten_q(inp: QTensor) -> QTensor:
    return QTensor(inp.magnitudes.reshape(-1), inp.signs.reshape(-1), inp.scale)


def run_bundle(layers, inp: QTensor):
    """Reference forward pass over serializable layers (see formats.QuantLayer).

    Returns the final dense accumulator (int64 vector) or, for a trailing
    conv2d, the requantized QTensor -- matching the consumer's behavior.
    """
    cur = inp
    for i, layer in enumerate(layers):
        last = i == len(layers) - 1
        if layer.kind == "conv2d":
            acc = conv2d_int(cur, layer.magnitudes, layer.signs, layer.bias,
                             layer.padding)
            out = requantize(acc, cur.scale, layer.weight_scale, layer.output_scale)
            if last:
                return out
            cur = out
        elif layer.kind == "dense":
            acc = dense_int(cur, layer.magnitudes, layer.signs, layer.bias)
            if last:
                return acc
            cur = requantize(acc, cur.scale, layer.weight_scale, layer.output_scale)
        elif layer.kind == "relu":
            cur = relu_q(cur)
        elif layer.kind == "maxpool2":
            cur = maxpool2_q(cur)
        elif layer.kind == "flatten":
            cur = flatten_q(cur)
        else:
            raise ValueError(f"unknown layer kind {layer.kind!r}")
    return cur


def classify(layers, image: np.ndarray) -> int:
    acc = run_bundle(layers, quantize_input_image(image))
    return int(np.argmax(acc))


def denoise_image(layers, image: np.ndarray) -> np.ndarray:
    out = run_bundle(layers, quantize_input_image(image))
    values = out.signed().astype(np.float64) * out.scale
    return np.clip(np.rint(values[0] * 255.0), 0, 255).astype(np.uint8)
