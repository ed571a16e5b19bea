"""Quantized inference engine with a pluggable 8x8 product lookup table.

Weights and activations are kept in sign-magnitude form: an unsigned 8-bit
magnitude, a separate sign, and a per-tensor scale.  Every multiply inside
conv2d/dense goes through a 65,536-entry product table indexed by
(|w| << 8) | |a|, so swapping the table swaps the multiplier architecture
without touching the rest of the network.  Accumulation is exact 64-bit
integer arithmetic; only the multiplications are approximate.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BUNDLE_VERSION = 1
QUANT_SCHEME = "symmetric-per-tensor-v1"


class ContractError(ValueError):
    """Shape or scale mismatch between layers/tensors."""


class BundleError(ValueError):
    """Corrupt or unsupported WeightBundle document."""


@dataclass(frozen=True)
class QuantizedTensor:
    """Sign-magnitude fixed-point tensor: real ~= sign * magnitude * scale."""

    magnitudes: np.ndarray  # uint8
    signs: np.ndarray  # int8, +1 or -1
    scale: float

    def __post_init__(self) -> None:
        if self.magnitudes.shape != self.signs.shape:
            raise ContractError("magnitude/sign shapes differ")
        if self.magnitudes.dtype != np.uint8:
            raise ContractError("magnitudes must be uint8")
        if self.scale <= 0:
            raise ContractError("scale must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.magnitudes.shape

    def signed_values(self) -> np.ndarray:
        return self.signs.astype(np.int64) * self.magnitudes.astype(np.int64)

    def dequantize(self) -> np.ndarray:
        return self.signed_values().astype(np.float64) * self.scale


def quantize(values: np.ndarray, bits: int = 8) -> QuantizedTensor:
    """Symmetric per-tensor quantization to unsigned magnitudes plus signs.

    scale = max|v| / (2^bits - 1); an all-zero tensor gets scale 1.
    """
    values = np.asarray(values, dtype=np.float64)
    if not np.isfinite(values).all():
        raise ValueError("cannot quantize non-finite values")
    qmax = (1 << bits) - 1
    peak = float(np.abs(values).max()) if values.size else 0.0
    scale = peak / qmax if peak > 0 else 1.0
    mags = np.clip(np.rint(np.abs(values) / scale), 0, qmax).astype(np.uint8)
    signs = np.where(values < 0, -1, 1).astype(np.int8)
    return QuantizedTensor(magnitudes=mags, signs=signs, scale=scale)


def quantize_image(image: np.ndarray) -> QuantizedTensor:
    """8-bit grayscale image as a (1, H, W) quantized tensor in [0, 1]."""
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise ContractError("expected a 2-D grayscale image")
    return QuantizedTensor(
        magnitudes=img[None, :, :].copy(),
        signs=np.ones((1,) + img.shape, dtype=np.int8),
        scale=1.0 / 255.0,
    )


def _lut_products(
    lut: np.ndarray, wm: np.ndarray, ws: np.ndarray,
    am: np.ndarray, asn: np.ndarray,
) -> np.ndarray:
    idx = (wm.astype(np.int32) << 8) | am.astype(np.int32)
    return lut.astype(np.int64)[idx] * (ws.astype(np.int64) * asn.astype(np.int64))


def _check_lut(lut: np.ndarray) -> np.ndarray:
    lut = np.asarray(lut)
    if lut.shape != (1 << 16,):
        raise ContractError("product lut must have 65,536 entries")
    return lut.astype(np.int64)


def conv2d(
    inp: QuantizedTensor,
    weights: QuantizedTensor,
    bias: np.ndarray,
    lut: np.ndarray,
    padding: int = 0,
) -> np.ndarray:
    """Stride-1 2-D convolution in the lookup-table MAC domain.

    inp is (C, H, W), weights (O, C, kh, kw), bias (O,) in accumulator
    units.  Returns the exact int64 accumulator tensor (O, H', W').
    """
    lut = _check_lut(lut)
    if inp.magnitudes.ndim != 3 or weights.magnitudes.ndim != 4:
        raise ContractError("conv2d expects (C,H,W) input and (O,C,kh,kw) weights")
    o, c, kh, kw = weights.shape
    ci, h, w = inp.shape
    if c != ci:
        raise ContractError(f"channel mismatch: weights want {c}, input has {ci}")
    bias = np.asarray(bias, dtype=np.int64)
    if bias.shape != (o,):
        raise ContractError(f"bias must have shape ({o},)")
    mag = np.pad(inp.magnitudes, ((0, 0), (padding, padding), (padding, padding)))
    sgn = np.pad(inp.signs, ((0, 0), (padding, padding), (padding, padding)),
                 constant_values=1)
    hp, wp = h + 2 * padding, w + 2 * padding
    if hp < kh or wp < kw:
        raise ContractError("kernel larger than padded input")
    # (C, kh, kw, H', W') windows
    win_m = np.lib.stride_tricks.sliding_window_view(mag, (kh, kw), axis=(1, 2))
    win_s = np.lib.stride_tricks.sliding_window_view(sgn, (kh, kw), axis=(1, 2))
    win_m = win_m.transpose(0, 3, 4, 1, 2)
    win_s = win_s.transpose(0, 3, 4, 1, 2)
    out = np.empty((o, hp - kh + 1, wp - kw + 1), dtype=np.int64)
    for oc in range(o):
        wm = weights.magnitudes[oc][:, :, :, None, None]
        ws = weights.signs[oc][:, :, :, None, None]
        prod = _lut_products(lut, wm, ws, win_m, win_s)
        out[oc] = prod.sum(axis=(0, 1, 2)) + bias[oc]
    return out


def dense(
    inp: QuantizedTensor, weights: QuantizedTensor, bias: np.ndarray, lut: np.ndarray
) -> np.ndarray:
    """Fully connected layer in the lookup-table MAC domain; returns int64 (O,)."""
    lut = _check_lut(lut)
    if inp.magnitudes.ndim != 1 or weights.magnitudes.ndim != 2:
        raise ContractError("dense expects flat input and (O,F) weights")
    o, f = weights.shape
    if inp.shape != (f,):
        raise ContractError(f"input must have {f} features, got {inp.shape}")
    bias = np.asarray(bias, dtype=np.int64)
    if bias.shape != (o,):
        raise ContractError(f"bias must have shape ({o},)")
    prod = _lut_products(
        lut,
        weights.magnitudes, weights.signs,
        inp.magnitudes[None, :], inp.signs[None, :],
    )
    return prod.sum(axis=1) + bias


def relu(inp: QuantizedTensor) -> QuantizedTensor:
    mags = np.where(inp.signs < 0, 0, inp.magnitudes).astype(np.uint8)
    return QuantizedTensor(mags, np.ones_like(inp.signs), inp.scale)


def maxpool2(inp: QuantizedTensor) -> QuantizedTensor:
    """2x2, stride-2 max pooling on signed values; trailing odd row/col dropped."""
    if inp.magnitudes.ndim != 3:
        raise ContractError("maxpool2 expects a (C,H,W) tensor")
    c, h, w = inp.shape
    h2, w2 = h // 2, w // 2
    if h2 == 0 or w2 == 0:
        raise ContractError("input too small to pool")
    vals = inp.signed_values()[:, : 2 * h2, : 2 * w2]
    vals = vals.reshape(c, h2, 2, w2, 2).max(axis=(2, 4))
    return QuantizedTensor(
        np.abs(vals).astype(np.uint8),
        np.where(vals < 0, -1, 1).astype(np.int8),
        inp.scale,
    )


def flatten(inp: QuantizedTensor) -> QuantizedTensor:
    return QuantizedTensor(
        inp.magnitudes.reshape(-1), inp.signs.reshape(-1), inp.scale
    )


def argmax(acc: np.ndarray) -> int:
    """Index of the largest accumulator; ties break toward the lower index."""
    return int(np.argmax(acc))


def requantize(acc: np.ndarray, in_scale: float, w_scale: float, out_scale: float) -> QuantizedTensor:
    """Map exact accumulators back to 8-bit magnitudes at the layer's scale."""
    if out_scale <= 0:
        raise ContractError("output scale must be positive")
    factor = in_scale * w_scale / out_scale
    mags = np.clip(np.rint(np.abs(acc).astype(np.float64) * factor), 0, 255)
    return QuantizedTensor(
        mags.astype(np.uint8),
        np.where(acc < 0, -1, 1).astype(np.int8),
        out_scale,
    )


@dataclass(frozen=True)
class Layer:
    kind: str  # conv2d | dense | relu | maxpool2 | flatten
    weights: QuantizedTensor | None = None
    bias: np.ndarray | None = None
    output_scale: float | None = None
    padding: int = 0


@dataclass(frozen=True)
class WeightBundle:
    layers: tuple[Layer, ...]
    metadata: dict = field(default_factory=dict)

    def save(self, path: str | Path) -> None:
        doc = {"version": BUNDLE_VERSION, "layers": [], "metadata": self.metadata}
        for layer in self.layers:
            entry: dict = {"kind": layer.kind}
            if layer.weights is not None:
                entry["shape"] = list(layer.weights.shape)
                entry["scale"] = {
                    "weight": layer.weights.scale,
                    "output": layer.output_scale,
                }
                entry["weights_b64"] = base64.b64encode(
                    layer.weights.magnitudes.reshape(-1).tobytes()
                ).decode("ascii")
                entry["signs_b64"] = base64.b64encode(
                    ((layer.weights.signs.reshape(-1) < 0).astype(np.uint8)).tobytes()
                ).decode("ascii")
                entry["bias"] = [int(v) for v in layer.bias]
                if layer.kind == "conv2d":
                    entry["padding"] = layer.padding
            doc["layers"].append(entry)
        Path(path).write_text(json.dumps(doc, indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "WeightBundle":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise BundleError(f"cannot read bundle: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("version") != BUNDLE_VERSION:
            raise BundleError(f"unsupported bundle version: {doc.get('version')!r}")
        layers: list[Layer] = []
        for i, entry in enumerate(doc.get("layers", [])):
            kind = entry.get("kind")
            if kind in ("relu", "maxpool2", "flatten"):
                layers.append(Layer(kind=kind))
                continue
            if kind not in ("conv2d", "dense"):
                raise BundleError(f"layer {i}: unknown kind {kind!r}")
            try:
                shape = tuple(int(d) for d in entry["shape"])
                mags = np.frombuffer(
                    base64.b64decode(entry["weights_b64"]), dtype=np.uint8
                ).reshape(shape).copy()
                neg = np.frombuffer(
                    base64.b64decode(entry["signs_b64"]), dtype=np.uint8
                ).reshape(shape)
                signs = np.where(neg, -1, 1).astype(np.int8)
                w = QuantizedTensor(mags, signs, float(entry["scale"]["weight"]))
                bias = np.asarray(entry["bias"], dtype=np.int64)
                out_scale = float(entry["scale"]["output"])
                padding = int(entry.get("padding", 0))
            except (KeyError, ValueError, TypeError) as exc:
                raise BundleError(f"layer {i}: malformed entry ({exc})") from exc
            layers.append(
                Layer(kind=kind, weights=w, bias=bias,
                      output_scale=out_scale, padding=padding)
            )
        bundle = cls(layers=tuple(layers), metadata=doc.get("metadata", {}))
        bundle.validate()
        return bundle

    def validate(self) -> None:
        for i, layer in enumerate(self.layers):
            if layer.kind in ("conv2d", "dense"):
                if layer.weights is None or layer.bias is None:
                    raise BundleError(f"layer {i}: {layer.kind} missing weights")
                if layer.output_scale is None or layer.output_scale <= 0:
                    raise BundleError(f"layer {i}: bad output scale")
                n_out = layer.weights.shape[0]
                if layer.bias.shape != (n_out,):
                    raise BundleError(f"layer {i}: bias length != {n_out}")


def run_layers(
    bundle: WeightBundle, inp: QuantizedTensor, lut: np.ndarray
) -> list[QuantizedTensor | np.ndarray]:
    """Forward pass recording each layer's output.

    conv2d/dense outputs are requantized to 8 bits at the layer's stored
    output scale; the raw final-layer accumulator is kept as the last
    element when the network ends on a conv2d/dense layer.
    """
    outputs: list[QuantizedTensor | np.ndarray] = []
    cur = inp
    for i, layer in enumerate(bundle.layers):
        if layer.kind == "conv2d":
            acc = conv2d(cur, layer.weights, layer.bias, lut, padding=layer.padding)
        elif layer.kind == "dense":
            acc = dense(cur, layer.weights, layer.bias, lut)
        elif layer.kind == "relu":
            cur = relu(cur)
            outputs.append(cur)
            continue
        elif layer.kind == "maxpool2":
            cur = maxpool2(cur)
            outputs.append(cur)
            continue
        elif layer.kind == "flatten":
            cur = flatten(cur)
            outputs.append(cur)
            continue
        else:
            raise BundleError(f"layer {i}: unknown kind {layer.kind!r}")
        if i == len(bundle.layers) - 1:
            outputs.append(acc)
            return outputs
        cur = requantize(acc, cur.scale, layer.weights.scale, layer.output_scale)
        outputs.append(cur)
    return outputs


def infer(bundle: WeightBundle, inp: QuantizedTensor, lut: np.ndarray):
    """Deterministic forward pass.

    Returns the argmax class index when the network ends on a dense layer,
    otherwise the final tensor (requantized for a trailing conv2d layer).
    """
    bundle.validate()
    outputs = run_layers(bundle, inp, lut)
    last = outputs[-1]
    final_kind = bundle.layers[-1].kind
    if final_kind == "dense":
        return argmax(last)
    if final_kind == "conv2d":
        layer = bundle.layers[-1]
        prev_scale = outputs[-2].scale if len(outputs) > 1 else inp.scale
        return requantize(last, prev_scale, layer.weights.scale, layer.output_scale)
    return last
