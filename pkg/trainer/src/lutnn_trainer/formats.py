"""Writers/readers for the interchange formats shared with the inference
engine: WeightBundle JSON v1, IDX image/label files, and binary PGM.

These are implemented independently here; the JSON schema below is the
contract (version, per-layer shape/scales, base64 magnitudes, base64
negative-sign bitmap bytes, integer bias in accumulator units).
"""

from __future__ import annotations

import base64
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BUNDLE_VERSION = 1
QUANT_SCHEME = "symmetric-per-tensor-v1"

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class QuantLayer:
    """One serializable layer: weighted kinds carry sign-magnitude data."""

    kind: str  # conv2d | dense | relu | maxpool2 | flatten
    magnitudes: np.ndarray | None = None  # uint8
    signs: np.ndarray | None = None  # int8 +-1
    weight_scale: float | None = None
    output_scale: float | None = None
    bias: np.ndarray | None = None  # int64, accumulator units
    padding: int = 0


@dataclass(frozen=True)
class Bundle:
    layers: tuple[QuantLayer, ...]
    metadata: dict = field(default_factory=dict)

    def save(self, path: str | Path) -> None:
        doc = {"version": BUNDLE_VERSION, "layers": [], "metadata": self.metadata}
        for layer in self.layers:
            entry: dict = {"kind": layer.kind}
            if layer.magnitudes is not None:
                entry["shape"] = list(layer.magnitudes.shape)
                entry["scale"] = {
                    "weight": layer.weight_scale,
                    "output": layer.output_scale,
                }
                entry["weights_b64"] = base64.b64encode(
                    layer.magnitudes.reshape(-1).astype(np.uint8).tobytes()
                ).decode("ascii")
                entry["signs_b64"] = base64.b64encode(
                    (layer.signs.reshape(-1) < 0).astype(np.uint8).tobytes()
                ).decode("ascii")
                entry["bias"] = [int(v) for v in layer.bias]
                if layer.kind == "conv2d":
                    entry["padding"] = layer.padding
            doc["layers"].append(entry)
        Path(path).write_text(json.dumps(doc, indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "Bundle":
        doc = json.loads(Path(path).read_text())
        if doc.get("version") != BUNDLE_VERSION:
            raise ValueError(f"unsupported bundle version {doc.get('version')!r}")
        layers = []
        for entry in doc["layers"]:
            kind = entry["kind"]
            if "weights_b64" not in entry:
                layers.append(QuantLayer(kind=kind))
                continue
            shape = tuple(entry["shape"])
            mags = np.frombuffer(
                base64.b64decode(entry["weights_b64"]), dtype=np.uint8
            ).reshape(shape).copy()
            neg = np.frombuffer(
                base64.b64decode(entry["signs_b64"]), dtype=np.uint8
            ).reshape(shape)
            layers.append(QuantLayer(
                kind=kind,
                magnitudes=mags,
                signs=np.where(neg, -1, 1).astype(np.int8),
                weight_scale=float(entry["scale"]["weight"]),
                output_scale=float(entry["scale"]["output"]),
                bias=np.asarray(entry["bias"], dtype=np.int64),
                padding=int(entry.get("padding", 0)),
            ))
        return cls(layers=tuple(layers), metadata=doc.get("metadata", {}))


def write_idx(path: str | Path, array: np.ndarray) -> None:
    array = np.asarray(array, dtype=np.uint8)
    if array.ndim == 3:
        magic = IDX_IMAGES_MAGIC
    elif array.ndim == 1:
        magic = IDX_LABELS_MAGIC
    else:
        raise ValueError("IDX arrays must be (N,H,W) images or (N,) labels")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">I", magic))
        fh.write(struct.pack(f">{array.ndim}I", *array.shape))
        fh.write(array.tobytes())


def read_idx(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    (magic,) = struct.unpack(">I", data[:4])
    n_dims = {IDX_IMAGES_MAGIC: 3, IDX_LABELS_MAGIC: 1}[magic]
    dims = struct.unpack(f">{n_dims}I", data[4 : 4 + 4 * n_dims])
    return (
        np.frombuffer(data[4 + 4 * n_dims :], dtype=np.uint8).reshape(dims).copy()
    )


def write_pgm(path: str | Path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())
