"""File formats for fixtures: IDX (MNIST-style) and binary PGM (P5)."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class FormatError(ValueError):
    pass


def read_idx(path: str | Path) -> np.ndarray:
    """Read an IDX file: images (magic 0x803) as uint8 (N,H,W), labels
    (magic 0x801) as uint8 (N,)."""
    data = Path(path).read_bytes()
    if len(data) < 4:
        raise FormatError(f"{path}: truncated IDX header")
    (magic,) = struct.unpack(">I", data[:4])
    if magic == IDX_IMAGES_MAGIC:
        n_dims = 3
    elif magic == IDX_LABELS_MAGIC:
        n_dims = 1
    else:
        raise FormatError(f"{path}: unexpected IDX magic 0x{magic:08x}")
    header_len = 4 + 4 * n_dims
    if len(data) < header_len:
        raise FormatError(f"{path}: truncated IDX dimensions")
    dims = struct.unpack(f">{n_dims}I", data[4:header_len])
    count = int(np.prod(dims))
    body = data[header_len:]
    if len(body) != count:
        raise FormatError(f"{path}: expected {count} bytes of data, got {len(body)}")
    return np.frombuffer(body, dtype=np.uint8).reshape(dims).copy()


def write_idx(path: str | Path, array: np.ndarray) -> None:
    array = np.asarray(array, dtype=np.uint8)
    if array.ndim == 3:
        magic = IDX_IMAGES_MAGIC
    elif array.ndim == 1:
        magic = IDX_LABELS_MAGIC
    else:
        raise FormatError("IDX arrays must be (N,H,W) images or (N,) labels")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">I", magic))
        fh.write(struct.pack(f">{array.ndim}I", *array.shape))
        fh.write(array.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary (P5) PGM with maxval 255 into a uint8 (H, W) array."""
    data = Path(path).read_bytes()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4 and pos < len(data):
        # skip whitespace and comment lines between header tokens
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if len(tokens) != 4 or tokens[0] != b"P5":
        raise FormatError(f"{path}: not a binary P5 PGM")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace after maxval
    body = data[pos : pos + width * height]
    if len(body) != width * height:
        raise FormatError(f"{path}: truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path: str | Path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise FormatError("PGM images must be 2-D")
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())
