import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from approxmul.dataio import (
    IDX_IMAGES_MAGIC,
    IDX_LABELS_MAGIC,
    FormatError,
    read_idx,
    read_pgm,
    write_idx,
    write_pgm,
)


def test_idx_images_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    imgs = rng.integers(0, 256, size=(5, 4, 3), dtype=np.uint8)
    path = tmp_path / "imgs.idx"
    write_idx(path, imgs)
    assert np.array_equal(read_idx(path), imgs)
    header = path.read_bytes()[:16]
    assert struct.unpack(">IIII", header) == (IDX_IMAGES_MAGIC, 5, 4, 3)


def test_idx_labels_round_trip(tmp_path):
    labels = np.array([0, 1, 9, 255], dtype=np.uint8)
    path = tmp_path / "labels.idx"
    write_idx(path, labels)
    assert np.array_equal(read_idx(path), labels)
    assert struct.unpack(">II", path.read_bytes()[:8]) == (IDX_LABELS_MAGIC, 4)


@settings(max_examples=20, deadline=None)
@given(
    hnp.arrays(np.uint8, hnp.array_shapes(min_dims=3, max_dims=3, max_side=6))
)
def test_idx_round_trip_property(tmp_path_factory, imgs):
    path = tmp_path_factory.mktemp("idx") / "a.idx"
    write_idx(path, imgs)
    assert np.array_equal(read_idx(path), imgs)


def test_idx_rejects_bad_rank():
    with pytest.raises(FormatError):
        write_idx("/dev/null", np.zeros((2, 2), dtype=np.uint8))


def test_idx_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.idx"
    path.write_bytes(struct.pack(">I", 0xDEADBEEF) + b"\x00" * 12)
    with pytest.raises(FormatError):
        read_idx(path)


def test_idx_rejects_truncation(tmp_path):
    path = tmp_path / "trunc.idx"
    path.write_bytes(struct.pack(">II", IDX_LABELS_MAGIC, 10) + b"\x01" * 3)
    with pytest.raises(FormatError):
        read_idx(path)
    path.write_bytes(b"\x00\x00")
    with pytest.raises(FormatError):
        read_idx(path)


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, size=(7, 9), dtype=np.uint8)
    path = tmp_path / "img.pgm"
    write_pgm(path, img)
    assert np.array_equal(read_pgm(path), img)
    assert path.read_bytes().startswith(b"P5\n9 7\n255\n")


def test_pgm_reads_comments(tmp_path):
    img = np.arange(6, dtype=np.uint8).reshape(2, 3)
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# a comment line\n3 2\n# another\n255\n" + img.tobytes())
    assert np.array_equal(read_pgm(path), img)


def test_pgm_rejects_wrong_magic(tmp_path):
    path = tmp_path / "p2.pgm"
    path.write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")
    with pytest.raises(FormatError):
        read_pgm(path)


def test_pgm_rejects_wrong_maxval(tmp_path):
    path = tmp_path / "m.pgm"
    path.write_bytes(b"P5\n2 2\n65535\n" + b"\x00" * 8)
    with pytest.raises(FormatError):
        read_pgm(path)


def test_pgm_rejects_truncated_pixels(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n4 4\n255\n" + b"\x00" * 5)
    with pytest.raises(FormatError):
        read_pgm(path)


def test_pgm_rejects_non_2d():
    with pytest.raises(FormatError):
        write_pgm("/dev/null", np.zeros((2, 2, 2), dtype=np.uint8))
