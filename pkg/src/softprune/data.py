"""MNIST IDX image loading and a synthetic stand-in for tests."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BoundsError, DataIOError, FormatError, LengthError

IDX3_UBYTE_MAGIC = 0x00000803


@dataclass(frozen=True)
class ImageSet:
    """Flattened grayscale images, one row per image, values in [0, 1]."""

    images: np.ndarray
    height: int = 28
    width: int = 28

    def __post_init__(self):
        imgs = np.asarray(self.images, dtype=np.float64)
        if imgs.ndim != 2 or imgs.shape[1] != self.height * self.width:
            raise FormatError(
                f"images must have shape (n, {self.height * self.width}), got {imgs.shape}"
            )
        if imgs.size and (imgs.min() < 0.0 or imgs.max() > 1.0):
            raise FormatError("image values must lie in [0, 1]")
        imgs.setflags(write=False)
        object.__setattr__(self, "images", imgs)

    def __len__(self):
        return self.images.shape[0]


def parse_idx_images(buf: bytes) -> ImageSet:
    if len(buf) < 16:
        raise LengthError(f"IDX header needs 16 bytes, got {len(buf)}")
    magic, count, rows, cols = struct.unpack(">4I", buf[:16])
    if magic != IDX3_UBYTE_MAGIC:
        raise FormatError(
            f"magic number 0x{magic:08x} is not an IDX3 unsigned-byte image file "
            f"(expected 0x{IDX3_UBYTE_MAGIC:08x})"
        )
    expected = count * rows * cols
    actual = len(buf) - 16
    if actual != expected:
        raise LengthError(f"expected {expected} pixel bytes, found {actual}")
    pixels = np.frombuffer(buf, dtype=np.uint8, offset=16).reshape(count, rows * cols)
    return ImageSet(pixels / 255.0, rows, cols)


def load_idx_images(path) -> ImageSet:
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return parse_idx_images(buf)
    except FormatError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def idx_bytes(images: ImageSet) -> bytes:
    """Encode as IDX3; values are quantized with round(255 * v)."""
    pixels = np.rint(images.images * 255.0).astype(np.uint8)
    header = struct.pack(">4I", IDX3_UBYTE_MAGIC, len(images), images.height, images.width)
    return header + pixels.tobytes()


def write_idx_images(images: ImageSet, path) -> None:
    Path(path).write_bytes(idx_bytes(images))


def synthetic_images(n: int, seed: int = 0, height: int = 28, width: int = 28) -> ImageSet:
    """Seeded images made of one to three soft-edged axis-aligned rectangles."""
    if n < 1:
        raise BoundsError("synthetic_images needs n >= 1")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    out = np.zeros((n, height, width))
    for i in range(n):
        for _ in range(rng.integers(1, 4)):
            y0, x0 = rng.integers(2, height - 8), rng.integers(2, width - 8)
            h, w = rng.integers(3, 10), rng.integers(3, 10)
            level = rng.uniform(0.5, 1.0)
            blob = (yy >= y0) & (yy < y0 + h) & (xx >= x0) & (xx < x0 + w)
            out[i] = np.maximum(out[i], level * blob)
    # blur a little so the blobs are not pure step edges
    out = (out + np.roll(out, 1, 1) + np.roll(out, -1, 1) + np.roll(out, 1, 2) + np.roll(out, -1, 2)) / 5
    return ImageSet(np.clip(out.reshape(n, -1), 0.0, 1.0), height, width)


def split_eval_subset(images: ImageSet, k: int) -> ImageSet:
    """First ``k`` images in stored order."""
    if k < 1 or k > len(images):
        raise BoundsError(f"evaluation subset size {k} outside [1, {len(images)}]")
    return ImageSet(images.images[:k], images.height, images.width)
