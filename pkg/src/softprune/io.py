"""Model files, PGM image grids, CSV tables and JSON reports.

Model file layout (all integers little-endian)::

    8 bytes   magic b"SPRUNEAE"
    u32       format version (1)
    u64       seed
    u32       input_dim, u32 len(hidden_dims), u32 * hidden_dims, u32 latent_dim
    u32       layer count L
    L times   u32 out_width, u32 in_width, u8 activation code
    float64   per layer: weights (row-major) then bias, little-endian

The architecture block is always the baseline architecture; the per-layer
widths may be smaller for a pruned model.
"""

from __future__ import annotations

import csv
import json
import re
import struct
from pathlib import Path

import numpy as np

from .errors import DataIOError, FormatError, LengthError
from .nn import ACTIVATIONS, ArchSpec, Autoencoder, DenseLayer

MODEL_MAGIC = b"SPRUNEAE"
MODEL_VERSION = 1


def model_bytes(model: Autoencoder, seed: int = 0) -> bytes:
    arch = model.arch
    parts = [MODEL_MAGIC, struct.pack("<IQ", MODEL_VERSION, seed)]
    parts.append(struct.pack(f"<II{len(arch.hidden_dims)}III", arch.input_dim, len(arch.hidden_dims),
                             *arch.hidden_dims, arch.latent_dim, len(model.layers)))
    for layer in model.layers:
        parts.append(struct.pack("<IIB", layer.out_width, layer.in_width,
                                 ACTIVATIONS.index(layer.activation)))
    for layer in model.layers:
        parts.append(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, buf):
        self.buf, self.pos = buf, 0

    def take(self, fmt):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.buf):
            raise LengthError(f"model file truncated at byte {self.pos}")
        out = struct.unpack_from(fmt, self.buf, self.pos)
        self.pos += size
        return out


def parse_model(buf: bytes) -> tuple[Autoencoder, int]:
    if buf[:8] != MODEL_MAGIC:
        raise FormatError("not a model file (bad magic)")
    r = _Reader(buf)
    r.pos = 8
    version, seed = r.take("<IQ")
    if version != MODEL_VERSION:
        raise FormatError(f"unsupported model format version {version}")
    input_dim, n_hidden = r.take("<II")
    hidden = r.take(f"<{n_hidden}I")
    latent, n_layers = r.take("<II")
    shapes = [r.take("<IIB") for _ in range(n_layers)]
    expected = sum(8 * (o * i + o) for o, i, _ in shapes)
    if len(buf) - r.pos != expected:
        raise LengthError(f"expected {expected} parameter bytes, found {len(buf) - r.pos}")
    params = np.frombuffer(buf, dtype="<f8", offset=r.pos).astype(np.float64)
    layers, pos = [], 0
    for out_w, in_w, act in shapes:
        if act >= len(ACTIVATIONS):
            raise FormatError(f"unknown activation code {act}")
        w = params[pos:pos + out_w * in_w].reshape(out_w, in_w).copy()
        pos += out_w * in_w
        b = params[pos:pos + out_w].copy()
        pos += out_w
        layers.append(DenseLayer(w, b, ACTIVATIONS[act]))
    arch = ArchSpec(input_dim, tuple(hidden), latent)
    return Autoencoder(layers, arch), seed


def save_model(model: Autoencoder, path, seed: int = 0) -> None:
    _write(path, model_bytes(model, seed))


def load_model(path) -> tuple[Autoencoder, int]:
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise DataIOError(f"cannot read model file {path}: {exc.strerror or exc}") from exc
    try:
        return parse_model(buf)
    except FormatError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def _write(path, data: bytes | str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, str):
            path.write_text(data)
        else:
            path.write_bytes(data)
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def image_grid(originals, reconstructions, height: int = 28, width: int = 28) -> np.ndarray:
    """Two-row uint8 mosaic: originals on top, reconstructions below."""
    a = np.asarray(originals, dtype=np.float64)
    b = np.asarray(reconstructions, dtype=np.float64)
    if a.shape != b.shape:
        raise FormatError(f"{len(a)} originals vs {len(b)} reconstructions")
    n = a.shape[0]

    def row(x):
        tiles = np.clip(x, 0.0, 1.0).reshape(n, height, width)
        return np.concatenate(list(tiles), axis=1)

    grid = np.concatenate([row(a), row(b)], axis=0)
    return np.rint(255.0 * grid).astype(np.uint8)


def pgm_bytes(pixels: np.ndarray) -> bytes:
    h, w = pixels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.astype(np.uint8).tobytes()


def read_pgm(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", buf)
    if m is None or int(m.group(3)) != 255:
        raise FormatError(f"{path}: not an 8-bit binary PGM")
    w, h = int(m.group(1)), int(m.group(2))
    return np.frombuffer(buf, dtype=np.uint8, offset=m.end()).reshape(h, w)


def write_image_grid(originals, reconstructions, path, height: int = 28, width: int = 28) -> None:
    _write(path, pgm_bytes(image_grid(originals, reconstructions, height, width)))


def write_json(obj, path) -> None:
    _write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(rows, header, path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as f:
            out = csv.writer(f)
            out.writerow(header)
            out.writerows(rows)
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc.strerror or exc}") from exc
