"""Synthetic 12x12 glyph dataset and its binary file format.

Ten fixed digit glyphs are the class templates; samples are drawn by
shifting, pixel-flipping, and intensity-jittering a template.  Everything is
deterministic per seed so experiments replay bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import struct

import numpy as np

from .errors import ValidationError
from .rng import make_rng

GLYPH_SIDE = 12
NUM_CLASSES = 10

# 12x12 two-pixel-stroke digit glyphs; '#' = 1.0, '.' = 0.0
_GLYPH_ART = [
    # 0
    """
    ............
    ..########..
    ..########..
    ..##....##..
    ..##....##..
    ..##....##..
    ..##....##..
    ..##....##..
    ..##....##..
    ..########..
    ..########..
    ............
    """,
    # 1
    """
    ............
    .....##.....
    ....###.....
    ...####.....
    .....##.....
    .....##.....
    .....##.....
    .....##.....
    .....##.....
    ...######...
    ...######...
    ............
    """,
    # 2
    """
    ............
    ..########..
    ..########..
    ........##..
    ........##..
    ..########..
    ..########..
    ..##........
    ..##........
    ..########..
    ..########..
    ............
    """,
    # 3
    """
    ............
    ..########..
    ..########..
    ........##..
    ........##..
    ....######..
    ....######..
    ........##..
    ........##..
    ..########..
    ..########..
    ............
    """,
    # 4
    """
    ............
    ..##....##..
    ..##....##..
    ..##....##..
    ..##....##..
    ..########..
    ..########..
    ........##..
    ........##..
    ........##..
    ........##..
    ............
    """,
    # 5
    """
    ............
    ..########..
    ..########..
    ..##........
    ..##........
    ..########..
    ..########..
    ........##..
    ........##..
    ..########..
    ..########..
    ............
    """,
    # 6
    """
    ............
    ..########..
    ..########..
    ..##........
    ..##........
    ..########..
    ..########..
    ..##....##..
    ..##....##..
    ..########..
    ..########..
    ............
    """,
    # 7
    """
    ............
    ..########..
    ..########..
    ........##..
    .......##...
    ......##....
    .....##.....
    ....##......
    ....##......
    ....##......
    ....##......
    ............
    """,
    # 8
    """
    ............
    ..########..
    ..########..
    ..##....##..
    ..##....##..
    ..########..
    ..########..
    ..##....##..
    ..##....##..
    ..########..
    ..########..
    ............
    """,
    # 9
    """
    ............
    ..########..
    ..########..
    ..##....##..
    ..##....##..
    ..########..
    ..########..
    ........##..
    ........##..
    ..########..
    ..########..
    ............
    """,
]


def _parse_glyph(art: str) -> np.ndarray:
    rows = [line.strip() for line in art.strip().splitlines()]
    if len(rows) != GLYPH_SIDE or any(len(r) != GLYPH_SIDE for r in rows):
        raise ValueError("glyph art must be 12x12")
    return np.array([[1.0 if ch == "#" else 0.0 for ch in row] for row in rows])


GLYPH_TEMPLATES = np.stack([_parse_glyph(a) for a in _GLYPH_ART])


@dataclass
class DatasetConfig:
    n_train: int = 4000
    n_test: int = 1000
    flip_p: float = 0.05
    max_shift: int = 2
    jitter_low: float = 0.8
    jitter_high: float = 1.0

    def validate(self) -> None:
        if self.n_train < 100:
            raise ValidationError(f"n_train must be >= 100, got {self.n_train}")
        if not 0.0 <= self.flip_p <= 1.0:
            raise ValidationError(f"flip_p must be in [0,1], got {self.flip_p}")
        if self.max_shift < 0 or self.max_shift >= GLYPH_SIDE:
            raise ValidationError(f"max_shift out of range: {self.max_shift}")
        if not 0.0 < self.jitter_low <= self.jitter_high <= 1.0:
            raise ValidationError(
                f"jitter range invalid: [{self.jitter_low}, {self.jitter_high}]")


@dataclass
class Dataset:
    """images: (n, 1, 12, 12) float64 in [0,1]; labels: (n,) int64 in [0,10)."""

    images: np.ndarray
    labels: np.ndarray
    split: str = "train"

    def __len__(self) -> int:
        return len(self.labels)

    def validate(self) -> None:
        if len(self.images) != len(self.labels):
            raise ValidationError("images and labels length mismatch")
        if len(self.labels) == 0:
            raise ValidationError("dataset is empty")
        if self.images.min() < 0.0 or self.images.max() > 1.0:
            raise ValidationError("pixel values outside [0,1]")
        if self.labels.min() < 0 or self.labels.max() >= NUM_CLASSES:
            raise ValidationError("labels outside [0,10)")

    def subset(self, idx) -> "Dataset":
        return Dataset(self.images[idx], self.labels[idx], self.split)


def _shift_image(img: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Translate with zero fill (content leaving the frame is cropped)."""
    out = np.zeros_like(img)
    src_y = slice(max(0, -dy), min(GLYPH_SIDE, GLYPH_SIDE - dy))
    src_x = slice(max(0, -dx), min(GLYPH_SIDE, GLYPH_SIDE - dx))
    dst_y = slice(max(0, dy), max(0, dy) + (src_y.stop - src_y.start))
    dst_x = slice(max(0, dx), max(0, dx) + (src_x.stop - src_x.start))
    out[dst_y, dst_x] = img[src_y, src_x]
    return out


def render_sample(label: int, rng: np.random.Generator,
                  cfg: DatasetConfig) -> np.ndarray:
    img = GLYPH_TEMPLATES[label].copy()
    if cfg.max_shift > 0:
        dy, dx = rng.integers(-cfg.max_shift, cfg.max_shift + 1, size=2)
        img = _shift_image(img, int(dy), int(dx))
    if cfg.flip_p > 0:
        flips = rng.random(img.shape) < cfg.flip_p
        img = np.where(flips, 1.0 - img, img)
    if cfg.jitter_high > cfg.jitter_low or cfg.jitter_high < 1.0:
        img = img * rng.uniform(cfg.jitter_low, cfg.jitter_high)
    # quantize to f32 grid so the on-disk format round-trips losslessly
    return img.astype(np.float32).astype(np.float64)


def gen_synthetic_dataset(cfg: DatasetConfig, seed: int, n: int | None = None,
                          split: str = "train") -> Dataset:
    """Balanced glyph dataset; train/test use disjoint derived seeds."""
    cfg.validate()
    if n is None:
        n = cfg.n_train if split == "train" else cfg.n_test
    rng = make_rng(seed, "dataset", split)
    # round-robin labels guarantee balance within one sample per class
    labels = np.array([i % NUM_CLASSES for i in range(n)], dtype=np.int64)
    rng.shuffle(labels)
    images = np.empty((n, 1, GLYPH_SIDE, GLYPH_SIDE))
    for i, label in enumerate(labels):
        images[i, 0] = render_sample(int(label), rng, cfg)
    return Dataset(images, labels, split)


# ---------------------------------------------------------------------------
# binary dataset format: magic "DND1", u32 count/h/w/classes,
# then per sample u8 label + h*w little-endian f32 pixels

_MAGIC = b"DND1"


def save_dataset(ds: Dataset, path: str) -> None:
    ds.validate()
    n = len(ds)
    h, w = ds.images.shape[2], ds.images.shape[3]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIII", n, h, w, NUM_CLASSES))
        for i in range(n):
            fh.write(struct.pack("<B", int(ds.labels[i])))
            fh.write(ds.images[i, 0].astype("<f4").tobytes())


def load_dataset(path: str, split: str = "train") -> Dataset:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValidationError(f"bad dataset magic in {path}: {magic!r}")
        n, h, w, _classes = struct.unpack("<IIII", fh.read(16))
        images = np.empty((n, 1, h, w))
        labels = np.empty(n, dtype=np.int64)
        for i in range(n):
            labels[i] = struct.unpack("<B", fh.read(1))[0]
            pixels = np.frombuffer(fh.read(4 * h * w), dtype="<f4")
            images[i, 0] = pixels.reshape(h, w).astype(np.float64)
    ds = Dataset(images, labels, split)
    ds.validate()
    return ds
