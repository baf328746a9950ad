"""Saliency mask representation and 8-bit grayscale PNG I/O.

A mask is a 2-D float64 array with values in [0, 1], one row per image row.
8-bit quantization happens only at the file boundary: loading maps an integer
gray level g to g / 255 exactly, saving maps a value v back to round(v * 255).
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DimensionMismatchError, ValidationError

Mask = np.ndarray


def as_mask(values, *, check_range: bool = True) -> Mask:
    """Coerce `values` to a 2-D float64 mask, validating shape and range."""
    m = np.asarray(values, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValidationError(f"mask must be a non-empty 2-D array, got shape {m.shape}")
    if check_range and (m.min() < 0.0 or m.max() > 1.0):
        raise ValidationError(
            f"mask values must lie in [0, 1], got range [{m.min()}, {m.max()}]"
        )
    return m


def require_same_shape(a: Mask, b: Mask) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"mask shapes differ: {a.shape} vs {b.shape}")


def load_mask(path: str | os.PathLike) -> Mask:
    """Load an 8-bit grayscale (or RGB, averaged over channels) image as a mask.

    Gray level g maps to g / 255. Multi-channel images are reduced by a plain
    channel average before scaling. Higher bit depths are rejected.
    """
    path = Path(path)
    with Image.open(path) as img:
        if img.mode == "L":
            arr = np.asarray(img, dtype=np.float64)
        elif img.mode == "1":
            arr = np.asarray(img.convert("L"), dtype=np.float64)
        elif img.mode in ("P", "RGB", "RGBA", "LA"):
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
            arr = rgb.mean(axis=2)
        else:
            raise ValidationError(
                f"{path}: unsupported image mode {img.mode!r}; expected 8-bit data"
            )
    if arr.size == 0:
        raise ValidationError(f"{path}: zero-sized image")
    return arr / 255.0


def save_mask(mask: Mask, path: str | os.PathLike) -> None:
    """Save a mask as an 8-bit grayscale PNG, quantizing v to round(v * 255)."""
    m = as_mask(mask)
    data = np.rint(m * 255.0).astype(np.uint8)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(data, mode="L").save(path, format="PNG")


def binarize(mask: Mask, threshold: float) -> Mask:
    """Return a {0, 1} mask keeping pixels strictly greater than `threshold`."""
    return (np.asarray(mask, dtype=np.float64) > threshold).astype(np.float64)
