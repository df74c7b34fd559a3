"""Binary PGM (P5) images with an optional JSON sidecar for exact rescaling."""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

_HEADER = re.compile(rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s")


def read_pgm(path) -> np.ndarray:
    """Return the image as a float array in [0, 1], first axis = rows (top first)."""
    raw = Path(path).read_bytes()
    m = _HEADER.match(raw)
    if m is None:
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = (int(g) for g in m.groups())
    dtype = ">u2" if maxval > 255 else "u1"
    img = np.frombuffer(raw, dtype=dtype, count=width * height, offset=m.end())
    return img.reshape(height, width).astype(float) / maxval


def write_pgm(path, img: np.ndarray):
    """Write a uint8 array (rows top first)."""
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(img.tobytes())


def field_to_image(f: np.ndarray) -> np.ndarray:
    """Field ``f[i, j]`` (x right, y up) to image rows (y down)."""
    return np.flipud(np.asarray(f).T)


def image_to_field(img: np.ndarray) -> np.ndarray:
    return np.flipud(np.asarray(img)).T


def emit_pgm(f: np.ndarray, path) -> Path:
    """Save ``f`` linearly mapped from [min, max] to [0, 255].

    A ``<path>.json`` sidecar stores min and max so :func:`load_emitted` can
    undo the mapping up to quantization.
    """
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise ValueError("cannot emit a field with non-finite values")
    lo, hi = float(f.min()), float(f.max())
    constant = hi == lo
    scaled = np.zeros_like(f) if constant else (f - lo) / (hi - lo) * 255.0
    path = Path(path)
    write_pgm(path, np.rint(field_to_image(scaled)))
    sidecar = path.with_suffix(path.suffix + ".json")
    sidecar.write_text(json.dumps({"min": lo, "max": hi, "constant": constant, "shape": list(f.shape)}))
    return path


def load_emitted(path) -> np.ndarray:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    img = image_to_field(read_pgm(path))
    return meta["min"] + img * (meta["max"] - meta["min"])
