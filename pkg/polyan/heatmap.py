"""Binary portable pixmap (P6) output of |values|."""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np

from .errors import IoError, PreconditionViolation
from .tools.harmonic import GridField


def grayscale(values: np.ndarray) -> np.ndarray:
    """uint8 image of |values|, linear over [min, max]; NaN and constant fields map to 0."""
    mag = np.abs(np.asarray(values))
    finite = np.isfinite(mag)
    if not finite.any():
        raise PreconditionViolation("heatmap of an empty field")
    lo, hi = float(mag[finite].min()), float(mag[finite].max())
    out = np.zeros(mag.shape, dtype=np.uint8)
    if hi > lo:
        scaled = np.rint(255.0 * (mag[finite] - lo) / (hi - lo))
        out[finite] = np.clip(scaled, 0, 255).astype(np.uint8)
    return out


def encode_ppm(values: np.ndarray) -> bytes:
    gray = grayscale(values)
    rows, cols = gray.shape
    header = f"P6\n{cols} {rows}\n255\n".encode("ascii")
    return header + np.repeat(gray[..., None], 3, axis=2).tobytes()


def emit_heatmap(field: Union[GridField, np.ndarray], path: Union[str, Path]) -> None:
    """One pixel per node, highest y in the top row.

    Plain arrays are taken as already in image order (row 0 on top); lattice
    fields store row 0 at the lowest y and are flipped.
    """
    values = field.values[::-1] if isinstance(field, GridField) else field
    data = encode_ppm(values)
    try:
        Path(path).write_bytes(data)
    except OSError as e:
        raise IoError("cannot write heatmap", {"path": str(path), "reason": str(e)}) from e
