"""Navigability grids and the PGM reader."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dynamics import FloatArray

log = logging.getLogger(__name__)

NAVIGABLE_THRESHOLD = 128


class GridFormatError(ValueError):
    """Raised for unreadable or malformed PGM files."""

    def __init__(self, path: Path, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")


@dataclass(frozen=True, eq=False)
class GridMap:
    """Boolean grid; row 0 is the lowest y, column 0 the lowest x."""

    cells: np.ndarray
    resolution: float
    origin: tuple[float, float] = (0.0, 0.0)

    @property
    def shape(self) -> tuple[int, int]:
        """(rows, cols)."""
        return int(self.cells.shape[0]), int(self.cells.shape[1])

    def lookup(self, xs: FloatArray, ys: FloatArray, outside: bool = False) -> np.ndarray:
        """Cell values at world coordinates; points off the grid read as ``outside``."""
        cols = np.floor((np.asarray(xs) - self.origin[0]) / self.resolution).astype(int)
        rows = np.floor((np.asarray(ys) - self.origin[1]) / self.resolution).astype(int)
        rows_n, cols_n = self.shape
        inside = (rows >= 0) & (rows < rows_n) & (cols >= 0) & (cols < cols_n)
        out = np.full(np.shape(cols), outside, dtype=bool)
        out[inside] = self.cells[rows[inside], cols[inside]]
        return out

    def value_at(self, x: float, y: float, outside: bool = False) -> bool:
        """Single-point :meth:`lookup`."""
        return bool(self.lookup(np.array([x]), np.array([y]), outside)[0])


def _pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            break
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path: Path) -> np.ndarray:
    """Read a P2 (ASCII) or P5 (binary, 8-bit) greymap as a uint8 array, top row first."""
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise GridFormatError(path, f"cannot read: {exc}") from exc
    header, pos = _pgm_tokens(data, 4)
    if len(header) < 4 or header[0] not in (b"P2", b"P5"):
        raise GridFormatError(path, "not a P2/P5 PGM file")
    try:
        width, height, maxval = int(header[1]), int(header[2]), int(header[3])
    except ValueError as exc:
        raise GridFormatError(path, "bad PGM header") from exc
    if width <= 0 or height <= 0 or not 0 < maxval < 256:
        raise GridFormatError(path, f"unsupported size {width}x{height} / maxval {maxval}")

    if header[0] == b"P5":
        raster = data[pos + 1 : pos + 1 + width * height]
        if len(raster) != width * height:
            raise GridFormatError(path, f"expected {width * height} bytes of raster, got {len(raster)}")
        values = np.frombuffer(raster, dtype=np.uint8)
    else:
        tokens, _ = _pgm_tokens(data[pos:], width * height)
        if len(tokens) != width * height:
            raise GridFormatError(path, f"expected {width * height} samples, got {len(tokens)}")
        try:
            values = np.array([int(t) for t in tokens], dtype=np.int64)
        except ValueError as exc:
            raise GridFormatError(path, "non-numeric sample") from exc
        if values.min() < 0 or values.max() > maxval:
            raise GridFormatError(path, "sample outside 0..maxval")
    scaled = values.astype(np.float64) * (255.0 / maxval)
    return np.rint(scaled).astype(np.uint8).reshape(height, width)


def load_navigability(path: Path, resolution: float, origin: tuple[float, float] = (0.0, 0.0)) -> GridMap:
    """Navigability grid from a PGM: values ≥ 128 are navigable."""
    image = read_pgm(path)
    cells = np.flipud(image >= NAVIGABLE_THRESHOLD)
    log.debug("Loaded navigability map %s (%dx%d, %.2f m/cell)", path.name, cells.shape[1], cells.shape[0], resolution)
    return GridMap(cells=np.ascontiguousarray(cells), resolution=resolution, origin=origin)
