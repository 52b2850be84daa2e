"""Mean motion-vector fields built from per-frame block motion vectors.

Grids are indexed in units of 4x4-pixel blocks. Vector components are in
full pixels per frame; quarter-pel codec values must be divided by 4 by
whoever produces the input files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CountMismatch,
    DimensionMismatch,
    HeaderError,
    OutOfBounds,
    OverlapError,
    ParseError,
)

LEGAL_EXTENTS = (1, 2, 4)


def wrap_degrees(angle):
    """Wrap angles (scalar or array) into (-180, 180]."""
    wrapped = 180.0 - np.mod(180.0 - np.asarray(angle, dtype=float), 360.0)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class BlockMotionRecord:
    frame_index: int
    block_x: int
    block_y: int
    block_w: int
    block_h: int
    dx: float
    dy: float


@dataclass(frozen=True, eq=False)
class MotionField:
    """Dense mean motion field; ``mv`` has shape (height, width, 2)."""

    width: int
    height: int
    mv: np.ndarray

    def __post_init__(self):
        mv = np.array(self.mv, dtype=np.float64)
        if mv.shape != (self.height, self.width, 2):
            raise DimensionMismatch(
                f"mv has shape {mv.shape}, expected {(self.height, self.width, 2)}"
            )
        if not np.all(np.isfinite(mv)):
            raise ValueError("motion vectors must be finite")
        mv.setflags(write=False)
        object.__setattr__(self, "mv", mv)

    @classmethod
    def from_array(cls, mv) -> MotionField:
        mv = np.asarray(mv, dtype=np.float64)
        if mv.ndim != 3 or mv.shape[2] != 2:
            raise DimensionMismatch(f"expected (H, W, 2) array, got {mv.shape}")
        return cls(width=mv.shape[1], height=mv.shape[0], mv=mv)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.mv[..., 0], self.mv[..., 1])

    @property
    def orientation(self) -> np.ndarray:
        """Per-cell angle of the mean vector in degrees, (-180, 180]; 0 for zero vectors."""
        dx = self.mv[..., 0]
        dy = self.mv[..., 1]
        theta = wrap_degrees(np.degrees(np.arctan2(dy, dx)))
        theta = np.asarray(theta, dtype=float).reshape(dx.shape)
        theta[(dx == 0.0) & (dy == 0.0)] = 0.0
        return theta

    def __eq__(self, other):
        if not isinstance(other, MotionField):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.mv, other.mv)

    __hash__ = None


def replicate(records, width: int, height: int, frame_count: int) -> np.ndarray:
    """Expand partition records onto per-frame dense grids.

    Returns an array of shape (frame_count, height, width, 2). Cells no record
    covers stay at zero motion.
    """
    if frame_count < 1:
        raise ValueError("frame_count must be >= 1")
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be positive")
    grids = np.zeros((frame_count, height, width, 2), dtype=np.float64)
    covered = np.zeros((frame_count, height, width), dtype=bool)
    for n, rec in enumerate(records):
        if rec.block_w not in LEGAL_EXTENTS or rec.block_h not in LEGAL_EXTENTS:
            raise ValueError(
                f"record {n}: extent {rec.block_w}x{rec.block_h} is not a legal partition"
            )
        if not 0 <= rec.frame_index < frame_count:
            raise OutOfBounds(f"record {n}: frame {rec.frame_index} outside [0, {frame_count})")
        x0, y0 = rec.block_x, rec.block_y
        x1, y1 = x0 + rec.block_w, y0 + rec.block_h
        if x0 < 0 or y0 < 0 or x1 > width or y1 > height:
            raise OutOfBounds(
                f"record {n}: cells x[{x0},{x1}) y[{y0},{y1}) exceed {width}x{height} grid"
            )
        cover = covered[rec.frame_index, y0:y1, x0:x1]
        if cover.any():
            raise OverlapError(f"record {n}: overlaps an earlier record in frame {rec.frame_index}")
        cover[...] = True
        grids[rec.frame_index, y0:y1, x0:x1] = (rec.dx, rec.dy)
    return grids


def temporal_mean(frames) -> MotionField:
    """Component-wise mean over frames; orientation comes from the mean vector."""
    frames = [np.asarray(f, dtype=np.float64) for f in frames]
    if not frames:
        raise ValueError("need at least one frame")
    shape = frames[0].shape
    if len(shape) != 3 or shape[2] != 2:
        raise DimensionMismatch(f"frame has shape {shape}, expected (H, W, 2)")
    for i, f in enumerate(frames[1:], start=1):
        if f.shape != shape:
            raise DimensionMismatch(f"frame {i} has shape {f.shape}, expected {shape}")
    total = np.zeros(shape, dtype=np.float64)
    for f in frames:
        total += f
    return MotionField.from_array(total / len(frames))


def mean_field_from_records(records, width, height, frame_count) -> MotionField:
    return temporal_mean(replicate(records, width, height, frame_count))


# --- MVF1 / FMV1 text formats ------------------------------------------------


def _data_lines(text):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [(i + 1, line.strip()) for i, line in enumerate(lines)]


def _parse_header(lineno, line, magic, n_ints):
    parts = line.split()
    if not parts or parts[0] != magic:
        raise HeaderError(f"expected '{magic}' header, got {line[:20]!r}", lineno)
    if len(parts) != n_ints + 1:
        raise HeaderError(f"'{magic}' header needs {n_ints} integers", lineno)
    try:
        values = [int(p) for p in parts[1:]]
    except ValueError:
        raise HeaderError("header fields must be integers", lineno) from None
    if any(v < 1 for v in values):
        raise HeaderError("header fields must be positive", lineno)
    return values


def parse_mean_field(text: str) -> MotionField:
    lines = _data_lines(text)
    if not lines:
        raise HeaderError("empty input", 1)
    width, height = _parse_header(*lines[0], "MVF1", 2)
    body = lines[1:]
    # tolerate trailing blank lines only
    while body and body[-1][1] == "":
        body.pop()
    if len(body) != width * height:
        raise CountMismatch(
            f"header declares {width * height} cells, found {len(body)} data lines",
            lines[-1][0] if body else lines[0][0],
        )
    mv = np.empty((width * height, 2), dtype=np.float64)
    for k, (lineno, line) in enumerate(body):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected '<dx> <dy>', got {line!r}", lineno)
        try:
            mv[k] = (float(parts[0]), float(parts[1]))
        except ValueError:
            raise ParseError(f"non-numeric value in {line!r}", lineno) from None
        if not np.all(np.isfinite(mv[k])):
            raise ParseError("non-finite motion vector", lineno)
    return MotionField(width=width, height=height, mv=mv.reshape(height, width, 2))


def format_mean_field(field: MotionField) -> str:
    out = [f"MVF1 {field.width} {field.height}"]
    for dx, dy in field.mv.reshape(-1, 2):
        out.append(f"{float(dx)!r} {float(dy)!r}")
    return "\n".join(out) + "\n"


def load_mean_field(path) -> MotionField:
    return parse_mean_field(Path(path).read_text(encoding="ascii"))


def save_mean_field(field: MotionField, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_mean_field(field))


def parse_frame_records(text: str):
    """Parse FMV1 text into ``(records, width, height, frame_count)``."""
    lines = _data_lines(text)
    if not lines:
        raise HeaderError("empty input", 1)
    width, height, frame_count = _parse_header(*lines[0], "FMV1", 3)
    records = []
    for lineno, line in lines[1:]:
        if not line:
            continue
        parts = line.split()
        if len(parts) != 7:
            raise CountMismatch(f"record needs 7 fields, got {len(parts)}", lineno)
        try:
            ints = [int(p) for p in parts[:5]]
            dx, dy = float(parts[5]), float(parts[6])
        except ValueError:
            raise ParseError(f"bad record {line!r}", lineno) from None
        if not (np.isfinite(dx) and np.isfinite(dy)):
            raise ParseError("non-finite motion vector", lineno)
        records.append(BlockMotionRecord(*ints, dx, dy))
    return records, width, height, frame_count


def load_frame_records(path):
    return parse_frame_records(Path(path).read_text(encoding="ascii"))


def format_frame_records(records, width, height, frame_count) -> str:
    out = [f"FMV1 {width} {height} {frame_count}"]
    for r in records:
        out.append(
            f"{r.frame_index} {r.block_x} {r.block_y} {r.block_w} {r.block_h} "
            f"{float(r.dx)!r} {float(r.dy)!r}"
        )
    return "\n".join(out) + "\n"
