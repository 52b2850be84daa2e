"""Synthetic motion fields with known flow ground truth.

Noise is drawn with an explicit recipe so output is reproducible across
numpy versions: raw 64-bit words from PCG64(seed), top 53 bits mapped to
(0, 1], then Box-Muller. Each node consumes three words in row-major order:
two for the (dx, dy) noise pair, one for the background drift direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfBounds, OverlapError, ParseError
from .mvfield import MotionField


@dataclass(frozen=True)
class Lane:
    x: int
    y: int
    w: int
    h: int
    orientation: float
    magnitude: float

    def mask(self, height, width):
        if self.w < 1 or self.h < 1:
            raise ValueError("lane extent must be positive")
        if self.x < 0 or self.y < 0 or self.x + self.w > width or self.y + self.h > height:
            raise OutOfBounds(f"lane {self} exceeds {width}x{height} grid")
        m = np.zeros((height, width), dtype=bool)
        m[self.y : self.y + self.h, self.x : self.x + self.w] = True
        return m

    def vectors(self, height, width):
        t = math.radians(self.orientation)
        out = np.empty((height, width, 2))
        out[..., 0] = self.magnitude * math.cos(t)
        out[..., 1] = self.magnitude * math.sin(t)
        return out


@dataclass(frozen=True)
class Ring:
    """Annulus of circulating motion; ``ccw`` rotates the radial direction by +90 degrees."""

    cx: float
    cy: float
    r_inner: float
    r_outer: float
    direction: str
    magnitude: float

    def _radial(self, height, width):
        rows, cols = np.mgrid[0:height, 0:width]
        return cols + 0.5 - self.cx, rows + 0.5 - self.cy

    def mask(self, height, width):
        if not 0 <= self.r_inner < self.r_outer:
            raise ValueError("ring needs 0 <= r_inner < r_outer")
        if self.direction not in ("ccw", "cw"):
            raise ValueError(f"ring direction must be 'ccw' or 'cw', got {self.direction!r}")
        if (
            self.cx - self.r_outer < 0
            or self.cy - self.r_outer < 0
            or self.cx + self.r_outer > width
            or self.cy + self.r_outer > height
        ):
            raise OutOfBounds(f"ring {self} exceeds {width}x{height} grid")
        rx, ry = self._radial(height, width)
        r = np.hypot(rx, ry)
        return (r >= self.r_inner) & (r <= self.r_outer)

    def vectors(self, height, width):
        rx, ry = self._radial(height, width)
        r = np.hypot(rx, ry)
        r[r == 0] = 1.0
        sign = 1.0 if self.direction == "ccw" else -1.0
        out = np.empty((height, width, 2))
        out[..., 0] = -sign * ry / r * self.magnitude
        out[..., 1] = sign * rx / r * self.magnitude
        return out


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    primitives: tuple = field(default_factory=tuple)
    noise_std: float = 0.0
    background_level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")
        if self.noise_std < 0 or self.background_level < 0:
            raise ValueError("noise_std and background_level must be >= 0")
        object.__setattr__(self, "primitives", tuple(self.primitives))


def uniform_open(seed: int, count: int) -> np.ndarray:
    """``count`` doubles in (0, 1] from the top 53 bits of PCG64 words."""
    raw = np.random.PCG64(seed).random_raw(count)
    return ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def generate(spec: SceneSpec):
    """Return ``(field, ground_truth)``; GT label i marks primitive i (1-based)."""
    h, w = spec.height, spec.width
    gt = np.zeros((h, w), dtype=np.int64)
    mv = np.zeros((h, w, 2))
    for i, prim in enumerate(spec.primitives, start=1):
        m = prim.mask(h, w)
        if np.any(gt[m] != 0):
            raise OverlapError(f"primitive {i} overlaps an earlier primitive")
        gt[m] = i
        mv[m] = prim.vectors(h, w)[m]

    u = uniform_open(spec.seed, 3 * h * w).reshape(h, w, 3)
    if spec.background_level > 0:
        phi = 2.0 * np.pi * u[..., 2]
        bg = gt == 0
        mv[bg, 0] = spec.background_level * np.cos(phi[bg])
        mv[bg, 1] = spec.background_level * np.sin(phi[bg])
    if spec.noise_std > 0:
        radius = np.sqrt(-2.0 * np.log(u[..., 0]))
        angle = 2.0 * np.pi * u[..., 1]
        mv[..., 0] += spec.noise_std * radius * np.cos(angle)
        mv[..., 1] += spec.noise_std * radius * np.sin(angle)
    return MotionField.from_array(mv), gt


# --- key-value scene files ----------------------------------------------------
#
#   width = 120
#   height = 90
#   noise_std = 0.5
#   seed = 7
#   lane = <x> <y> <w> <h> <orientation_deg> <magnitude>
#   ring = <cx> <cy> <r_inner> <r_outer> <ccw|cw> <magnitude>


def parse_scene(text: str) -> SceneSpec:
    scalars = {}
    prims = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        parts = value.split()
        try:
            if key == "lane":
                if len(parts) != 6:
                    raise ParseError("lane needs 6 values", lineno)
                x, y, w, h = (int(p) for p in parts[:4])
                prims.append(Lane(x, y, w, h, float(parts[4]), float(parts[5])))
            elif key == "ring":
                if len(parts) != 6:
                    raise ParseError("ring needs 6 values", lineno)
                cx, cy, ri, ro = (float(p) for p in parts[:4])
                prims.append(Ring(cx, cy, ri, ro, parts[4], float(parts[5])))
            elif key in ("width", "height", "seed"):
                scalars[key] = int(value)
            elif key in ("noise_std", "background_level"):
                scalars[key] = float(value)
            else:
                raise ParseError(f"unknown key {key!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad value for {key}: {value!r}", lineno) from None
    for required in ("width", "height"):
        if required not in scalars:
            raise ParseError(f"missing required key {required!r}")
    return SceneSpec(primitives=tuple(prims), **scalars)


def two_lane_scene(seed: int = 0, noise_std: float = 0.5) -> SceneSpec:
    """Two touching, opposite horizontal lanes on a 120x90 grid."""
    return SceneSpec(
        width=120,
        height=90,
        primitives=(Lane(10, 15, 100, 30, 0.0, 4.0), Lane(10, 45, 100, 30, 180.0, 4.0)),
        noise_std=noise_std,
        seed=seed,
    )


def ring_scene(seed: int = 0, noise_std: float = 0.5) -> SceneSpec:
    return SceneSpec(
        width=120,
        height=90,
        primitives=(Ring(60.0, 45.0, 20.0, 38.0, "ccw", 4.0),),
        noise_std=noise_std,
        seed=seed,
    )
