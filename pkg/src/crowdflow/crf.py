"""Grid CRF over orientation labels.

Label 0 is background; label ``k >= 1`` supports the orientation
``labels.orientations[k - 1]``. Nodes are the cells of a MotionField,
numbered row-major, joined to their left/right/top/bottom neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch
from .mvfield import MotionField, wrap_degrees

BACKGROUND = 0


def angular_distance(a, b):
    """Smallest angle in degrees between two orientations, in [0, 180]."""
    d = np.abs(np.asarray(wrap_degrees(a)) - np.asarray(wrap_degrees(b)))
    d = np.minimum(d, 360.0 - d)
    if np.ndim(d) == 0:
        return float(d)
    return d


@dataclass(frozen=True)
class CrfParams:
    tau: float = 1.0
    c1: float = 90.0
    c2: float = 90.0
    c3: float = 0.25

    def __post_init__(self):
        for name in ("tau", "c1", "c2", "c3"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {value}")


@dataclass(frozen=True)
class LabelSet:
    orientations: tuple[float, ...]

    def __post_init__(self):
        wrapped = tuple(float(wrap_degrees(t)) for t in self.orientations)
        if len(set(wrapped)) != len(wrapped):
            raise ValueError(f"label orientations are not distinct: {wrapped}")
        object.__setattr__(self, "orientations", wrapped)

    @classmethod
    def coarse(cls, step: float = 10.0) -> LabelSet:
        count = int(round(360.0 / step))
        if not np.isclose(count * step, 360.0):
            raise ValueError("step must divide 360")
        return cls(tuple(-180.0 + i * step for i in range(1, count + 1)))

    def __len__(self):
        """Total label count K, background included."""
        return 1 + len(self.orientations)

    def orientation(self, label: int) -> float:
        if label == BACKGROUND:
            raise ValueError("background label has no orientation")
        return self.orientations[label - 1]


def grid_edges(height: int, width: int) -> np.ndarray:
    """Undirected 4-neighbour edges as (E, 2) flat node indices.

    Ordered by the lower node row-major; for each node its right edge
    precedes its down edge.
    """
    idx = np.arange(height * width).reshape(height, width)
    right = np.zeros((height, width), dtype=bool)
    right[:, :-1] = True
    down = np.zeros((height, width), dtype=bool)
    down[:-1, :] = True
    src = np.concatenate([idx[right], idx[down]])
    dst = np.concatenate([idx[right] + 1, idx[down] + width])
    kind = np.concatenate([np.zeros(right.sum(), int), np.ones(down.sum(), int)])
    order = np.lexsort((kind, src))
    return np.stack([src[order], dst[order]], axis=1).astype(np.int64)


class CrfProblem:
    """Unary and pairwise potentials for one field and label set."""

    def __init__(self, field: MotionField, labels: LabelSet, params: CrfParams | None = None):
        self.field = field
        self.labels = labels
        self.params = params if params is not None else CrfParams()
        self._mag = field.magnitude.ravel()
        self._theta = field.orientation.ravel()

    @property
    def shape(self):
        return self.field.shape

    @property
    def num_nodes(self) -> int:
        return self.field.width * self.field.height

    @property
    def num_labels(self) -> int:
        return len(self.labels)

    def _node(self, u) -> int:
        if isinstance(u, tuple):
            row, col = u
            if not (0 <= row < self.field.height and 0 <= col < self.field.width):
                raise IndexError(f"node {u} outside grid")
            return row * self.field.width + col
        u = int(u)
        if not 0 <= u < self.num_nodes:
            raise IndexError(f"node {u} outside grid")
        return u

    def unary(self, u, label: int) -> float:
        u = self._node(u)
        p = self.params
        strong = self._mag[u] >= p.tau
        if label == BACKGROUND:
            return p.c1 if strong else 0.0
        if not strong:
            return p.c2
        return angular_distance(self._theta[u], self.labels.orientation(label))

    def pairwise(self, u, v, label_u: int, label_v: int) -> float:
        u, v = self._node(u), self._node(v)
        w = self.field.width
        ru, cu = divmod(u, w)
        rv, cv = divmod(v, w)
        if abs(ru - rv) + abs(cu - cv) != 1:
            raise ValueError(f"nodes {u} and {v} are not 4-neighbours")
        if label_u == label_v:
            return 0.0
        return self.params.c3 * (360.0 - angular_distance(self._theta[u], self._theta[v]))

    @cached_property
    def unary_matrix(self) -> np.ndarray:
        """(N, K) array of unary costs, column k for label k."""
        p = self.params
        strong = self._mag >= p.tau
        n, k = self.num_nodes, self.num_labels
        out = np.empty((n, k), dtype=np.float64)
        out[:, 0] = np.where(strong, p.c1, 0.0)
        if k > 1:
            thetas = np.asarray(self.labels.orientations)
            dist = angular_distance(self._theta[:, None], thetas[None, :])
            out[:, 1:] = np.where(strong[:, None], dist, p.c2)
        out.setflags(write=False)
        return out

    @cached_property
    def edges(self) -> np.ndarray:
        e = grid_edges(self.field.height, self.field.width)
        e.setflags(write=False)
        return e

    @cached_property
    def edge_weights(self) -> np.ndarray:
        """Cost paid on each edge when its endpoints take different labels."""
        e = self.edges
        d = angular_distance(self._theta[e[:, 0]], self._theta[e[:, 1]])
        w = self.params.c3 * (360.0 - np.atleast_1d(d))
        w.setflags(write=False)
        return w

    def check_labeling(self, labeling) -> np.ndarray:
        x = np.asarray(labeling)
        if x.shape != self.shape:
            raise DimensionMismatch(f"labeling has shape {x.shape}, expected {self.shape}")
        if x.size and (x.min() < 0 or x.max() >= self.num_labels):
            raise ValueError("labeling contains labels outside the label set")
        return x.astype(np.int64, copy=False)

    def energy(self, labeling) -> float:
        x = self.check_labeling(labeling).ravel()
        return potts_energy(self.unary_matrix, self.edges, self.edge_weights, x)


def potts_energy(unary, edges, weights, x) -> float:
    """Unary sum plus weighted Potts edge sum, in fixed row-major order."""
    x = np.asarray(x, dtype=np.int64).ravel()
    u = unary[np.arange(len(x)), x]
    if len(edges):
        cut = x[edges[:, 0]] != x[edges[:, 1]]
        p = np.where(cut, weights, 0.0)
    else:
        p = np.zeros(0)
    return float(np.sum(u) + np.sum(p))
