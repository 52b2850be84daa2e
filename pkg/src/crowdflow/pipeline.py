"""Coarse-to-fine orientation segmentation and boundary-gradient merging."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .crf import BACKGROUND, CrfParams, CrfProblem, LabelSet, angular_distance
from .errors import DegenerateMean, NoQualifyingSegments
from .mvfield import MotionField, wrap_degrees
from .solver import SolverReport, minimize

COARSE_STEP = 10.0
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


def default_size_thresh(num_nodes: int) -> int:
    return max(16, int(np.ceil(0.001 * num_nodes)))


@dataclass(frozen=True)
class PipelineConfig:
    params: CrfParams = field(default_factory=CrfParams)
    # None -> default_size_thresh(grid nodes)
    size_thresh: int | None = None
    merge_thresh: float = 45.0
    coarse_step: float = COARSE_STEP

    def __post_init__(self):
        if self.size_thresh is not None and self.size_thresh < 1:
            raise ValueError("size_thresh must be >= 1")
        if not 0.0 < self.merge_thresh <= 180.0:
            raise ValueError("merge_thresh must lie in (0, 180]")

    def size_thresh_for(self, field: MotionField) -> int:
        if self.size_thresh is not None:
            return self.size_thresh
        return default_size_thresh(field.width * field.height)


@dataclass
class Segment:
    id: int
    label: int
    mask: np.ndarray
    mean_orientation: float | None = None

    @property
    def size(self) -> int:
        return int(self.mask.sum())


@dataclass
class Flow:
    """Merged flow; ``orientation`` is nan when member directions cancel (closed rings)."""

    id: int
    mask: np.ndarray
    orientation: float
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(self.mask.sum())


@dataclass
class StageResult:
    labeling: np.ndarray
    segments: list[Segment]
    report: SolverReport | None
    labels: LabelSet


@dataclass
class FlowResult:
    flows: list[Flow]
    coarse: StageResult | None = None
    fine: StageResult | None = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def energies(self) -> dict[str, float]:
        out = {}
        for name, stage in (("coarse", self.coarse), ("fine", self.fine)):
            if stage is not None and stage.report is not None:
                out[name] = stage.report.energy
        return out

    def label_map(self, shape=None) -> np.ndarray:
        """Flow id + 1 per node, 0 for background."""
        if shape is None:
            shape = self.coarse.labeling.shape
        out = np.zeros(shape, dtype=np.int64)
        for f in self.flows:
            out[f.mask] = f.id + 1
        return out


def segments_from_labeling(labeling, field: MotionField | None = None) -> list[Segment]:
    """4-connected components of equal non-background labels.

    Ids follow the row-major position of each component's first node.
    """
    labeling = np.asarray(labeling)
    found = []
    for lab in np.unique(labeling):
        if lab == BACKGROUND:
            continue
        comp, count = ndimage.label(labeling == lab, structure=FOUR_CONNECTED)
        if count == 0:
            continue
        flat = comp.ravel()
        nz = np.flatnonzero(flat)
        first = np.full(count + 1, flat.size)
        np.minimum.at(first, flat[nz], nz)
        for c in range(1, count + 1):
            found.append((int(first[c]), int(lab), comp == c))
    found.sort(key=lambda item: item[0])
    segments = []
    for i, (_, lab, mask) in enumerate(found):
        seg = Segment(id=i, label=lab, mask=mask)
        if field is not None:
            seg.mean_orientation = _mean_or_nan(field.orientation[mask])
        segments.append(seg)
    return segments


def circular_mean(angles) -> float:
    angles = np.radians(np.asarray(angles, dtype=float).ravel())
    if angles.size == 0:
        raise DegenerateMean("mean orientation of an empty set")
    c = np.cos(angles).sum()
    s = np.sin(angles).sum()
    if np.hypot(c, s) / angles.size < 1e-9:
        raise DegenerateMean("orientations cancel out; mean is undefined")
    return float(wrap_degrees(np.degrees(np.arctan2(s, c))))


def mean_orientation(segment, field: MotionField) -> float:
    """Unweighted circular mean of the field orientation over the segment."""
    mask = segment.mask if hasattr(segment, "mask") else np.asarray(segment, dtype=bool)
    return circular_mean(field.orientation[mask])


def _mean_or_nan(angles) -> float:
    try:
        return circular_mean(angles)
    except DegenerateMean:
        return float("nan")


def _solve_stage(field, labels, config) -> StageResult:
    problem = CrfProblem(field, labels, config.params)
    report = minimize(problem)
    return StageResult(
        labeling=report.labeling,
        segments=segments_from_labeling(report.labeling, field),
        report=report,
        labels=labels,
    )


def coarse_segment(field: MotionField, config: PipelineConfig | None = None) -> StageResult:
    config = config or PipelineConfig()
    return _solve_stage(field, LabelSet.coarse(config.coarse_step), config)


def fine_orientations(segments, size_thresh: int, tol: float = 1e-6) -> list[float]:
    """Mean orientations of segments larger than ``size_thresh``, near-duplicates dropped."""
    out = []
    for seg in segments:
        if seg.size <= size_thresh or np.isnan(seg.mean_orientation):
            continue
        theta = seg.mean_orientation
        if any(angular_distance(theta, o) <= tol for o in out):
            continue
        out.append(theta)
    return out


def refine(field: MotionField, coarse_segments, config: PipelineConfig | None = None) -> StageResult:
    config = config or PipelineConfig()
    segs = []
    for s in coarse_segments:
        if s.mean_orientation is None:
            s = Segment(s.id, s.label, s.mask, _mean_or_nan(field.orientation[s.mask]))
        segs.append(s)
    thetas = fine_orientations(segs, config.size_thresh_for(field))
    if not thetas:
        raise NoQualifyingSegments(
            f"no coarse segment exceeds size_thresh={config.size_thresh_for(field)}"
        )
    return _solve_stage(field, LabelSet(tuple(thetas)), config)


def orientation_gradient(field: MotionField) -> np.ndarray:
    """Largest circular orientation difference to any 4-neighbour, per node."""
    theta = field.orientation
    grad = np.zeros_like(theta)
    dh = angular_distance(theta[:, :-1], theta[:, 1:])
    dv = angular_distance(theta[:-1, :], theta[1:, :])
    grad[:, :-1] = np.maximum(grad[:, :-1], dh)
    grad[:, 1:] = np.maximum(grad[:, 1:], dh)
    grad[:-1, :] = np.maximum(grad[:-1, :], dv)
    grad[1:, :] = np.maximum(grad[1:, :], dv)
    return grad


def boundary_stats(segment_ids, field: MotionField):
    """Per adjacent segment pair: (sum of orientation differences, spanning pair count).

    ``segment_ids`` holds a segment id per node, -1 where no segment.
    """
    theta = field.orientation
    stats: dict[tuple[int, int], list[float]] = {}
    for a_ids, b_ids, a_th, b_th in (
        (segment_ids[:, :-1], segment_ids[:, 1:], theta[:, :-1], theta[:, 1:]),
        (segment_ids[:-1, :], segment_ids[1:, :], theta[:-1, :], theta[1:, :]),
    ):
        span = (a_ids >= 0) & (b_ids >= 0) & (a_ids != b_ids)
        if not span.any():
            continue
        lo = np.minimum(a_ids[span], b_ids[span])
        hi = np.maximum(a_ids[span], b_ids[span])
        d = np.atleast_1d(angular_distance(a_th[span], b_th[span]))
        for i, j, dist in zip(lo.tolist(), hi.tolist(), d.tolist()):
            entry = stats.setdefault((i, j), [0.0, 0])
            entry[0] += dist
            entry[1] += 1
    return stats


def merge(segments, field: MotionField, config: PipelineConfig | None = None) -> list[Flow]:
    """Greedily merge adjacent segments whose mean boundary gradient is below merge_thresh.

    The pair with the smallest mean gradient merges first (ties: smaller
    combined size, then lower id pair); boundary statistics of the merged
    region are the union of its members' statistics.
    """
    config = config or PipelineConfig()
    segments = sorted(segments, key=lambda s: int(np.flatnonzero(s.mask.ravel())[0]))
    ids = np.full(field.shape, -1, dtype=np.int64)
    for i, seg in enumerate(segments):
        ids[seg.mask] = i
    stats = boundary_stats(ids, field)
    members = {i: [i] for i in range(len(segments))}
    sizes = {i: segments[i].size for i in range(len(segments))}

    while stats:
        def priority(pair):
            total, count = stats[pair]
            return (total / count, sizes[pair[0]] + sizes[pair[1]], pair)

        best = min(stats, key=priority)
        total, count = stats[best]
        if total / count >= config.merge_thresh:
            break
        keep, gone = best
        members[keep].extend(members.pop(gone))
        sizes[keep] += sizes.pop(gone)
        del stats[best]
        for pair in [p for p in stats if gone in p]:
            other = pair[0] if pair[1] == gone else pair[1]
            t, c = stats.pop(pair)
            key = (min(keep, other), max(keep, other))
            entry = stats.setdefault(key, [0.0, 0])
            entry[0] += t
            entry[1] += c

    flows = []
    for fid, root in enumerate(sorted(members)):
        mask = np.isin(ids, members[root])
        flows.append(
            Flow(
                id=fid,
                mask=mask,
                orientation=_mean_or_nan(field.orientation[mask]),
                members=tuple(sorted(members[root])),
            )
        )
    return flows


def run(field: MotionField, config: PipelineConfig | None = None) -> FlowResult:
    """Coarse CRF -> fine CRF on segment mean orientations -> merge into flows."""
    config = config or PipelineConfig()
    timings = {}
    t0 = time.perf_counter()
    coarse = coarse_segment(field, config)
    t1 = time.perf_counter()
    timings["coarse"] = t1 - t0
    try:
        fine = refine(field, coarse.segments, config)
    except NoQualifyingSegments:
        timings["fine"] = time.perf_counter() - t1
        timings["merge"] = 0.0
        timings["total"] = time.perf_counter() - t0
        return FlowResult(flows=[], coarse=coarse, fine=None, timings=timings)
    t2 = time.perf_counter()
    timings["fine"] = t2 - t1
    flows = merge(fine.segments, field, config)
    t3 = time.perf_counter()
    timings["merge"] = t3 - t2
    timings["total"] = t3 - t0
    return FlowResult(flows=flows, coarse=coarse, fine=fine, timings=timings)
