"""Command-line front end: ``segment``, ``eval``, ``synth`` and ``mean``.

Exit codes: 0 success, 1 runtime failure, 2 usage / parse / config error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import metrics
from .config import load_config
from .crf import CrfParams
from .errors import CrowdFlowError, DimensionMismatch, ParseError
from .mvfield import (
    format_mean_field,
    load_frame_records,
    load_mean_field,
    mean_field_from_records,
    save_mean_field,
)
from .pgm import format_pgm, read_pgm, write_pgm
from .pipeline import PipelineConfig, orientation_gradient, run
from .synth import generate, parse_scene

log = logging.getLogger("crowdflow")

PARAM_DEFAULTS = {
    "tau": CrfParams.tau,
    "c1": CrfParams.c1,
    "c2": CrfParams.c2,
    "c3": CrfParams.c3,
    "size_thresh": None,
    "merge_thresh": 45.0,
    "dump_intermediates": False,
    "timings": False,
    "seed": None,
}


class UsageError(Exception):
    pass


def _add_common(p):
    p.add_argument("--config", help="key = value file; CLI flags take precedence")
    p.add_argument("--tau", type=float, help="background magnitude threshold (px/frame)")
    p.add_argument("--c1", type=float, help="background cost for moving nodes")
    p.add_argument("--c2", type=float, help="orientation-label cost for static nodes")
    p.add_argument("--c3", type=float, help="pairwise smoothing weight")
    p.add_argument("--size-thresh", type=int, help="min coarse segment size for a fine label")
    p.add_argument("--merge-thresh", type=float, help="merge when mean boundary gradient (deg) is below this")
    p.add_argument("--dump-intermediates", action="store_true", default=None,
                   help="also write coarse/fine label maps and the orientation gradient")
    p.add_argument("--seed", type=int, help="RNG seed (synthesis only)")


def _resolve(args) -> dict:
    settings = dict(PARAM_DEFAULTS)
    if args.config:
        if not Path(args.config).is_file():
            raise UsageError(f"config file not found: {args.config}")
        settings.update(load_config(args.config))
    for key in PARAM_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _pipeline_config(settings) -> PipelineConfig:
    try:
        params = CrfParams(settings["tau"], settings["c1"], settings["c2"], settings["c3"])
        return PipelineConfig(
            params=params,
            size_thresh=settings["size_thresh"],
            merge_thresh=settings["merge_thresh"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_field(path: Path):
    with open(path, encoding="ascii") as fh:
        magic = fh.readline().split()[:1]
    if magic == ["FMV1"]:
        records, w, h, frames = load_frame_records(path)
        return mean_field_from_records(records, w, h, frames)
    return load_mean_field(path)


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.6f}"


def _write_outputs(result, field, src: Path, outdir: Path, settings, config) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    labels = result.label_map(field.shape)
    write_pgm(outdir / "labels.pgm", labels)

    with open(outdir / "flows.csv", "w", encoding="ascii", newline="\n") as fh:
        fh.write("flow_id,size,orientation_deg\n")
        for f in result.flows:
            fh.write(f"{f.id + 1},{f.size},{_fmt(f.orientation)}\n")

    p = config.params
    lines = [
        f"input: {src.name}",
        f"grid: {field.width} x {field.height}",
        f"params: tau={p.tau:g} c1={p.c1:g} c2={p.c2:g} c3={p.c3:g} "
        f"size_thresh={config.size_thresh_for(field)} merge_thresh={config.merge_thresh:g}",
    ]
    for name, stage in (("coarse", result.coarse), ("fine", result.fine)):
        if stage is None:
            lines.append(f"{name}: skipped (no qualifying coarse segments)")
            continue
        lines.append(
            f"{name}: labels={len(stage.labels)} segments={len(stage.segments)} "
            f"energy={stage.report.energy:.6f} sweeps={stage.report.sweeps}"
        )
    lines.append(f"flows: {len(result.flows)}")
    for name, stage in (("coarse", result.coarse), ("fine", result.fine)):
        if stage is not None:
            lines += ["", f"[{name} solver]", stage.report.format_table(include_time=False)]
    (outdir / "report.txt").write_text("\n".join(lines) + "\n", encoding="ascii")

    if settings["timings"]:
        _, table = metrics.timing_report([(src.stem, result.timings)])
        (outdir / "timings.csv").write_text(table, encoding="ascii")

    if settings["dump_intermediates"]:
        write_pgm(outdir / "coarse.pgm", result.coarse.labeling)
        if result.fine is not None:
            write_pgm(outdir / "fine.pgm", result.fine.labeling)
        grad = np.rint(orientation_gradient(field)).astype(np.int64)
        write_pgm(outdir / "gradient.pgm", grad)


def cmd_segment(args) -> int:
    settings = _resolve(args)
    config = _pipeline_config(settings)
    inputs = [Path(p) for p in args.inputs]
    for path in inputs:
        if not path.is_file():
            raise UsageError(f"input not found: {path}")
    fields = []
    for path in inputs:
        try:
            fields.append(_load_field(path))
        except (CrowdFlowError, ValueError) as exc:
            raise UsageError(f"{path}: {exc}") from None
    out = Path(args.out)
    rows = []
    for path, field in zip(inputs, fields):
        outdir = out if len(inputs) == 1 else out / path.stem
        result = run(field, config)
        _write_outputs(result, field, path, outdir, settings, config)
        rows.append((path.stem, result.timings))
        log.info("%s: %d flows in %.3f s", path.name, len(result.flows), result.timings["total"])
    if settings["timings"]:
        text, _ = metrics.timing_report(rows)
        sys.stderr.write(text)
    return 0


def _timing_for(pred: Path):
    path = pred.parent / "timings.csv"
    if not path.is_file():
        return None
    with open(path, encoding="ascii") as fh:
        for row in csv.DictReader(fh):
            if row.get("total_s"):
                return float(row["total_s"])
    return None


def cmd_eval(args) -> int:
    if len(args.pred) != len(args.gt):
        raise UsageError("--pred and --gt must be given the same number of times")
    names = args.sequence or []
    if names and len(names) != len(args.pred):
        raise UsageError("--sequence must be given once per --pred")
    rows = []
    for i, (pred_path, gt_path) in enumerate(zip(args.pred, args.gt)):
        for p in (pred_path, gt_path):
            if not Path(p).is_file():
                raise UsageError(f"label map not found: {p}")
        pred, gt = read_pgm(pred_path), read_pgm(gt_path)
        if pred.shape != gt.shape:
            raise DimensionMismatch(f"{pred_path} is {pred.shape}, {gt_path} is {gt.shape}")
        name = names[i] if names else Path(pred_path).parent.name or Path(pred_path).stem
        row = metrics.eval_row(name, pred, gt, _timing_for(Path(pred_path)))
        rows.append(row)
        print(row["jaccard"])
    if args.csv:
        path = Path(args.csv)
        new = not path.exists() or path.stat().st_size == 0
        with open(path, "a", encoding="ascii", newline="\n") as fh:
            metrics.write_csv(rows, metrics.EVAL_COLUMNS, fh, header=new)
    return 0


def cmd_synth(args) -> int:
    scene_path = Path(args.scene)
    if not scene_path.is_file():
        raise UsageError(f"scene file not found: {scene_path}")
    spec = parse_scene(scene_path.read_text())
    settings = _resolve(args)
    if settings["seed"] is not None:
        spec = replace(spec, seed=settings["seed"])
    try:
        field, gt = generate(spec)
    except (ValueError, CrowdFlowError) as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    name = args.name or scene_path.stem
    (out / f"{name}.mvf").write_text(format_mean_field(field), encoding="ascii")
    (out / f"{name}_gt.pgm").write_text(format_pgm(gt), encoding="ascii")
    return 0


def cmd_mean(args) -> int:
    path = Path(args.inputs)
    if not path.is_file():
        raise UsageError(f"input not found: {path}")
    try:
        records, w, h, frames = load_frame_records(path)
        field = mean_field_from_records(records, w, h, frames)
    except (CrowdFlowError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    save_mean_field(field, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crowdflow", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment flows in MVF1/FMV1 motion fields")
    seg.add_argument("--in", dest="inputs", action="append", required=True,
                     help="MVF1 or FMV1 file; repeat for batch runs")
    seg.add_argument("--out", required=True, help="output directory")
    seg.add_argument("--timings", action="store_true", default=None,
                     help="write per-stage wall-clock times to timings.csv")
    _add_common(seg)
    seg.set_defaults(func=cmd_segment)

    ev = sub.add_parser("eval", help="Jaccard score of predicted vs ground-truth label maps")
    ev.add_argument("--pred", action="append", required=True)
    ev.add_argument("--gt", action="append", required=True)
    ev.add_argument("--sequence", action="append", help="row name per --pred")
    ev.add_argument("--csv", help="append rows to this CSV file")
    ev.set_defaults(func=cmd_eval)

    syn = sub.add_parser("synth", help="write a synthetic MVF1 field and PGM ground truth")
    syn.add_argument("--scene", required=True, help="key = value scene description")
    syn.add_argument("--out", required=True, help="output directory")
    syn.add_argument("--name", help="output basename (default: scene file stem)")
    syn.add_argument("--config")
    syn.add_argument("--seed", type=int)
    syn.set_defaults(func=cmd_synth)

    mean = sub.add_parser("mean", help="average FMV1 frame records into an MVF1 field")
    mean.add_argument("--in", dest="inputs", required=True)
    mean.add_argument("--out", required=True)
    mean.set_defaults(func=cmd_mean)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, ParseError, DimensionMismatch) as exc:
        print(f"crowdflow {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (CrowdFlowError, ValueError) as exc:
        print(f"crowdflow {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
