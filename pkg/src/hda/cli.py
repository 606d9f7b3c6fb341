"""Command-line front end: synth, adapt, similarity, select-dim.

Exit codes: 0 success, 1 validation/geometry error, 2 I/O error.  All
outputs are deterministic for a fixed config and seed (no timestamps), so
repeated runs produce byte-identical files.
"""

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .alignment import disagreement_curve, select_dimension
from .classify import LabeledSet
from .data import DatasetBundle, SynthConfig, load_dataset, load_truth, save_dataset, save_truth, synth_generate
from .errors import ConfigError, DimensionError, HdaError, ValidationError
from .pipeline import (
    EvalReport,
    HierLabel,
    adapt_flat,
    baseline_no_adaptation,
    evaluate,
    hier_adapt,
    similarity_matrix,
)

_REPORT_EXT = {"text": "txt", "csv": "csv", "json": "json"}


@dataclass
class RunConfig:
    """One adaptation run: datasets, method/mode grid cell, and knobs.

    Exactly one of a fixed ``d`` or auto-selection is active: ``d=None``
    selects the dimension from the data (bounded by ``d_max``).
    """

    source_path: str
    target_path: str
    truth_path: Optional[str] = None
    method: str = "sa"
    mode: str = "flat"
    d: Optional[int] = None
    d_max: int = 20
    d_branch: Optional[int] = None
    k: int = 1
    seed: int = 0
    output_path: Optional[str] = None
    report_format: str = "text"
    no_truth: bool = False

    def __post_init__(self):
        if self.method not in ("sa", "gfk"):
            raise ConfigError(f"method must be sa or gfk, got {self.method!r}")
        if self.mode not in ("base", "flat", "hier"):
            raise ConfigError(f"mode must be base, flat or hier, got {self.mode!r}")
        if self.report_format not in _REPORT_EXT:
            raise ConfigError(f"report_format must be text, csv or json, got {self.report_format!r}")
        if self.d is not None and self.d < 1:
            raise ConfigError("d must be a positive integer")
        if self.k < 1:
            raise ConfigError("k must be a positive integer")


_RUN_KEYS = {
    "source": "source_path",
    "target": "target_path",
    "truth": "truth_path",
    "method": "method",
    "mode": "mode",
    "d": "d",
    "d_max": "d_max",
    "d_branch": "d_branch",
    "k": "k",
    "seed": "seed",
    "output": "output_path",
    "report_format": "report_format",
    "no_truth": "no_truth",
}


def _run_config(args):
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            try:
                raw = json.load(f)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        unknown = set(raw) - set(_RUN_KEYS)
        if unknown:
            raise ConfigError(f"{args.config}: unknown keys {sorted(unknown)}")
        values = {_RUN_KEYS[k]: v for k, v in raw.items()}
    overrides = {
        "source_path": args.source,
        "target_path": args.target,
        "truth_path": args.truth,
        "method": args.method,
        "mode": args.mode,
        "d": args.d,
        "d_max": args.d_max,
        "d_branch": args.d_branch,
        "k": args.k,
        "seed": args.seed,
        "output_path": args.output,
        "report_format": args.report_format,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    if args.auto_d:
        values["d"] = None
    if args.no_truth:
        values["no_truth"] = True
    if "source_path" not in values or "target_path" not in values:
        raise ConfigError("adapt needs --source and --target (flags or config file)")
    return RunConfig(**values)


def _load_pair(run):
    source = load_dataset(run.source_path)
    target = load_dataset(run.target_path)
    if source.labels is None:
        raise ValidationError(f"{run.source_path}: the source domain must be labelled")
    if source.hierarchy != target.hierarchy:
        raise ValidationError("source and target files declare different hierarchies")
    if source.dims != target.dims:
        raise DimensionError(
            f"feature dimensions differ: source {source.dims}, target {target.dims}"
        )
    return source, target


def _load_truth_for(run, target):
    if run.no_truth or not run.truth_path:
        return None
    labels, hierarchy, dims = load_truth(run.truth_path)
    if hierarchy != target.hierarchy:
        raise ValidationError(f"{run.truth_path}: hierarchy differs from the target file")
    if len(labels) != target.n:
        raise ValidationError(
            f"{run.truth_path}: {len(labels)} labels for {target.n} target rows"
        )
    return labels


def _fmt_cell(x):
    return "-" if x is None else f"{x:.2f}"


def _round(x):
    return None if x is None else round(x, 2)


def render_adapt_report(report, meta, fmt):
    """Render an EvalReport plus run metadata; deterministic by content."""
    if fmt == "json":
        payload = {
            "schema": 1,
            **meta,
            "n": report.n,
            "base_accuracy": _round(report.base_accuracy),
            "flat_accuracy": _round(report.flat_accuracy),
            "hier_accuracy": _round(report.hier_accuracy),
            "parent_accuracy": _round(report.parent_accuracy),
            "per_parent_accuracy": {
                k: _round(v) for k, v in report.per_parent_accuracy.items()
            },
            "warnings": list(report.warnings),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        header = "method,mode,d,k,n,base_accuracy,flat_accuracy,hier_accuracy,parent_accuracy"
        row = ",".join(
            [
                meta["method"],
                meta["mode"],
                str(meta["d"]),
                str(meta["k"]),
                str(report.n),
                _fmt_cell(report.base_accuracy).replace("-", ""),
                _fmt_cell(report.flat_accuracy).replace("-", ""),
                _fmt_cell(report.hier_accuracy).replace("-", ""),
                _fmt_cell(report.parent_accuracy).replace("-", ""),
            ]
        )
        return header + "\n" + row + "\n"
    lines = [
        "== adaptation report ==",
        f"method            {meta['method']}",
        f"mode              {meta['mode']}",
        f"d                 {meta['d']}",
        f"k                 {meta['k']}",
        f"target rows       {report.n}",
        f"base accuracy     {_fmt_cell(report.base_accuracy)}",
        f"flat accuracy     {_fmt_cell(report.flat_accuracy)}",
        f"hier accuracy     {_fmt_cell(report.hier_accuracy)}",
        f"parent accuracy   {_fmt_cell(report.parent_accuracy)}",
    ]
    if report.per_parent_accuracy:
        lines.append("per-parent child accuracy:")
        for name, acc in report.per_parent_accuracy.items():
            lines.append(f"  {name:<16} {acc:.2f}")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def render_similarity(res, fmt):
    names = res.names
    if fmt == "json":
        payload = {
            "schema": 1,
            "d": res.d,
            "names": list(names),
            "matrix": [[round(float(x), 4) for x in row] for row in res.matrix],
            "warnings": list(res.warnings),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        lines = ["," + ",".join(names)]
        for a, name in enumerate(names):
            lines.append(name + "," + ",".join(f"{x:.2f}" for x in res.matrix[a]))
        return "\n".join(lines) + "\n"
    width = max(8, max(len(n) for n in names) + 2)
    lines = [f"subspace similarity, d={res.d} (rows: source, columns: target)"]
    lines.append(" " * width + "".join(f"{n:>{width}}" for n in names))
    for a, name in enumerate(names):
        cells = []
        for b in range(len(names)):
            cell = f"[{res.matrix[a, b]:.2f}]" if a == b else f"{res.matrix[a, b]:.2f}"
            cells.append(f"{cell:>{width}}")
        lines.append(f"{name:<{width}}" + "".join(cells))
    for w in res.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def _emit(text, output_path):
    sys.stdout.write(text)
    if output_path:
        with open(output_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def cmd_synth(args):
    cfg = SynthConfig.from_file(args.config) if args.config else SynthConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    source, target = synth_generate(cfg)
    paths = {
        "source": out_dir / "source.hda",
        "target": out_dir / "target.hda",
        "truth": out_dir / "target_truth.hda",
    }
    save_dataset(source, paths["source"])
    target_public = DatasetBundle(
        features=target.features, labels=None, hierarchy=target.hierarchy, name=target.name
    )
    save_dataset(target_public, paths["target"])
    save_truth(target.labels, target.hierarchy, target.dims, paths["truth"])
    print(f"generated synthetic benchmark (seed {cfg.seed}, PRNG PCG64/SeedSequence)")
    print(
        f"parents: {cfg.n_parents}, children: {cfg.n_parents * cfg.children_per_parent}, "
        f"dims: {cfg.ambient_dim}, suggested d: {cfg.subspace_dim}"
    )
    print(f"source rows: {source.n}, target rows: {target.n}")
    for kind, path in paths.items():
        print(f"wrote {kind}: {path}")
    return 0


def _label_from_child_code(hierarchy, code):
    child = hierarchy.children[code]
    return HierLabel(parent=hierarchy.parent_of(child), child=child)


def cmd_adapt(args):
    run = _run_config(args)
    source, target = _load_pair(run)
    truth = _load_truth_for(run, target)
    hierarchy = source.hierarchy

    if run.d is not None:
        d = run.d
    else:
        d = select_dimension(source.features, target.features, run.d_max)
    d_branch = run.d_branch if run.d_branch is not None else d

    child_codes = np.array([hierarchy.child_code(lab.child) for lab in source.labels], dtype=np.int64)
    labeled = LabeledSet(source.features, child_codes)
    warnings = ()
    if run.mode == "base":
        pred_codes = baseline_no_adaptation(labeled, target.features, d=d, k=run.k)
        predictions = [_label_from_child_code(hierarchy, int(c)) for c in pred_codes]
    elif run.mode == "flat":
        pred_codes = adapt_flat(labeled, target.features, method=run.method, d=d, k=run.k)
        predictions = [_label_from_child_code(hierarchy, int(c)) for c in pred_codes]
    else:
        model, predictions = hier_adapt(
            source.features,
            source.labels,
            target.features,
            hierarchy,
            method=run.method,
            d_root=d,
            d_branch=d_branch,
            k=run.k,
        )
        warnings = model.warnings

    if run.output_path:
        save_truth(predictions, hierarchy, target.dims, run.output_path)

    if truth is not None:
        report = evaluate(predictions, truth, hierarchy, mode=run.mode)
        report.warnings = tuple(warnings)
    else:
        report = EvalReport(
            n=target.n,
            warnings=tuple(warnings) + ("accuracy unavailable: no truth sidecar",),
        )
    meta = {"method": run.method, "mode": run.mode, "d": d, "k": run.k, "seed": run.seed}
    text = render_adapt_report(report, meta, run.report_format)
    report_path = None
    if run.output_path:
        report_path = f"{run.output_path}.report.{_REPORT_EXT[run.report_format]}"
    _emit(text, report_path)
    return 0


def cmd_similarity(args):
    run = _run_config(args)
    if not run.truth_path or run.no_truth:
        raise ConfigError(
            "the similarity diagnostic requires the true target labels; pass --truth "
            "(it compares per-parent subspaces on both sides, which the unsupervised "
            "pipeline cannot know)"
        )
    source, target = _load_pair(run)
    truth = _load_truth_for(run, target)
    if run.d is not None:
        d = run.d
    else:
        d = select_dimension(source.features, target.features, run.d_max)
    res = similarity_matrix(
        source.features, source.labels, target.features, truth, source.hierarchy, d
    )
    text = render_similarity(res, run.report_format)
    _emit(text, run.output_path)
    return 0


def cmd_select_dim(args):
    source = load_dataset(args.source)
    target = load_dataset(args.target)
    curve = disagreement_curve(source.features, target.features, args.d_max)
    selected = select_dimension(source.features, target.features, args.d_max)
    lines = [f"selected d: {selected}", " d  D(d)"]
    for i, value in enumerate(curve, start=1):
        lines.append(f"{i:>2}  {value:.6f}")
    text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return 0


def _add_run_flags(p):
    p.add_argument("--config", help="JSON run config; flags override its values")
    p.add_argument("--source", help="source dataset file")
    p.add_argument("--target", help="target dataset file")
    p.add_argument("--truth", help="target truth sidecar file")
    p.add_argument("--method", choices=["sa", "gfk"])
    p.add_argument("--mode", choices=["base", "flat", "hier"])
    group = p.add_mutually_exclusive_group()
    group.add_argument("--d", type=int, help="fixed subspace dimension")
    group.add_argument("--auto-d", action="store_true", help="select d from the data")
    p.add_argument("--d-max", type=int, dest="d_max", help="bound for --auto-d")
    p.add_argument("--d-branch", type=int, dest="d_branch", help="branch subspace dimension (default: d)")
    p.add_argument("--k", type=int, help="number of neighbors")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="write predictions (adapt) or the rendered output here")
    p.add_argument("--report-format", choices=["text", "csv", "json"], dest="report_format")
    p.add_argument("--no-truth", action="store_true", help="force pure unsupervised operation")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hda",
        description="Subspace-based hierarchical domain adaptation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic benchmark files")
    p.add_argument("--config", help="JSON SynthConfig file (defaults used if omitted)")
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("adapt", help="run one mode x method cell and report accuracy")
    _add_run_flags(p)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("similarity", help="cross-domain subspace similarity diagnostic")
    _add_run_flags(p)
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("select-dim", help="subspace dimension selection curve")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--d-max", type=int, required=True, dest="d_max")
    p.add_argument("--output")
    p.set_defaults(func=cmd_select_dim)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HdaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
