"""Command-line interface: ``graphlay <command> ...``.

Exit codes: 0 on success, 1 on an internal failure, 2 on bad input or usage.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bench, dnn2
from .graph import Graph, GraphFormatError, read_graph
from .layouts import (
    TsnetOptions, align_layout, format_layout_csv, pivot_mds, read_layout_csv, sgd_stress,
    tsnet_layout,
)
from .metrics import evaluate_all

DEFAULT_SEED = 42
LAYOUT_METHODS = ("tsnet", "tsnet-star", "pivotmds", "sgd")


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    return p


def _load_graph(path: str) -> Graph:
    return read_graph(_existing(path))


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def _parse_sizes(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 2:
        raise InputError(f"bad --sizes {text!r}: need sizes >= 2")
    return out


# ---------------------------------------------------------------- commands

def cmd_layout(args) -> int:
    g = _load_graph(args.graph)
    seed = bench.derive_seed(args.seed, "layout", args.method)
    if args.method in ("tsnet", "tsnet-star"):
        opts = TsnetOptions(**{k: v for k, v in (
            ("max_iter_stage1", args.max_iter_stage1), ("max_iter_stage2", args.max_iter_stage2),
            ("learning_rate", args.learning_rate), ("perplexity", args.perplexity)) if v is not None})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            x = tsnet_layout(g, args.method, seed=seed, opts=opts)
    elif args.method == "pivotmds":
        x = pivot_mds(g, seed=seed)
    else:
        x = sgd_stress(g, seed=seed)
    _write(args.output, format_layout_csv(x, g.node_ids))
    return 0


def _load_layout(g: Graph, path: str) -> np.ndarray:
    try:
        ids, pts = read_layout_csv(_existing(path))
        return align_layout(g, ids, pts)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_metrics(args) -> int:
    g = _load_graph(args.graph)
    x = _load_layout(g, args.layout)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = evaluate_all(x, g, k=args.k, r=args.r, rotations=args.rotations,
                           stress_scaled=not args.unscaled_stress,
                           stress_normalization=args.stress_normalization)
    d = rep.as_dict()
    d.pop("execution_time_ms")
    if args.format == "json":
        text = json.dumps(d, indent=2) + "\n"
    else:
        text = ",".join(d) + "\n" + ",".join(format(v, ".17g") for v in d.values()) + "\n"
    _write(args.output, text)
    return 0


def cmd_bench(args) -> int:
    root = Path(args.dataset)
    if not root.is_dir():
        raise InputError(f"no such directory: {args.dataset}")
    items = bench.load_graph_dir(root)
    if not items:
        raise InputError(f"no graph files in {args.dataset}")
    if args.split == "test":
        ds = bench.split_dataset([g for _, g in items], bench.ROME_FRACTIONS, args.seed,
                                 ids=[i for i, _ in items])
        items = list(zip(ds.part_ids("test"), ds.test))
    if args.limit is not None and args.limit < len(items):
        rng = np.random.default_rng(bench.derive_seed(args.seed, "bench-sample"))
        pick = sorted(rng.choice(len(items), size=args.limit, replace=False).tolist())
        items = [items[i] for i in pick]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in bench.METHODS]
    if unknown:
        raise InputError(f"unknown methods: {', '.join(unknown)} "
                         f"(choose from {', '.join(bench.METHODS)})")
    report = bench.run_benchmark(methods, items, seed=args.seed, workers=args.workers,
                                 timing=args.timing)
    bench.write_report(report, args.output)
    sys.stdout.write(bench.format_summary_md(report))
    return 0


def cmd_gen_data(args) -> int:
    sizes = _parse_sizes(args.sizes)
    if args.per_size < 1:
        raise InputError("--per-size must be >= 1")
    graphs = bench.generate_corpus(sizes, args.per_size, args.seed, args.generator)
    bench.write_graph_dir(args.output, graphs)
    print(f"wrote {len(graphs)} graphs to {args.output}")
    return 0


def _read_train_config(path: str | None) -> tuple[dnn2.ModelConfig, dnn2.TrainConfig, tuple]:
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(_existing(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON: {exc}") from None
    try:
        model = dnn2.ModelConfig(**raw.get("model", {}))
        train = dnn2.TrainConfig(**raw.get("train", {}))
    except TypeError as exc:
        raise InputError(f"bad config: {exc}") from None
    fractions = tuple(raw.get("fractions", (0.8, 0.1, 0.1)))
    return model, train, fractions


def cmd_train(args) -> int:
    model_cfg, train_cfg, fractions = _read_train_config(args.config)
    root = Path(args.data)
    if not root.is_dir():
        raise InputError(f"no such directory: {args.data}")
    items = bench.load_graph_dir(root)
    ds = bench.split_dataset([g for _, g in items], fractions, bench.derive_seed(args.seed, "split"),
                             ids=[i for i, _ in items])
    init = None
    if args.init is not None:
        init, init_cfg = dnn2.load_checkpoint(_existing(args.init))
        if init_cfg != model_cfg:
            raise InputError("warm-start checkpoint was trained with a different model config")
    seed = bench.derive_seed(args.seed, "train")
    log = None
    if args.verbose:
        def log(row):
            print(f"stage {row.stage} epoch {row.epoch}: train {row.train_loss:.6f} "
                  f"val {row.val_loss:.6f}", file=sys.stderr)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params, history = dnn2.train(model_cfg, ds.train, ds.validation, seed,
                                     train_cfg, init=init, log=log)
    dnn2.save_checkpoint(args.output, params, model_cfg)
    if args.history:
        _write(args.history, dnn2.format_history_csv(history))
    return 0


def cmd_predict(args) -> int:
    params, cfg = dnn2.load_checkpoint(_existing(args.checkpoint))
    g = _load_graph(args.graph)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        x = dnn2.predict(g, params, cfg, seed=bench.derive_seed(args.seed, "predict"))
    _write(args.output, format_layout_csv(x, g.node_ids))
    return 0


def render_svg(g: Graph, x: np.ndarray, size: int = 1000, margin: float = 0.05,
               radius: float = 3.0) -> str:
    """Fit the layout into a square viewport (aspect kept) and draw it."""
    x = np.asarray(x, dtype=float)
    lo = x.min(axis=0)
    span = float((x.max(axis=0) - lo).max())
    inner = size * (1.0 - 2.0 * margin)
    if span > 0:
        extent = (x.max(axis=0) - lo) / span * inner
        offset = size * margin + (inner - extent) / 2.0
        pts = (x - lo) / span * inner + offset
    else:
        pts = np.full_like(x, size / 2.0)

    def f(v: float) -> str:
        s = f"{v:.3f}".rstrip("0").rstrip(".")
        return "0" if s == "-0" else s

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>',
           '<g stroke="black" stroke-width="1">']
    for u, v in g.edges:
        out.append(f'<line x1="{f(pts[u, 0])}" y1="{f(pts[u, 1])}" '
                   f'x2="{f(pts[v, 0])}" y2="{f(pts[v, 1])}"/>')
    out.append('</g>')
    out.append('<g fill="steelblue">')
    for i in range(g.num_nodes):
        out.append(f'<circle cx="{f(pts[i, 0])}" cy="{f(pts[i, 1])}" r="{f(radius)}"/>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def cmd_render(args) -> int:
    g = _load_graph(args.graph)
    x = _load_layout(g, args.layout)
    _write(args.output, render_svg(g, x))
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphlay", description="Graph layout engines, quality "
                                "metrics, benchmarks and a learned layout model.")
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp):
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"base seed for every random stage (default {DEFAULT_SEED})")
        return sp

    sp = seeded(sub.add_parser("layout", help="compute a layout CSV"))
    sp.add_argument("graph", help="edge list or GraphML file")
    sp.add_argument("--method", choices=LAYOUT_METHODS, default="tsnet-star")
    sp.add_argument("-o", "--output", help="output CSV (default stdout)")
    sp.add_argument("--max-iter-stage1", type=int)
    sp.add_argument("--max-iter-stage2", type=int)
    sp.add_argument("--learning-rate", type=float)
    sp.add_argument("--perplexity", type=float)
    sp.set_defaults(func=cmd_layout)

    sp = sub.add_parser("metrics", help="score a layout")
    sp.add_argument("graph")
    sp.add_argument("layout", help="layout CSV with header node_id,x,y")
    sp.add_argument("--k", type=int, default=2, help="hop radius for neighborhood preservation")
    sp.add_argument("--r", type=float, default=0.2, help="radius for cluster overlap")
    sp.add_argument("--rotations", type=int, help="rotations for aspect ratio (default N)")
    sp.add_argument("--unscaled-stress", action="store_true")
    sp.add_argument("--stress-normalization", choices=("pairs", "nodes"), default="pairs")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_metrics)

    sp = seeded(sub.add_parser("bench", help="benchmark layout methods on a graph directory"))
    sp.add_argument("dataset", help="directory of graph files")
    sp.add_argument("--methods", default="pivotmds,sgd",
                    help=f"comma-separated subset of {','.join(bench.METHODS)}")
    sp.add_argument("--limit", type=int, help="sample this many graphs")
    sp.add_argument("--split", choices=("all", "test"), default="all",
                    help="'test' keeps the seeded test split of the directory")
    sp.add_argument("--workers", type=int, help="pool size (default: GRAPHLAY_THREADS or CPUs)")
    sp.add_argument("--timing", action="store_true",
                    help="record execution time (makes output machine dependent)")
    sp.add_argument("-o", "--output", required=True, help="report directory")
    sp.set_defaults(func=cmd_bench)

    sp = seeded(sub.add_parser("gen-data", help="generate random connected graphs"))
    sp.add_argument("--sizes", required=True, help="e.g. 2..32 or 10,20,30")
    sp.add_argument("--per-size", type=int, required=True)
    sp.add_argument("--generator", choices=tuple(bench.GENERATORS), default="er")
    sp.add_argument("-o", "--output", required=True, help="output directory")
    sp.set_defaults(func=cmd_gen_data)

    sp = seeded(sub.add_parser("train", help="train the graph-convolution layout model"))
    sp.add_argument("--config", help="JSON with optional 'model', 'train', 'fractions' keys")
    sp.add_argument("--data", required=True, help="directory of training graphs")
    sp.add_argument("--init", help="warm-start checkpoint")
    sp.add_argument("--history", help="write per-epoch losses to this CSV")
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.add_argument("-o", "--output", required=True, help="checkpoint path")
    sp.set_defaults(func=cmd_train)

    sp = seeded(sub.add_parser("predict", help="lay out a graph with a trained model"))
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("graph")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("render", help="draw a layout as SVG")
    sp.add_argument("graph")
    sp.add_argument("layout")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_render)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GraphFormatError, dnn2.CheckpointError, FileNotFoundError) as exc:
        print(f"graphlay: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # parsing, connectivity and capacity problems all surface as ValueError
        print(f"graphlay: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - reported, not hidden
        print(f"graphlay: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
