"""Datasets, graph generators and the layout benchmark runner."""
from __future__ import annotations

import csv
import hashlib
import io
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .graph import Graph, all_pairs_bfs, format_edge_list, is_connected, read_graph
from .layouts import pivot_mds, sgd_stress, tsnet_layout
from .metrics import evaluate_all
from .stats import ALPHA, StatResult, compare

ROME_FRACTIONS = (0.695, 0.139, 0.166)
ROME_ENV = "GRAPHLAY_ROME_DIR"
THREADS_ENV = "GRAPHLAY_THREADS"
GRAPH_SUFFIXES = (".graphml", ".xml", ".edges", ".txt", ".el")
METRIC_COLUMNS = ("stress", "aspect_ratio", "angular_resolution", "crossings", "cluster_overlap",
                  "neighborhood_preservation")
RAW_HEADER = ("graph_id", "method") + METRIC_COLUMNS + ("time_ms", "status")


def derive_seed(seed: int, *names) -> int:
    """Stable 63-bit seed from a base seed and stage names."""
    text = "\x1f".join([str(int(seed))] + [str(n) for n in names])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little") >> 1


# ---------------------------------------------------------------- generators

def _spanning_tree_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    order = rng.permutation(n)
    return [(int(order[int(rng.integers(i))]), int(order[i])) for i in range(1, n)]


def generate_random_connected(n: int, seed: int = 0, max_attempts: int = 100) -> Graph:
    """Connected Erdos-Renyi graph with edge probability drawn per attempt.

    ``p ~ U[1.1 ln(n)/n, min(1, 4/n + 0.1)]``; after ``max_attempts``
    disconnected draws a random spanning tree is added to the last one.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng([n, seed])
    lo = 1.1 * math.log(n) / n
    hi = min(1.0, 4.0 / n + 0.1)
    iu, ju = np.triu_indices(n, 1)
    edges: list[tuple[int, int]] = []
    for _ in range(max_attempts):
        p = rng.uniform(min(lo, hi), hi)
        keep = rng.random(len(iu)) < p
        edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
        g = Graph(n, tuple(edges))
        if is_connected(g):
            return g
    return Graph(n, tuple(edges + _spanning_tree_edges(n, rng)))


def generate_sparse_connected(n: int, seed: int = 0, extra_ratio: float = 0.35,
                              max_hops: int = 4) -> Graph:
    """Sparse, locally clustered connected graph resembling hand-drawn diagrams.

    A random recursive tree plus ``extra_ratio * n`` chords between nodes at
    most ``max_hops`` apart. Used as a stand-in when no real corpus is present.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng([n, seed, 1])
    edges = {(int(rng.integers(v)), v) for v in range(1, n)}
    d = all_pairs_bfs(Graph(n, tuple(edges)))
    candidates = [(i, j) for i in range(n) for j in range(i + 1, n) if 1 < d[i, j] <= max_hops]
    want = min(int(round(extra_ratio * n)), len(candidates))
    for idx in rng.choice(len(candidates), size=want, replace=False):
        edges.add(candidates[int(idx)])
    return Graph(n, tuple(sorted(edges)))


GENERATORS: dict[str, Callable[[int, int], Graph]] = {
    "er": generate_random_connected,
    "sparse": generate_sparse_connected,
}


def generate_corpus(sizes: Sequence[int], per_size: int, seed: int = 0,
                    generator: str = "er") -> list[tuple[str, Graph]]:
    gen = GENERATORS[generator]
    out = []
    for n in sizes:
        for i in range(per_size):
            out.append((f"g{n:03d}_{i:04d}", gen(int(n), derive_seed(seed, "graph", n, i))))
    return out


# ---------------------------------------------------------------- datasets

@dataclass
class Dataset:
    name: str
    graphs: list[Graph]
    ids: list[str]
    split: dict[str, list[int]]
    split_seed: int

    def part(self, name: str) -> list[Graph]:
        return [self.graphs[i] for i in self.split[name]]

    def part_ids(self, name: str) -> list[str]:
        return [self.ids[i] for i in self.split[name]]

    @property
    def train(self) -> list[Graph]:
        return self.part("train")

    @property
    def validation(self) -> list[Graph]:
        return self.part("validation")

    @property
    def test(self) -> list[Graph]:
        return self.part("test")


def split_dataset(graphs: Sequence[Graph], fractions: Sequence[float] = ROME_FRACTIONS,
                  seed: int = 0, name: str = "", ids: Sequence[str] | None = None) -> Dataset:
    """Seeded shuffle then contiguous train/validation/test split.

    Validation and test get ``floor(fraction * n)`` graphs each and train
    keeps the remainder.
    """
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must be three non-negative numbers summing to 1")
    n = len(graphs)
    n_val = int(math.floor(fractions[1] * n + 1e-9))
    n_test = int(math.floor(fractions[2] * n + 1e-9))
    n_train = n - n_val - n_test
    sizes = (n_train, n_val, n_test)
    for part, size, frac in zip(("train", "validation", "test"), sizes, fractions):
        if size == 0 and frac > 0:
            raise ValueError(f"{part} split would be empty with {n} graphs")
    order = np.random.default_rng(seed).permutation(n).tolist()
    split = {"train": order[:n_train], "validation": order[n_train:n_train + n_val],
             "test": order[n_train + n_val:]}
    ids = list(ids) if ids is not None else [str(i) for i in range(n)]
    return Dataset(name, list(graphs), ids, split, seed)


def load_graph_dir(path: str | Path) -> list[tuple[str, Graph]]:
    """Read every graph file in a directory, sorted by file name."""
    path = Path(path)
    if not path.is_dir():
        raise FileNotFoundError(f"{path} is not a directory")
    files = sorted(p for p in path.iterdir() if p.suffix.lower() in GRAPH_SUFFIXES)
    return [(p.stem, read_graph(p)) for p in files]


def write_graph_dir(path: str | Path, graphs: Sequence[tuple[str, Graph]]) -> list[Path]:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    out = []
    for gid, g in graphs:
        p = path / f"{gid}.edges"
        p.write_text(format_edge_list(g), encoding="utf-8")
        out.append(p)
    return out


def find_rome_dir(explicit: str | Path | None = None) -> Path | None:
    """Location of the Rome graph collection: argument, environment, or ./data/rome."""
    for cand in (explicit, os.environ.get(ROME_ENV), Path("data") / "rome"):
        if cand and Path(cand).is_dir():
            return Path(cand)
    return None


def rome_test_subset(count: int = 100, seed: int = 0, root: str | Path | None = None,
                     max_nodes: int | None = None) -> list[tuple[str, Graph]]:
    """``count`` graphs sampled from the test split of the Rome collection."""
    rd = find_rome_dir(root)
    if rd is None:
        raise FileNotFoundError(f"Rome graphs not found; set {ROME_ENV} or place them in data/rome")
    items = [(gid, g) for gid, g in load_graph_dir(rd) if is_connected(g)
             and (max_nodes is None or g.num_nodes <= max_nodes)]
    ds = split_dataset([g for _, g in items], ROME_FRACTIONS, seed, "rome", [i for i, _ in items])
    test = list(zip(ds.part_ids("test"), ds.test))
    pick = np.random.default_rng([seed, 1]).choice(len(test), size=min(count, len(test)), replace=False)
    return [test[int(i)] for i in sorted(pick)]


# ---------------------------------------------------------------- benchmark

def _tsnet(g, seed):
    return tsnet_layout(g, "tsnet", seed=seed)


def _tsnet_star(g, seed):
    return tsnet_layout(g, "tsnet_star", seed=seed)


def _pivot(g, seed):
    return pivot_mds(g, seed=seed)


def _sgd(g, seed):
    return sgd_stress(g, seed=seed)


METHODS: dict[str, Callable[[Graph, int], np.ndarray]] = {
    "pivotmds": _pivot,
    "sgd": _sgd,
    "tsnet": _tsnet,
    "tsnet-star": _tsnet_star,
}


@dataclass(frozen=True)
class BenchRow:
    graph_id: str
    method: str
    metrics: dict | None
    time_ms: float | None
    status: str

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class BenchReport:
    methods: list[str]
    rows: list[BenchRow]
    stats: dict[str, StatResult] = field(default_factory=dict)
    means: dict[str, dict[str, tuple[float, float, int]]] = field(default_factory=dict)
    alpha: float = ALPHA

    def failures(self, method: str) -> int:
        return sum(1 for r in self.rows if r.method == method and not r.ok)

    def values(self, metric: str, method: str) -> list[float]:
        return [r.metrics[metric] for r in self.rows if r.method == method and r.ok]

    def best_significant(self, metric: str) -> str | None:
        st = self.stats.get(metric)
        if st is None:
            return None
        idx = st.best_significant([self.means[metric][m][0] for m in st.groups])
        return None if idx is None else st.groups[idx]


def _evaluate(method: str, fn, gid: str, g: Graph, seed: int, timing: bool) -> BenchRow:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            t0 = time.perf_counter()
            x = fn(g, seed)
            elapsed = (time.perf_counter() - t0) * 1e3
            rep = evaluate_all(x, g)
    except Exception as exc:  # a failing method is reported, not fatal
        msg = " ".join(f"{type(exc).__name__}: {exc}".split())
        return BenchRow(gid, method, None, None, f"failed: {msg}")
    m = rep.as_dict()
    metrics = {c: float(m["crossing_count" if c == "crossings" else c]) for c in METRIC_COLUMNS}
    return BenchRow(gid, method, metrics, elapsed if timing else None, "ok")


def _evaluate_named(method: str, gid: str, g: Graph, seed: int, timing: bool) -> BenchRow:
    return _evaluate(method, METHODS[method], gid, g, seed, timing)


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return max(1, os.cpu_count() or 1)


def run_benchmark(methods: Sequence[str] | Mapping[str, Callable[[Graph, int], np.ndarray]],
                  graphs: Sequence[tuple[str, Graph]], seed: int = 0, workers: int | None = None,
                  timing: bool = False, alpha: float = ALPHA) -> BenchReport:
    """Lay out every graph with every method, score the drawings and compare methods.

    Each (graph, method) pair uses a seed derived from ``seed`` and the graph
    id only, so two entries running the same algorithm produce the same
    drawings. Registered method names run in a process pool; a mapping of
    callables runs in-process. Execution time is recorded only with
    ``timing`` because it would otherwise make the output non-reproducible.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    tasks = [(m, gid, g, derive_seed(seed, "bench", gid)) for gid, g in graphs
             for m in (methods if isinstance(methods, Mapping) else methods)]
    names = list(methods)
    if isinstance(methods, Mapping):
        rows = [_evaluate(m, methods[m], gid, g, s, timing) for m, gid, g, s in tasks]
    else:
        unknown = [m for m in names if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods: {', '.join(unknown)}")
        if workers == 1 or len(tasks) <= 1:
            rows = [_evaluate_named(m, gid, g, s, timing) for m, gid, g, s in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futs = [pool.submit(_evaluate_named, m, gid, g, s, timing) for m, gid, g, s in tasks]
                rows = [f.result() for f in futs]
    rows.sort(key=lambda r: (r.graph_id, r.method))
    report = BenchReport(names, rows, alpha=alpha)
    metrics = list(METRIC_COLUMNS) + (["time_ms"] if timing else [])
    for metric in metrics:
        per = {}
        for m in names:
            vals = [r.time_ms if metric == "time_ms" else r.metrics[metric]
                    for r in rows if r.method == m and r.ok]
            per[m] = (float(np.mean(vals)) if vals else math.nan,
                      float(np.std(vals)) if vals else math.nan, len(vals))
        report.means[metric] = per
        usable = [m for m in names if per[m][2] > 0]
        if len(usable) >= 2:
            groups = [[r.time_ms if metric == "time_ms" else r.metrics[metric]
                       for r in rows if r.method == m and r.ok] for m in usable]
            if sum(len(gr) for gr in groups) > len(groups):
                report.stats[metric] = compare(metric, usable, groups, alpha)
    return report


def _fmt(v: float | None) -> str:
    return "" if v is None else format(v, ".17g")


def format_raw_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(RAW_HEADER)
    for r in report.rows:
        vals = [_fmt(r.metrics[c]) if r.ok else "" for c in METRIC_COLUMNS]
        wr.writerow([r.graph_id, r.method, *vals, _fmt(r.time_ms), r.status])
    return buf.getvalue()


def format_pvalue_csv(st: StatResult) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["method", *st.groups])
    for name, row in zip(st.groups, st.pairwise_p):
        wr.writerow([name, *(format(float(v), ".17g") for v in row)])
    return buf.getvalue()


def format_summary_md(report: BenchReport) -> str:
    metrics = list(report.means)
    lines = ["| method | " + " | ".join(metrics) + " | failed |",
             "|---" * (len(metrics) + 2) + "|"]
    best = {m: report.best_significant(m) for m in metrics}
    for name in report.methods:
        cells = []
        for metric in metrics:
            mean, std, cnt = report.means[metric][name]
            cell = "n/a" if cnt == 0 else f"{mean:.3f} ± {std:.3f}"
            cells.append(f"**{cell}**" if best[metric] == name else cell)
        lines.append(f"| {name} | " + " | ".join(cells) + f" | {report.failures(name)} |")
    lines.append("")
    lines.append("Lower is better for every metric. Bold marks the method with the best mean "
                 "when it differs from every other method (Conover-Iman, "
                 f"alpha = {report.alpha}).")
    if report.stats:
        lines.append("")
        lines.append("| metric | Kruskal-Wallis H | p |")
        lines.append("|---|---|---|")
        for metric, st in report.stats.items():
            lines.append(f"| {metric} | {st.h:.4f} | {st.p_omnibus:.3g} |")
    return "\n".join(lines) + "\n"


def write_report(report: BenchReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "raw.csv"]
    written[0].write_text(format_raw_csv(report), encoding="utf-8")
    for metric, st in report.stats.items():
        p = out / f"pvalues_{metric}.csv"
        p.write_text(format_pvalue_csv(st), encoding="utf-8")
        written.append(p)
    s = out / "summary.md"
    s.write_text(format_summary_md(report), encoding="utf-8")
    written.append(s)
    return written
