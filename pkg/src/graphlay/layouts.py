"""Optimization based layout engines: PivotMDS, stress SGD and tsNET/tsNET*."""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import Graph, all_pairs_bfs, bfs_distances
from .tsnet import (
    SCHEDULES, Schedule, default_perplexity, full_loss, joint_p, loss_gradient,
)


INIT_JITTER = 1e-3


class LayoutConvergenceWarning(RuntimeWarning):
    pass


def _power_iteration(m: np.ndarray, v0: np.ndarray, max_iter: int, tol: float):
    v = v0 / np.linalg.norm(v0)
    lam = 0.0
    for _ in range(max_iter):
        w = m @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, v
        new = float(v @ w)
        v = w / norm
        if abs(new - lam) <= tol * abs(new):
            return float(v @ (m @ v)), v
        lam = new
    return float(v @ (m @ v)), v


def max_min_pivots(g: Graph, num_pivots: int, start: int) -> tuple[list[int], np.ndarray]:
    """Greedy farthest-point pivots; returns pivots and their N x P distance columns."""
    n = g.num_nodes
    pivots = [start]
    cols = [bfs_distances(g, start)]
    closest = cols[0].astype(float)
    while len(pivots) < num_pivots:
        nxt = int(np.argmax(closest))
        if closest[nxt] == 0:
            break
        pivots.append(nxt)
        cols.append(bfs_distances(g, nxt))
        closest = np.minimum(closest, cols[-1])
    return pivots, np.stack(cols, axis=1).astype(float)


def pivot_mds(g: Graph, num_pivots: int | None = None, seed: int = 0,
              max_iter: int = 200, tol: float = 1e-7) -> np.ndarray:
    n = g.num_nodes
    if n == 1:
        return np.zeros((1, 2))
    k = min(50, n) if num_pivots is None else min(int(num_pivots), n)
    if k < 2:
        raise ValueError("need at least two pivots")
    rng = np.random.default_rng(seed)
    _, dist = max_min_pivots(g, k, int(rng.integers(n)))
    d2 = dist ** 2
    c = -0.5 * (d2 - d2.mean(axis=1, keepdims=True) - d2.mean(axis=0, keepdims=True) + d2.mean())
    m = c @ c.T
    lam1, u1 = _power_iteration(m, rng.standard_normal(n), max_iter, tol)
    deflated = m - lam1 * np.outer(u1, u1)
    lam2, u2 = _power_iteration(deflated, rng.standard_normal(n), max_iter, tol)
    x = np.zeros((n, 2))
    x[:, 0] = math.sqrt(max(lam1, 0.0)) * u1
    if lam2 > 1e-12 * max(lam1, 1e-300):
        x[:, 1] = math.sqrt(lam2) * u2
    return x


def sgd_stress(g: Graph, iters: int = 15, seed: int = 0, eps: float = 0.1) -> np.ndarray:
    """Pairwise stress relaxation with an exponentially decaying step size."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    n = g.num_nodes
    rng = np.random.default_rng(seed)
    x0 = rng.random((n, 2))
    if n == 1:
        return x0
    d = all_pairs_bfs(g)
    iu, ju = np.triu_indices(n, 1)
    pair_d = d[iu, ju].astype(float)
    w = pair_d ** -2.0
    eta_max = 1.0 / w.min()
    eta_min = eps / w.max()
    decay = math.log(eta_max / eta_min) / (iters - 1) if iters > 1 else 0.0
    xs = x0[:, 0].tolist()
    ys = x0[:, 1].tolist()
    pairs = list(zip(iu.tolist(), ju.tolist(), pair_d.tolist(), w.tolist()))
    for t in range(iters):
        eta = eta_max * math.exp(-decay * t)
        for idx in rng.permutation(len(pairs)).tolist():
            i, j, dij, wij = pairs[idx]
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            mag = math.hypot(dx, dy)
            if mag == 0.0:
                ang = rng.random() * 2.0 * math.pi
                dx, dy, mag = math.cos(ang), math.sin(ang), 1.0
            mu = min(1.0, wij * eta)
            r = mu * (mag - dij) / (2.0 * mag)
            xs[i] -= r * dx
            ys[i] -= r * dy
            xs[j] += r * dx
            ys[j] += r * dy
    return np.column_stack([xs, ys])


@dataclass(frozen=True)
class TsnetOptions:
    max_iter_stage1: int = 1000
    max_iter_stage2: int = 1000
    learning_rate: float = 1.0
    grad_clip: float = 5.0
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    momentum_switch: int = 250
    tol: float = 1e-7
    window: int = 50
    perplexity: float | None = None
    n_max: int = 128


def _descend(x, p, weights, opts: TsnetOptions, max_iter: int, switch: int | None,
             history: list | None):
    """Momentum gradient descent on one stage; returns (best layout, converged)."""
    v = np.zeros_like(x)
    loss = full_loss(x, p, weights)
    best, best_x = loss, x.copy()
    trace = [loss]
    converged = False
    for it in range(max_iter):
        mom = opts.momentum_initial if switch is not None and it < switch else opts.momentum_final
        g = loss_gradient(x, p, weights)
        gn = np.linalg.norm(g)
        if gn > opts.grad_clip:
            g *= opts.grad_clip / gn
        v = mom * v - opts.learning_rate * g
        x = x + v
        new = full_loss(x, p, weights)
        if new > loss:
            # adaptive restart: drop accumulated momentum once it overshoots
            v[:] = 0.0
        loss = new
        trace.append(loss)
        if loss < best:
            best, best_x = loss, x.copy()
        if len(trace) > opts.window:
            old = trace[-1 - opts.window]
            if abs(old - loss) <= opts.tol * max(abs(old), 1e-12):
                converged = True
                break
    if history is not None:
        history.append(trace)
    return best_x, converged


def tsnet_layout(g: Graph, sched: Schedule | str = "tsnet", seed: int = 0,
                 opts: TsnetOptions | None = None, return_history: bool = False):
    """Two-stage gradient descent on the t-SNE graph layout cost.

    The ``tsnet_star`` schedule starts from PivotMDS rescaled to unit RMS
    radius; ``tsnet`` starts from uniform noise in the unit square. Each stage
    keeps the best layout seen. With ``return_history`` the per-stage loss
    traces are returned alongside the layout.
    """
    if isinstance(sched, str):
        sched = SCHEDULES[sched.replace("-", "_")]
    opts = opts or TsnetOptions()
    n = g.num_nodes
    rng = np.random.default_rng(seed)
    if n == 1:
        x = np.zeros((1, 2))
        return (x, []) if return_history else x
    d = all_pairs_bfs(g)
    perp = opts.perplexity if opts.perplexity is not None else default_perplexity(n, opts.n_max)
    p = joint_p(d, perp)
    if sched.variant == "tsnet_star":
        x = pivot_mds(g, seed=seed)
        x = x - x.mean(axis=0)
        rms = math.sqrt((x ** 2).sum(axis=1).mean())
        x = x / rms if rms > 0 else rng.random((n, 2))
        # PivotMDS can return an exactly collinear layout (e.g. paths), which the
        # gradient never leaves; a tiny seeded jitter breaks that symmetry
        x = x + INIT_JITTER * rng.standard_normal((n, 2))
    else:
        x = rng.random((n, 2))
    history: list | None = [] if return_history else None
    x, ok1 = _descend(x, p, sched.stage1, opts, opts.max_iter_stage1, opts.momentum_switch, history)
    x, ok2 = _descend(x, p, sched.stage2, opts, opts.max_iter_stage2, opts.momentum_switch, history)
    if not (ok1 and ok2):
        warnings.warn("tsNET stopped at the iteration cap; returning best layout seen",
                      LayoutConvergenceWarning, stacklevel=2)
    return (x, history) if return_history else x


def format_layout_csv(x: np.ndarray, node_ids: Sequence[str]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["node_id", "x", "y"])
    for nid, (a, b) in zip(node_ids, np.asarray(x, dtype=float)):
        wr.writerow([nid, format(float(a), ".17g"), format(float(b), ".17g")])
    return buf.getvalue()


def write_layout_csv(path: str | Path, x: np.ndarray, node_ids: Sequence[str]) -> None:
    Path(path).write_text(format_layout_csv(x, node_ids), encoding="utf-8")


def parse_layout_csv(text: str) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["node_id", "x", "y"]:
        raise ValueError("layout CSV must start with header node_id,x,y")
    ids, pts = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected 3 fields")
        try:
            pts.append((float(row[1]), float(row[2])))
        except ValueError:
            raise ValueError(f"line {lineno}: bad coordinate") from None
        ids.append(row[0])
    return ids, np.array(pts, dtype=float).reshape(-1, 2)


def read_layout_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    return parse_layout_csv(Path(path).read_text(encoding="utf-8"))


def align_layout(g: Graph, ids: Sequence[str], pts: np.ndarray) -> np.ndarray:
    """Reorder CSV rows to graph index order; raise listing any missing ids."""
    pos = dict(zip(ids, map(tuple, pts)))
    missing = [i for i in g.node_ids if i not in pos]
    if missing:
        raise ValueError(f"layout missing node ids: {', '.join(missing[:20])}")
    return np.array([pos[i] for i in g.node_ids], dtype=float)
