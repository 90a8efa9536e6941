"""Drawing quality metrics, all oriented so that lower is better."""
from __future__ import annotations

import math
from fractions import Fraction
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .graph import Graph, all_pairs_bfs


class DegenerateLayoutWarning(RuntimeWarning):
    pass


class MCLConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class MetricReport:
    stress: float
    aspect_ratio: float
    angular_resolution: float
    crossing_count: float
    cluster_overlap: float
    neighborhood_preservation: float
    execution_time_ms: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def _pairwise(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt((diff ** 2).sum(-1))


def optimal_scale(x, d) -> float | None:
    """Closed-form uniform scale minimising weighted stress, or None if undefined."""
    x = np.asarray(x, dtype=float)
    delta = np.asarray(d, dtype=float)
    off = ~np.eye(len(delta), dtype=bool)
    dist = _pairwise(x)[off]
    dl = delta[off]
    w = dl ** -2.0
    den = (w * dist * dist).sum()
    if den <= 0:
        return None
    return float((w * dl * dist).sum() / den)


def stress_metric(x, d, scaled: bool = True, normalization: str = "pairs") -> float:
    """Weighted stress with w_ij = delta_ij^-2 over ordered pairs.

    ``normalization="pairs"`` divides the sum by N^2 (a mean over node pairs);
    ``"nodes"`` divides by N. With ``scaled`` the layout is first multiplied by
    the optimal uniform scale, making the value scale invariant.
    """
    x = np.asarray(x, dtype=float)
    delta = np.asarray(d, dtype=float)
    n = len(delta)
    alpha = 1.0
    if scaled:
        a = optimal_scale(x, delta)
        if a is None:
            warnings.warn("all points coincide; stress left unscaled", DegenerateLayoutWarning,
                          stacklevel=2)
        else:
            alpha = a
    off = ~np.eye(n, dtype=bool)
    dist = alpha * _pairwise(x)[off]
    dl = delta[off]
    total = float((dl ** -2.0 * (dist - dl) ** 2).sum())
    if normalization == "pairs":
        return total / (n * n)
    if normalization == "nodes":
        return total / n
    raise ValueError(f"unknown normalization {normalization!r}")


def aspect_ratio_metric(x, rotations: int | None = None) -> float:
    """1 - worst min(w, h)/max(w, h) of the bounding box over a grid of rotations."""
    x = np.asarray(x, dtype=float)
    k = len(x) if rotations is None else int(rotations)
    worst = 1.0
    for t in range(k):
        th = 2.0 * math.pi * t / k
        c, s = math.cos(th), math.sin(th)
        rx = c * x[:, 0] - s * x[:, 1]
        ry = s * x[:, 0] + c * x[:, 1]
        w, h = rx.max() - rx.min(), ry.max() - ry.min()
        big = max(w, h)
        ratio = min(w, h) / big if big > 0 else 0.0
        worst = min(worst, ratio)
    return 1.0 - worst


def angular_resolution_metric(x, g: Graph) -> float:
    x = np.asarray(x, dtype=float)
    dmax = max(g.degrees)
    if dmax < 2:
        return 0.0
    theta_g = 2.0 * math.pi / dmax
    best = math.inf
    for j, nbrs in enumerate(g.adjacency):
        if len(nbrs) < 2:
            continue
        vec = x[list(nbrs)] - x[j]
        if (np.hypot(vec[:, 0], vec[:, 1]) == 0).any():
            return 1.0
        ang = np.sort(np.arctan2(vec[:, 1], vec[:, 0]))
        gaps = np.diff(np.append(ang, ang[0] + 2.0 * math.pi))
        # separation between two directions is at most pi
        sep = np.minimum(gaps, 2.0 * math.pi - gaps)
        best = min(best, float(sep.min()))
    return 1.0 - best / theta_g


def _orient(ax, ay, bx, by, cx, cy):
    v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if isinstance(v, float) and abs(v) <= 1e-12 * (abs(bx - ax) + abs(by - ay)) * (
            abs(cx - ax) + abs(cy - ay)):
        # near-degenerate: redo the determinant exactly
        ax, ay, bx, by, cx, cy = map(Fraction, (ax, ay, bx, by, cx, cy))
        v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (v > 0) - (v < 0)


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def segments_intersect(p1, p2, p3, p4) -> bool:
    """Closed segment intersection by orientation tests (works for floats and Fractions)."""
    o1 = _orient(*p1, *p2, *p3)
    o2 = _orient(*p1, *p2, *p4)
    o3 = _orient(*p3, *p4, *p1)
    o4 = _orient(*p3, *p4, *p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(*p1, *p2, *p3):
        return True
    if o2 == 0 and _on_segment(*p1, *p2, *p4):
        return True
    if o3 == 0 and _on_segment(*p3, *p4, *p1):
        return True
    if o4 == 0 and _on_segment(*p3, *p4, *p2):
        return True
    return False


def crossing_count(x, g: Graph) -> int:
    """Number of edge pairs without a shared endpoint whose segments meet."""
    pts = [(float(a), float(b)) for a, b in np.asarray(x, dtype=float)]
    edges = g.edges
    count = 0
    for a in range(len(edges)):
        u1, v1 = edges[a]
        for b in range(a + 1, len(edges)):
            u2, v2 = edges[b]
            if u1 in (u2, v2) or v1 in (u2, v2):
                continue
            if segments_intersect(pts[u1], pts[v1], pts[u2], pts[v2]):
                count += 1
    return count


def mcl_cluster(g: Graph, expansion: int = 2, inflation: float = 2.0, prune: float = 1e-5,
                max_iter: int = 100, tol: float = 1e-8) -> np.ndarray:
    """Markov clustering; returns a cluster id per node, numbered by first member."""
    n = g.num_nodes
    m = g.adjacency_matrix() + np.eye(n)
    m /= m.sum(axis=0, keepdims=True)
    for _ in range(max_iter):
        prev = m
        m = np.linalg.matrix_power(m, expansion) ** inflation
        m[m < prune] = 0.0
        m /= m.sum(axis=0, keepdims=True)
        if np.abs(m - prev).max() < tol:
            break
    else:
        warnings.warn("MCL did not converge; using last iterate", MCLConvergenceWarning,
                      stacklevel=2)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    # every surviving row is an attractor that pulls in its nonzero columns
    for r in range(n):
        for c in np.flatnonzero(m[r] > 0):
            ra, rb = find(r), find(int(c))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    labels = np.empty(n, dtype=np.int64)
    ids: dict[int, int] = {}
    for i in range(n):
        labels[i] = ids.setdefault(find(i), len(ids))
    return labels


def _unit_square(x: np.ndarray) -> np.ndarray:
    lo = x.min(axis=0)
    span = (x.max(axis=0) - lo).max()
    if span == 0:
        return np.zeros_like(x)
    return (x - lo) / span


def cluster_overlap_metric(x, clusters, r: float = 0.2, normalize: bool = True) -> float:
    x = np.asarray(x, dtype=float)
    if normalize:
        x = _unit_square(x)
    clusters = np.asarray(clusters)
    dist = _pairwise(x)
    n = len(x)
    near = (dist < r) & ~np.eye(n, dtype=bool)
    wt = np.where(near, 1.0 - dist, 0.0)
    other = clusters[:, None] != clusters[None, :]
    den = wt.sum(axis=1)
    num = (wt * other).sum(axis=1)
    ratio = np.divide(num, den, out=np.zeros(n), where=near.any(axis=1) & (den > 0))
    has = near.any(axis=1)
    if not has.any():
        return 0.0
    return float(ratio[has].mean())


def neighborhood_preservation_metric(x, g: Graph, k: int = 2, d=None) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    x = np.asarray(x, dtype=float)
    delta = all_pairs_bfs(g) if d is None else np.asarray(d)
    n = len(x)
    dist = _pairwise(x)
    idx = np.arange(n)
    total = 0.0
    for i in range(n):
        u = set(np.flatnonzero((delta[i] <= k) & (idx != i)).tolist())
        others = idx[idx != i]
        order = others[np.lexsort((others, dist[i, others]))]
        y = set(order[: len(u)].tolist())
        union = u | y
        total += len(u & y) / len(union) if union else 1.0
    return 1.0 - total / n


def evaluate_all(x, g: Graph, d=None, timing_ms: float = 0.0, k: int = 2, r: float = 0.2,
                 rotations: int | None = None, stress_scaled: bool = True,
                 stress_normalization: str = "pairs") -> MetricReport:
    x = np.asarray(x, dtype=float)
    d = all_pairs_bfs(g) if d is None else d
    return MetricReport(
        stress=stress_metric(x, d, scaled=stress_scaled, normalization=stress_normalization),
        aspect_ratio=aspect_ratio_metric(x, rotations),
        angular_resolution=angular_resolution_metric(x, g),
        crossing_count=float(crossing_count(x, g)),
        cluster_overlap=cluster_overlap_metric(x, mcl_cluster(g), r),
        neighborhood_preservation=neighborhood_preservation_metric(x, g, k, d),
        execution_time_ms=float(timing_ms),
    )
