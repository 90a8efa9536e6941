"""Simple undirected graphs, file parsing and hop distances."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Raised when a graph file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DisconnectedGraphError(ValueError):
    """Raised when a graph that must be connected is not."""

    def __init__(self, components: list[list[str]]):
        self.components = components
        shown = "; ".join(
            "{" + ", ".join(c[:5]) + (", ..." if len(c) > 5 else "") + "}"
            for c in components[:4]
        )
        super().__init__(f"graph has {len(components)} connected components: {shown}")


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph over dense indices ``0..num_nodes-1``.

    ``node_ids`` maps each index back to the identifier used in the source file.
    """

    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    node_ids: tuple[str, ...] = ()
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.num_nodes
        if n < 1:
            raise ValueError("graph needs at least one node")
        canon = set()
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for {n} nodes")
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            canon.add((min(u, v), max(u, v)))
        edges = tuple(sorted(canon))
        object.__setattr__(self, "edges", edges)
        if not self.node_ids:
            object.__setattr__(self, "node_ids", tuple(str(i) for i in range(n)))
        elif len(self.node_ids) != n:
            raise ValueError("node_ids length does not match num_nodes")
        else:
            object.__setattr__(self, "node_ids", tuple(str(x) for x in self.node_ids))
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def from_edges(cls, num_nodes: int, edges: Iterable[Sequence[int]],
                   node_ids: Sequence[str] = (), require_connected: bool = True) -> "Graph":
        g = cls(num_nodes, tuple((int(u), int(v)) for u, v in edges), tuple(node_ids))
        if require_connected:
            check_connected(g)
        return g

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.num_nodes, self.num_nodes))
        e = self.edge_array()
        a[e[:, 0], e[:, 1]] = 1.0
        a[e[:, 1], e[:, 0]] = 1.0
        return a

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the graph with node ``i`` moved to index ``perm[i]``."""
        perm = [int(p) for p in perm]
        if sorted(perm) != list(range(self.num_nodes)):
            raise ValueError("perm is not a permutation")
        ids = [""] * self.num_nodes
        for i, p in enumerate(perm):
            ids[p] = self.node_ids[i]
        return Graph(self.num_nodes, tuple((perm[u], perm[v]) for u, v in self.edges), tuple(ids))


def connected_components(g: Graph) -> list[list[int]]:
    seen = [False] * g.num_nodes
    comps = []
    for s in range(g.num_nodes):
        if seen[s]:
            continue
        seen[s] = True
        comp, queue = [s], deque([s])
        while queue:
            v = queue.popleft()
            for u in g.adjacency[v]:
                if not seen[u]:
                    seen[u] = True
                    comp.append(u)
                    queue.append(u)
        comps.append(sorted(comp))
    return comps


def is_connected(g: Graph) -> bool:
    return len(connected_components(g)) == 1


def check_connected(g: Graph) -> None:
    comps = connected_components(g)
    if len(comps) > 1:
        raise DisconnectedGraphError([[g.node_ids[i] for i in c] for c in comps])


def degree_stats(g: Graph) -> tuple[int, int, float]:
    deg = g.degrees
    return min(deg), max(deg), sum(deg) / len(deg)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop counts from ``source``; unreachable nodes get -1."""
    row = np.full(g.num_nodes, -1, dtype=np.int64)
    row[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        nd = row[v] + 1
        for u in g.adjacency[v]:
            if row[u] < 0:
                row[u] = nd
                queue.append(u)
    return row


def all_pairs_bfs(g: Graph) -> np.ndarray:
    """Hop-count distance matrix of a connected graph (read-only int array)."""
    d = np.stack([bfs_distances(g, s) for s in range(g.num_nodes)])
    if (d < 0).any():
        check_connected(g)
    d.flags.writeable = False
    return d


def _as_text(data: bytes | str) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def parse_edge_list(data: bytes | str) -> Graph:
    """Parse whitespace separated ``u v`` lines; ``#`` starts a comment line."""
    edges = []
    max_index = -1
    for lineno, raw in enumerate(_as_text(data).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got {raw!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer node index in {raw!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphFormatError("negative node index", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop on node {u}", lineno)
        edges.append((u, v))
        max_index = max(max_index, u, v)
    if not edges:
        raise GraphFormatError("no edges in input")
    return Graph.from_edges(max_index + 1, edges)


def parse_graphml(data: bytes | str) -> Graph:
    """Parse the node/edge subset of GraphML; node ids are remapped in document order."""
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise GraphFormatError(f"malformed XML: {exc}") from None

    def local(tag: str) -> str:
        return tag.rsplit("}", 1)[-1]

    graph_el = next((el for el in root.iter() if local(el.tag) == "graph"), None)
    if graph_el is None:
        raise GraphFormatError("no <graph> element")
    index: dict[str, int] = {}
    ids: list[str] = []
    raw_edges = []
    for el in graph_el.iter():
        tag = local(el.tag)
        if tag == "node":
            nid = el.get("id")
            if nid is None:
                raise GraphFormatError("<node> without id")
            if nid not in index:
                index[nid] = len(ids)
                ids.append(nid)
        elif tag == "edge":
            s, t = el.get("source"), el.get("target")
            if s is None or t is None:
                raise GraphFormatError("<edge> without source/target")
            raw_edges.append((s, t))
    edges = []
    for s, t in raw_edges:
        for x in (s, t):
            if x not in index:
                raise GraphFormatError(f"edge references undeclared node {x!r}")
        if s == t:
            raise GraphFormatError(f"self-loop on node {s!r}")
        edges.append((index[s], index[t]))
    if not ids:
        raise GraphFormatError("graph has no nodes")
    return Graph.from_edges(len(ids), edges, ids)


def format_edge_list(g: Graph) -> str:
    return "".join(f"{u} {v}\n" for u, v in g.edges)


def format_graphml(g: Graph) -> str:
    from xml.sax.saxutils import quoteattr

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <graph id="G" edgedefault="undirected">',
    ]
    lines += [f"    <node id={quoteattr(i)}/>" for i in g.node_ids]
    lines += [
        f"    <edge source={quoteattr(g.node_ids[u])} target={quoteattr(g.node_ids[v])}/>"
        for u, v in g.edges
    ]
    lines += ["  </graph>", "</graphml>", ""]
    return "\n".join(lines)


def read_graph(path: str | Path) -> Graph:
    """Load an edge list or GraphML file, chosen by extension."""
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() in (".graphml", ".xml"):
        return parse_graphml(data)
    return parse_edge_list(data)
