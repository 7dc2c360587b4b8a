"""Graph container, edge-list ingestion and serialization.

Nodes are dense integers ``0..n-1``. Edges are kept as parallel arrays
(``src``, ``dst``, ``weight``) plus a CSR adjacency used by the kernels. For
undirected graphs each edge is stored once with ``src < dst`` and appears in
the adjacency of both endpoints; for directed graphs the adjacency holds
out-neighbours only.
"""
from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field
from typing import Hashable, Iterable, NamedTuple, TextIO

import numpy as np

from .errors import ParseError, PreconditionError

log = logging.getLogger(__name__)


class NodeIdMap:
    """Bijection between external node labels and dense internal ids.

    Labels are assigned ids in order of first appearance.
    """

    def __init__(self, labels: Iterable[Hashable] = ()):
        self._labels: list = []
        self._ids: dict = {}
        for label in labels:
            self.add(label)

    def add(self, label) -> int:
        node = self._ids.get(label)
        if node is None:
            node = len(self._labels)
            self._ids[label] = node
            self._labels.append(label)
        return node

    def id(self, label) -> int:
        return self._ids[label]

    def label(self, node: int):
        return self._labels[node]

    def get(self, label, default=None):
        return self._ids.get(label, default)

    @property
    def labels(self) -> list:
        return list(self._labels)

    def __contains__(self, label) -> bool:
        return label in self._ids

    def __len__(self) -> int:
        return len(self._labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, NodeIdMap) and self._labels == other._labels

    def __repr__(self) -> str:
        return f"NodeIdMap({len(self)} labels)"

    @classmethod
    def identity(cls, n: int) -> "NodeIdMap":
        return cls(range(n))


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple graph with optional direction and positive edge weights.

    Build instances with :meth:`from_edges`, which drops self-loops and merges
    parallel edges by summing their weights.
    """

    directed: bool
    node_count: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    arc_weight: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, node_count, src, dst, weight=None, directed=False) -> "Graph":
        n = int(node_count)
        if n < 0:
            raise PreconditionError("node_count must be non-negative")
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise PreconditionError("src and dst must have the same length")
        if weight is None:
            weight = np.ones(src.shape[0], dtype=np.float64)
        else:
            weight = np.asarray(weight, dtype=np.float64).ravel()
            if weight.shape != src.shape:
                raise PreconditionError("weight must match the number of edges")
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise PreconditionError("edge endpoint out of range")
        if np.any(~(weight > 0)) or not np.all(np.isfinite(weight)):
            raise PreconditionError("edge weights must be finite and > 0")

        keep = src != dst
        src, dst, weight = src[keep], dst[keep], weight[keep]
        if not directed:
            src, dst = np.minimum(src, dst), np.maximum(src, dst)
        key = src * max(n, 1) + dst
        uniq, inverse = np.unique(key, return_inverse=True)
        merged = np.bincount(inverse, weights=weight, minlength=uniq.size)
        src = uniq // max(n, 1)
        dst = uniq % max(n, 1)

        if directed:
            a_src, a_dst, a_w = src, dst, merged
        else:
            a_src = np.concatenate([src, dst])
            a_dst = np.concatenate([dst, src])
            a_w = np.concatenate([merged, merged])
        order = np.lexsort((a_dst, a_src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(a_src, minlength=n), out=indptr[1:])
        return cls(
            directed=bool(directed),
            node_count=n,
            src=src.astype(np.int64),
            dst=dst.astype(np.int64),
            weight=merged.astype(np.float64),
            indptr=indptr,
            indices=a_dst[order].astype(np.int64),
            arc_weight=a_w[order].astype(np.float64),
        )

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    @property
    def arc_count(self) -> int:
        """Number of directed transmission arcs in the adjacency."""
        return int(self.indices.size)

    def neighbors(self, v: int) -> np.ndarray:
        """Out-neighbours when directed, all neighbours otherwise."""
        self._check_node(v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def arc_sources(self) -> np.ndarray:
        """Source node of every adjacency slot, aligned with ``indices``."""
        return np.repeat(np.arange(self.node_count, dtype=np.int64), np.diff(self.indptr))

    def degrees(self) -> np.ndarray:
        if self.directed:
            return (np.bincount(self.src, minlength=self.node_count)
                    + np.bincount(self.dst, minlength=self.node_count)).astype(np.int64)
        return np.diff(self.indptr)

    def symmetrized(self) -> "Graph":
        """Undirected, unweighted view; the graph itself if already undirected."""
        if not self.directed and np.all(self.weight == 1.0):
            return self
        return Graph.from_edges(self.node_count, self.src, self.dst, directed=False)

    def _check_node(self, v):
        if not 0 <= v < self.node_count:
            raise PreconditionError(f"node {v} out of range 0..{self.node_count - 1}")

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph({kind}, n={self.node_count}, m={self.edge_count})"


def degree(g: Graph, v: int) -> int:
    """Degree of ``v``; in-degree plus out-degree for directed graphs."""
    g._check_node(v)
    if not g.directed:
        return int(g.indptr[v + 1] - g.indptr[v])
    return int(np.count_nonzero(g.src == v) + np.count_nonzero(g.dst == v))


class LoadedGraph(NamedTuple):
    graph: Graph
    ids: NodeIdMap
    self_loops: int


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8")
    return source


def load_edge_list(source: TextIO | str | os.PathLike, directed: bool = False,
                   weighted: bool = False, reverse: bool = False,
                   ids: NodeIdMap | None = None) -> LoadedGraph:
    """Parse a whitespace-separated edge list.

    Each non-comment line is ``src dst`` or ``src dst weight``; lines starting
    with ``#`` and blank lines are skipped. With ``reverse=True`` every edge is
    flipped, which turns a "who retweeted whom" file into an information-flow
    graph. Self-loops are dropped and counted; parallel edges are merged with
    summed weights.

    Pass a pre-populated ``ids`` (e.g. from a sidecar node table) to pin the
    internal numbering; labels it already holds keep their ids and count as
    nodes even when they have no edges.
    """
    stream = _open_text(source)
    ids = NodeIdMap() if ids is None else NodeIdMap(ids.labels)
    src, dst, wts = [], [], []
    self_loops = 0
    records = 0
    try:
        for lineno, raw in enumerate(stream, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2 or len(parts) > 3:
                raise ParseError(f"expected 'src dst [weight]', got {line!r}", lineno)
            records += 1
            if weighted:
                if len(parts) != 3:
                    raise ParseError("missing weight column", lineno)
                try:
                    w = float(parts[2])
                except ValueError:
                    raise ParseError(f"bad weight {parts[2]!r}", lineno) from None
                if not (w > 0 and np.isfinite(w)):
                    raise ParseError(f"weight must be finite and > 0, got {parts[2]!r}", lineno)
            else:
                w = 1.0
            a, b = (parts[1], parts[0]) if reverse else (parts[0], parts[1])
            u, v = ids.add(_coerce_label(a)), ids.add(_coerce_label(b))
            if u == v:
                self_loops += 1
                continue
            src.append(u)
            dst.append(v)
            wts.append(w)
    finally:
        if stream is not source:
            stream.close()
    if records == 0:
        raise ParseError("empty edge list")
    if self_loops:
        log.warning("dropped %d self-loop(s)", self_loops)
    g = Graph.from_edges(len(ids), src, dst, wts, directed=directed)
    return LoadedGraph(g, ids, self_loops)


def _coerce_label(token: str):
    # integer-looking labels stay integers so generated files round-trip cleanly
    try:
        return int(token)
    except ValueError:
        return token


def format_weight(w: float) -> str:
    return repr(float(w)) if w != int(w) else str(int(w))


def write_edge_list(g: Graph, dest: TextIO, ids: NodeIdMap | None = None,
                    weighted: bool | None = None) -> None:
    """Write ``g`` in the format read by :func:`load_edge_list`."""
    if weighted is None:
        weighted = bool(np.any(g.weight != 1.0))
    label = (lambda v: str(v)) if ids is None else (lambda v: str(ids.label(v)))
    for u, v, w in zip(g.src.tolist(), g.dst.tolist(), g.weight.tolist()):
        if weighted:
            dest.write(f"{label(u)} {label(v)} {format_weight(w)}\n")
        else:
            dest.write(f"{label(u)} {label(v)}\n")


def edge_list_text(g: Graph, ids: NodeIdMap | None = None, weighted: bool | None = None) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf, ids, weighted)
    return buf.getvalue()
