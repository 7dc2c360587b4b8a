"""Core/periphery split by k-shell coreness, and CNM community detection."""
from __future__ import annotations

import heapq
import math
import os
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from . import kernels
from .errors import ParseError, PreconditionError
from .graph import Graph, NodeIdMap

DEFAULT_CORE_FRACTION = 0.10


@dataclass(frozen=True, eq=False)
class NodePartition:
    """Per-node role (core or periphery), community label and coreness."""

    core: np.ndarray
    community: np.ndarray
    coreness: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "core", np.asarray(self.core, dtype=bool))
        object.__setattr__(self, "community", np.asarray(self.community, dtype=np.int64))
        object.__setattr__(self, "coreness", np.asarray(self.coreness, dtype=np.int64))
        if not (self.core.shape == self.community.shape == self.coreness.shape):
            raise PreconditionError("partition arrays must have equal length")
        if self.community.size and self.community.min() < 0:
            raise PreconditionError("community labels must be non-negative")

    @property
    def node_count(self) -> int:
        return int(self.core.size)

    @property
    def n_communities(self) -> int:
        return int(self.community.max()) + 1 if self.community.size else 0

    @property
    def core_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.core)

    @property
    def periphery_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.core)

    def role(self, v: int) -> str:
        return "core" if self.core[v] else "periphery"

    def __eq__(self, other):
        return (isinstance(other, NodePartition)
                and np.array_equal(self.core, other.core)
                and np.array_equal(self.community, other.community)
                and np.array_equal(self.coreness, other.coreness))


def k_shell(g: Graph, backend=None) -> np.ndarray:
    """Coreness (k-shell index) of every node. Directed graphs are symmetrized."""
    u = g.symmetrized()
    return kernels.kshell(u.indptr, u.indices, backend=backend)


def core_quota(n: int, fraction: float) -> int:
    # guard against 0.1 * 30 == 3.0000000000000004
    return min(n, int(math.ceil(round(fraction * n, 9))))


def select_core(coreness, g: Graph, fraction: float = DEFAULT_CORE_FRACTION) -> np.ndarray:
    """Boolean core mask holding exactly ``ceil(fraction * n)`` nodes.

    Nodes are ranked by coreness (desc), then degree (desc), then id (asc).
    """
    if not 0 < fraction < 1:
        raise PreconditionError(f"core fraction must be in (0, 1), got {fraction}")
    coreness = np.asarray(coreness, dtype=np.int64)
    n = coreness.size
    deg = g.symmetrized().degrees()
    order = np.lexsort((np.arange(n), -deg, -coreness))
    mask = np.zeros(n, dtype=bool)
    mask[order[:core_quota(n, fraction)]] = True
    return mask


def modularity(g: Graph, labels) -> float:
    """Newman modularity of a node labelling on the symmetrized, unweighted graph."""
    u = g.symmetrized()
    m = u.edge_count
    if m == 0:
        raise PreconditionError("modularity is undefined for a graph without edges")
    labels = np.asarray(labels)
    if labels.shape != (u.node_count,):
        raise PreconditionError("labels must cover every node")
    _, lab = np.unique(labels, return_inverse=True)
    intra = lab[u.src] == lab[u.dst]
    e_c = np.bincount(lab[u.src[intra]], minlength=lab.max() + 1)
    a_c = np.bincount(lab, weights=u.degrees(), minlength=lab.max() + 1)
    return float(np.sum(e_c / m - (a_c / (2.0 * m)) ** 2))


def detect_communities(g: Graph) -> tuple[np.ndarray, float]:
    """Clauset-Newman-Moore greedy agglomerative modularity maximization.

    Starts from singletons and repeatedly merges the adjacent pair with the
    largest modularity gain while that gain is positive. Equal gains go to the
    lexicographically smallest community-id pair. Returns dense labels
    (numbered by smallest member) and the modularity of the final partition.
    """
    u = g.symmetrized()
    n, m = u.node_count, u.edge_count
    if n == 0 or m == 0:
        raise PreconditionError("community detection needs at least one edge")
    deg = u.degrees().astype(np.float64)
    a = (deg / (2.0 * m)).tolist()
    dq: list[dict[int, float]] = [dict() for _ in range(n)]
    heap = []
    inv_m = 1.0 / m
    for i, j in zip(u.src.tolist(), u.dst.tolist()):
        val = inv_m - 2.0 * a[i] * a[j]
        dq[i][j] = val
        dq[j][i] = val
        heap.append((-val, i, j))
    heapq.heapify(heap)
    parent = list(range(n))
    alive = [True] * n

    while heap:
        neg, i, j = heapq.heappop(heap)
        if not (alive[i] and alive[j]) or dq[i].get(j) != -neg:
            continue
        if -neg <= 0.0:
            break
        # merge j into i (i < j)
        di, dj = dq[i], dq[j]
        for k in set(di) | set(dj):
            if k == i or k == j:
                continue
            if k in di and k in dj:
                val = di[k] + dj[k]
            elif k in di:
                val = di[k] - 2.0 * a[j] * a[k]
            else:
                val = dj[k] - 2.0 * a[i] * a[k]
            di[k] = val
            dq[k][i] = val
            dq[k].pop(j, None)
            heapq.heappush(heap, (-val, min(i, k), max(i, k)))
        di.pop(j, None)
        dq[j] = {}
        a[i] += a[j]
        a[j] = 0.0
        alive[j] = False
        parent[j] = i

    root = np.array(parent, dtype=np.int64)
    while True:
        nxt = root[root]
        if np.array_equal(nxt, root):
            break
        root = nxt
    _, first = np.unique(root, return_index=True)
    relabel = np.empty(n, dtype=np.int64)
    relabel[root[np.sort(first)]] = np.arange(first.size)
    labels = relabel[root]
    return labels, modularity(u, labels)


def analyze(g: Graph, core_fraction: float = DEFAULT_CORE_FRACTION, communities=None,
            backend=None) -> NodePartition:
    """Full structural partition: coreness, core mask, and community labels.

    Pass precomputed ``communities`` to skip CNM detection.
    """
    coreness = k_shell(g, backend=backend)
    core = select_core(coreness, g, core_fraction)
    if communities is None:
        communities, _ = detect_communities(g)
    return NodePartition(core=core, community=communities, coreness=coreness)


# --- sidecar table -------------------------------------------------------------

TABLE_HEADER = "# node community coreness role"


def write_partition(part: NodePartition, dest: TextIO, ids: NodeIdMap | None = None) -> None:
    dest.write(TABLE_HEADER + "\n")
    for v in range(part.node_count):
        label = v if ids is None else ids.label(v)
        dest.write(f"{label} {part.community[v]} {part.coreness[v]} {part.role(v)}\n")


def read_partition(source) -> tuple[NodePartition, NodeIdMap]:
    """Read a sidecar table; node order in the file defines internal ids."""
    from .graph import _coerce_label

    stream = open(source, encoding="utf-8") if isinstance(source, (str, os.PathLike)) else source
    ids = NodeIdMap()
    core, comm, coreness = [], [], []
    try:
        for lineno, raw in enumerate(stream, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (3, 4):
                raise ParseError("expected 'node community coreness [role]'", lineno)
            label = _coerce_label(parts[0])
            if label in ids:
                raise ParseError(f"duplicate node {parts[0]!r}", lineno)
            try:
                c, k = int(parts[1]), int(parts[2])
            except ValueError:
                raise ParseError("community and coreness must be integers", lineno) from None
            role = parts[3] if len(parts) == 4 else "periphery"
            if role not in ("core", "periphery"):
                raise ParseError(f"role must be core or periphery, got {role!r}", lineno)
            ids.add(label)
            comm.append(c)
            coreness.append(k)
            core.append(role == "core")
    finally:
        if stream is not source:
            stream.close()
    if not ids:
        raise ParseError("empty node table")
    return NodePartition(core=core, community=comm, coreness=coreness), ids
