"""Edge classes by sender/receiver role and the mean-weight ordering check."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .graph import Graph, NodeIdMap
from .structure import NodePartition


class EdgeClass(enum.IntEnum):
    """Transmission class of a directed edge; first letter is the sender."""

    CC = 0
    CP = 1
    PC = 2
    PP0 = 3  # periphery -> periphery, same community
    PP1 = 4  # periphery -> periphery, different communities

    @property
    def key(self) -> str:
        return self.name.lower()


# the order the mean weights are expected to follow, strongest first
HIERARCHY = (EdgeClass.CC, EdgeClass.CP, EdgeClass.PP0, EdgeClass.PP1, EdgeClass.PC)


def classify_edge(src_core: bool, dst_core: bool, src_comm: int, dst_comm: int) -> EdgeClass:
    if src_core:
        return EdgeClass.CC if dst_core else EdgeClass.CP
    if dst_core:
        return EdgeClass.PC
    return EdgeClass.PP0 if src_comm == dst_comm else EdgeClass.PP1


def classify_arcs(src, dst, part: NodePartition) -> np.ndarray:
    """Vectorized :func:`classify_edge` over arrays of sender/receiver ids."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    sc, dc = part.core[src], part.core[dst]
    same = part.community[src] == part.community[dst]
    out = np.where(same, EdgeClass.PP0, EdgeClass.PP1).astype(np.int8)
    out[~sc & dc] = EdgeClass.PC
    out[sc & ~dc] = EdgeClass.CP
    out[sc & dc] = EdgeClass.CC
    return out


@dataclass
class WeightReport:
    counts: dict
    means: dict
    ordering_holds: bool | None
    ordering_detail: list
    edges_total: int = 0
    edges_classified: int = 0
    unmatched: list = field(default_factory=list)

    @property
    def undefined(self) -> list:
        """Classes with no edges, whose mean weight is undefined."""
        return [c for c in EdgeClass if self.counts[c] == 0]

    def to_dict(self) -> dict:
        return {
            "classes": {c.key: {"n": int(self.counts[c]), "w": self.means[c]} for c in EdgeClass},
            "expected_order": [c.key for c in HIERARCHY],
            "ordering_holds": self.ordering_holds,
            "ordering_detail": [[c.key, w] for c, w in self.ordering_detail],
            "undefined": [c.key for c in self.undefined],
            "coverage": {
                "edges_total": self.edges_total,
                "edges_classified": self.edges_classified,
                "unmatched_nodes": [str(x) for x in self.unmatched],
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def weight_report(g: Graph, part: NodePartition, g_ids: NodeIdMap | None = None,
                  part_ids: NodeIdMap | None = None, strict: bool = True) -> WeightReport:
    """Per-class edge counts and mean weights of a weighted interaction graph.

    ``part`` comes from the structural graph. When both id maps are given,
    nodes are matched by label; otherwise ids are assumed to coincide. With
    ``strict=False`` edges touching unmatched nodes are skipped and reported in
    the coverage fields instead of raising.
    """
    src, dst, w = g.src, g.dst, g.weight
    if g_ids is not None and part_ids is not None:
        mapping = np.array([part_ids.get(g_ids.label(v), -1) for v in range(g.node_count)],
                           dtype=np.int64)
    else:
        if g.node_count > part.node_count:
            mapping = np.full(g.node_count, -1, dtype=np.int64)
            mapping[:part.node_count] = np.arange(part.node_count)
        else:
            mapping = np.arange(g.node_count, dtype=np.int64)
    ps, pd = mapping[src], mapping[dst]
    ok = (ps >= 0) & (pd >= 0)
    unmatched_nodes = np.unique(np.concatenate([src[ps < 0], dst[pd < 0]]))
    labels = [g_ids.label(v) if g_ids is not None else int(v) for v in unmatched_nodes]
    if labels and strict:
        shown = ", ".join(map(str, labels[:10]))
        more = f" (+{len(labels) - 10} more)" if len(labels) > 10 else ""
        raise PreconditionError(f"{len(labels)} node(s) missing from the partition: {shown}{more}")

    cls = classify_arcs(ps[ok], pd[ok], part)
    n_xy = np.bincount(cls, minlength=5)
    w_sum = np.bincount(cls, weights=w[ok], minlength=5)
    counts = {c: int(n_xy[c]) for c in EdgeClass}
    means = {c: (float(w_sum[c] / n_xy[c]) if n_xy[c] else None) for c in EdgeClass}

    if any(counts[c] == 0 for c in EdgeClass):
        holds = None
    else:
        seq = [means[c] for c in HIERARCHY]
        holds = all(a > b for a, b in zip(seq, seq[1:]))
    detail = sorted(((c, means[c]) for c in EdgeClass if means[c] is not None),
                    key=lambda cw: (-cw[1], cw[0]))
    return WeightReport(counts=counts, means=means, ordering_holds=holds,
                        ordering_detail=detail, edges_total=g.edge_count,
                        edges_classified=int(ok.sum()), unmatched=labels)


def interaction_graph(traces, node_count: int | None = None) -> Graph:
    """Directed who-infected-whom graph; edge weight counts repeat infections.

    Accepts any iterable of cascade traces run on the same node set.
    """
    src, dst = [], []
    n = node_count
    for tr in traces:
        s, d, _ = tr.infection_edges()
        src.append(s)
        dst.append(d)
        n = tr.node_count if n is None else n
    if n is None:
        raise PreconditionError("no traces given")
    src = np.concatenate(src) if src else np.empty(0, dtype=np.int64)
    dst = np.concatenate(dst) if dst else np.empty(0, dtype=np.int64)
    return Graph.from_edges(n, src, dst, directed=True)
