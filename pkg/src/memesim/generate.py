"""Synthetic networks: SCCP (scale-free, communities, core-periphery) and Erdős–Rényi."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PreconditionError
from .graph import Graph
from .structure import DEFAULT_CORE_FRACTION, NodePartition, k_shell, select_core

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SccpParams:
    """Inputs of the SCCP generator.

    ``t`` holds the number of nodes to grow into each community (one entry per
    community); a single integer is broadcast to all ``k`` communities.
    """

    k: int
    s: int
    t: tuple
    f: float
    r1: int
    r2: int
    core_fraction: float = DEFAULT_CORE_FRACTION
    rng_seed: int = 0

    def __post_init__(self):
        t = self.t
        if isinstance(t, (int, np.integer)):
            t = (int(t),) * self.k
        object.__setattr__(self, "t", tuple(int(x) for x in t))
        self.validate()

    def validate(self):
        if self.k < 1 or self.s < 1:
            raise PreconditionError("k and s must be positive")
        if self.k * self.s < 2:
            raise PreconditionError("k * s must be at least 2")
        if self.s < 2:
            raise PreconditionError("initial clique size s must be >= 2")
        if len(self.t) != self.k:
            raise PreconditionError(f"need {self.k} entries in t, got {len(self.t)}")
        if any(x < 0 for x in self.t):
            raise PreconditionError("t entries must be non-negative")
        if not 0.5 <= self.f <= 1.0:
            raise PreconditionError(f"f must lie in [0.5, 1], got {self.f}")
        if not 1 <= self.r1 <= self.r2:
            raise PreconditionError(f"need 1 <= r1 <= r2, got [{self.r1}, {self.r2}]")
        if not 0 < self.core_fraction < 1:
            raise PreconditionError("core_fraction must be in (0, 1)")

    @property
    def node_count(self) -> int:
        return self.k * self.s + sum(self.t)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["t"] = list(self.t)
        return d


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """A generated SCCP graph with its community labels and core set.

    ``community`` uses label ``k`` for the extracted core; ``seed_community``
    keeps the community each node was grown in.
    """

    graph: Graph
    community: np.ndarray
    coreness: np.ndarray
    core: np.ndarray
    seed_community: np.ndarray
    params: SccpParams
    growth_intra: int = 0
    growth_inter: int = 0
    capped: int = 0
    m_drawn: list = field(default_factory=list, repr=False)

    @property
    def partition(self) -> NodePartition:
        return NodePartition(core=self.core, community=self.community, coreness=self.coreness)

    @property
    def n_communities(self) -> int:
        return int(self.community.max()) + 1

    @property
    def intra_fraction(self) -> float:
        total = self.growth_intra + self.growth_inter
        return self.growth_intra / total if total else float("nan")


def split_edges(m: int, f: float) -> tuple[int, int]:
    """Intra/inter-community edge counts for a node making ``m`` edges.

    ``round`` is Python's round-half-to-even, so f=0.7, m=5 gives 4 intra
    edges (3.5 -> 4) and m=4 gives 3 (2.8 -> 3).
    """
    intra = int(round(f * m))
    return intra, m - intra


def preferential_select(candidates, degrees, count: int, rng: np.random.Generator,
                        arriving: int | None = None) -> np.ndarray:
    """Draw ``count`` distinct candidates with probability proportional to degree + 1.

    ``degrees`` is indexed by node id. Repeat draws are rejected and redrawn,
    i.e. sequential sampling without replacement. Returns ids in draw order.
    """
    cand = np.asarray(candidates, dtype=np.int64)
    if arriving is not None:
        cand = cand[cand != arriving]
    if count < 0:
        raise PreconditionError("count must be non-negative")
    if count > cand.size:
        raise PreconditionError(f"cannot pick {count} targets from {cand.size} candidates")
    if count == 0:
        return np.empty(0, dtype=np.int64)
    weights = np.asarray(degrees, dtype=np.float64)[cand] + 1.0
    if np.any(weights <= 0):
        raise PreconditionError("degrees must be non-negative")
    cum = np.cumsum(weights)
    total = cum[-1]
    chosen: list[int] = []
    taken = set()
    rejects = 0
    while len(chosen) < count:
        idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
        idx = min(idx, cand.size - 1)
        if idx in taken:
            rejects += 1
            if rejects > 64 + 8 * count:
                # heavy collisions: drop taken mass and keep drawing exactly
                weights[list(taken)] = 0.0
                cum = np.cumsum(weights)
                total = cum[-1]
                rejects = 0
            continue
        taken.add(idx)
        chosen.append(idx)
    return cand[chosen]


def generate_sccp(p: SccpParams) -> LabeledGraph:
    """Grow an SCCP network and extract its core as community ``k``."""
    rng = np.random.default_rng(p.rng_seed)
    n = p.node_count
    comm = np.full(n, -1, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    src: list[int] = []
    dst: list[int] = []

    members: list[list[int]] = []
    nxt = 0
    for c in range(p.k):
        block = list(range(nxt, nxt + p.s))
        for i in block:
            for j in block:
                if i < j:
                    src.append(i)
                    dst.append(j)
        deg[block] = p.s - 1
        comm[block] = c
        members.append(block)
        nxt += p.s

    intra_total = inter_total = capped = 0
    m_drawn = []
    for step in range(max(p.t, default=0)):
        for c in range(p.k):
            if step >= p.t[c]:
                continue
            v = nxt
            nxt += 1
            m = int(rng.integers(p.r1, p.r2 + 1))
            m_drawn.append(m)
            want_in, want_out = split_edges(m, p.f)
            own = np.asarray(members[c], dtype=np.int64)
            existing = comm[:v]
            other = np.flatnonzero((existing >= 0) & (existing != c))
            n_in, n_out = min(want_in, own.size), min(want_out, other.size)
            if (n_in, n_out) != (want_in, want_out):
                capped += 1
                log.debug("node %d: m=%d capped to %d+%d", v, m, n_in, n_out)
            targets = np.concatenate([
                preferential_select(own, deg, n_in, rng),
                preferential_select(other, deg, n_out, rng),
            ])
            for u in targets.tolist():
                src.append(u)
                dst.append(v)
            deg[targets] += 1
            deg[v] = targets.size
            intra_total += n_in
            inter_total += n_out
            comm[v] = c
            members[c].append(v)
    if capped:
        log.info("%d arriving node(s) had m capped by the number of eligible targets", capped)

    g = Graph.from_edges(n, src, dst)
    coreness = k_shell(g)
    core = select_core(coreness, g, p.core_fraction)
    community = comm.copy()
    community[core] = p.k
    return LabeledGraph(graph=g, community=community, coreness=coreness, core=core,
                        seed_community=comm, params=p, growth_intra=intra_total,
                        growth_inter=inter_total, capped=capped, m_drawn=m_drawn)


def _pair_from_index(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # row-major enumeration of pairs i < j; row i holds n-1-i pairs
    idx = np.asarray(idx, dtype=np.int64)
    row_start = lambda i: i * (2 * n - i - 1) // 2  # noqa: E731
    i = np.floor((2 * n - 1 - np.sqrt((2.0 * n - 1) ** 2 - 8.0 * idx)) / 2).astype(np.int64)
    i = np.clip(i, 0, n - 2)
    # correct float rounding at row boundaries
    i = np.where(row_start(i) > idx, i - 1, i)
    i = np.where(row_start(i + 1) <= idx, i + 1, i)
    j = idx - row_start(i) + i + 1
    return i, j


def generate_er(n: int, m_edges: int, rng_seed: int = 0) -> Graph:
    """G(n, M): exactly ``m_edges`` distinct edges drawn uniformly at random."""
    if n < 1:
        raise PreconditionError("n must be positive")
    total = n * (n - 1) // 2
    if not 0 <= m_edges <= total:
        raise PreconditionError(f"m_edges must be in [0, {total}] for n={n}, got {m_edges}")
    rng = np.random.default_rng(rng_seed)
    idx = rng.choice(total, size=m_edges, replace=False) if m_edges else np.empty(0, np.int64)
    i, j = _pair_from_index(np.sort(idx), n)
    return Graph.from_edges(n, i, j)


def er_baseline(reference: Graph, rng_seed: int = 0) -> Graph:
    """ER graph with the node and edge counts of ``reference``."""
    return generate_er(reference.node_count, reference.edge_count, rng_seed)


def median_degree_ratio(g: Graph) -> float:
    """max degree / median degree; a quick heavy-tail indicator."""
    deg = g.degrees()
    med = float(np.median(deg))
    return math.inf if med == 0 else float(deg.max()) / med
