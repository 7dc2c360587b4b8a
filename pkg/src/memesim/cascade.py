"""Edge-diversity cascade model.

Every infected node keeps trying, once per iteration, to infect each
uninfected neighbour; the success probability of a try depends on the class
of the edge (core/periphery sender and receiver, same or different community
for periphery pairs). Infections are synchronous: a node infected in
iteration ``t`` first transmits in ``t + 1``. There is no recovery.

Repeated tries on an edge are independent Bernoulli trials, so the number of
iterations until an edge first succeeds is geometric. ``simulate`` samples that
delay once per edge and propagates infection times like a shortest-path
search; this is distributionally identical to flipping a coin per edge per
iteration and costs O(|E|) per run regardless of how long the cascade is.
"""
from __future__ import annotations

import concurrent.futures as cf
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import kernels
from .classify import EdgeClass, classify_arcs
from .errors import PreconditionError
from .graph import Graph
from .structure import NodePartition

log = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 10_000


@dataclass(frozen=True)
class ProbabilityTable:
    p_cc: float
    p_cp: float
    p_pc: float
    p_pp0: float
    p_pp1: float

    def __post_init__(self):
        for name, val in self.items():
            if not 0.0 <= val <= 1.0:
                raise PreconditionError(f"{name} must be in [0, 1], got {val}")

    def items(self):
        return [(f"p_{c.key}", self[c]) for c in EdgeClass]

    def __getitem__(self, cls: EdgeClass) -> float:
        return getattr(self, f"p_{EdgeClass(cls).key}")

    @property
    def hierarchy_ok(self) -> bool:
        """True when p_cc > p_cp > p_pp0 > p_pp1 > p_pc."""
        return self.p_cc > self.p_cp > self.p_pp0 > self.p_pp1 > self.p_pc

    def as_array(self) -> np.ndarray:
        """Probabilities indexed by :class:`EdgeClass` value."""
        return np.array([self[c] for c in EdgeClass], dtype=np.float64)

    def to_dict(self) -> dict:
        return dict(self.items())


def make_uniform(p: float) -> ProbabilityTable:
    return ProbabilityTable(p, p, p, p, p)


def paper_ebh_table() -> ProbabilityTable:
    """Edge-class probabilities used for the reference EBH simulations."""
    return ProbabilityTable(p_cc=0.006, p_cp=0.004, p_pc=0.00001, p_pp0=0.0003, p_pp1=0.0001)


UNIFORM_BASELINE = 0.0002

SEED_STRATEGIES = ("explicit", "periphery", "core", "community", "multi-community", "uniform")


@dataclass(frozen=True)
class SeedSpec:
    """How to pick the initially infected nodes.

    Strategies: ``explicit`` (use ``nodes``), ``periphery``, ``core``,
    ``uniform`` (any node), ``community`` (periphery nodes of
    ``community_ids[0]``) and ``multi-community`` (count split as evenly as
    possible over ``community_ids``, earlier ids getting the remainder).
    """

    strategy: str
    count: int = 1
    community_ids: tuple = ()
    nodes: tuple = ()
    rng_seed: int = 0

    def __post_init__(self):
        if self.strategy not in SEED_STRATEGIES:
            raise PreconditionError(f"unknown seed strategy {self.strategy!r}")
        object.__setattr__(self, "community_ids", tuple(int(c) for c in self.community_ids))
        object.__setattr__(self, "nodes", tuple(int(v) for v in self.nodes))
        if self.strategy == "explicit":
            object.__setattr__(self, "count", len(self.nodes))
        if self.count < 1:
            raise PreconditionError(f"seed count must be positive (strategy {self.strategy}, "
                                    f"count {self.count})")
        if self.strategy in ("community", "multi-community") and not self.community_ids:
            raise PreconditionError(f"strategy {self.strategy} needs community ids")

    @classmethod
    def parse(cls, text: str, rng_seed: int = 0) -> "SeedSpec":
        """Parse ``strategy:count[:c1,c2,...]`` or ``explicit:v1,v2,...``."""
        parts = text.split(":")
        strategy = parts[0]
        try:
            if strategy == "explicit":
                if len(parts) != 2:
                    raise ValueError
                nodes = tuple(int(x) for x in parts[1].split(",") if x)
                return cls("explicit", nodes=nodes, rng_seed=rng_seed)
            if len(parts) not in (2, 3):
                raise ValueError
            count = int(parts[1])
            comms = tuple(int(x) for x in parts[2].split(",") if x) if len(parts) == 3 else ()
        except ValueError:
            raise PreconditionError(f"cannot parse seed spec {text!r}; expected "
                                    "'strategy:count[:c1,c2]' or 'explicit:v1,v2'") from None
        return cls(strategy, count=count, community_ids=comms, rng_seed=rng_seed)

    def __str__(self) -> str:
        if self.strategy == "explicit":
            return "explicit:" + ",".join(map(str, self.nodes))
        tail = ":" + ",".join(map(str, self.community_ids)) if self.community_ids else ""
        return f"{self.strategy}:{self.count}{tail}"


def _draw(pool: np.ndarray, count: int, rng, label: str) -> np.ndarray:
    if count > pool.size:
        raise PreconditionError(f"seed strategy {label} needs {count} node(s) but its pool "
                                f"has {pool.size}")
    return rng.choice(pool, size=count, replace=False)


def select_seeds(spec: SeedSpec, part: NodePartition) -> np.ndarray:
    """Seed node ids (sorted) for ``spec``; deterministic given ``spec.rng_seed``."""
    rng = np.random.default_rng(spec.rng_seed)
    periphery = ~part.core
    if spec.strategy == "explicit":
        nodes = np.unique(np.asarray(spec.nodes, dtype=np.int64))
        bad = nodes[(nodes < 0) | (nodes >= part.node_count)]
        if bad.size:
            raise PreconditionError(f"seed node(s) not in graph: {bad.tolist()}")
        return nodes
    if spec.strategy == "periphery":
        out = _draw(np.flatnonzero(periphery), spec.count, rng, "periphery")
    elif spec.strategy == "core":
        out = _draw(np.flatnonzero(part.core), spec.count, rng, "core")
    elif spec.strategy == "uniform":
        out = _draw(np.arange(part.node_count), spec.count, rng, "uniform")
    elif spec.strategy == "community":
        c = spec.community_ids[0]
        pool = np.flatnonzero(periphery & (part.community == c))
        out = _draw(pool, spec.count, rng, f"community {c}")
    else:
        comms = spec.community_ids
        base, extra = divmod(spec.count, len(comms))
        picks = []
        for i, c in enumerate(comms):
            quota = base + (1 if i < extra else 0)
            if quota:
                pool = np.flatnonzero(periphery & (part.community == c))
                picks.append(_draw(pool, quota, rng, f"multi-community {c}"))
        out = np.concatenate(picks)
    return np.sort(out.astype(np.int64))


@dataclass(frozen=True, eq=False)
class CascadeTrace:
    """Outcome of one run, with per-iteration series derived on demand.

    ``infected_at[v]`` is the iteration ``v`` was infected (-1 if never) and
    ``infector[v]`` the node that infected it (-1 for seeds and uninfected).
    Iterations run from 0 (seeds) to ``last_iteration`` inclusive.
    """

    infected_at: np.ndarray
    infector: np.ndarray
    last_iteration: int
    core: np.ndarray
    community: np.ndarray
    n_communities: int

    @property
    def node_count(self) -> int:
        return int(self.infected_at.size)

    @property
    def iterations(self) -> int:
        return self.last_iteration + 1

    @cached_property
    def new(self) -> np.ndarray:
        hit = self.infected_at[self.infected_at >= 0]
        return np.bincount(hit, minlength=self.iterations).astype(np.int64)

    @cached_property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.new)

    @cached_property
    def cum_core(self) -> np.ndarray:
        hit = self.infected_at[(self.infected_at >= 0) & self.core]
        return np.cumsum(np.bincount(hit, minlength=self.iterations)).astype(np.int64)

    @cached_property
    def cum_periphery(self) -> np.ndarray:
        return self.cumulative - self.cum_core

    @cached_property
    def cum_community(self) -> np.ndarray:
        """Shape ``(iterations, n_communities)`` cumulative infections per label."""
        ok = self.infected_at >= 0
        flat = self.infected_at[ok] * self.n_communities + self.community[ok]
        counts = np.bincount(flat, minlength=self.iterations * self.n_communities)
        return np.cumsum(counts.reshape(self.iterations, self.n_communities), axis=0)

    @property
    def seeds(self) -> np.ndarray:
        return np.flatnonzero(self.infected_at == 0)

    def new_nodes(self, t: int) -> np.ndarray:
        return np.flatnonzero(self.infected_at == t)

    def first_core_infection(self) -> int | None:
        hit = self.infected_at[(self.infected_at >= 0) & self.core]
        return int(hit.min()) if hit.size else None

    def infection_edges(self):
        """``(src, dst, edge_class)`` of every successful transmission, by time then dst."""
        dst = np.flatnonzero(self.infector >= 0)
        dst = dst[np.argsort(self.infected_at[dst], kind="stable")]
        src = self.infector[dst]
        core, comm = self.core, self.community
        sc, dc = core[src], core[dst]
        cls = np.where(comm[src] == comm[dst], EdgeClass.PP0, EdgeClass.PP1).astype(np.int8)
        cls[~sc & dc] = EdgeClass.PC
        cls[sc & ~dc] = EdgeClass.CP
        cls[sc & dc] = EdgeClass.CC
        return src, dst, cls

    def check(self) -> None:
        """Assert the structural invariants every trace must satisfy."""
        assert np.all(np.diff(self.cumulative) >= 0)
        assert np.array_equal(self.cumulative, self.cum_core + self.cum_periphery)
        src, dst, _ = self.infection_edges()
        assert np.all(self.infected_at[src] < self.infected_at[dst])
        assert np.all(self.infected_at[src] >= 0)
        assert self.new.sum() == np.count_nonzero(self.infected_at >= 0)


class Cascade:
    """Arc probabilities for a (graph, partition, table) triple, reusable across runs."""

    def __init__(self, g: Graph, part: NodePartition, probs: ProbabilityTable):
        if part.node_count != g.node_count:
            raise PreconditionError(f"partition covers {part.node_count} nodes, graph has "
                                    f"{g.node_count}")
        self.graph = g
        self.partition = part
        self.probs = probs
        arc_src = g.arc_sources()
        self.arc_class = classify_arcs(arc_src, g.indices, part)
        self.arc_prob = probs.as_array()[self.arc_class]
        self.n_communities = part.n_communities

    def run(self, seeds, max_iters: int = DEFAULT_MAX_ITERS, rng_seed: int = 0,
            patience: int | None = None, backend=None) -> CascadeTrace:
        g = self.graph
        if max_iters < 1:
            raise PreconditionError("max_iters must be positive")
        seeds = np.unique(np.asarray(seeds, dtype=np.int64))
        if seeds.size == 0:
            raise PreconditionError("at least one seed is required")
        bad = seeds[(seeds < 0) | (seeds >= g.node_count)]
        if bad.size:
            raise PreconditionError(f"seed node(s) not in graph: {bad.tolist()}")
        if patience is not None and patience < 1:
            raise PreconditionError("patience must be positive")

        rng = np.random.default_rng(rng_seed)
        uniforms = 1.0 - rng.random(g.arc_count)
        delay = kernels.first_success_delays(self.arc_prob, uniforms, max_iters)
        infected_at, infector = kernels.propagate(g.indptr, g.indices, delay, seeds,
                                                  max_iters, backend=backend)
        last = _last_iteration(infected_at, max_iters, patience)
        late = infected_at > last
        infected_at[late] = -1
        infector[late] = -1
        return CascadeTrace(infected_at=infected_at, infector=infector, last_iteration=last,
                            core=self.partition.core, community=self.partition.community,
                            n_communities=self.n_communities)


def _last_iteration(infected_at, max_iters, patience):
    n = infected_at.size
    hit = infected_at[infected_at >= 0]
    if hit.size == n:
        last = int(hit.max())
    else:
        last = int(max_iters)
    if patience is not None:
        new = np.bincount(hit, minlength=max_iters + 1)[: max_iters + 1]
        times = np.flatnonzero(new)
        # first t whose preceding `patience` iterations (t-patience, t] saw nothing new
        gaps = np.diff(np.append(times, max_iters + patience + 1))
        stall = np.flatnonzero(gaps > patience)
        if stall.size:
            last = min(last, int(times[stall[0]] + patience))
    return last


def simulate(g: Graph, part: NodePartition, probs: ProbabilityTable, seeds,
             max_iters: int = DEFAULT_MAX_ITERS, rng_seed: int = 0,
             patience: int | None = None, backend=None) -> CascadeTrace:
    """Run one cascade from ``seeds``.

    Stops when every node is infected, at ``max_iters``, or, if ``patience``
    is set, once that many consecutive iterations pass without a new infection.
    """
    return Cascade(g, part, probs).run(seeds, max_iters=max_iters, rng_seed=rng_seed,
                                       patience=patience, backend=backend)


@dataclass
class AggregateTrace:
    """Per-iteration mean and standard deviation (ddof=0) over Monte Carlo trials.

    Runs that ended early are padded with their final cumulative values (and
    zero new infections) up to the longest run.
    """

    trials: int
    mean: dict
    std: dict
    traces: list | None = None

    @property
    def iterations(self) -> int:
        return int(self.mean["cumulative"].size)


SERIES = ("new", "cumulative", "cum_core", "cum_periphery")


def aggregate(traces) -> AggregateTrace:
    traces = list(traces)
    if not traces:
        raise PreconditionError("nothing to aggregate")
    length = max(t.iterations for t in traces)
    n_comm = max(t.n_communities for t in traces)
    stacks = {name: np.zeros((len(traces), length)) for name in SERIES}
    comm = np.zeros((len(traces), length, n_comm))
    for i, tr in enumerate(traces):
        k = tr.iterations
        for name in SERIES:
            series = getattr(tr, name)
            stacks[name][i, :k] = series
            if name != "new":
                stacks[name][i, k:] = series[-1]
        cc = tr.cum_community
        comm[i, :k, : cc.shape[1]] = cc
        comm[i, k:, : cc.shape[1]] = cc[-1]
    mean = {name: s.mean(axis=0) for name, s in stacks.items()}
    std = {name: s.std(axis=0) for name, s in stacks.items()}
    mean["community"] = comm.mean(axis=0)
    std["community"] = comm.std(axis=0)
    return AggregateTrace(trials=len(traces), mean=mean, std=std)


def monte_carlo(g: Graph, part: NodePartition, probs: ProbabilityTable, spec: SeedSpec,
                trials: int, max_iters: int = DEFAULT_MAX_ITERS, base_seed: int = 0,
                patience: int | None = None, keep_traces: bool = False, jobs: int = 1,
                backend=None) -> AggregateTrace:
    """Repeat :func:`simulate` ``trials`` times and aggregate the series.

    Trial ``i`` simulates with ``rng_seed = base_seed + i`` and draws its seeds
    with ``spec.rng_seed + i``. Results do not depend on ``jobs``.
    """
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    model = Cascade(g, part, probs)

    def one(i):
        seeds = select_seeds(replace(spec, rng_seed=spec.rng_seed + i), part)
        return model.run(seeds, max_iters=max_iters, rng_seed=base_seed + i,
                         patience=patience, backend=backend)

    if jobs > 1 and trials > 1:
        with cf.ThreadPoolExecutor(max_workers=jobs) as pool:
            traces = list(pool.map(one, range(trials)))
    else:
        traces = [one(i) for i in range(trials)]
    agg = aggregate(traces)
    if keep_traces:
        agg.traces = traces
    return agg
