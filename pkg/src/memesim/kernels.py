"""Hot loops: k-shell peeling and cascade first-passage propagation.

Every kernel has two implementations with identical results: an explicit loop
version compiled with numba, and a vectorized numpy version used when numba
is unavailable or ``MEMESIM_BACKEND=numpy`` is set. The public wrappers take a
``backend`` argument so both can be exercised and benchmarked side by side.
"""
import numpy as np

from . import _accel

NEVER = np.iinfo(np.int64).max


def _gather_arcs(indptr, nodes):
    """Adjacency slot indices of all arcs leaving ``nodes``."""
    starts = indptr[nodes]
    lens = indptr[nodes + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.repeat(starts - np.cumsum(lens) + lens, lens)
    return offsets + np.arange(total, dtype=np.int64)


# --- k-shell -----------------------------------------------------------------

@_accel.njit
def _kshell_loops(indptr, indices):
    # Batagelj-Zaversnik bucket peeling, O(|E|)
    n = indptr.shape[0] - 1
    deg = np.empty(n, dtype=np.int64)
    md = 0
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
        if deg[v] > md:
            md = deg[v]
    bins = np.zeros(md + 1, dtype=np.int64)
    for v in range(n):
        bins[deg[v]] += 1
    start = 0
    for d in range(md + 1):
        num = bins[d]
        bins[d] = start
        start += num
    pos = np.empty(n, dtype=np.int64)
    vert = np.empty(n, dtype=np.int64)
    for v in range(n):
        pos[v] = bins[deg[v]]
        vert[pos[v]] = v
        bins[deg[v]] += 1
    for d in range(md, 0, -1):
        bins[d] = bins[d - 1]
    if md >= 0 and n > 0:
        bins[0] = 0
    for i in range(n):
        v = vert[i]
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u] = pw
                    vert[pu] = w
                    pos[w] = pu
                    vert[pw] = u
                bins[du] += 1
                deg[u] -= 1
    return deg


def _kshell_numpy(indptr, indices):
    n = indptr.shape[0] - 1
    deg = np.diff(indptr).astype(np.int64)
    core = np.zeros(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    k = 0
    while alive.any():
        k = max(k, int(deg[alive].min()))
        drop = np.flatnonzero(alive & (deg <= k))
        while drop.size:
            core[drop] = k
            alive[drop] = False
            hit = indices[_gather_arcs(indptr, drop)]
            hit = hit[alive[hit]]
            if hit.size:
                deg -= np.bincount(hit, minlength=n)
            drop = np.flatnonzero(alive & (deg <= k))
    return core


def kshell(indptr, indices, backend=None):
    """Coreness of every node of a symmetric CSR adjacency."""
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    if _accel.resolve(backend) == "numba":
        return _kshell_loops(indptr, indices)
    return _kshell_numpy(indptr, indices)


# --- cascade -----------------------------------------------------------------

def first_success_delays(arc_prob, uniforms, max_iters):
    """Iterations until the first success of persistent Bernoulli(p) attempts.

    With one uniform ``u`` in (0, 1] per arc, the delay is the geometric
    inverse-CDF draw ``ceil(log u / log(1 - p))`` (at least 1). Arcs that can
    never fire within ``max_iters`` get ``max_iters + 1``. The map is monotone
    in ``p`` for a fixed ``u``, so runs that share uniforms are coupled.
    """
    p = np.asarray(arc_prob, dtype=np.float64)
    cap = float(max_iters + 1)
    out = np.full(p.shape, cap)
    live = (p > 0) & (p < 1)
    with np.errstate(divide="ignore", over="ignore"):
        raw = np.ceil(np.log(uniforms[live]) / np.log1p(-p[live]))
    out[live] = np.clip(raw, 1.0, cap)
    out[p >= 1] = 1.0
    return out.astype(np.int64)


@_accel.njit
def _propagate_loops(indptr, indices, delay, seeds, max_iters):
    n = indptr.shape[0] - 1
    n_arcs = indices.shape[0]
    never = np.iinfo(np.int64).max
    infected_at = np.full(n, -1, dtype=np.int64)
    infector = np.full(n, -1, dtype=np.int64)
    best = np.full(n, never, dtype=np.int64)
    # bucket queue indexed by iteration, singly linked through push slots
    head = np.full(max_iters + 2, -1, dtype=np.int64)
    link = np.empty(n_arcs + 1, dtype=np.int64)
    slot_node = np.empty(n_arcs + 1, dtype=np.int64)
    pushes = 0
    frontier = np.empty(n, dtype=np.int64)
    n_front = 0
    for s in seeds:
        if infected_at[s] < 0:
            infected_at[s] = 0
            frontier[n_front] = s
            n_front += 1
    n_infected = n_front
    horizon = 0
    t = 0
    while True:
        for i in range(n_front):
            u = frontier[i]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if infected_at[v] >= 0:
                    continue
                ft = t + delay[e]
                if ft > max_iters:
                    continue
                key = ft * n + u
                if key < best[v]:
                    best[v] = key
                    slot_node[pushes] = v
                    link[pushes] = head[ft]
                    head[ft] = pushes
                    pushes += 1
                    if ft > horizon:
                        horizon = ft
        if n_infected == n:
            break
        t += 1
        while t <= horizon and head[t] < 0:
            t += 1
        if t > horizon:
            break
        n_front = 0
        p = head[t]
        while p >= 0:
            v = slot_node[p]
            if infected_at[v] < 0 and best[v] // n == t:
                infected_at[v] = t
                infector[v] = best[v] % n
                frontier[n_front] = v
                n_front += 1
            p = link[p]
        n_infected += n_front
    return infected_at, infector


def _propagate_numpy(indptr, indices, delay, seeds, max_iters):
    n = indptr.shape[0] - 1
    infected_at = np.full(n, -1, dtype=np.int64)
    infector = np.full(n, -1, dtype=np.int64)
    best = np.full(n, NEVER, dtype=np.int64)
    frontier = np.unique(seeds)
    infected_at[frontier] = 0
    t = 0
    arc_src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    while True:
        arcs = _gather_arcs(indptr, frontier)
        v = indices[arcs]
        ft = t + delay[arcs]
        ok = (infected_at[v] < 0) & (ft <= max_iters)
        if ok.any():
            np.minimum.at(best, v[ok], ft[ok] * n + arc_src[arcs[ok]])
        pending = (infected_at < 0) & (best != NEVER)
        if not pending.any():
            break
        t = int(best[pending].min() // n)
        frontier = np.flatnonzero(pending & (best // n == t))
        infected_at[frontier] = t
        infector[frontier] = best[frontier] % n
    return infected_at, infector


def propagate(indptr, indices, delay, seeds, max_iters, backend=None):
    """Infection iteration and infector of every node.

    Node ``v`` is infected at ``min(t_u + delay[u->v])`` over its infected
    in-neighbours ``u``; ties on time go to the smallest infector id. Nodes not
    reached by ``max_iters`` keep ``-1`` in both outputs, as do the infectors
    of seeds.
    """
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    delay = np.ascontiguousarray(delay, dtype=np.int64)
    seeds = np.ascontiguousarray(seeds, dtype=np.int64)
    if _accel.resolve(backend) == "numba":
        return _propagate_loops(indptr, indices, delay, seeds, int(max_iters))
    return _propagate_numpy(indptr, indices, delay, seeds, int(max_iters))
