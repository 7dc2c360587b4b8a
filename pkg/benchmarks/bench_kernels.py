"""Compare the numba and numpy kernel backends on a desk-scale SCCP graph.

    python benchmarks/bench_kernels.py [--repeat 5] [--k 11 --s 8 --t 355]

Prints median wall time per call for k-shell peeling and cascade propagation.
The first numba call (JIT compile, or cache load) is excluded.
"""
import argparse
import statistics
import time

import numpy as np

from memesim import _accel, kernels
from memesim.cascade import Cascade, SeedSpec, paper_ebh_table, select_seeds
from memesim.generate import SccpParams, generate_sccp


def timed(fn, repeat):
    fn()
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=11)
    ap.add_argument("--s", type=int, default=8)
    ap.add_argument("--t", type=int, default=355)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    lg = generate_sccp(SccpParams(k=args.k, s=args.s, t=args.t, f=0.7, r1=2, r2=10, rng_seed=1))
    g, part = lg.graph, lg.partition
    model = Cascade(g, part, paper_ebh_table())
    seeds = select_seeds(SeedSpec("periphery", 5, rng_seed=1), part)
    rng = np.random.default_rng(0)
    delay = kernels.first_success_delays(model.arc_prob, 1.0 - rng.random(g.arc_count), 10_000)

    backends = [b for b in _accel.BACKENDS if b != "numba" or _accel.HAVE_NUMBA]
    print(f"graph: {g.node_count} nodes, {g.edge_count} edges; median of {args.repeat} runs")
    print(f"{'kernel':<12}" + "".join(f"{b:>12}" for b in backends))
    rows = {
        "kshell": lambda b: kernels.kshell(g.indptr, g.indices, backend=b),
        "propagate": lambda b: kernels.propagate(g.indptr, g.indices, delay, seeds, 10_000,
                                                 backend=b),
        "cascade": lambda b: model.run(seeds, rng_seed=3, backend=b),
    }
    for name, call in rows.items():
        cells = [timed(lambda b=b: call(b), args.repeat) for b in backends]
        print(f"{name:<12}" + "".join(f"{c * 1e3:>10.2f}ms" for c in cells))


if __name__ == "__main__":
    main()
