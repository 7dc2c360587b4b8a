"""Command-line interface: ``memesim {generate,analyze,simulate,fit,validate}``.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 invalid input or
precondition failure.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import __version__
from .analysis import cumulative_column, fit_sigmoid, plateau_report, read_trace, render_trace
from .cascade import (DEFAULT_MAX_ITERS, ProbabilityTable, SeedSpec, make_uniform,
                      monte_carlo, paper_ebh_table)
from .classify import interaction_graph, weight_report
from .config import RunConfig, boolean, float_list, int_list
from .errors import MemesimError
from .generate import SccpParams, generate_er, generate_sccp
from .graph import NodeIdMap, edge_list_text, load_edge_list
from .structure import (DEFAULT_CORE_FRACTION, NodePartition, analyze, modularity,
                        read_partition, write_partition)

log = logging.getLogger("memesim")

EXIT_USAGE, EXIT_IO, EXIT_INPUT = 2, 3, 4
OUTDIR_ENV = "MEMESIM_OUTDIR"


class UsageError(Exception):
    pass


def default_prefix(name: str) -> str:
    return os.path.join(os.environ.get(OUTDIR_ENV, "."), name)


def write_atomic(path, text: str) -> None:
    """Write via a temp file in the target directory and rename over ``path``."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta(command: str, params: dict, started: float, timing: bool) -> dict:
    meta = {"tool": "memesim", "version": __version__, "command": command, "params": params}
    elapsed = time.perf_counter() - started
    log.info("%s finished in %.3f s", command, elapsed)
    if timing:
        meta["wall_time_s"] = round(elapsed, 6)
    return meta


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _outputs(prefix: str, **files: str) -> dict:
    return {k: f"{prefix}{suffix}" for k, suffix in files.items()}


# --- subcommands ---------------------------------------------------------------

def cmd_generate_sccp(args, cfg: RunConfig) -> int:
    started = time.perf_counter()
    v = cfg.merged("generate.sccp", args, {
        "k": (int, None), "s": (int, None), "t": (int_list, None), "f": (float, None),
        "r": (int_list, None), "core_fraction": (float, DEFAULT_CORE_FRACTION),
        "seed": (int, 0), "out": (str, default_prefix("sccp")),
    })
    missing = [f"--{k}" for k in ("k", "s", "t", "f", "r") if v[k] is None]
    if missing:
        raise UsageError(f"generate sccp: missing {', '.join(missing)}")
    if len(v["r"]) != 2:
        raise UsageError("--r takes two integers R1 R2")
    t = v["t"][0] if len(v["t"]) == 1 else tuple(v["t"])
    params = SccpParams(k=v["k"], s=v["s"], t=t, f=v["f"], r1=v["r"][0], r2=v["r"][1],
                        core_fraction=v["core_fraction"], rng_seed=v["seed"])
    lg = generate_sccp(params)
    paths = _outputs(v["out"], edges=".edges", nodes=".nodes", meta=".meta.json")
    write_atomic(paths["edges"], edge_list_text(lg.graph))
    write_atomic(paths["nodes"], _partition_text(lg.partition))
    meta = _meta("generate sccp", params.to_dict(), started, args.timing)
    meta["stats"] = {"nodes": lg.graph.node_count, "edges": lg.graph.edge_count,
                     "communities": lg.n_communities, "core_nodes": int(lg.core.sum()),
                     "growth_intra_edges": lg.growth_intra,
                     "growth_inter_edges": lg.growth_inter, "capped_nodes": lg.capped}
    meta["outputs"] = paths
    write_atomic(paths["meta"], _dump(meta))
    print(f"wrote {paths['edges']} ({lg.graph.node_count} nodes, {lg.graph.edge_count} edges)")
    return 0


def cmd_generate_er(args, cfg: RunConfig) -> int:
    started = time.perf_counter()
    v = cfg.merged("generate.er", args, {
        "n": (int, None), "m": (int, None), "seed": (int, 0), "out": (str, default_prefix("er")),
    })
    if v["n"] is None or v["m"] is None:
        raise UsageError("generate er: --n and --m are required")
    g = generate_er(v["n"], v["m"], v["seed"])
    paths = _outputs(v["out"], edges=".edges", meta=".meta.json")
    write_atomic(paths["edges"], edge_list_text(g))
    meta = _meta("generate er", {"n": v["n"], "m_edges": v["m"], "rng_seed": v["seed"]},
                 started, args.timing)
    meta["outputs"] = paths
    write_atomic(paths["meta"], _dump(meta))
    print(f"wrote {paths['edges']} ({g.node_count} nodes, {g.edge_count} edges)")
    return 0


def _partition_text(part: NodePartition, ids: NodeIdMap | None = None) -> str:
    buf = io.StringIO()
    write_partition(part, buf, ids)
    return buf.getvalue()


def cmd_analyze(args, cfg: RunConfig) -> int:
    started = time.perf_counter()
    v = cfg.merged("analyze", args, {
        "core_fraction": (float, DEFAULT_CORE_FRACTION), "out": (str, None),
    })
    loaded = load_edge_list(args.graph, directed=args.directed, weighted=args.weighted,
                            reverse=args.reverse)
    part = analyze(loaded.graph, core_fraction=v["core_fraction"])
    out = v["out"] or default_prefix(Path(args.graph).stem) + ".nodes"
    write_atomic(out, _partition_text(part, loaded.ids))
    meta = _meta("analyze", {"graph": str(args.graph), "directed": args.directed,
                             "weighted": args.weighted, "reverse": args.reverse,
                             "core_fraction": v["core_fraction"]}, started, args.timing)
    meta["stats"] = {"nodes": loaded.graph.node_count, "edges": loaded.graph.edge_count,
                     "self_loops_dropped": loaded.self_loops,
                     "communities": part.n_communities, "core_nodes": int(part.core.sum()),
                     "modularity": modularity(loaded.graph, part.community)}
    write_atomic(out + ".meta.json", _dump(meta))
    print(f"wrote {out} ({part.n_communities} communities, {int(part.core.sum())} core nodes)")
    return 0


def _load_structure(graph_path, nodes_path, directed=False):
    """Graph plus partition, with internal ids pinned to the node table order."""
    part, ids = read_partition(nodes_path)
    loaded = load_edge_list(graph_path, directed=directed, ids=ids)
    if loaded.graph.node_count != part.node_count:
        extra = loaded.ids.labels[part.node_count:]
        raise MemesimError(f"{len(extra)} node(s) in {graph_path} are missing from "
                           f"{nodes_path}: {extra[:10]}")
    return loaded.graph, part, loaded.ids


def _table_from_args(v) -> ProbabilityTable:
    chosen = [x for x in ("ebh_paper", "uniform", "table") if v[x] not in (None, False)]
    if len(chosen) > 1:
        raise UsageError("choose one of --ebh-paper, --uniform, --table")
    if v["uniform"] is not None:
        return make_uniform(v["uniform"])
    if v["table"] is not None:
        vals = v["table"]
        if len(vals) != 5:
            raise UsageError("--table takes five values: cc,cp,pc,pp0,pp1")
        return ProbabilityTable(*vals)
    return paper_ebh_table()


def cmd_simulate(args, cfg: RunConfig) -> int:
    started = time.perf_counter()
    v = cfg.merged("simulate", args, {
        "ebh_paper": (boolean, False), "uniform": (float, None), "table": (float_list, None),
        "seeds": (str, "periphery:5"), "trials": (int, 1),
        "max_iters": (int, DEFAULT_MAX_ITERS), "patience": (int, None), "seed": (int, 0),
        "jobs": (int, os.cpu_count() or 1), "format": (str, "csv"), "out": (str, None),
        "infections": (str, None),
    })
    if v["format"] not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    table = _table_from_args(v)
    graph, part, ids = _load_structure(args.graph, args.nodes)
    spec = SeedSpec.parse(v["seeds"], rng_seed=v["seed"])
    if spec.strategy == "explicit":
        spec = SeedSpec("explicit", nodes=[_lookup(ids, x) for x in spec.nodes])
    agg = monte_carlo(graph, part, table, spec, trials=v["trials"], max_iters=v["max_iters"],
                      base_seed=v["seed"], patience=v["patience"],
                      keep_traces=v["infections"] is not None, jobs=v["jobs"])
    out = v["out"] or default_prefix("trace")
    trace_path = f"{out}.{v['format']}"
    params = {"graph": str(args.graph), "nodes": str(args.nodes),
              "probabilities": table.to_dict(), "seeds": str(spec),
              "trials": v["trials"], "max_iters": v["max_iters"], "patience": v["patience"],
              "base_seed": v["seed"]}
    meta = _meta("simulate", params, started, args.timing)
    meta["outputs"] = {"trace": trace_path, "meta": f"{out}.meta.json"}
    write_atomic(trace_path, render_trace(agg, v["format"]))
    if v["infections"]:
        ig = interaction_graph(agg.traces, graph.node_count)
        write_atomic(v["infections"], edge_list_text(ig, ids, weighted=True))
        meta["outputs"]["infections"] = v["infections"]
    write_atomic(f"{out}.meta.json", _dump(meta))
    print(f"wrote {trace_path} ({agg.trials} trial(s), {agg.iterations} iterations)")
    return 0


def _lookup(ids: NodeIdMap, label):
    node = ids.get(label)
    if node is None:
        node = ids.get(str(label))
    if node is None:
        raise MemesimError(f"seed node {label!r} not in graph")
    return node


def cmd_fit(args, cfg: RunConfig) -> int:
    cols = read_trace(args.trace)
    series = (np.asarray(cols[args.column], dtype=np.float64) if args.column
              else cumulative_column(cols))
    fit = fit_sigmoid(series)
    result = {"trace": str(args.trace), "fit": fit.to_dict()}
    if "cum_core" in cols or "cum_core_mean" in cols:
        view = SimpleNamespace(new=cols.get("new", cols.get("new_mean")),
                               cum_core=cols.get("cum_core", cols.get("cum_core_mean")))
        rep = plateau_report(view, args.window)
        result["plateau"] = {
            "plateau_end": rep.plateau_end if rep.ignited else None,
            "pre_rate": rep.pre_rate, "post_rate": rep.post_rate,
            "ignition_ratio": rep.ignition_ratio, "window": args.window}
    text = json.dumps(result, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _jsonable(o):
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o))


def cmd_validate(args, cfg: RunConfig) -> int:
    started = time.perf_counter()
    if args.nodes:
        part, part_ids = read_partition(args.nodes)
    elif args.structure:
        loaded = load_edge_list(args.structure)
        part = analyze(loaded.graph, core_fraction=args.core_fraction)
        part_ids = loaded.ids
    else:
        raise UsageError("validate needs --nodes TABLE or --structure GRAPH")
    inter = load_edge_list(args.interactions, directed=True, weighted=not args.unweighted,
                           reverse=args.reverse)
    report = weight_report(inter.graph, part, inter.ids, part_ids, strict=not args.intersect)
    doc = report.to_dict()
    doc["metadata"] = _meta("validate", {"interactions": str(args.interactions),
                                         "nodes": args.nodes, "structure": args.structure,
                                         "reverse": args.reverse,
                                         "intersect": args.intersect}, started, args.timing)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    verdict = {True: "holds", False: "violated", None: "indeterminate"}[report.ordering_holds]
    print(f"ordering {verdict}", file=sys.stderr)
    return 0


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file; flags override its values")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--timing", action="store_true",
                        help="record wall time in metadata (makes reruns differ)")

    p = argparse.ArgumentParser(prog="memesim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"memesim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a synthetic network")
    gsub = gen.add_subparsers(dest="model", required=True)
    sc = gsub.add_parser("sccp", parents=[common], help="SCCP network")
    sc.add_argument("--k", type=int, help="number of seeded communities")
    sc.add_argument("--s", type=int, help="initial clique size")
    sc.add_argument("--t", type=int_list, help="new nodes per community (one value or k values)")
    sc.add_argument("--f", type=float, help="intra-community edge fraction, 0.5..1")
    sc.add_argument("--r", type=int, nargs=2, metavar=("R1", "R2"), help="range of m")
    sc.add_argument("--core-fraction", type=float)
    sc.add_argument("--seed", type=int)
    sc.add_argument("--out", help="output prefix (writes .edges, .nodes, .meta.json)")
    sc.set_defaults(func=cmd_generate_sccp)
    er = gsub.add_parser("er", parents=[common], help="Erdos-Renyi G(n, M) baseline")
    er.add_argument("--n", type=int)
    er.add_argument("--m", type=int)
    er.add_argument("--seed", type=int)
    er.add_argument("--out")
    er.set_defaults(func=cmd_generate_er)

    an = sub.add_parser("analyze", parents=[common], help="coreness, core set and communities")
    an.add_argument("graph")
    an.add_argument("--directed", action="store_true")
    an.add_argument("--weighted", action="store_true")
    an.add_argument("--reverse", action="store_true", help="flip every edge on load")
    an.add_argument("--core-fraction", type=float)
    an.add_argument("--out", help="node table path")
    an.set_defaults(func=cmd_analyze)

    sim = sub.add_parser("simulate", parents=[common], help="run cascades")
    sim.add_argument("graph")
    sim.add_argument("--nodes", required=True, help="node table (node community coreness role)")
    sim.add_argument("--ebh-paper", action="store_true", default=None,
                     help="reference edge-class probabilities (default)")
    sim.add_argument("--uniform", type=float, metavar="P", help="same probability on every edge")
    sim.add_argument("--table", type=float_list, metavar="CC,CP,PC,PP0,PP1")
    sim.add_argument("--seeds", help="strategy:count[:communities] or explicit:v1,v2")
    sim.add_argument("--trials", type=int)
    sim.add_argument("--max-iters", type=int)
    sim.add_argument("--patience", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--jobs", type=int)
    sim.add_argument("--format", choices=["csv", "json"])
    sim.add_argument("--out", help="output prefix")
    sim.add_argument("--infections", help="write who-infected-whom counts as a weighted edge list")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", parents=[common], help="fit a sigmoid to an exported trace")
    fit.add_argument("trace")
    fit.add_argument("--column", help="series to fit (default: cumulative or cumulative_mean)")
    fit.add_argument("--window", type=int, default=10, help="post-ignition window")
    fit.add_argument("--out")
    fit.set_defaults(func=cmd_fit)

    val = sub.add_parser("validate", parents=[common], help="edge-class mean-weight ordering")
    val.add_argument("interactions", help="weighted directed interaction edge list")
    val.add_argument("--nodes", help="node table of the structural graph")
    val.add_argument("--structure", help="structural edge list (analyzed on the fly)")
    val.add_argument("--core-fraction", type=float, default=DEFAULT_CORE_FRACTION)
    val.add_argument("--reverse", action="store_true",
                     help="lines are 'retweeter retweeted'; flip to information flow")
    val.add_argument("--unweighted", action="store_true", help="treat every line as weight 1")
    val.add_argument("--intersect", action="store_true",
                     help="skip edges with nodes missing from the structure instead of failing")
    val.add_argument("--out")
    val.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(getattr(args, "verbose", 0), 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
        return args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"memesim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"memesim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MemesimError as exc:
        print(f"memesim: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
