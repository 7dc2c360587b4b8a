import json

import numpy as np
import pytest

from conftest import clique
from memesim.cli import EXIT_INPUT, EXIT_IO, EXIT_USAGE, main
from memesim.graph import load_edge_list
from memesim.structure import read_partition


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def small_sccp(tmp_path):
    prefix = str(tmp_path / "g")
    assert main(["generate", "sccp", "--k", "3", "--s", "4", "--t", "30", "--f", "0.7",
                 "--r", "2", "5", "--seed", "2", "--out", prefix]) == 0
    return prefix


def test_generate_sccp_files(small_sccp):
    g, ids, _ = load_edge_list(small_sccp + ".edges")
    part, pids = read_partition(small_sccp + ".nodes")
    assert part.node_count == 102 and part.n_communities == 4
    assert part.core.sum() == 11
    meta = json.loads(open(small_sccp + ".meta.json").read())
    assert meta["params"]["rng_seed"] == 2 and meta["params"]["t"] == [30, 30, 30]
    assert meta["stats"]["edges"] == g.edge_count
    assert "wall_time_s" not in meta


def test_generate_desk_scale_node_count(tmp_path):
    prefix = str(tmp_path / "desk")
    assert main(["generate", "sccp", "--k", "11", "--s", "8", "--t", "355", "--f", "0.7",
                 "--r", "2", "10", "--seed", "1", "--out", prefix]) == 0
    assert read_partition(prefix + ".nodes")[0].node_count == 3993


def test_generate_er_edge_count(tmp_path):
    prefix = str(tmp_path / "er")
    assert main(["generate", "er", "--n", "4000", "--m", "34650", "--seed", "1",
                 "--out", prefix]) == 0
    assert load_edge_list(prefix + ".edges").graph.edge_count == 34650


def test_missing_k_is_usage_error(tmp_path, capsys):
    code = main(["generate", "sccp", "--s", "4", "--t", "3", "--f", "0.7", "--r", "2", "5",
                 "--out", str(tmp_path / "x")])
    assert code == EXIT_USAGE
    assert "--k" in capsys.readouterr().err


def test_unknown_flag_exits_with_usage_code():
    with pytest.raises(SystemExit) as exc:
        main(["generate", "sccp", "--bogus"])
    assert exc.value.code == EXIT_USAGE


def test_config_file_with_flag_override(tmp_path):
    cfg = write(tmp_path / "run.ini",
                "[global]\nseed = 4\n[generate.sccp]\nk = 2\ns = 3\nt = 5\nf = 0.8\nr = 1 3\n")
    prefix = str(tmp_path / "c")
    assert main(["generate", "sccp", "--config", cfg, "--k", "3", "--out", prefix]) == 0
    meta = json.loads(open(prefix + ".meta.json").read())
    assert meta["params"]["k"] == 3 and meta["params"]["rng_seed"] == 4


def test_bad_config_is_input_error(tmp_path):
    cfg = write(tmp_path / "bad.ini", "[generate.sccp]\nk = lots\n")
    assert main(["generate", "sccp", "--config", cfg]) == EXIT_INPUT


def test_outdir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MEMESIM_OUTDIR", str(tmp_path / "outs"))
    assert main(["generate", "er", "--n", "10", "--m", "5"]) == 0
    assert (tmp_path / "outs" / "er.edges").exists()


def test_analyze_two_cliques(tmp_path):
    edges = clique(4) + [(a + 4, b + 4) for a, b in clique(4)] + [(3, 4)]
    src = write(tmp_path / "b.txt", "".join(f"n{u} n{v}\n" for u, v in edges))
    out = str(tmp_path / "b.nodes")
    assert main(["analyze", src, "--out", out]) == 0
    part, ids = read_partition(out)
    assert part.n_communities == 2
    assert ids.labels[0] == "n0"
    meta = json.loads(open(out + ".meta.json").read())
    assert meta["stats"]["modularity"] == pytest.approx(2 * (6 / 13 - 0.25))


def test_analyze_core_fraction_on_twenty_nodes(tmp_path):
    src = write(tmp_path / "p.txt", "".join(f"{i} {i + 1}\n" for i in range(19)))
    out = str(tmp_path / "p.nodes")
    assert main(["analyze", src, "--core-fraction", "0.1", "--out", out]) == 0
    rows = [ln for ln in open(out) if ln.rstrip().endswith(" core")]
    assert len(rows) == 2


def test_analyze_missing_file_is_io_error(tmp_path):
    assert main(["analyze", str(tmp_path / "nope.txt")]) == EXIT_IO


def test_analyze_malformed_file_is_input_error(tmp_path, capsys):
    src = write(tmp_path / "m.txt", "0 1\n2\n")
    assert main(["analyze", src]) == EXIT_INPUT
    assert "line 2" in capsys.readouterr().err


def simulate_args(prefix, out, *extra):
    return ["simulate", prefix + ".edges", "--nodes", prefix + ".nodes", "--out", out,
            "--max-iters", "300", *extra]


def test_simulate_is_byte_identical(small_sccp, tmp_path):
    out = str(tmp_path / "a")
    runs = []
    for _ in range(2):
        assert main(simulate_args(small_sccp, out, "--ebh-paper", "--seeds", "periphery:5",
                                  "--trials", "20", "--seed", "7")) == 0
        runs.append([open(out + suffix, "rb").read() for suffix in (".csv", ".meta.json")])
    assert runs[0] == runs[1]


def test_simulate_jobs_do_not_change_output(small_sccp, tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    main(simulate_args(small_sccp, a, "--trials", "8", "--jobs", "1", "--format", "json"))
    main(simulate_args(small_sccp, b, "--trials", "8", "--jobs", "4", "--format", "json"))
    assert open(a + ".json").read() == open(b + ".json").read()


def test_simulate_uniform_metadata(small_sccp, tmp_path):
    out = str(tmp_path / "u")
    assert main(simulate_args(small_sccp, out, "--uniform", "0.0002")) == 0
    meta = json.loads(open(out + ".meta.json").read())
    assert set(meta["params"]["probabilities"].values()) == {0.0002}
    assert len(meta["params"]["probabilities"]) == 5


def test_simulate_seed_errors(small_sccp, tmp_path, capsys):
    out = str(tmp_path / "e")
    assert main(simulate_args(small_sccp, out, "--seeds", "core:0")) == EXIT_INPUT
    assert main(simulate_args(small_sccp, out, "--seeds", "core:500")) == EXIT_INPUT
    assert "pool" in capsys.readouterr().err
    assert main(simulate_args(small_sccp, out, "--seeds", "explicit:99999")) == EXIT_INPUT


def test_simulate_conflicting_tables(small_sccp, tmp_path):
    out = str(tmp_path / "e")
    assert main(simulate_args(small_sccp, out, "--uniform", "0.1", "--ebh-paper")) == EXIT_USAGE
    assert main(simulate_args(small_sccp, out, "--table", "0.1,0.2")) == EXIT_USAGE


def test_fit_reads_exported_trace(small_sccp, tmp_path, capsys):
    out = str(tmp_path / "f")
    main(simulate_args(small_sccp, out, "--uniform", "0.05", "--trials", "5",
                       "--seeds", "periphery:2"))
    capsys.readouterr()
    assert main(["fit", out + ".csv"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["fit"]["r2"] > 0.9
    assert "plateau" in doc


def test_validate_constructed_example(tmp_path, capsys):
    nodes = write(tmp_path / "s.nodes", "# node community coreness role\n"
                  "a 2 3 core\nb 2 3 core\nc 0 1 periphery\nd 0 1 periphery\ne 1 1 periphery\n")
    inter = write(tmp_path / "i.txt", "a b 5\na c 4\nc d 3\nd e 2\ne b 1\n")
    out = str(tmp_path / "r.json")
    assert main(["validate", inter, "--nodes", nodes, "--out", out]) == 0
    doc = json.loads(open(out).read())
    assert doc["ordering_holds"] is True
    assert "holds" in capsys.readouterr().err


def test_validate_unmatched_label(tmp_path, capsys):
    nodes = write(tmp_path / "s.nodes", "a 0 1 core\nb 0 1 periphery\n")
    inter = write(tmp_path / "i.txt", "a b 2\nb ghost 1\n")
    assert main(["validate", inter, "--nodes", nodes]) == EXIT_INPUT
    assert "ghost" in capsys.readouterr().err
    assert main(["validate", inter, "--nodes", nodes, "--intersect"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["coverage"]["unmatched_nodes"] == ["ghost"]


def test_validate_needs_structure(tmp_path):
    inter = write(tmp_path / "i.txt", "a b 2\n")
    assert main(["validate", inter]) == EXIT_USAGE


def test_ebh_infection_pipeline_matches_library(small_sccp, tmp_path, capsys):
    from memesim.cascade import SeedSpec, monte_carlo, paper_ebh_table
    from memesim.classify import interaction_graph, weight_report

    out, inf = str(tmp_path / "x"), str(tmp_path / "x.inf")
    assert main(simulate_args(small_sccp, out, "--trials", "10", "--seed", "3",
                              "--infections", inf)) == 0
    capsys.readouterr()
    assert main(["validate", inf, "--nodes", small_sccp + ".nodes"]) == 0
    doc = json.loads(capsys.readouterr().out)

    part, ids = read_partition(small_sccp + ".nodes")
    g = load_edge_list(small_sccp + ".edges", ids=ids).graph
    agg = monte_carlo(g, part, paper_ebh_table(), SeedSpec("periphery", 5, rng_seed=3),
                      trials=10, max_iters=300, base_seed=3, keep_traces=True)
    rep = weight_report(interaction_graph(agg.traces, g.node_count), part)
    assert doc["ordering_holds"] == rep.ordering_holds
    for c in rep.counts:
        assert doc["classes"][c.key]["n"] == rep.counts[c]
    assert np.isclose(sum(doc["classes"][c]["n"] for c in doc["classes"]),
                      sum(rep.counts.values()))
