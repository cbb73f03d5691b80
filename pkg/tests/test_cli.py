import json

import pytest

from denscale.cli import main
from denscale.dendrogram import load_dendrogram
from denscale.graph import load_graph, load_partition

from instances import BARBELL6, GOOD_TREE


@pytest.fixture
def files(tmp_path):
    (tmp_path / "g.txt").write_text(BARBELL6)
    (tmp_path / "d.txt").write_text(GOOD_TREE)
    (tmp_path / "x.txt").write_text("0 0\n1 0.5\n2 1\n3 9\n4 9.5\n5 10\n")
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_best_and_cut(files, capsys):
    for cmd in ("cut", "best"):
        code, out = run(capsys, cmd, "--quality", "modularity", "--graph", files / "g.txt",
                        "--dendrogram", files / "d.txt", "--out", files / f"{cmd}.txt")
        assert code == 0
        assert "Q = 0.357142857" in out.out
        assert load_partition((files / f"{cmd}.txt").read_text()).communities == [[0, 1, 2], [3, 4, 5]]


def test_similarity_needs_data(files, capsys):
    code, out = run(capsys, "best", "--quality", "similarity", "--graph", files / "g.txt",
                    "--dendrogram", files / "d.txt")
    assert code == 1 and "embedding" in out.err
    code, out = run(capsys, "best", "--quality", "similarity", "--graph", files / "g.txt",
                    "--dendrogram", files / "d.txt", "--embedding", files / "x.txt", "--json")
    assert code == 0 and json.loads(out.out)["communities"] == 2


def test_multiscale_outputs(files, capsys):
    out_dir = files / "ms"
    code, _ = run(capsys, "multiscale", "--quality", "modularity", "--graph", files / "g.txt",
                  "--dendrogram", files / "d.txt", "--alpha", "0.5", "--alpha", "1", "--out-dir", out_dir)
    assert code == 0
    assert (out_dir / "envelope.csv").read_text().startswith("alpha_lo,alpha_hi,slope,intercept\n")
    assert (out_dir / "lifespans.csv").read_text().startswith("node,alpha_min,alpha_max,size\n")
    half = load_partition((out_dir / "partition_alpha_0.5.txt").read_text())
    assert half.communities == [[0, 1, 2], [3, 4, 5]]
    assert load_partition((out_dir / "partition_alpha_1.txt").read_text()).community_count == 1
    tree = load_dendrogram((out_dir / "reordered_dendrogram.txt").read_text())
    assert tree.n == 6 and all("split_alpha" in a for a in tree.attrs)


def test_relevance_outputs(files, capsys):
    out_dir = files / "rel"
    code, out = run(capsys, "relevance", "--quality", "modularity", "--graph", files / "g.txt",
                    "--dendrogram", files / "d.txt", "--k", "1", "--out-dir", out_dir)
    assert code == 0 and "scale 1" in out.out
    assert (out_dir / "relevance.csv").read_text().startswith("alpha_lo,alpha_hi,A,B,C\n")
    part = load_partition((out_dir / "partition_scale_1.txt").read_text())
    assert part.communities == [[0, 1, 2], [3, 4, 5]]


def test_compare(files, capsys):
    (files / "a.txt").write_text("0 0\n1 0\n2 1\n3 1\n")
    (files / "b.txt").write_text("0 0\n1 1\n2 0\n3 1\n")
    code, out = run(capsys, "compare", "--a", files / "a.txt", "--b", files / "b.txt")
    assert code == 0 and out.out.strip() == "ARI = -0.500000000"


def test_generate_detect_pipeline(tmp_path, capsys):
    g, ref, d = tmp_path / "g.txt", tmp_path / "ref.txt", tmp_path / "d.txt"
    assert run(capsys, "generate", "--n", 60, "--c", 3, "--d-in", 5, "--q-exp", 0.3, "--seed", 4,
               "--out-graph", g, "--out-partition", ref)[0] == 0
    first = g.read_text()
    assert run(capsys, "generate", "--n", 60, "--c", 3, "--d-in", 5, "--q-exp", 0.3, "--seed", 4,
               "--out-graph", g)[0] == 0
    assert g.read_text() == first
    assert run(capsys, "detect", "--graph", g, "--out", d)[0] == 0
    assert load_dendrogram(d.read_text(), load_graph(first)).n == 60


def test_generate_two_scale(tmp_path, capsys):
    code, _ = run(capsys, "generate", "--model", "two-scale", "--n", 100, "--macro", 2, "--micro", 5,
                  "--d-out", 0.5, "--out-graph", tmp_path / "g.txt", "--out-partition", tmp_path / "macro.txt",
                  "--out-micro", tmp_path / "micro.txt")
    assert code == 0
    assert load_partition((tmp_path / "micro.txt").read_text()).community_count == 10


def test_bench(tmp_path, capsys):
    spec = tmp_path / "spec.txt"
    spec.write_text("n = 40\nc = 2\nd_in = 5\nq_exp = 0.3\nreplicates = 2\nmethods = CM, BM\n")
    code, out = run(capsys, "bench", "--spec", spec, "--out-dir", tmp_path / "out", "--json")
    assert code == 0
    assert json.loads(out.out)["spec"]["replicates"] == 2
    assert (tmp_path / "out" / "report.csv").exists() and (tmp_path / "out" / "summary.json").exists()


def test_usage_error_exit_code(capsys):
    assert run(capsys, "best", "--quality", "nope")[0] == 2
    assert run(capsys)[0] == 2


def test_data_errors_write_nothing(files, capsys):
    (files / "bad.txt").write_text("0 1\n1 1\n")
    out = files / "never.txt"
    code, res = run(capsys, "best", "--quality", "modularity", "--graph", files / "bad.txt",
                    "--dendrogram", files / "d.txt", "--out", out)
    assert code == 1 and "self-loop" in res.err and not out.exists()
    code, res = run(capsys, "best", "--quality", "modularity", "--graph", files / "missing.txt",
                    "--dendrogram", files / "d.txt")
    assert code == 1 and "cannot read" in res.err


def test_alpha_out_of_range(files, capsys):
    code, _ = run(capsys, "multiscale", "--quality", "modularity", "--graph", files / "g.txt",
                  "--dendrogram", files / "d.txt", "--alpha", "1.5")
    assert code == 2
