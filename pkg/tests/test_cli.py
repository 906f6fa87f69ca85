import csv
import json

import pytest

from csgq.cli import main
from csgq.graph import WeightedGraph, write_graph


@pytest.fixture
def g3_file(tmp_path, g3):
    path = tmp_path / "g3.txt"
    write_graph(g3, path)
    return path


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_single_file(tmp_path, capsys):
    out = tmp_path / "ds"
    code, _, _ = run_cli(capsys, "gen", "--n-min", 4, "--n-max", 4, "--per-n", 1, "--seed", 1, "--out", out)
    assert code == 0
    assert [p.relative_to(out).as_posix() for p in out.rglob("*.txt")] == ["n04/graph_00.txt"]


def test_gen_defaults_and_force(tmp_path, capsys):
    out = tmp_path / "ds"
    assert run_cli(capsys, "gen", "--out", out)[0] == 0
    files = sorted(out.rglob("*.txt"))
    assert len(files) == 260 and len(list(out.iterdir())) == 13
    before = {p: p.read_bytes() for p in files}
    code, _, err = run_cli(capsys, "gen", "--out", out)
    assert code == 1 and "--force" in err
    assert run_cli(capsys, "gen", "--out", out, "--force")[0] == 0
    assert {p: p.read_bytes() for p in sorted(out.rglob("*.txt"))} == before


def test_solve_gcsq(g3_file, capsys):
    code, out, _ = run_cli(capsys, "solve", "--graph", g3_file, "--algo", "gcsq", "--solver", "exhaustive")
    assert code == 0
    result = json.loads(out)
    assert result["structure"] == [[1, 2], [3]] and result["value"] == 2 and result["seed"] == 0


def test_solve_rqubo_k2_matches_gcsq(tmp_path, capsys):
    from csgq.graph import DatasetConfig, generate_dataset
    g = generate_dataset(DatasetConfig(n_values=(10,), graphs_per_n=1, seed=5))[0]
    path = tmp_path / "g.txt"
    write_graph(g, path)
    common = ["--graph", path, "--solver", "tabu", "--seed", 3, "--reads", 5]
    _, a, _ = run_cli(capsys, "solve", "--algo", "gcsq", *common)
    _, b, _ = run_cli(capsys, "solve", "--algo", "rqubo", "--mode", "iter", "--k", 2, *common)
    a, b = json.loads(a), json.loads(b)
    assert a["structure"] == b["structure"] and a["qubo_calls"] == b["qubo_calls"]


def test_solve_errors(g3_file, tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--graph", str(g3_file), "--algo", "gcsq", "--mode", "oneshot"])
    assert exc.value.code == 2
    code, out, err = run_cli(capsys, "solve", "--graph", tmp_path / "missing.txt")
    assert code != 0 and out == "" and "cannot read" in err


def test_solve_trace(g3_file, capsys):
    _, out, _ = run_cli(capsys, "solve", "--graph", g3_file, "--algo", "zens", "--mode", "iter", "--k", 2,
                        "--solver", "exhaustive", "--trace")
    steps = json.loads(out)["steps"]
    assert steps[0]["coalition"] == [1, 2, 3] and steps[0]["accepted"]


def test_exact(g3_file, capsys):
    code, out, _ = run_cli(capsys, "exact", "--graph", g3_file)
    assert code == 0 and json.loads(out)["value"] == 2


def test_qubo_export(g3_file, capsys):
    _, out, _ = run_cli(capsys, "qubo", "--graph", g3_file, "--formulation", "bisection")
    assert out.splitlines()[:2] == ["m 3", "offset 0.0"]


@pytest.fixture
def toy_dir(tmp_path, capsys):
    out = tmp_path / "toy"
    run_cli(capsys, "gen", "--n-min", 4, "--n-max", 4, "--per-n", 2, "--seed", 9, "--out", out)
    return out


def test_bench_and_report(toy_dir, tmp_path, capsys):
    records = tmp_path / "records.csv"
    code, _, _ = run_cli(capsys, "bench", "--dataset", toy_dir, "--algos", "gcsq", "--seeds", 2,
                         "--reads", 5, "--out", records)
    assert code == 0
    lines = records.read_text().splitlines()
    assert len(lines) == 5
    assert lines[0] == "algorithm,k,solver,seed,n,instance,v_solution,v_optimal,ar,optimal,feasible," \
                       "wall_time_s,logical_vars,qubo_calls"
    code, out1, _ = run_cli(capsys, "report", "--in", records, "--metric", "mean_ar", "--group-by", "n")
    _, out2, _ = run_cli(capsys, "report", "--in", records, "--metric", "mean_ar", "--group-by", "n")
    assert code == 0 and out1 == out2 and out1.splitlines()[0] == "group,mean_ar"
    assert len(out1.splitlines()) == 2
    _, js, _ = run_cli(capsys, "report", "--in", records, "--metric", "no", "--format", "json", "--two-stage")
    assert json.loads(js)["rows"][0]["group"] == "4"


def test_bench_k_list_expansion(toy_dir, tmp_path, capsys):
    records = tmp_path / "r.csv"
    run_cli(capsys, "bench", "--dataset", toy_dir, "--algos", "rqubo-iter,zens", "--k-list", "2,3,4",
            "--seeds", 1, "--reads", 3, "--out", records)
    rows = list(csv.DictReader(records.open()))
    assert sorted({(r["algorithm"], r["k"]) for r in rows}) == [
        ("rqubo-iter", "2"), ("rqubo-iter", "3"), ("rqubo-iter", "4"), ("zens", "")]


def test_bench_unknown_algo(toy_dir, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--dataset", str(toy_dir), "--algos", "clink"])
    assert exc.value.code == 2


def test_bench_stdout_and_json(toy_dir, tmp_path, capsys):
    js = tmp_path / "r.json"
    code, out, _ = run_cli(capsys, "bench", "--dataset", toy_dir, "--algos", "gcsq", "--seeds", 1,
                           "--solver", "exhaustive", "--json", js)
    assert code == 0 and len(out.splitlines()) == 3
    assert len(json.loads(js.read_text())) == 2


def test_config_file_supplies_flags(toy_dir, tmp_path, capsys):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text(f"# sweep\ndataset = {toy_dir}\nalgos = gcsq\nseeds = 3\nreads = 2\nsolver = sa\n")
    out = tmp_path / "r.csv"
    assert run_cli(capsys, "bench", "--config", cfg, "--seeds", 1, "--out", out)[0] == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2 and rows[0]["solver"] == "sa"


def test_config_file_boolean_and_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "gen.cfg"
    cfg.write_text("n_min = 4\nn_max = 4\nper_n = 1\nint = false\ndist = uniform:-1:1\n")
    out = tmp_path / "ds"
    assert run_cli(capsys, "gen", "--config", cfg, "--out", out)[0] == 0
    text = (out / "n04" / "graph_00.txt").read_text()
    assert "." in text.splitlines()[2]
    cfg.write_text("colour = red\n")
    with pytest.raises(SystemExit):
        main(["gen", "--config", str(cfg), "--out", str(out)])
