import json

import pytest

from streammatch.cli import main


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def path_file(tmp_path):
    p = tmp_path / "path.txt"
    p.write_text("0 1 1\n1 2 2\n")
    return p


def test_run_path_exp_eps_zero(capsys, path_file):
    code, out, _ = run_cli(capsys, "run", path_file, "--mode", "exp", "--epsilon", "0", "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["matching"]["weight"] == 2.0
    assert rep["matching"]["edges"] == [[1, 2, 2.0]]
    assert rep["config"]["mode"] == "basic"
    assert rep["certificate"]["upper_bound"] == 4.0


def test_run_capped_verify_passes(capsys, tmp_path):
    stream = tmp_path / "g.txt"
    assert main(["gen", "--n", "40", "--m", "300", "--seed", "5", "-o", str(stream)]) == 0
    code, out, _ = run_cli(capsys, "run", stream, "--mode", "capped", "--epsilon", "0.25", "--verify", "--json")
    rep = json.loads(out)
    assert code == 0
    names = {c["check"] for c in rep["verification"]}
    assert {"dual_feasible", "push_lemma", "eviction_ratio", "discard_sums", "trace_identity", "composition"} <= names
    assert all(c["pass"] for c in rep["verification"])
    assert "timing" not in rep


def test_run_text_output(capsys, path_file):
    code, out, _ = run_cli(capsys, "run", path_file, "--verify")
    assert code == 0
    assert "matching: 1 edges, weight 2" in out
    assert "FAIL" not in out


def test_run_empty_file(capsys, tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    code, out, _ = run_cli(capsys, "run", empty, "--json")
    rep = json.loads(out)
    assert code == 0 and rep["matching"] == {"edges": [], "size": 0, "weight": 0}


def test_run_malformed_line(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 1\n0 1 oops\n")
    code, _, err = run_cli(capsys, "run", bad)
    assert code == 2 and "line 2" in err


def test_run_rejects_bad_config(capsys, path_file):
    code, _, err = run_cli(capsys, "run", path_file, "--mode", "capped", "--epsilon", "0.5")
    assert code == 2 and "capped" in err


def test_run_raw_ids_are_preserved(capsys, tmp_path):
    f = tmp_path / "ids.txt"
    f.write_text("100 7 1\n7 55 3\n")
    code, out, _ = run_cli(capsys, "run", f, "--mode", "basic", "--json")
    assert json.loads(out)["matching"]["edges"] == [[7, 55, 3.0]]


def test_run_compact_backend(capsys, tmp_path):
    stream = tmp_path / "g.txt"
    main(["gen", "--n", "30", "--m", "200", "--w-max", "1000000", "--seed", "2", "-o", str(stream)])
    code, out, _ = run_cli(capsys, "run", stream, "--quantize", "--threshold-n", "30",
                           "--phi-backend", "compact", "--epsilon", "0.125", "--verify", "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["compact_phi"]["bytes_per_vertex"] > 0
    assert any(c["check"] == "compact_shadow" and c["pass"] for c in rep["verification"])


def test_gen_path(capsys):
    code, out, _ = run_cli(capsys, "gen", "--model", "path", "--n", "3")
    edges = [ln for ln in out.splitlines() if ln and not ln.startswith(("#", "n "))]
    assert code == 0 and len(edges) == 2


def test_gen_same_seed_same_file(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert main(["gen", "--model", "bipartite", "--n", "20", "--m", "50", "--seed", "11", "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_inconsistent_spec(capsys):
    code, _, err = run_cli(capsys, "gen", "--n", "3", "--m", "10")
    assert code == 2


def test_adversary_then_run_evicts(capsys, tmp_path):
    stream = tmp_path / "adv.txt"
    assert main(["gen", "--model", "eviction_adversary", "--n", "2", "--epsilon", "0.25", "-o", str(stream)]) == 0
    code, out, _ = run_cli(capsys, "run", stream, "--mode", "capped", "--epsilon", "0.25", "--json", "--verify")
    rep = json.loads(out)
    assert code == 0 and rep["stats"]["edges_evicted"] >= 1


@pytest.fixture
def traced_pair(tmp_path, capsys):
    stream = tmp_path / "adv.txt"
    trace = tmp_path / "trace.jsonl"
    main(["gen", "--model", "eviction_adversary", "--n", "2", "--epsilon", "0.25", "-o", str(stream)])
    main(["run", str(stream), "--trace", str(trace)])
    capsys.readouterr()
    return stream, trace


def test_verify_valid_pair(capsys, traced_pair):
    code, out, _ = run_cli(capsys, "verify", *traced_pair, "--json")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]


def test_verify_tampered_phi(capsys, traced_pair):
    stream, trace = traced_pair
    lines = trace.read_text().splitlines()
    for i, line in enumerate(lines):
        obj = json.loads(line)
        if obj.get("decision") == "pushed" and obj["phi_u_before"] > 0:
            obj["phi_u_before"] += 1
            lines[i] = json.dumps(obj)
            break
    trace.write_text("\n".join(lines) + "\n")
    code, out, _ = run_cli(capsys, "verify", stream, trace, "--json")
    rep = json.loads(out)
    assert code == 1 and not rep["pass"]
    failed = {c["check"] for c in rep["checks"] if not c["pass"]}
    assert "push_lemma" in failed


def test_verify_missing_trace(capsys, traced_pair, tmp_path):
    code, _, err = run_cli(capsys, "verify", traced_pair[0], tmp_path / "nope.jsonl")
    assert code == 2 and "cannot open" in err


def test_verify_count_mismatch(capsys, traced_pair):
    stream, trace = traced_pair
    stream.write_text(stream.read_text() + "0 1 1.0\n")
    code, _, err = run_cli(capsys, "verify", stream, trace)
    assert code == 2 and "edges" in err


def test_verify_refuses_compact_trace(capsys, tmp_path, path_file):
    trace = tmp_path / "t.jsonl"
    main(["run", str(path_file), "--phi-backend", "compact", "--trace", str(trace)])
    capsys.readouterr()
    code, _, err = run_cli(capsys, "verify", path_file, trace)
    assert code == 2


def test_bench_with_plots(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "bench", "--sizes", "2000", "4000", "--modes", "exp", "capped",
                           "--json", "--plot-dir", tmp_path / "figs")
    rep = json.loads(out)
    assert code == 0
    assert len(rep["rows"]) == 4
    assert all(r["space_ok"] for r in rep["rows"] if r["mode"] == "capped")
    assert sorted(p.name for p in (tmp_path / "figs").iterdir()) == ["space.png", "throughput.png"]


def test_run_reports_are_byte_identical(capsys, tmp_path):
    stream = tmp_path / "g.txt"
    main(["gen", "--n", "50", "--m", "400", "--seed", "9", "-o", str(stream)])
    capsys.readouterr()
    outs = [run_cli(capsys, "run", stream, "--verify", "--json", "--seed", "3")[1] for _ in range(2)]
    assert outs[0] == outs[1]
