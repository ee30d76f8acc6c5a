import json

from cmctori.cli import run


def test_classify_embedded(capsys):
    assert run(["classify", "--triple", "1,0,3"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["embedded"] is True
    assert data["lobes"] == [None, 3]


def test_flow_trace_json(capsys):
    assert run(["flow", "--triple", "2,1,3"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["end_triple"] == "2,1,3"
    kinds = [e["kind"] for e in data["events"]]
    assert kinds.count("minimal") == 1
    assert {"t", "q", "k", "h", "theta1", "theta2", "H"} <= set(data["samples"][0])


def test_graph_report(capsys):
    assert run(["graph", "--max-index", "6"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["maxIndex"] == 6
    for entry in data["lattices"]:
        idx = entry["index"]
        for step in entry["path"]:
            assert step["next_index"] < idx
            idx = step["next_index"]


def test_mesh_obj_export(tmp_path, capsys):
    out = tmp_path / "mesh.obj"
    assert run(["mesh", "--triple", "1,0,2", "--res", "16x16", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert sum(1 for line in lines if line.startswith("v ")) == 256


def test_profile_rotational(capsys):
    assert run(["profile", "--triple", "2,0,3", "--q", "0.6"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["total_turning"] == 2


def test_usage_error_exit_code(capsys):
    assert run(["flow", "--triple", "9,9,9"]) == 1


def test_determinism(capsys):
    assert run(["classify", "--triple", "2,1,3"]) == 0
    first = capsys.readouterr().out
    assert run(["classify", "--triple", "2,1,3"]) == 0
    assert capsys.readouterr().out == first


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "cmctori.cfg"
    cfg.write_text("max_index = 3\n")
    assert run(["--config", str(cfg), "graph"]) == 0
    assert json.loads(capsys.readouterr().out)["maxIndex"] == 3
    # flags beat the file
    assert run(["--config", str(cfg), "graph", "--max-index", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["maxIndex"] == 2


def test_verify_single_suite(capsys):
    assert run(["verify", "--suite", "genus0"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "FAIL" not in out


def test_verify_unknown_suite(capsys):
    assert run(["verify", "--suite", "nope"]) == 1
