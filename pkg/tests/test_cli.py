import json

import pytest

from flipsim import cli
from flipsim.generators import GraphFamily, generate
from flipsim.graph import save_edge_list


def run(args, capsys):
    code = cli.main(args)
    return code, capsys.readouterr()


def test_lrn_sources(tmp_path, capsys):
    out = tmp_path / "r.csv"
    js = tmp_path / "r.json"
    code, _ = run(["--family", "lrn", "--kernel", "bfs", "--sources", "4", "--seed", "7",
                   "--out-csv", str(out), "--out-json", str(js)], capsys)
    assert code == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert len(rows) == 5
    sources = [int(r.split(",")[6]) for r in rows[1:]]
    assert sources == sorted(sources)
    doc = json.loads(js.read_text())
    assert doc["summary"]["runs"] == 4 and doc["config"]["seed"] == 7
    assert doc["config"]["arch.t_hop"] == 4


def test_graph_file_wcc_single_run(tmp_path, capsys):
    path = tmp_path / "g.el"
    save_edge_list(generate(GraphFamily.parse("srn"), 2), path)
    code, io = run(["--graph", str(path), "--kernel", "wcc"], capsys)
    assert code == 0
    rows = [l for l in io.out.splitlines() if not l.startswith("#")]
    assert len(rows) == 2 and rows[1].split(",")[6] == "" and rows[1].endswith("true")


def test_tree_uses_root(capsys):
    code, io = run(["--family", "tree", "--kernel", "bfs", "--sources", "10"], capsys)
    assert code == 0
    rows = [l for l in io.out.splitlines() if not l.startswith("#")]
    assert len(rows) == 2 and rows[1].split(",")[6] == "0"


def test_header_has_full_config(capsys):
    code, io = run(["--family", "srn", "--seed", "3"], capsys)
    header = dict(l[2:].split("=", 1) for l in io.out.splitlines() if l.startswith("# "))
    assert header["seed"] == "3" and header["beam_width"] == "10" and header["arch.swap_latency"] == "100"
    assert header["estimator.epsilon"] == "100"


def test_deterministic_reports(tmp_path, capsys):
    outs = []
    for i in range(2):
        csv_path, trace = tmp_path / f"{i}.csv", tmp_path / f"{i}.jsonl"
        args = ["--family", "syn", "--kernel", "sssp", "--sources", "2", "--seed", "5", "--weighted",
                "--out-csv", str(csv_path), "--trace", str(trace)]
        if i:
            args += ["--jobs", "2"]
        code, _ = run(args, capsys)
        assert code == 0
        # the header records output paths and job count, which legitimately differ
        body = [l for l in csv_path.read_text().splitlines()
                if not l.startswith(("# out_csv=", "# trace=", "# jobs="))]
        outs.append((body, trace.read_bytes()))
    assert outs[0] == outs[1]


def test_compile_only_mapping_is_stable(tmp_path, capsys):
    maps = []
    for i in range(2):
        path = tmp_path / f"{i}.map"
        code, io = run(["--family", "lrn", "--compile-only", "--mapping-out", str(path)], capsys)
        assert code == 0 and "f_final" in io.out and "time_beam_s" in io.out
        maps.append(path.read_bytes())
    assert maps[0] == maps[1]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment\nfamily = srn\nkernel = wcc\nverify = false\narray = 4x4\n")
    code, io = run(["--config", str(cfg), "--verify"], capsys)
    assert code == 0
    header = dict(l[2:].split("=", 1) for l in io.out.splitlines() if l.startswith("# "))
    assert header["verify"] == "True" and header["array"] == "4x4" and header["kernel"] == "wcc"


@pytest.mark.parametrize("args", [
    ["--bogus"],
    [],
    ["--family", "srn", "--graph", "x.el"],
    ["--graph", "/nonexistent.el"],
    ["--family", "srn", "--array", "3by3"],
    ["--family", "srn", "--kernel", "wcc", "--source-id", "1"],
])
def test_usage_errors(args, capsys):
    with pytest.raises(SystemExit) as exc:
        code = cli.main(args)
        raise SystemExit(code)
    assert exc.value.code == cli.EXIT_USAGE


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert cli.main(["--config", str(cfg)]) == cli.EXIT_USAGE


def test_mapper_failure(capsys):
    code = cli.main(["--family", "lrn", "--num-vertices", "1100", "--array", "2x2", "--drf-capacity", "1"])
    assert code == cli.EXIT_MAPPER


def test_oracle_mismatch(monkeypatch, capsys):
    monkeypatch.setattr(cli, "reference", lambda k, g, s: [-1] * g.num_vertices)
    code, io = run(["--family", "srn", "--seed", "2"], capsys)
    assert code == cli.EXIT_MISMATCH
    assert "--family srn --seed 2" in io.err


def test_source_out_of_range(capsys):
    assert cli.main(["--family", "srn", "--source-id", "100000"]) == cli.EXIT_USAGE
