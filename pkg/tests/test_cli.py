import csv
import io
import json
import subprocess
import sys

import pytest

from confapprox.cli import RunConfig, main, render
from confapprox.errors import ConfigError


def run(args):
    out = io.StringIO()
    code = main(args, stdout=out)
    return code, out.getvalue()


def run_json(args):
    code, text = run(args)
    assert code == 0, text
    return json.loads(text)


def strip_timing(report):
    return {k: v for k, v in report.items() if k != "timing"}


@pytest.fixture
def example(fixtures):
    return ["--log", str(fixtures / "running_example.xes"), "--model", str(fixtures / "running_example.pnml")]


def test_approximate_json(example):
    rep = run_json(["approximate", *example, "--method", "frequency", "--param", "40"])
    assert set(rep) >= {"method", "parameter", "seed", "spm", "fitness", "deviations", "timing"}
    assert rep["method"] == "frequency" and rep["parameter"] == 40 and rep["seed"] == 42
    assert rep["spm"] == 3 and rep["model_behavior_size"] == 2 and rep["candidates"] == 2
    assert rep["fitness"] == pytest.approx({"approx": 0.92625, "lower": 0.9025, "upper": 0.95}, abs=1e-9)
    assert set(rep["timing"]) == {"preprocess_ms", "approx_ms"}
    assert "variants" not in rep
    ratios = [(-d["ratio"], d["activity"]) for d in rep["deviations"]]
    assert ratios == sorted(ratios)
    by = {d["activity"]: d for d in rep["deviations"]}
    assert by["b"]["insertions"] == 5 and by["c"]["deletions"] == 3


def test_approximate_per_variant(example):
    rep = run_json(["approximate", *example, "--param", "40", "--per-variant"])
    rows = {tuple(v["trace"]): v for v in rep["variants"]}
    assert rows[("c", "e")]["lower"] == pytest.approx(0.6)
    assert rows[("c", "e")]["witness"] == ["a", "b", "c", "e"]
    assert rows[("a", "e")]["source"] == "candidate"


def test_csv_log_input_matches_xes(fixtures, example):
    from_csv = run_json(["approximate", "--log", str(fixtures / "running_example.csv"),
                         "--model", str(fixtures / "running_example.pnml"), "--param", "40"])
    from_xes = run_json(["approximate", *example, "--param", "40"])
    assert strip_timing(from_csv) == strip_timing(from_xes)


def test_full_parameter_collapses_bounds(example):
    rep = run_json(["approximate", *example, "--param", "100"])
    exact = run_json(["exact", *example])
    f = rep["fitness"]
    assert f["lower"] == pytest.approx(f["upper"], abs=1e-12)
    assert f["approx"] == pytest.approx(exact["fitness"]["exact"], abs=1e-12)


def test_exact_report(example):
    rep = run_json(["exact", *example, "--per-variant"])
    assert rep["method"] == "exact"
    assert rep["fitness"]["exact"] == pytest.approx(0.92125)
    costs = {"".join(v["trace"]): v["cost"] for v in rep["variants"]}
    assert costs == {"abce": 0, "ae": 1, "acbde": 1, "abe": 0, "ce": 2}
    by = {d["activity"]: d for d in rep["deviations"]}
    # d never occurs in the model, so every occurrence is a log move
    assert by["d"]["ratio"] == 1.0


def test_exact_perfect_log(tmp_path, fixtures):
    p = tmp_path / "fit.csv"
    p.write_text("case,activity\n1,a\n1,b\n1,e\n2,a\n2,c\n2,b\n2,e\n")
    rep = run_json(["exact", "--log", str(p), "--model", str(fixtures / "running_example.pnml")])
    assert rep["fitness"]["exact"] == 1.0


def test_bench(example):
    rep = run_json(["bench", *example, "--param", "40", "--repeat", "2"])
    assert rep["accuracy"] == pytest.approx(0.005, abs=1e-12)
    assert rep["pi_no_preprocess"] >= rep["pi"] > 0
    assert rep["repeat"] == 2
    full = run_json(["bench", *example, "--param", "100", "--repeat", "1"])
    assert full["accuracy"] == pytest.approx(0, abs=1e-12)
    assert full["bound_width"] == pytest.approx(0, abs=1e-12)


def test_log_stats(fixtures, tmp_path):
    rep = run_json(["log-stats", "--log", str(fixtures / "running_example.xes")])
    assert rep["variants"] == 5 and rep["traces"] == 20
    assert rep["uniqueness"] == 0.25
    assert rep["avg_nn_distance"] == pytest.approx(1.4)
    p = tmp_path / "one.csv"
    p.write_text("case,activity\n1,a\n2,a\n3,a\n")
    rep = run_json(["log-stats", "--log", str(p)])
    assert rep["uniqueness"] == pytest.approx(1 / 3)
    assert rep["avg_nn_distance"] is None and "note" in rep
    p.write_text("case,activity\n1,a\n1,b\n2,c\n2,d\n")
    assert run_json(["log-stats", "--log", str(p)])["avg_nn_distance"] == 4.0


def test_csv_output(example):
    code, text = run(["approximate", *example, "--param", "40", "--format", "csv"])
    assert code == 0
    blocks = text.strip().split("\n\n")
    summary = list(csv.DictReader(io.StringIO(blocks[0])))
    assert len(summary) == 1
    assert float(summary[0]["fitness.approx"]) == pytest.approx(0.92625)
    devs = list(csv.DictReader(io.StringIO(blocks[1])))
    assert {d["activity"] for d in devs} == {"a", "b", "c", "d", "e"}


def test_render_flattens_lists():
    text = render({"x": 1, "variants": [{"trace": ["a", "b"], "n": 2}]}, "csv")
    assert "a b,2" in text


def test_csv_options(fixtures, tmp_path):
    rep = run_json(["log-stats", "--log", str(fixtures / "ordered_by_time.csv"), "--delimiter", ";",
                    "--case-column", "case_id", "--activity-column", "event", "--timestamp-column", "time"])
    assert rep["variants"] == 2


@pytest.mark.parametrize("args, code", [
    (["--log", "MISSING.xes", "--model", "{f}/running_example.pnml"], 2),
    (["--log", "{f}/malformed.xes", "--model", "{f}/running_example.pnml"], 2),
    (["--log", "{f}/running_example.xes", "--model", "{f}/bad_arc.pnml"], 2),
    (["--log", "{f}/running_example.xes", "--model", "{f}/inhibitor.pnml"], 2),
    (["--log", "{f}/running_example.xes", "--model", "{f}/malformed.pnml"], 2),
    (["--log", "{f}/running_example.xes", "--model", "{f}/no_final_marking.pnml"], 2),
    (["--log", "{f}/bad_timestamp.csv", "--timestamp-column", "time", "--model", "{f}/sequence.pnml"], 2),
    (["--log", "{f}/running_example.xes", "--model", "{f}/running_example.pnml", "--param", "0"], 2),
    (["--log", "{f}/running_example.xes", "--model", "{f}/running_example.pnml", "--param", "120"], 2),
    (["--log", "{f}/running_example.xes", "--model", "{f}/running_example.pnml", "--workers", "0"], 2),
    (["--log", "{f}/running_example.xes", "--model", "{f}/running_example.pnml", "--final-marking", "p1:x"], 2),
    (["--log", "{f}/running_example.xes", "--model", "{f}/running_example.pnml", "--final-marking", "p1:1"], 3),
    (["--log", "{f}/running_example.xes", "--model", "{f}/running_example.pnml", "--method", "simulation",
      "--max-steps", "1"], 3),
    (["--log", "{f}/running_example.xes", "--model", "{f}/running_example.pnml", "--state-cap", "2"], 4),
])
def test_exit_codes(fixtures, args, code, capsys):
    args = [a.replace("{f}", str(fixtures)) for a in args]
    assert run(["approximate", *args])[0] == code
    assert capsys.readouterr().err.strip()


def test_exact_exit_code_unreachable(example):
    assert run(["exact", *example, "--final-marking", "p1:1"])[0] == 3


def test_silent_override(fixtures):
    rep = run_json(["exact", "--log", str(fixtures / "running_example.xes"),
                    "--model", str(fixtures / "running_example.pnml"), "--silent", "t4"])
    # with c hidden every c in the log becomes a log move
    assert {d["activity"]: d for d in rep["deviations"]}["c"]["ratio"] == 1.0


def test_run_config_fraction():
    assert RunConfig("x", parameter=40).fraction == pytest.approx(0.4)
    with pytest.raises(ConfigError):
        RunConfig("x", parameter=0).fraction


@pytest.mark.parametrize("method", ["frequency", "random", "clustering", "simulation"])
def test_deterministic_across_workers_and_runs(example, method):
    args = ["approximate", *example, "--method", method, "--param", "40", "--per-variant", "--seed", "5"]
    first = strip_timing(run_json(args + ["--workers", "1"]))
    again = strip_timing(run_json(args + ["--workers", "1"]))
    many = strip_timing(run_json(args + ["--workers", "8"]))
    assert first == again == many


def test_module_entry_point(example):
    proc = subprocess.run([sys.executable, "-m", "confapprox", "exact", *example],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["fitness"]["exact"] == pytest.approx(0.92125)
