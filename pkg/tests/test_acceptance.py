"""Acceptance checks, one test per criterion.

Each test prints a single ``CRITERION n ... PASS|FAIL`` line to the
terminal (bypassing output capture) before asserting.
"""
import io
import json
import random
import time

import pytest

from confapprox.alignment import optimal_alignment, trace_fitness
from confapprox.approximator import Method, approximate, benchmark, exact_conformance, trace_bounds
from confapprox.cli import main
from confapprox.edit_distance import edit_distance, edit_script
from confapprox.errors import ConfigError, ParseError, StructuralError
from confapprox.event_log import CsvConfig, EventLog, parse_csv, parse_xes
from confapprox.petri_net import Marking, enumerate_visible_traces, parse_pnml
from confapprox.subset_builder import build_from_candidates
from confapprox.synthetic import (benchmark_log, benchmark_net, random_block_net, random_dag_net,
                                  random_log, running_example_log, running_example_net)

from oracles import dp_edit_distance

T = lambda s: tuple(s)  # noqa: E731


@pytest.fixture
def verdict(capsys):
    def record(n, title, ok, detail=""):
        with capsys.disabled():
            print(f"\nCRITERION {n:>2} {title}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
        assert ok, detail
    return record


def test_criterion_01_worked_example(verdict):
    t0 = time.perf_counter()
    net, log = running_example_net(), running_example_log()
    res = approximate(log, net, Method.FREQUENCY, 0.4)
    elapsed = time.perf_counter() - t0
    rows = {r.trace: (r.lower_fitness, r.upper_fitness, r.approx_fitness) for r in res.per_trace}
    expected = {
        T("abce"): (1, 1, 1),
        T("ae"): (0.8, 0.8, 0.8),
        T("acbde"): (0.75, 1, 0.875),
        T("abe"): (1, 1, 1),
        T("ce"): (0.6, 0.8, 0.7),  # 1 - 2/5 for a distance of 2 and a shortest path of 3
    }
    exact = exact_conformance(log, net)
    actual_ok = abs(trace_fitness(exact.costs[T("ce")], 2, 3) - 0.6) < 1e-9
    ok = (set(res.candidates) == {T("abce"), T("ae")}
          and set(res.model_behavior) == {T("abe"), T("abce")}
          and rows.keys() == expected.keys()
          and all(abs(a - b) <= 1e-9 for t in expected for a, b in zip(rows[t], expected[t]))
          and abs(res.log_upper - 0.95) <= 1e-9
          and abs(res.log_lower - 0.9025) <= 1e-9
          and abs(res.log_approx - 0.92625) <= 1e-9
          and actual_ok and elapsed < 1.0)
    verdict(1, "worked example", ok,
            f"LB={res.log_lower:.6f} UB={res.log_upper:.6f} approx={res.log_approx:.6f} in {elapsed:.3f}s")


def test_criterion_02_deviation_totals(verdict):
    res = approximate(running_example_log(), running_example_net(), Method.FREQUENCY, 0.4)
    dev = res.deviations.per_activity
    got = {a: (d.insertions, d.deletions) for a, d in dev.items()}
    want = {"a": (1, 0), "b": (5, 0), "c": (0, 3), "d": (0, 3), "e": (0, 0)}
    verdict(2, "deviation totals", got == want, f"(insertions, deletions) {got}")


def test_criterion_03_oracle_equivalence(verdict):
    rng = random.Random(2024)
    t0 = time.perf_counter()
    agree = total = 0
    while total < 150:
        net = random_block_net(rng) if total % 2 else random_dag_net(rng)
        assert len(net.transitions) <= 8
        lang = enumerate_visible_traces(net, len(net.transitions))
        trace = tuple(rng.choice("abcdefx") for _ in range(rng.randint(0, 8)))
        phi = min(dp_edit_distance(trace, v) for v in lang)
        agree += optimal_alignment(trace, net).cost == phi
        total += 1
    elapsed = time.perf_counter() - t0
    verdict(3, "alignment cost equals enumerated distance", agree == total and elapsed < 60,
            f"{agree}/{total} agree in {elapsed:.1f}s")


def test_criterion_04_sandwich(verdict):
    rng = random.Random(99)
    held = total = 0
    methods = list(Method)
    for k in range(120):
        net = random_block_net(rng) if k % 2 else random_dag_net(rng)
        log = random_log(net, rng, rng.randint(5, 30))
        method = methods[k % len(methods)]
        fraction = rng.choice([0.01, 0.1, 0.25, 0.5, 1.0])
        res = approximate(log, net, method, fraction, seed=k)
        exact = exact_conformance(log, net)
        ok = res.log_lower - 1e-12 <= exact.fitness <= res.log_upper + 1e-12
        for r in res.per_trace:
            f = trace_fitness(exact.costs[r.trace], len(r.trace), exact.spm)
            ok &= r.lower_fitness - 1e-12 <= f <= r.upper_fitness + 1e-12
        held += ok
        total += 1
    verdict(4, "lower <= exact <= upper", held == total, f"{held}/{total} instances")


def test_criterion_05_edit_distance_properties(verdict):
    rng = random.Random(5)
    t0 = time.perf_counter()
    good = 0
    n = 10_000
    for _ in range(n):
        alphabet = "abcdefghij"[:rng.randint(1, 10)]
        s, t, u = (tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 30))) for _ in range(3))
        d = edit_distance(s, t)
        script = edit_script(s, t)
        good += (d == edit_distance(t, s)
                 and (d == 0) == (s == t)
                 and d <= edit_distance(s, u) + edit_distance(u, t)
                 and d % 2 == (len(s) + len(t)) % 2
                 and script.cost == d and script.apply(s) == t)
    elapsed = time.perf_counter() - t0
    verdict(5, "edit distance properties", good == n and elapsed < 10, f"{good}/{n} pairs in {elapsed:.2f}s")


def test_criterion_06_monotonicity(verdict):
    rng = random.Random(6)
    held = total = 0
    for k in range(100):
        net = random_block_net(rng) if k % 2 else random_dag_net(rng)
        log = random_log(net, rng, 20)
        vs = sorted(log.variant_counts)
        if len(vs) < 2:
            continue
        big = rng.sample(vs, rng.randint(2, len(vs)))
        small = rng.sample(big, rng.randint(1, len(big) - 1))
        mb_a, _ = build_from_candidates(small, log, net)
        mb_b, _ = build_from_candidates(big, log, net)
        spm = optimal_alignment((), net).cost
        held += all(trace_bounds(t, mb_b, spm)[0] >= trace_bounds(t, mb_a, spm)[0] for t in vs)
        total += 1
    verdict(6, "larger candidate set never lowers a lower bound", held == total and total >= 50,
            f"{held}/{total} instances")


def test_criterion_07_full_candidates(verdict):
    rng = random.Random(7)
    worst = 0.0
    cases = [(running_example_net(), running_example_log())]
    for _ in range(10):
        net = random_block_net(rng)
        cases.append((net, random_log(net, rng, 30)))
    for net, log in cases:
        exact = exact_conformance(log, net)
        for method in (Method.FREQUENCY, Method.RANDOM, Method.CLUSTERING):
            rep = benchmark(log, net, method, 1.0, exact=exact)
            worst = max(worst, rep.bound_width, rep.accuracy)
    verdict(7, "parameter 100 gives zero width and accuracy", worst <= 1e-12, f"max deviation {worst:.1e}")


@pytest.mark.slow
def test_criterion_08_performance(verdict):
    t0 = time.perf_counter()
    net = benchmark_net()
    log = benchmark_log(net, 10_000, 500)
    assert len(net.transitions) == 20 and log.total_traces == 10_000 and len(log) == 500
    rep = benchmark(log, net, Method.FREQUENCY, 0.10, workers=1, repeat=4)
    elapsed = time.perf_counter() - t0
    verdict(8, "speed-up without preprocessing >= 2", rep.pi_no_preprocess >= 2 and elapsed < 600,
            f"PI_no_preprocess={rep.pi_no_preprocess:.2f} PI={rep.pi:.2f} exact={rep.exact_duration:.2f}s "
            f"approx={rep.approx_duration:.3f}s accuracy={rep.accuracy:.4f} total {elapsed:.0f}s")


def _numeric(report):
    return {k: v for k, v in report.items() if k != "timing"}


def _run(args):
    out = io.StringIO()
    code = main(args, stdout=out)
    return code, out.getvalue()


def test_criterion_09_determinism(verdict, fixtures):
    base = ["--log", str(fixtures / "running_example.xes"), "--model", str(fixtures / "running_example.pnml")]
    commands = [["exact", *base, "--per-variant"], ["log-stats", "--log", base[1]]]
    for m in ("frequency", "random", "clustering", "simulation"):
        commands.append(["approximate", *base, "--method", m, "--param", "40", "--per-variant", "--seed", "11"])
    commands.append(["bench", *base, "--method", "clustering", "--param", "40", "--repeat", "1"])
    bench_timing = ("pi", "pi_no_preprocess")
    same = 0
    for cmd in commands:
        outs = []
        for workers in ("1", "1", "8"):
            code, text = _run(cmd + ["--workers", workers])
            rep = _numeric(json.loads(text))
            for k in bench_timing:
                rep.pop(k, None)
            outs.append((code, rep))
        same += outs[0] == outs[1] == outs[2] and outs[0][0] == 0
    verdict(9, "identical output for 1 and 8 workers and repeated runs", same == len(commands),
            f"{same}/{len(commands)} commands")


def test_criterion_10_parsers(verdict, fixtures):
    checks = []
    log = parse_xes((fixtures / "running_example.xes").read_bytes())
    checks.append(("running_example.xes", log == running_example_log()))
    with open(fixtures / "running_example.csv", newline="") as fh:
        checks.append(("running_example.csv", parse_csv(fh) == running_example_log()))
    checks.append(("small.xes", parse_xes((fixtures / "small.xes").read_bytes())
                   == EventLog({T("ab"): 2, T("a"): 1, (): 1})))
    with open(fixtures / "ordered_by_time.csv", newline="") as fh:
        cfg = CsvConfig("case_id", "event", "time", ";")
        checks.append(("ordered_by_time.csv", parse_csv(fh, cfg)
                       == EventLog({T("abc"): 1, ("a; quoted",): 1})))
    net = parse_pnml((fixtures / "running_example.pnml").read_bytes())
    ref = running_example_net()
    checks.append(("running_example.pnml", net.labels == ref.labels and net.inputs == ref.inputs
                   and net.outputs == ref.outputs and net.initial_marking == ref.initial_marking
                   and net.final_marking == ref.final_marking))
    seq = parse_pnml((fixtures / "sequence.pnml").read_bytes())
    checks.append(("sequence.pnml", enumerate_visible_traces(seq, 5) == {T("abc")}
                   and seq.initial_marking == Marking({"src": 2})))

    def raises(exc, fn):
        try:
            fn()
        except exc:
            return True
        except Exception:
            return False
        return False

    checks.append(("malformed.xes", raises(ParseError, lambda: parse_xes((fixtures / "malformed.xes").read_bytes()))))
    checks.append(("missing_name.xes",
                   raises(ParseError, lambda: parse_xes((fixtures / "missing_name.xes").read_bytes()))))
    checks.append(("bad_timestamp.csv", raises(ParseError, lambda: parse_csv(
        open(fixtures / "bad_timestamp.csv", newline=""), CsvConfig(timestamp_column="time")))))
    checks.append(("bad_arc.pnml", raises(StructuralError, lambda: parse_pnml((fixtures / "bad_arc.pnml").read_bytes()))))
    checks.append(("inhibitor.pnml",
                   raises(StructuralError, lambda: parse_pnml((fixtures / "inhibitor.pnml").read_bytes()))))
    checks.append(("malformed.pnml", raises(ParseError, lambda: parse_pnml((fixtures / "malformed.pnml").read_bytes()))))
    checks.append(("no_final_marking.pnml",
                   raises(ConfigError, lambda: parse_pnml((fixtures / "no_final_marking.pnml").read_bytes()))))

    model = str(fixtures / "running_example.pnml")
    for bad_log in ("malformed.xes", "missing_name.xes"):
        checks.append((f"exit code {bad_log}",
                       _run(["exact", "--log", str(fixtures / bad_log), "--model", model])[0] == 2))
    for bad_model in ("bad_arc.pnml", "inhibitor.pnml", "malformed.pnml", "no_final_marking.pnml"):
        checks.append((f"exit code {bad_model}", _run(["exact", "--log", str(fixtures / "running_example.xes"),
                                                       "--model", str(fixtures / bad_model)])[0] == 2))
    failed = [name for name, ok in checks if not ok]
    verdict(10, "parser round-trips and error classes", not failed,
            f"{len(checks) - len(failed)}/{len(checks)} checks" + (f"; failed {failed}" if failed else ""))
