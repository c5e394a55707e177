"""Command-line front end.

Exit codes: 0 success, 2 bad input/configuration, 3 model errors (final
marking unreachable, simulation failure), 4 a search/state cap was hit.
"""
import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from typing import List, Optional

from . import approximator as ap
from .alignment import trace_fitness
from .errors import ConfigError, InputError, ModelError, ResourceError, UndefinedStatisticError
from .event_log import CsvConfig, EventLog, read_log, variants
from .petri_net import parse_marking, read_pnml

logger = logging.getLogger("confapprox")

EXIT_OK, EXIT_INPUT, EXIT_MODEL, EXIT_RESOURCE = 0, 2, 3, 4


@dataclass
class RunConfig:
    log_path: str
    model_path: Optional[str] = None
    method: str = "frequency"
    parameter: float = 10.0
    seed: int = 42
    workers: int = 1
    rule: str = "default"
    final_marking_override: Optional[str] = None
    output_format: str = "json"
    silent_label_overrides: Optional[List[str]] = None
    per_variant: bool = False
    repeat: int = 4
    csv_config: CsvConfig = CsvConfig()
    max_steps: Optional[int] = None
    max_iters: int = 100
    state_cap: int = 10 ** 6

    @property
    def fraction(self) -> float:
        if not 0 < self.parameter <= 100:
            raise ConfigError(f"--param must be a percentage in (0, 100], got {self.parameter}")
        return self.parameter / 100.0

    def resolved_rule(self) -> Optional[ap.Rule]:
        return None if self.rule == "default" else ap.Rule(self.rule)


def load_inputs(cfg: RunConfig):
    log = read_log(cfg.log_path, cfg.csv_config)
    if cfg.model_path is None:
        return log, None
    fm = parse_marking(cfg.final_marking_override) if cfg.final_marking_override else None
    net = read_pnml(cfg.model_path, final_marking=fm, silent=cfg.silent_label_overrides or ())
    return log, net


def _deviation_rows(stats: ap.DeviationStats):
    return [
        {"activity": a, "insertions": d.insertions, "deletions": d.deletions,
         "synchronous": d.synchronous, "ratio": d.deviation_ratio}
        for a, d in stats.ranked()
    ]


def approximation_report(res: ap.ApproximationResult, per_variant: bool = False) -> dict:
    report = {
        "method": res.method.value,
        "parameter": round(res.parameter * 100, 9),
        "seed": res.seed,
        "rule": res.rule.value,
        "spm": res.spm,
        "model_behavior_size": len(res.model_behavior),
        "candidates": len(res.candidates),
        "fitness": {"approx": res.log_approx, "lower": res.log_lower, "upper": res.log_upper},
        "deviations": _deviation_rows(res.deviations),
        "timing": {"preprocess_ms": res.preprocess_duration * 1e3,
                   "approx_ms": res.approx_duration * 1e3},
    }
    if per_variant:
        report["variants"] = [
            {"trace": list(r.trace), "frequency": r.frequency, "source": r.source.value,
             "lower": r.lower_fitness, "upper": r.upper_fitness, "approx": r.approx_fitness,
             "min_delta": r.min_delta, "witness": list(r.witness) if r.witness is not None else None}
            for r in res.per_trace
        ]
    return report


def exact_report(log: EventLog, res: ap.ExactResult, per_variant: bool = False) -> dict:
    report = {
        "method": "exact",
        "parameter": None,
        "seed": None,
        "spm": res.spm,
        "fitness": {"exact": res.fitness},
        "deviations": _deviation_rows(res.deviations),
        "timing": {"exact_ms": res.duration * 1e3},
    }
    if per_variant:
        report["variants"] = [
            {"trace": list(t), "frequency": f, "cost": res.costs[t],
             "fitness": trace_fitness(res.costs[t], len(t), res.spm)}
            for t, f in variants(log)
        ]
    return report


def bench_report(cfg: RunConfig, rep: ap.BenchmarkReport) -> dict:
    return {
        "method": cfg.method,
        "parameter": cfg.parameter,
        "seed": cfg.seed,
        "repeat": rep.repeat,
        "exact_fitness": rep.exact_fitness,
        "fitness": {"approx": rep.approx_fitness, "lower": rep.log_lower, "upper": rep.log_upper},
        "accuracy": rep.accuracy,
        "bound_width": rep.bound_width,
        "pi": rep.pi,
        "pi_no_preprocess": rep.pi_no_preprocess,
        "timing": {"exact_ms": rep.exact_duration * 1e3,
                   "preprocess_ms": rep.preprocess_duration * 1e3,
                   "approx_ms": rep.approx_duration * 1e3},
    }


def log_stats_report(log: EventLog, workers: int = 1) -> dict:
    report = {
        "variants": len(log),
        "traces": log.total_traces,
        "uniqueness": len(log) / log.total_traces if log.total_traces else None,
        "avg_nn_distance": None,
    }
    try:
        report["avg_nn_distance"] = ap.avg_nearest_neighbor_distance(log, workers)
    except UndefinedStatisticError as exc:
        report["note"] = str(exc)
    return report


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        elif not isinstance(v, list):
            out[f"{prefix}{k}"] = v
    return out


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    summary = _flatten(report)
    w.writerow(summary.keys())
    w.writerow(summary.values())
    for section in ("deviations", "variants"):
        rows = report.get(section)
        if not rows:
            continue
        buf.write("\n")
        w.writerow(rows[0].keys())
        for row in rows:
            w.writerow([" ".join(v) if isinstance(v, list) else v for v in row.values()])
    return buf.getvalue()


def cmd_approximate(cfg: RunConfig) -> dict:
    log, net = load_inputs(cfg)
    res = ap.approximate(log, net, ap.Method(cfg.method), cfg.fraction, cfg.seed, cfg.resolved_rule(),
                         cfg.workers, max_steps=cfg.max_steps, max_iters=cfg.max_iters,
                         state_cap=cfg.state_cap)
    return approximation_report(res, cfg.per_variant)


def cmd_exact(cfg: RunConfig) -> dict:
    log, net = load_inputs(cfg)
    res = ap.exact_conformance(log, net, workers=cfg.workers, state_cap=cfg.state_cap)
    return exact_report(log, res, cfg.per_variant)


def cmd_bench(cfg: RunConfig) -> dict:
    log, net = load_inputs(cfg)
    rep = ap.benchmark(log, net, ap.Method(cfg.method), cfg.fraction, cfg.seed, cfg.resolved_rule(),
                       cfg.workers, cfg.repeat, max_steps=cfg.max_steps, max_iters=cfg.max_iters,
                       state_cap=cfg.state_cap)
    return bench_report(cfg, rep)


def cmd_log_stats(cfg: RunConfig) -> dict:
    log = read_log(cfg.log_path, cfg.csv_config)
    return log_stats_report(log, cfg.workers)


COMMANDS = {
    "approximate": cmd_approximate,
    "exact": cmd_exact,
    "bench": cmd_bench,
    "log-stats": cmd_log_stats,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confapprox",
        description="Exact and approximated alignment-based fitness of an event log against a Petri net.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log", required=True, help="event log (.xes, or .csv with one row per event)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--case-column", default="case")
    common.add_argument("--activity-column", default="activity")
    common.add_argument("--timestamp-column", default=None,
                        help="sort events of a case by this column; without it, CSV row order is used")
    common.add_argument("--delimiter", default=",")
    common.add_argument("-v", "--verbose", action="store_true")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", required=True, help="PNML file")
    model.add_argument("--final-marking", default=None, help='e.g. "sink:1" (overrides the PNML file)')
    model.add_argument("--silent", default=None, help="comma-separated transition ids/names to treat as silent")
    model.add_argument("--per-variant", action="store_true", help="include one entry per variant")
    model.add_argument("--state-cap", type=int, default=10 ** 6)

    approx = argparse.ArgumentParser(add_help=False)
    approx.add_argument("--method", choices=[m.value for m in ap.Method], default="frequency")
    approx.add_argument("--param", type=float, default=10.0,
                        help="percentage: share of variants used as candidates, "
                             "or simulated walks relative to the number of traces")
    approx.add_argument("--seed", type=int, default=42)
    approx.add_argument("--rule", choices=["default"] + [r.value for r in ap.Rule], default="default",
                        help="default: midpoint for candidate methods, lower-bound for simulation")
    approx.add_argument("--max-steps", type=int, default=None)
    approx.add_argument("--max-iters", type=int, default=100)

    sub.add_parser("approximate", parents=[common, model, approx], help="approximated fitness with bounds")
    sub.add_parser("exact", parents=[common, model], help="exact alignment-based fitness")
    bench = sub.add_parser("bench", parents=[common, model, approx], help="compare approximation with exact")
    bench.add_argument("--repeat", type=int, default=4)
    sub.add_parser("log-stats", parents=[common], help="variant statistics of a log")
    return parser


def config_from_args(args) -> RunConfig:
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    return RunConfig(
        log_path=args.log,
        model_path=getattr(args, "model", None),
        method=getattr(args, "method", "exact" if args.command == "exact" else "frequency"),
        parameter=getattr(args, "param", 10.0),
        seed=getattr(args, "seed", 42),
        workers=args.workers,
        rule=getattr(args, "rule", "default"),
        final_marking_override=getattr(args, "final_marking", None),
        output_format=args.format,
        silent_label_overrides=[s.strip() for s in args.silent.split(",")] if getattr(args, "silent", None) else None,
        per_variant=getattr(args, "per_variant", False),
        repeat=getattr(args, "repeat", 4),
        csv_config=CsvConfig(args.case_column, args.activity_column, args.timestamp_column, args.delimiter),
        max_steps=getattr(args, "max_steps", None),
        max_iters=getattr(args, "max_iters", 100),
        state_cap=getattr(args, "state_cap", 10 ** 6),
    )


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
        if cfg.method != "exact":
            cfg.fraction  # validate early
        report = COMMANDS[args.command](cfg)
    except (InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    stdout.write(render(report, cfg.output_format))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
