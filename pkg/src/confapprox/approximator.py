"""Approximate log fitness with guaranteed bounds.

Candidate variants are aligned exactly; every other variant is compared
against the model-behavior subset by edit distance. The closest subset
member's distance upper-bounds the alignment cost (it is the cost of one
particular, possibly suboptimal, alignment), which gives a fitness lower
bound. A trace shorter than the shortest model path needs at least the
difference in insertions, which gives the fitness upper bound.
"""
import enum
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .alignment import (Alignment, CostFunction, MoveKind, STANDARD_COST, optimal_alignment,
                        shortest_path_model, trace_fitness)
from .edit_distance import EditOp, edit_script, min_distance_to_set
from .errors import ConformanceError, UndefinedStatisticError
from .event_log import EventLog, Trace, variants
from .parallel import parallel_map
from .petri_net import SystemNet
from .subset_builder import (CandidateInfo, CandidateSet, ModelBehaviorSet, build_by_simulation,
                             build_from_candidates, default_max_steps, select_candidates_clustering,
                             select_candidates_frequency, select_candidates_random)


class Method(str, enum.Enum):
    SIMULATION = "simulation"
    FREQUENCY = "frequency"
    RANDOM = "random"
    CLUSTERING = "clustering"


class Rule(str, enum.Enum):
    MIDPOINT = "midpoint"
    CANDIDATE_AVERAGE = "candidate-average"
    LOWER_BOUND = "lower-bound"


class Source(str, enum.Enum):
    CANDIDATE_EXACT = "candidate"
    APPROXIMATED = "approximated"


@dataclass(frozen=True)
class TraceResult:
    trace: Trace
    frequency: int
    lower_fitness: float
    upper_fitness: float
    approx_fitness: float
    source: Source
    witness: Optional[Trace] = None
    min_delta: Optional[int] = None


@dataclass(frozen=True)
class ActivityDeviation:
    insertions: int = 0
    deletions: int = 0
    synchronous: int = 0

    @property
    def deviation_ratio(self) -> float:
        asynchronous = self.insertions + self.deletions
        total = asynchronous + self.synchronous
        return asynchronous / total if total else 0.0


@dataclass(frozen=True)
class DeviationStats:
    per_activity: Dict[str, ActivityDeviation]

    def ranked(self) -> List[Tuple[str, ActivityDeviation]]:
        """Most problematic first: descending ratio, then activity name."""
        return sorted(self.per_activity.items(), key=lambda kv: (-kv[1].deviation_ratio, kv[0]))


@dataclass(frozen=True)
class ApproximationResult:
    per_trace: Tuple[TraceResult, ...]
    log_lower: float
    log_upper: float
    log_approx: float
    spm: int
    method: Method
    parameter: float
    seed: int
    rule: Rule
    deviations: DeviationStats
    model_behavior: ModelBehaviorSet
    candidates: CandidateSet = field(repr=False)
    # selection/simulation/clustering time
    preprocess_duration: float = 0.0
    # candidate alignments + distance computations + aggregation
    approx_duration: float = 0.0


@dataclass(frozen=True)
class ExactResult:
    fitness: float
    spm: int
    costs: Dict[Trace, float]
    alignments: Dict[Trace, Alignment] = field(repr=False)
    deviations: DeviationStats
    duration: float


@dataclass(frozen=True)
class BenchmarkReport:
    exact_fitness: float
    approx_fitness: float
    log_lower: float
    log_upper: float
    accuracy: float
    bound_width: float
    pi: float
    pi_no_preprocess: float
    exact_duration: float
    preprocess_duration: float
    approx_duration: float
    repeat: int


def trace_bounds(trace: Sequence[str], mb: ModelBehaviorSet, spm: int) -> Tuple[float, float, int, Trace]:
    """(lower fitness, upper fitness, distance to closest subset member, that member)."""
    trace = tuple(trace)
    if not len(mb):
        raise ValueError("model-behavior subset is empty")
    delta, witness = min_distance_to_set(trace, mb.index)
    n = len(trace)
    denom = n + spm
    if denom == 0:
        lower = 1.0 if delta == 0 else 0.0
    else:
        # the true cost never exceeds n + spm, so fitness is never below 0
        lower = max(0.0, 1.0 - delta / denom)
    upper = 1.0 if n >= spm else 1.0 - (spm - n) / denom
    return lower, upper, delta, witness


def approximate_trace(trace: Sequence[str], frequency: int, mb: ModelBehaviorSet, spm: int,
                      candidate_info: Optional[CandidateInfo] = None, rule: Rule = Rule.MIDPOINT,
                      candidate_mean: Optional[float] = None) -> TraceResult:
    trace = tuple(trace)
    if candidate_info is not None:
        f = candidate_info.exact_fitness
        return TraceResult(trace, frequency, f, f, f, Source.CANDIDATE_EXACT)
    lower, upper, delta, witness = trace_bounds(trace, mb, spm)
    rule = Rule(rule)
    if rule is Rule.MIDPOINT:
        approx = (lower + upper) / 2
    elif rule is Rule.LOWER_BOUND:
        approx = lower
    else:
        if candidate_mean is None:
            raise ValueError("candidate-average rule needs a non-empty candidate set")
        approx = min(max(lower, candidate_mean), upper)
    return TraceResult(trace, frequency, lower, upper, approx, Source.APPROXIMATED, witness, delta)


def _weighted_mean(pairs) -> float:
    pairs = list(pairs)
    total = sum(w for _, w in pairs)
    return math.fsum(v * w for v, w in pairs) / total


def aggregate(per_trace: Sequence[TraceResult]) -> Tuple[float, float, float]:
    """Frequency-weighted (lower, upper, approx) over traces, summed in canonical trace order."""
    if not per_trace:
        raise ValueError("nothing to aggregate")
    ordered = sorted(per_trace, key=lambda r: r.trace)
    return (
        _weighted_mean((r.lower_fitness, r.frequency) for r in ordered),
        _weighted_mean((r.upper_fitness, r.frequency) for r in ordered),
        _weighted_mean((r.approx_fitness, r.frequency) for r in ordered),
    )


def _count_alignment(counts, alignment: Alignment, net: SystemNet, weight: int):
    for m in alignment.moves:
        if m.kind is MoveKind.SYNCHRONOUS:
            counts[m.log_activity][2] += weight
        elif m.kind is MoveKind.LOG_ONLY:
            counts[m.log_activity][1] += weight
        else:
            label = net.labels[m.transition]
            if label is not None:
                counts[label][0] += weight


def _freeze(counts) -> DeviationStats:
    return DeviationStats({a: ActivityDeviation(*c) for a, c in sorted(counts.items())})


def deviation_stats(results: Sequence[TraceResult], candidates: CandidateSet,
                    net: SystemNet) -> DeviationStats:
    """Per-activity insertions, deletions and synchronous moves, weighted by trace frequency.

    Candidates count their real alignment moves; approximated traces count
    the edit script against their closest subset member.
    """
    counts = defaultdict(lambda: [0, 0, 0])  # insertions, deletions, synchronous
    for r in sorted(results, key=lambda r: r.trace):
        if r.source is Source.CANDIDATE_EXACT:
            _count_alignment(counts, candidates[r.trace].alignment, net, r.frequency)
            continue
        if r.witness is None:
            raise ConformanceError(f"internal error: approximated trace {r.trace} has no witness")
        for op, a in edit_script(r.trace, r.witness).steps:
            slot = {EditOp.INSERT: 0, EditOp.DELETE: 1, EditOp.MATCH: 2}[op]
            counts[a][slot] += r.frequency
    return _freeze(counts)


def _approximate_one(item, mb, spm, rule, candidate_mean):
    trace, freq = item
    return approximate_trace(trace, freq, mb, spm, None, rule, candidate_mean)


def default_rule(method: Method) -> Rule:
    return Rule.LOWER_BOUND if Method(method) is Method.SIMULATION else Rule.MIDPOINT


def approximate(log: EventLog, net: SystemNet, method: Method = Method.FREQUENCY,
                fraction: float = 0.1, seed: int = 42, rule: Optional[Rule] = None,
                workers: int = 1, cost: CostFunction = STANDARD_COST,
                max_steps: Optional[int] = None, max_iters: int = 100,
                state_cap: int = 10 ** 6, spm: Optional[int] = None) -> ApproximationResult:
    """Approximate fitness of ``log`` against ``net``.

    ``fraction`` is the share of distinct variants used as candidates or,
    for simulation, the number of simulated walks relative to the number of
    traces in the log.
    """
    method = Method(method)
    rule = default_rule(method) if rule is None else Rule(rule)
    vs = variants(log)
    if not vs:
        raise ValueError("log is empty")
    if spm is None:
        spm = shortest_path_model(net, state_cap)

    t0 = time.perf_counter()
    if method is Method.SIMULATION:
        if not 0 < fraction:
            raise ValueError("fraction must be positive")
        target = max(1, math.ceil(round(fraction * log.total_traces, 9)))
        steps = max_steps if max_steps is not None else default_max_steps(net, log)
        mb = build_by_simulation(net, target, steps, seed)
        selected = frozenset()
    elif method is Method.FREQUENCY:
        selected = select_candidates_frequency(log, fraction)
    elif method is Method.RANDOM:
        selected = select_candidates_random(log, fraction, seed)
    else:
        selected = select_candidates_clustering(log, fraction, seed, max_iters, workers)
    t1 = time.perf_counter()

    candidates: CandidateSet = {}
    if method is not Method.SIMULATION:
        mb, candidates = build_from_candidates(selected, log, net, cost, spm, workers, state_cap)

    candidate_mean = None
    if candidates:
        candidate_mean = _weighted_mean((c.exact_fitness, c.frequency) for _, c in sorted(candidates.items()))
    elif rule is Rule.CANDIDATE_AVERAGE:
        raise ValueError("candidate-average rule needs a candidate-selection method")

    rest = [(t, f) for t, f in vs if t not in candidates]
    approximated = parallel_map(
        partial(_approximate_one, mb=mb, spm=spm, rule=rule, candidate_mean=candidate_mean),
        rest, workers)
    per_trace = [approximate_trace(t, f, mb, spm, candidates[t]) for t, f in vs if t in candidates]
    per_trace = tuple(sorted(per_trace + approximated, key=lambda r: r.trace))
    lower, upper, approx = aggregate(per_trace)
    devs = deviation_stats(per_trace, candidates, net)
    t2 = time.perf_counter()

    return ApproximationResult(
        per_trace=per_trace, log_lower=lower, log_upper=upper, log_approx=approx, spm=spm,
        method=method, parameter=fraction, seed=seed, rule=rule, deviations=devs,
        model_behavior=mb, candidates=candidates,
        preprocess_duration=t1 - t0, approx_duration=t2 - t1,
    )


def _align_variant(trace, net, cost, state_cap):
    try:
        return optimal_alignment(trace, net, cost, state_cap=state_cap)
    except ConformanceError as exc:
        raise type(exc)(f"trace {trace}: {exc}") from exc


def exact_conformance(log: EventLog, net: SystemNet, cost: CostFunction = STANDARD_COST,
                      workers: int = 1, state_cap: int = 10 ** 6) -> ExactResult:
    """Align every variant and return the frequency-weighted fitness."""
    t0 = time.perf_counter()
    spm = shortest_path_model(net, state_cap)
    vs = variants(log)
    alignments = parallel_map(partial(_align_variant, net=net, cost=cost, state_cap=state_cap),
                              [t for t, _ in vs], workers)
    costs, by_trace = {}, {}
    counts = defaultdict(lambda: [0, 0, 0])
    fits = []
    for (trace, freq), al in zip(vs, alignments):
        costs[trace] = al.cost
        by_trace[trace] = al
        fits.append((trace_fitness(al.cost, len(trace), spm), freq))
        _count_alignment(counts, al, net, freq)
    fitness = _weighted_mean(fits) if fits else 1.0
    return ExactResult(fitness, spm, costs, by_trace, _freeze(counts), time.perf_counter() - t0)


def benchmark(log: EventLog, net: SystemNet, method: Method = Method.FREQUENCY,
              fraction: float = 0.1, seed: int = 42, rule: Optional[Rule] = None,
              workers: int = 1, repeat: int = 1, exact: Optional[ExactResult] = None,
              **kwargs) -> BenchmarkReport:
    """Run the exact baseline once and the approximation ``repeat`` times; durations are means.

    ``pi`` divides the exact time by preprocessing plus approximation time,
    ``pi_no_preprocess`` by the approximation time alone. The shortest-path
    computation belongs to both sides and is done inside each timed run.
    """
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    if exact is None:
        exact = exact_conformance(log, net, workers=workers,
                                  **{k: v for k, v in kwargs.items() if k in ("cost", "state_cap")})
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        spm = shortest_path_model(net)
        spm_time = time.perf_counter() - t0
        res = approximate(log, net, method, fraction, seed, rule, workers, spm=spm, **kwargs)
        runs.append((res, res.preprocess_duration, res.approx_duration + spm_time))
    res = runs[-1][0]
    pre = sum(r[1] for r in runs) / repeat
    appx = sum(r[2] for r in runs) / repeat
    return BenchmarkReport(
        exact_fitness=exact.fitness,
        approx_fitness=res.log_approx,
        log_lower=res.log_lower,
        log_upper=res.log_upper,
        accuracy=abs(exact.fitness - res.log_approx),
        bound_width=res.log_upper - res.log_lower,
        pi=exact.duration / (pre + appx),
        pi_no_preprocess=exact.duration / appx,
        exact_duration=exact.duration,
        preprocess_duration=pre,
        approx_duration=appx,
        repeat=repeat,
    )


def _nn_distance(i, traces):
    return min_distance_to_set(traces[i], traces[:i] + traces[i + 1:])[0]


def avg_nearest_neighbor_distance(log: EventLog, workers: int = 1) -> float:
    """Mean over distinct variants of the edit distance to the closest other variant."""
    traces = [t for t, _ in variants(log)]
    if len(traces) < 2:
        raise UndefinedStatisticError("nearest-neighbor distance needs at least two variants")
    dists = parallel_map(partial(_nn_distance, traces=traces), range(len(traces)), workers)
    return math.fsum(dists) / len(dists)
