"""Building the model-behavior subset used in place of the full model language.

Two routes: random simulation of the net, or exact alignment of selected
log variants (candidates) whose model-side traces are collected. Candidate
counts are fractions of the number of distinct variants.
"""
import logging
import math
import random
from dataclasses import dataclass
from functools import partial
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .alignment import (Alignment, CostFunction, STANDARD_COST, model_trace,
                        optimal_alignment, shortest_path_model, trace_fitness)
from .edit_distance import TraceIndex
from .errors import ConformanceError, SimulationError
from .event_log import EventLog, Trace, variants
from .parallel import parallel_map
from .petri_net import SystemNet
from .synthetic import random_walk

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelBehaviorSet:
    traces: FrozenSet[Trace]

    def __init__(self, traces: Iterable[Sequence[str]] = ()):
        object.__setattr__(self, "traces", frozenset(tuple(t) for t in traces))
        object.__setattr__(self, "_index", None)

    def ordered(self) -> List[Trace]:
        return sorted(self.traces)

    @property
    def index(self) -> TraceIndex:
        if self._index is None:
            object.__setattr__(self, "_index", TraceIndex(self.traces))
        return self._index

    def __len__(self):
        return len(self.traces)

    def __iter__(self):
        return iter(self.ordered())

    def __contains__(self, trace):
        return tuple(trace) in self.traces


@dataclass(frozen=True)
class CandidateInfo:
    frequency: int
    exact_cost: float
    exact_fitness: float
    alignment: Alignment


CandidateSet = Dict[Trace, CandidateInfo]


def count_for_fraction(fraction: float, n: int) -> int:
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    # round away float noise such as 0.1 * 30 == 3.0000000000000004
    return min(n, math.ceil(round(fraction * n, 9)))


def default_max_steps(net: SystemNet, log: Optional[EventLog] = None) -> int:
    longest = max((len(t) for t in log.variant_counts), default=0) if log is not None else 0
    return 4 * (len(net.transitions) + longest)


def build_by_simulation(net: SystemNet, target_count: int, max_steps: int, seed: int = 42) -> ModelBehaviorSet:
    """Visible traces of ``target_count`` successful uniform random walks.

    Walk ``k`` draws from its own RNG seeded with ``(seed, k)``. Walks that
    deadlock or exceed ``max_steps`` are discarded; at most
    ``100 * target_count`` walks are attempted.
    """
    if target_count < 1 or max_steps < 1:
        raise ValueError("target_count and max_steps must be >= 1")
    found = set()
    successes = 0
    for k in range(100 * target_count):
        rng = random.Random(f"{seed}/{k}")
        walk = random_walk(net, rng, max_steps)
        if walk is None:
            continue
        found.add(walk)
        successes += 1
        if successes >= target_count:
            break
    if not successes:
        raise SimulationError(
            f"no random walk reached the final marking within {max_steps} steps "
            f"after {100 * target_count} attempts")
    return ModelBehaviorSet(found)


def select_candidates_frequency(log: EventLog, fraction: float) -> FrozenSet[Trace]:
    """The most frequent variants; equal frequencies fall back to canonical order."""
    vs = variants(log)
    if not vs:
        raise ValueError("cannot select candidates from an empty log")
    k = count_for_fraction(fraction, len(vs))
    ranked = sorted(vs, key=lambda tf: -tf[1])  # stable: keeps canonical order among ties
    return frozenset(t for t, _ in ranked[:k])


def select_candidates_random(log: EventLog, fraction: float, seed: int = 42) -> FrozenSet[Trace]:
    vs = variants(log)
    if not vs:
        raise ValueError("cannot select candidates from an empty log")
    k = count_for_fraction(fraction, len(vs))
    return frozenset(random.Random(seed).sample([t for t, _ in vs], k))


def _distance_row(s: Trace, index: TraceIndex) -> List[int]:
    return index.distances(s)


def distance_matrix(traces: Sequence[Trace], workers: int = 1) -> np.ndarray:
    """Pairwise edit distances; row ``i`` comes from one packed pass of ``traces[i]``."""
    traces = [tuple(t) for t in traces]
    index = TraceIndex(traces)
    pos = {t: k for k, t in enumerate(index.traces)}
    cols = [pos[t] for t in traces]
    rows = parallel_map(partial(_distance_row, index=index), traces, workers)
    return np.asarray(rows, dtype=np.int64).reshape(len(traces), len(index.traces))[:, cols]


def pam(d: np.ndarray, k: int, seed: int = 42, max_iters: int = 100) -> List[int]:
    """K-medoids (PAM, best-improvement swaps) over a precomputed distance matrix.

    Returns sorted medoid indices. Initial medoids are a seeded random sample.
    """
    n = d.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    medoids = sorted(random.Random(seed).sample(range(n), k))
    if k == n:
        return medoids
    d = d.astype(np.float64)

    def cost_of(meds):
        return d[:, meds].min(axis=1).sum()

    current = cost_of(medoids)
    for _ in range(max_iters):
        to_med = d[:, medoids]
        order = np.argsort(to_med, axis=1, kind="stable")
        nearest = to_med[np.arange(n), order[:, 0]]
        second = to_med[np.arange(n), order[:, 1]] if k > 1 else np.full(n, np.inf)
        is_med = np.zeros(n, dtype=bool)
        is_med[medoids] = True
        others = np.flatnonzero(~is_med)
        best_cost, best_swap = current, None
        for j in range(k):
            # distance each point keeps when medoid j is removed
            base = np.where(order[:, 0] == j, second, nearest)
            costs = np.minimum(d[:, others], base[:, None]).sum(axis=0)
            o = int(np.argmin(costs))
            if costs[o] < best_cost - 1e-12:
                best_cost, best_swap = costs[o], (j, int(others[o]))
        if best_swap is None:
            break
        j, o = best_swap
        medoids[j] = o
        medoids.sort()
        current = cost_of(medoids)
    return sorted(medoids)


def select_candidates_clustering(log: EventLog, fraction: float, seed: int = 42,
                                 max_iters: int = 100, workers: int = 1) -> FrozenSet[Trace]:
    """One medoid variant per cluster, clustering variants by edit distance."""
    vs = [t for t, _ in variants(log)]
    if not vs:
        raise ValueError("cannot select candidates from an empty log")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    k = math.ceil(round(fraction * len(vs), 9))
    if k > len(vs):
        logger.warning("requested %d clusters but the log has only %d variants; clamping", k, len(vs))
    k = max(1, min(k, len(vs)))
    d = distance_matrix(vs, workers)
    return frozenset(vs[i] for i in pam(d, k, seed, max_iters))


def _align_candidate(trace: Trace, net: SystemNet, cost: CostFunction, state_cap: int) -> Alignment:
    try:
        return optimal_alignment(trace, net, cost, state_cap=state_cap)
    except ConformanceError as exc:
        raise type(exc)(f"candidate {trace}: {exc}") from exc


def build_from_candidates(candidates: Iterable[Trace], log: EventLog, net: SystemNet,
                          cost: CostFunction = STANDARD_COST, spm: Optional[int] = None,
                          workers: int = 1, state_cap: int = 10 ** 6
                          ) -> Tuple[ModelBehaviorSet, CandidateSet]:
    """Align each candidate exactly and collect the model side of each alignment."""
    ordered = sorted(tuple(c) for c in candidates)
    for c in ordered:
        if c not in log.variant_counts:
            raise ValueError(f"candidate {c} is not a variant of the log")
    if spm is None:
        spm = shortest_path_model(net, state_cap)
    alignments = parallel_map(partial(_align_candidate, net=net, cost=cost, state_cap=state_cap),
                              ordered, workers)
    infos: CandidateSet = {}
    mb = set()
    for trace, al in zip(ordered, alignments):
        infos[trace] = CandidateInfo(
            frequency=log.variant_counts[trace],
            exact_cost=al.cost,
            exact_fitness=trace_fitness(al.cost, len(trace), spm),
            alignment=al,
        )
        mb.add(model_trace(al, net))
    return ModelBehaviorSet(mb), infos
