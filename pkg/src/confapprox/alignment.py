"""Optimal alignments of a trace against a system net.

The search runs A* over states ``(marking, number of trace events
consumed)``. Every trace event must be consumed and the final marking
reached. The default heuristic charges the log-move cost of each
remaining event whose activity labels no transition of the net: such an
event can only ever be a log move, so the estimate is admissible and
consistent.
"""
import enum
import heapq
import itertools
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .errors import ModelError, ResourceError
from .petri_net import SystemNet

DEFAULT_STATE_CAP = 10 ** 6


class MoveKind(enum.IntEnum):
    # order doubles as tie-breaking preference
    SYNCHRONOUS = 0
    MODEL_ONLY = 1
    LOG_ONLY = 2


@dataclass(frozen=True)
class Move:
    kind: MoveKind
    log_activity: Optional[str] = None
    transition: Optional[str] = None

    def __post_init__(self):
        if self.kind is MoveKind.SYNCHRONOUS:
            ok = self.log_activity is not None and self.transition is not None
        elif self.kind is MoveKind.LOG_ONLY:
            ok = self.log_activity is not None and self.transition is None
        else:
            ok = self.log_activity is None and self.transition is not None
        if not ok:
            raise ValueError(f"malformed {self.kind.name} move: {self!r}")


@dataclass(frozen=True)
class Alignment:
    moves: Tuple[Move, ...]
    cost: float

    def log_projection(self) -> Tuple[str, ...]:
        return tuple(m.log_activity for m in self.moves if m.kind is not MoveKind.MODEL_ONLY)

    def firing_sequence(self) -> Tuple[str, ...]:
        return tuple(m.transition for m in self.moves if m.kind is not MoveKind.LOG_ONLY)


@dataclass(frozen=True)
class CostFunction:
    """Move costs. Synchronous and silent model moves are always free; anything not listed costs 1."""

    log_move_cost: Mapping[str, float] = field(default_factory=dict)
    model_move_cost: Mapping[str, float] = field(default_factory=dict)

    def log_cost(self, activity: str) -> float:
        return self.log_move_cost.get(activity, 1)

    def model_cost(self, net: SystemNet, transition: str) -> float:
        if net.labels[transition] is None:
            return 0
        return self.model_move_cost.get(transition, 1)

    def __post_init__(self):
        for k, v in self.log_move_cost.items():
            if v <= 0:
                raise ValueError(f"log move cost for {k!r} must be positive")
        for k, v in self.model_move_cost.items():
            if v < 0:
                raise ValueError(f"model move cost for {k!r} must be non-negative")


STANDARD_COST = CostFunction()


def optimal_alignment(trace: Sequence[str], net: SystemNet, cost: CostFunction = STANDARD_COST,
                      heuristic: str = "unmatchable", state_cap: int = DEFAULT_STATE_CAP) -> Alignment:
    """Minimum-cost alignment of ``trace`` and ``net``.

    Among equally cheap alignments the search prefers synchronous moves,
    then model moves, then log moves, then lower transition ids.
    """
    trace = tuple(trace)
    n = len(trace)
    transitions = net.transitions
    labels = [net.labels[t] for t in transitions]
    model_costs = [cost.model_cost(net, t) for t in transitions]
    log_costs = [cost.log_cost(a) for a in trace]

    if heuristic == "unmatchable":
        visible = net.visible_labels
        h_suffix = [0] * (n + 1)
        for i in range(n - 1, -1, -1):
            h_suffix[i] = h_suffix[i + 1] + (log_costs[i] if trace[i] not in visible else 0)
    elif heuristic == "zero":
        h_suffix = [0] * (n + 1)
    else:
        raise ValueError(f"unknown heuristic {heuristic!r}")

    start = (net.to_vector(net.initial_marking), 0)
    final = net.to_vector(net.final_marking)
    counter = itertools.count()
    # heap entries: (f, h, tie, g, state); h breaks f-ties towards deeper states
    open_heap = [(h_suffix[0], h_suffix[0], next(counter), 0, start)]
    best_g: Dict[tuple, float] = {start: 0}
    parent: Dict[tuple, tuple] = {start: None}
    closed = set()
    expanded = 0

    while open_heap:
        f, h, _, g, state = heapq.heappop(open_heap)
        if state in closed:
            continue
        closed.add(state)
        vec, i = state
        if i == n and vec == final:
            return _rebuild(state, parent, g, trace, transitions)
        expanded += 1
        if expanded > state_cap:
            raise ResourceError(f"alignment search exceeded {state_cap} expanded states "
                                f"(trace of length {n})")

        succ = []
        enabled = net.enabled_indices(vec)
        if i < n:
            a = trace[i]
            for ti in enabled:
                if labels[ti] == a:
                    succ.append(((net.fire_index(vec, ti), i + 1), 0, (MoveKind.SYNCHRONOUS, ti)))
        for ti in enabled:
            succ.append(((net.fire_index(vec, ti), i), model_costs[ti], (MoveKind.MODEL_ONLY, ti)))
        if i < n:
            succ.append(((vec, i + 1), log_costs[i], (MoveKind.LOG_ONLY, None)))

        for nxt, c, move in succ:
            if nxt in closed:
                continue
            ng = g + c
            old = best_g.get(nxt)
            if old is not None and old <= ng:
                continue
            best_g[nxt] = ng
            parent[nxt] = (state, move)
            nh = h_suffix[nxt[1]]
            heapq.heappush(open_heap, (ng + nh, nh, next(counter), ng, nxt))

    raise ModelError("final marking is not reachable: no alignment exists"
                     + (f" for trace {trace}" if n else ""))


def _rebuild(state, parent, g, trace, transitions) -> Alignment:
    moves = []
    while parent[state] is not None:
        prev, (kind, ti) = parent[state]
        i = prev[1]
        if kind is MoveKind.SYNCHRONOUS:
            moves.append(Move(kind, trace[i], transitions[ti]))
        elif kind is MoveKind.MODEL_ONLY:
            moves.append(Move(kind, None, transitions[ti]))
        else:
            moves.append(Move(kind, trace[i], None))
        state = prev
    moves.reverse()
    return Alignment(tuple(moves), g)


def alignment_cost(alignment: Alignment, net: SystemNet, cost: CostFunction = STANDARD_COST) -> float:
    total = 0
    for m in alignment.moves:
        if m.kind is MoveKind.LOG_ONLY:
            total += cost.log_cost(m.log_activity)
        elif m.kind is MoveKind.MODEL_ONLY:
            total += cost.model_cost(net, m.transition)
    return total


def model_trace(alignment: Alignment, net: SystemNet) -> Tuple[str, ...]:
    """Visible labels along the model side of ``alignment``."""
    return tuple(net.labels[m.transition] for m in alignment.moves
                 if m.kind is not MoveKind.LOG_ONLY and net.labels[m.transition] is not None)


def shortest_path_model(net: SystemNet, state_cap: int = DEFAULT_STATE_CAP) -> int:
    """Fewest visible transitions on any complete firing sequence (cost of aligning the empty trace)."""
    return int(optimal_alignment((), net, STANDARD_COST, state_cap=state_cap).cost)


def trace_fitness(cost: float, trace_length: int, spm: int) -> float:
    if trace_length < 0 or spm < 0:
        raise ValueError("trace_length and spm must be non-negative")
    denom = trace_length + spm
    if denom == 0:
        return 1.0
    return 1.0 - cost / denom
