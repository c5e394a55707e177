"""Small fixture models and seeded generators for nets and logs.

Block-structured nets are built from nested ``("seq" | "xor" | "and", [children])``
tuples whose leaves are activity names, or ``None`` for a silent step.
"""
import math
import random
from typing import Dict, List, Optional, Sequence, Tuple

from .event_log import EventLog
from .petri_net import Marking, SystemNet, enumerate_visible_traces

RUNNING_EXAMPLE_LOG = {
    ("a", "b", "c", "e"): 10,
    ("a", "e"): 4,
    ("a", "c", "b", "d", "e"): 3,
    ("a", "b", "e"): 2,
    ("c", "e"): 1,
}


def running_example_net() -> SystemNet:
    """Six-transition net: ``a``, then ``b`` in parallel with an optional ``c``, then ``e``.

    ``t3`` (skip c) and ``t5`` are silent. Visible language:
    {abe, abce, acbe}; shortest visible path 3.
    """
    labels = {"t1": "a", "t2": "b", "t3": None, "t4": "c", "t5": None, "t6": "e"}
    inputs = {
        "t1": {"start": 1},
        "t2": {"p1": 1},
        "t3": {"p2": 1},
        "t4": {"p2": 1},
        "t5": {"p3": 1},
        "t6": {"p4": 1, "p5": 1},
    }
    outputs = {
        "t1": {"p1": 1, "p2": 1},
        "t2": {"p3": 1},
        "t3": {"p4": 1},
        "t4": {"p4": 1},
        "t5": {"p5": 1},
        "t6": {"end": 1},
    }
    return SystemNet(
        places=("start", "p1", "p2", "p3", "p4", "p5", "end"),
        transitions=tuple(labels),
        labels=labels,
        inputs=inputs,
        outputs=outputs,
        initial_marking=Marking({"start": 1}),
        final_marking=Marking({"end": 1}),
        name="running-example",
    )


def running_example_log() -> EventLog:
    return EventLog(dict(RUNNING_EXAMPLE_LOG))


class _NetBuilder:
    def __init__(self):
        self.places: List[str] = []
        self.labels: Dict[str, Optional[str]] = {}
        self.inputs: Dict[str, Dict[str, int]] = {}
        self.outputs: Dict[str, Dict[str, int]] = {}

    def place(self) -> str:
        p = f"p{len(self.places)}"
        self.places.append(p)
        return p

    def transition(self, label, ins, outs) -> str:
        t = f"t{len(self.labels):02d}"
        self.labels[t] = label
        self.inputs[t] = {p: 1 for p in ins}
        self.outputs[t] = {p: 1 for p in outs}
        return t

    def build(self, node, src, dst):
        if node is None or isinstance(node, str):
            self.transition(node, [src], [dst])
            return
        op, children = node
        if op == "seq":
            cur = src
            for k, child in enumerate(children):
                nxt = dst if k == len(children) - 1 else self.place()
                self.build(child, cur, nxt)
                cur = nxt
        elif op == "xor":
            for child in children:
                self.build(child, src, dst)
        elif op == "and":
            starts = [self.place() for _ in children]
            ends = [self.place() for _ in children]
            self.transition(None, [src], starts)
            for child, s, e in zip(children, starts, ends):
                self.build(child, s, e)
            self.transition(None, ends, [dst])
        else:
            raise ValueError(f"unknown operator {op!r}")


def net_from_tree(tree, name: str = "") -> SystemNet:
    b = _NetBuilder()
    source, sink = b.place(), b.place()
    b.build(tree, source, sink)
    return SystemNet(
        places=tuple(b.places),
        transitions=tuple(b.labels),
        labels=b.labels,
        inputs=b.inputs,
        outputs=b.outputs,
        initial_marking=Marking({source: 1}),
        final_marking=Marking({sink: 1}),
        name=name,
    )


def random_tree(rng: random.Random, n_leaves: int, alphabet: Sequence[str], silent_prob: float = 0.15):
    if n_leaves <= 1:
        return None if rng.random() < silent_prob else rng.choice(alphabet)
    op = rng.choice(("seq", "seq", "xor", "and"))
    k = rng.randint(2, min(3, n_leaves))
    cuts = sorted(rng.sample(range(1, n_leaves), k - 1))
    sizes = [b - a for a, b in zip([0] + cuts, cuts + [n_leaves])]
    return (op, [random_tree(rng, s, alphabet, silent_prob) for s in sizes])


def random_block_net(rng: random.Random, max_transitions: int = 8,
                     alphabet: Sequence[str] = "abcdef") -> SystemNet:
    """A sound acyclic net with at most ``max_transitions`` transitions (``and`` blocks cost 2 extra)."""
    while True:
        tree = random_tree(rng, rng.randint(1, max_transitions), list(alphabet))
        net = net_from_tree(tree)
        if len(net.transitions) <= max_transitions:
            return net


def random_dag_net(rng: random.Random, max_transitions: int = 8,
                   alphabet: Sequence[str] = "abcdef", silent_prob: float = 0.2,
                   max_attempts: int = 1000) -> SystemNet:
    """An unstructured acyclic net, possibly with deadlocks and arc weights 2.

    Places are topologically ordered; every transition consumes from earlier
    places and produces into later ones. Retries until the final marking
    (one token in the last place) is reachable.
    """
    for _ in range(max_attempts):
        n_places = rng.randint(2, 6)
        n_trans = rng.randint(1, max_transitions)
        places = [f"p{i}" for i in range(n_places)]
        labels, inputs, outputs = {}, {}, {}
        for k in range(n_trans):
            t = f"t{k}"
            cut = rng.randint(1, n_places - 1)
            ins = rng.sample(places[:cut], rng.randint(1, min(2, cut)))
            outs = rng.sample(places[cut:], rng.randint(1, min(2, n_places - cut)))
            labels[t] = None if rng.random() < silent_prob else rng.choice(list(alphabet))
            inputs[t] = {p: (2 if rng.random() < 0.1 else 1) for p in ins}
            outputs[t] = {p: (2 if rng.random() < 0.1 else 1) for p in outs}
        net = SystemNet(
            places=tuple(places), transitions=tuple(labels), labels=labels,
            inputs=inputs, outputs=outputs,
            initial_marking=Marking({places[0]: rng.choice((1, 1, 1, 2))}),
            final_marking=Marking({places[-1]: 1}),
        )
        if enumerate_visible_traces(net, sum(1 for l in labels.values() if l is not None)):
            return net
    raise RuntimeError("could not generate a net with a reachable final marking")


def random_walk(net: SystemNet, rng: random.Random, max_steps: int) -> Optional[Tuple[str, ...]]:
    """Visible trace of one uniform random walk to the final marking, or None."""
    vec = net.to_vector(net.initial_marking)
    final = net.to_vector(net.final_marking)
    visible = []
    for _ in range(max_steps + 1):
        if vec == final:
            return tuple(visible)
        enabled = net.enabled_indices(vec)
        if not enabled:
            return None
        ti = rng.choice(enabled)
        lab = net.labels[net.transitions[ti]]
        if lab is not None:
            visible.append(lab)
        vec = net.fire_index(vec, ti)
    return None


def add_noise(trace: Sequence[str], rng: random.Random, alphabet: Sequence[str], n_ops: int):
    t = list(trace)
    for _ in range(n_ops):
        op = rng.randrange(3)
        if op == 0 and t:
            del t[rng.randrange(len(t))]
        elif op == 1:
            t.insert(rng.randint(0, len(t)), rng.choice(alphabet))
        elif len(t) >= 2:
            i = rng.randrange(len(t) - 1)
            t[i], t[i + 1] = t[i + 1], t[i]
    return tuple(t)


def random_log(net: SystemNet, rng: random.Random, n_traces: int, noise: float = 0.3,
               extra_alphabet: Sequence[str] = ("x",), max_steps: int = 200) -> EventLog:
    alphabet = sorted(net.visible_labels | set(extra_alphabet))
    traces = []
    while len(traces) < n_traces:
        walk = random_walk(net, rng, max_steps)
        if walk is None:
            continue
        n_ops = 0
        while rng.random() < noise and n_ops < 3:
            n_ops += 1
        traces.append(add_noise(walk, rng, alphabet, n_ops))
    return EventLog.from_traces(traces)


BENCHMARK_TREE = ("seq", [
    "a",
    ("and", [("seq", ["b", ("xor", ["c", "d"])]), ("seq", ["e", "f"])]),
    ("xor", [("seq", ["g", "h"]), "i", None]),
    ("and", ["j", "k", "l"]),
    ("xor", ["m", "n"]),
    "o",
])


def benchmark_net() -> SystemNet:
    """20 transitions: 15 visible activities plus 5 silent split/join/skip steps."""
    return net_from_tree(BENCHMARK_TREE, name="benchmark-20")


def benchmark_log(net: SystemNet, n_traces: int = 10_000, n_variants: int = 500,
                  seed: int = 7, zipf: float = 1.1) -> EventLog:
    """``n_traces`` cases spread over exactly ``n_variants`` variants with Zipf-like frequencies."""
    rng = random.Random(seed)
    alphabet = sorted(net.visible_labels | {"x", "y"})
    found, seen = [], set()
    attempts = 0
    while len(found) < n_variants:
        attempts += 1
        if attempts > 1000 * n_variants:
            raise RuntimeError("could not generate enough distinct variants")
        walk = random_walk(net, rng, 200)
        if walk is None:
            continue
        trace = add_noise(walk, rng, alphabet, rng.choice((0, 1, 1, 2, 2, 3, 4)))
        if trace not in seen:
            seen.add(trace)
            found.append(trace)
    weights = [1.0 / (k + 1) ** zipf for k in range(n_variants)]
    spare = n_traces - n_variants
    if spare < 0:
        raise ValueError("need at least one trace per variant")
    total_w = math.fsum(weights)
    freqs = [1 + int(spare * w / total_w) for w in weights]
    for k in range(n_traces - sum(freqs)):
        freqs[k % n_variants] += 1
    return EventLog(dict(zip(found, freqs)))
