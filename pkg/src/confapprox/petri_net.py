"""Labeled place/transition nets with initial and final markings.

Transitions carry a visible activity label or ``None`` for silent (tau)
transitions. Internally markings are dense tuples of token counts indexed
by place position, which is what the search code hashes; the public
:class:`Marking` is a sparse, hashable mapping keyed by place id.
"""
import re
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Set, Tuple

from .errors import ConfigError, ParseError, ResourceError, StructuralError

SILENT = None
DEFAULT_STATE_CAP = 10 ** 6
DEFAULT_SILENT_PATTERN = re.compile(r"^\s*(tau|τ)", re.IGNORECASE)


class Marking(Mapping[str, int]):
    """Immutable multiset of places. Places with zero tokens are dropped."""

    __slots__ = ("_items", "_hash")

    def __init__(self, tokens: Optional[Mapping[str, int]] = None):
        tokens = dict(tokens or {})
        for place, count in tokens.items():
            if count < 0:
                raise ValueError(f"negative token count {count} on place {place!r}")
        self._items = tuple(sorted((p, int(c)) for p, c in tokens.items() if c))
        self._hash = hash(self._items)

    def __getitem__(self, place):
        for p, c in self._items:
            if p == place:
                return c
        return 0

    def __contains__(self, place):
        return any(p == place for p, _ in self._items)

    def __iter__(self):
        return (p for p, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Marking):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self == Marking(other)
        return NotImplemented

    def __repr__(self):
        inner = ", ".join(f"{p}:{c}" for p, c in self._items)
        return f"Marking({{{inner}}})"

    def total(self) -> int:
        return sum(c for _, c in self._items)


@dataclass(frozen=True, eq=False)
class SystemNet:
    """A labeled P/T net with arc weights and designated markings.

    ``inputs``/``outputs`` map a transition id to ``{place: weight}``.
    """

    places: Tuple[str, ...]
    transitions: Tuple[str, ...]
    labels: Dict[str, Optional[str]]
    inputs: Dict[str, Dict[str, int]]
    outputs: Dict[str, Dict[str, int]]
    initial_marking: Marking
    final_marking: Marking
    name: str = ""
    _place_index: Dict[str, int] = field(init=False, repr=False)
    _pre: Tuple[Tuple[Tuple[int, int], ...], ...] = field(init=False, repr=False)
    _delta: Tuple[Tuple[Tuple[int, int], ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        places = tuple(sorted(self.places))
        transitions = tuple(sorted(self.transitions))
        object.__setattr__(self, "places", places)
        object.__setattr__(self, "transitions", transitions)
        if len(set(places)) != len(places) or len(set(transitions)) != len(transitions):
            raise StructuralError("duplicate place or transition id")
        if set(places) & set(transitions):
            raise StructuralError("place and transition ids must be disjoint")
        if not transitions:
            raise StructuralError("net has no transitions")
        place_set = set(places)
        for t in transitions:
            if t not in self.labels:
                raise StructuralError(f"transition {t!r} has no label entry")
            for arcs in (self.inputs.get(t, {}), self.outputs.get(t, {})):
                for p, w in arcs.items():
                    if p not in place_set:
                        raise StructuralError(f"arc of transition {t!r} references unknown place {p!r}")
                    if w < 1:
                        raise StructuralError(f"arc weight {w} on {t!r}/{p!r} must be positive")
        for which, m in (("initial", self.initial_marking), ("final", self.final_marking)):
            if not isinstance(m, Marking):
                m = Marking(m)
                object.__setattr__(self, f"{which}_marking", m)
            for p in m:
                if p not in place_set:
                    raise StructuralError(f"{which} marking references unknown place {p!r}")
        index = {p: i for i, p in enumerate(places)}
        pre, delta = [], []
        for t in transitions:
            ins = self.inputs.get(t, {})
            outs = self.outputs.get(t, {})
            pre.append(tuple(sorted((index[p], w) for p, w in ins.items())))
            d = {}
            for p, w in ins.items():
                d[index[p]] = d.get(index[p], 0) - w
            for p, w in outs.items():
                d[index[p]] = d.get(index[p], 0) + w
            delta.append(tuple(sorted((i, v) for i, v in d.items() if v)))
        object.__setattr__(self, "_place_index", index)
        object.__setattr__(self, "_pre", tuple(pre))
        object.__setattr__(self, "_delta", tuple(delta))

    # dense-vector helpers used by the search code

    def to_vector(self, m: Mapping[str, int]) -> Tuple[int, ...]:
        vec = [0] * len(self.places)
        for p, c in m.items():
            vec[self._place_index[p]] = c
        return tuple(vec)

    def from_vector(self, vec: Sequence[int]) -> Marking:
        return Marking({p: c for p, c in zip(self.places, vec) if c})

    def enabled_indices(self, vec: Tuple[int, ...]):
        """Indices into ``self.transitions`` of transitions enabled in ``vec``."""
        out = []
        for ti, pre in enumerate(self._pre):
            for pi, w in pre:
                if vec[pi] < w:
                    break
            else:
                out.append(ti)
        return out

    def fire_index(self, vec: Tuple[int, ...], ti: int) -> Tuple[int, ...]:
        new = list(vec)
        for pi, d in self._delta[ti]:
            new[pi] += d
        return tuple(new)

    def label(self, t: str) -> Optional[str]:
        return self.labels[t]

    def is_silent(self, t: str) -> bool:
        return self.labels[t] is None

    @property
    def visible_labels(self) -> FrozenSet[str]:
        return frozenset(l for l in self.labels.values() if l is not None)


def enabled(net: SystemNet, m: Mapping[str, int]) -> Set[str]:
    vec = net.to_vector(m)
    return {net.transitions[i] for i in net.enabled_indices(vec)}


def fire(net: SystemNet, m: Mapping[str, int], t: str) -> Marking:
    if t not in net.labels:
        raise KeyError(f"unknown transition {t!r}")
    for p, w in net.inputs.get(t, {}).items():
        if m.get(p, 0) < w:
            raise RuntimeError(f"transition {t!r} is not enabled in {m!r}")
    tokens = dict(m)
    for p, w in net.inputs.get(t, {}).items():
        tokens[p] -= w
    for p, w in net.outputs.get(t, {}).items():
        tokens[p] = tokens.get(p, 0) + w
    return Marking(tokens)


def enumerate_visible_traces(net: SystemNet, max_length: int,
                             state_cap: int = DEFAULT_STATE_CAP) -> Set[Tuple[str, ...]]:
    """All visible traces of complete firing sequences with at most ``max_length`` visible steps.

    Breadth-first over (marking, visible prefix); a pair is expanded once, so
    silent cycles terminate, while visible cycles are cut by the length budget.
    """
    if max_length < 0:
        raise ValueError("max_length must be >= 0")
    start = (net.to_vector(net.initial_marking), ())
    final = net.to_vector(net.final_marking)
    seen = {start}
    queue = deque([start])
    found = set()
    labels = [net.labels[t] for t in net.transitions]
    while queue:
        vec, prefix = queue.popleft()
        if vec == final:
            found.add(prefix)
        for ti in net.enabled_indices(vec):
            lab = labels[ti]
            if lab is None:
                nxt = (net.fire_index(vec, ti), prefix)
            elif len(prefix) < max_length:
                nxt = (net.fire_index(vec, ti), prefix + (lab,))
            else:
                continue
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > state_cap:
                    raise ResourceError(
                        f"visible-trace enumeration exceeded {state_cap} states")
                queue.append(nxt)
    return found


# --- PNML -----------------------------------------------------------------

def _local(tag):
    return tag.rsplit("}", 1)[-1]


def _child(el, name):
    for c in el:
        if _local(c.tag) == name:
            return c
    return None


def _text_of(el, name):
    c = _child(el, name)
    if c is None:
        return None
    t = _child(c, "text")
    if t is None or t.text is None:
        return None
    return t.text.strip()


def _is_flagged_invisible(trans_el) -> bool:
    for c in trans_el:
        if _local(c.tag) != "toolspecific":
            continue
        if c.get("activity") == "$invisible$" or c.get("invisible", "").lower() == "true":
            return True
    return False


def parse_marking(text: str) -> Marking:
    """Parse ``"p1:1,p2:2"`` (a bare ``"p1"`` means one token)."""
    tokens: Dict[str, int] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        place, _, count = part.partition(":")
        try:
            n = int(count) if count else 1
        except ValueError:
            raise ConfigError(f"bad token count in marking entry {part!r}") from None
        if n < 0:
            raise ConfigError(f"negative token count in marking entry {part!r}")
        tokens[place.strip()] = tokens.get(place.strip(), 0) + n
    return Marking(tokens)


def parse_pnml(stream, final_marking: Optional[Mapping[str, int]] = None,
               silent: Iterable[str] = (), silent_pattern=DEFAULT_SILENT_PATTERN) -> SystemNet:
    """Read a PNML document into a :class:`SystemNet`.

    Silent transitions are those with a toolspecific invisible flag, an
    empty/missing name, a name matching ``silent_pattern``, or an id/name
    listed in ``silent``. ``final_marking`` overrides a ``finalmarkings``
    element in the file; one of the two must be present.
    """
    data = stream.read() if hasattr(stream, "read") else stream
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise ParseError(f"malformed PNML: {exc}", line, column) from None

    net_el = root if _local(root.tag) == "net" else _child(root, "net")
    if net_el is None:
        raise StructuralError("no <net> element in PNML")
    silent = set(silent)

    places: Dict[str, int] = {}
    transitions: Dict[str, Optional[str]] = {}
    arcs = []
    final_el = None

    def walk(el):
        nonlocal final_el
        for c in el:
            tag = _local(c.tag)
            if tag == "page":
                walk(c)
            elif tag == "place":
                pid = c.get("id")
                if not pid:
                    raise StructuralError("place without id")
                init = _text_of(c, "initialMarking")
                try:
                    places[pid] = int(init) if init else 0
                except ValueError:
                    raise StructuralError(f"place {pid!r}: bad initialMarking {init!r}") from None
            elif tag == "transition":
                tid = c.get("id")
                if not tid:
                    raise StructuralError("transition without id")
                name = _text_of(c, "name")
                if (_is_flagged_invisible(c) or not name or tid in silent or name in silent
                        or (silent_pattern is not None and silent_pattern.match(name))):
                    transitions[tid] = SILENT
                else:
                    transitions[tid] = name
            elif tag == "arc":
                arcs.append(c)
            elif tag == "finalmarkings" and final_el is None:
                final_el = c

    walk(net_el)
    if final_el is None:
        final_el = _child(root, "finalmarkings")

    inputs: Dict[str, Dict[str, int]] = {t: {} for t in transitions}
    outputs: Dict[str, Dict[str, int]] = {t: {} for t in transitions}
    for arc in arcs:
        aid = arc.get("id", "?")
        src, tgt = arc.get("source"), arc.get("target")
        type_el = _child(arc, "type")
        arc_type = (type_el.get("value") if type_el is not None else None) or "normal"
        for ts in arc:
            if _local(ts.tag) == "toolspecific":
                arc_type = _text_of(ts, "arctype") or ts.get("arctype") or arc_type
        if arc_type.lower() not in ("normal", "regular", "default"):
            raise StructuralError(f"arc {aid!r}: {arc_type} arcs are not supported")
        weight_text = _text_of(arc, "inscription")
        try:
            weight = int(weight_text) if weight_text else 1
        except ValueError:
            raise StructuralError(f"arc {aid!r}: bad inscription {weight_text!r}") from None
        if weight < 1:
            raise StructuralError(f"arc {aid!r}: weight must be positive")
        if src in places and tgt in transitions:
            inputs[tgt][src] = inputs[tgt].get(src, 0) + weight
        elif src in transitions and tgt in places:
            outputs[src][tgt] = outputs[src].get(tgt, 0) + weight
        elif src in places and tgt in places or src in transitions and tgt in transitions:
            raise StructuralError(f"arc {aid!r} connects two nodes of the same kind")
        else:
            missing = src if src not in places and src not in transitions else tgt
            raise StructuralError(f"arc {aid!r} references unknown node {missing!r}")

    if final_marking is None:
        if final_el is None:
            raise ConfigError(
                "model has no final marking; supply one with --final-marking 'place:count,...'")
        marking_el = _child(final_el, "marking")
        tokens = {}
        for p in (marking_el if marking_el is not None else []):
            if _local(p.tag) != "place":
                continue
            ref = p.get("idref")
            t = _child(p, "text")
            count = int(t.text.strip()) if t is not None and t.text else 0
            if count:
                tokens[ref] = count
        final_marking = Marking(tokens)
    else:
        final_marking = Marking(final_marking)

    name_el = _text_of(net_el, "name")
    return SystemNet(
        places=tuple(places),
        transitions=tuple(transitions),
        labels=transitions,
        inputs=inputs,
        outputs=outputs,
        initial_marking=Marking({p: n for p, n in places.items() if n}),
        final_marking=final_marking,
        name=name_el or net_el.get("id", ""),
    )


def read_pnml(path, **kwargs) -> SystemNet:
    with open(path, "rb") as fh:
        return parse_pnml(fh, **kwargs)


def write_pnml(net: SystemNet) -> bytes:
    root = ET.Element("pnml")
    net_el = ET.SubElement(root, "net", {"id": net.name or "net",
                                         "type": "http://www.pnml.org/version-2009/grammar/pnmlcoremodel"})
    page = ET.SubElement(net_el, "page", {"id": "page0"})
    for p in net.places:
        pel = ET.SubElement(page, "place", {"id": p})
        ET.SubElement(ET.SubElement(pel, "name"), "text").text = p
        if net.initial_marking[p]:
            ET.SubElement(ET.SubElement(pel, "initialMarking"), "text").text = str(net.initial_marking[p])
    for t in net.transitions:
        tel = ET.SubElement(page, "transition", {"id": t})
        lab = net.labels[t]
        ET.SubElement(ET.SubElement(tel, "name"), "text").text = lab if lab is not None else t
        if lab is None:
            ET.SubElement(tel, "toolspecific", {"tool": "ProM", "version": "6.4", "activity": "$invisible$"})
    n = 0
    for t in net.transitions:
        for p, w in sorted(net.inputs.get(t, {}).items()):
            arc = ET.SubElement(page, "arc", {"id": f"a{n}", "source": p, "target": t})
            if w != 1:
                ET.SubElement(ET.SubElement(arc, "inscription"), "text").text = str(w)
            n += 1
        for p, w in sorted(net.outputs.get(t, {}).items()):
            arc = ET.SubElement(page, "arc", {"id": f"a{n}", "source": t, "target": p})
            if w != 1:
                ET.SubElement(ET.SubElement(arc, "inscription"), "text").text = str(w)
            n += 1
    fm = ET.SubElement(ET.SubElement(net_el, "finalmarkings"), "marking")
    for p, c in net.final_marking.items():
        ET.SubElement(ET.SubElement(fm, "place", {"idref": p}), "text").text = str(c)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)
