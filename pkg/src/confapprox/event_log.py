"""Event logs as multisets of trace variants, with XES and CSV readers.

A trace is a plain tuple of activity names. The log keeps one entry per
distinct trace (a variant) together with the number of cases that
followed it.
"""
import csv
import io
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import ConfigError, ParseError

Trace = Tuple[str, ...]


@dataclass(frozen=True)
class Activity:
    id: int
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("activity name must be non-empty")


@dataclass(frozen=True)
class EventLog:
    variant_counts: Dict[Trace, int] = field(default_factory=dict)

    def __post_init__(self):
        for trace, freq in self.variant_counts.items():
            if not isinstance(trace, tuple):
                raise TypeError(f"trace must be a tuple, got {type(trace).__name__}")
            if freq < 1:
                raise ValueError(f"frequency of {trace} must be >= 1, got {freq}")

    @classmethod
    def from_traces(cls, traces: Iterable[Iterable[str]]) -> "EventLog":
        return cls(dict(Counter(tuple(t) for t in traces)))

    @property
    def total_traces(self) -> int:
        return sum(self.variant_counts.values())

    @property
    def alphabet(self) -> Tuple[Activity, ...]:
        names = sorted({a for trace in self.variant_counts for a in trace})
        return tuple(Activity(i, name) for i, name in enumerate(names))

    def activity_id(self, name: str) -> int:
        for act in self.alphabet:
            if act.name == name:
                return act.id
        raise KeyError(name)

    def frequency(self, trace: Trace) -> int:
        return self.variant_counts.get(tuple(trace), 0)

    def __len__(self):
        return len(self.variant_counts)

    def __iter__(self):
        return iter(variants(self))

    def __hash__(self):
        return hash(frozenset(self.variant_counts.items()))


def variants(log: EventLog) -> List[Tuple[Trace, int]]:
    """(trace, frequency) pairs in lexicographic order of activity names."""
    return sorted(log.variant_counts.items())


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_xes(stream) -> EventLog:
    """Read a XES document; only the ``concept:name`` of each event is used."""
    data = stream.read() if hasattr(stream, "read") else stream
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise ParseError(f"malformed XES: {exc}", line, column) from None
    if _local(root.tag) != "log":
        raise ParseError(f"expected <log> root element, found <{_local(root.tag)}>")

    counts: Counter = Counter()
    trace_index = 0
    for trace_el in root:
        if _local(trace_el.tag) != "trace":
            continue
        acts = []
        for event_el in trace_el:
            if _local(event_el.tag) != "event":
                continue
            name = None
            for attr in event_el:
                if _local(attr.tag) == "string" and attr.get("key") == "concept:name":
                    name = attr.get("value")
                    break
            if not name:
                raise ParseError(
                    f"event {len(acts)} of trace {trace_index} has no concept:name attribute")
            acts.append(name)
        counts[tuple(acts)] += 1
        trace_index += 1
    return EventLog(dict(counts))


@dataclass(frozen=True)
class CsvConfig:
    case_column: str = "case"
    activity_column: str = "activity"
    timestamp_column: Optional[str] = None
    delimiter: str = ","


def _parse_timestamp(text: str):
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    # naive and aware datetimes cannot be compared; treat naive as UTC
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.timestamp()


def parse_csv(stream, config: CsvConfig = CsvConfig()) -> EventLog:
    """Read an event table with one row per event.

    Events of a case are ordered by timestamp when ``config.timestamp_column``
    is set (ties keep row order), otherwise by row order.
    """
    data = stream.read() if hasattr(stream, "read") else stream
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(data, newline=""), delimiter=config.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError("CSV log is empty: no header row") from None
    header = [h.strip() for h in header]

    def column(name, role):
        if name not in header:
            raise ConfigError(f"{role} column {name!r} not found in CSV header {header}")
        return header.index(name)

    case_idx = column(config.case_column, "case")
    act_idx = column(config.activity_column, "activity")
    ts_idx = column(config.timestamp_column, "timestamp") if config.timestamp_column else None

    cases: Dict[str, list] = {}
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) <= max(case_idx, act_idx, ts_idx or 0):
            raise ParseError(f"row {row_no}: expected {len(header)} fields, got {len(row)}")
        activity = row[act_idx].strip()
        if not activity:
            raise ParseError(f"row {row_no}: empty activity")
        key = 0.0
        if ts_idx is not None:
            try:
                key = _parse_timestamp(row[ts_idx])
            except ValueError:
                raise ParseError(f"row {row_no}: unparseable timestamp {row[ts_idx]!r}") from None
        cases.setdefault(row[case_idx], []).append((key, row_no, activity))

    counts: Counter = Counter()
    for events in cases.values():
        events.sort()
        counts[tuple(a for _, _, a in events)] += 1
    return EventLog(dict(counts))


def read_log(path, csv_config: Optional[CsvConfig] = None) -> EventLog:
    path = str(path)
    with open(path, "rb") as fh:
        if path.lower().endswith(".csv"):
            return parse_csv(fh, csv_config or CsvConfig())
        return parse_xes(fh)


def write_xes(log: EventLog) -> bytes:
    root = ET.Element("log", {"xes.version": "1.0", "xmlns": "http://www.xes-standard.org/"})
    for trace, freq in variants(log):
        for _ in range(freq):
            trace_el = ET.SubElement(root, "trace")
            for name in trace:
                event_el = ET.SubElement(trace_el, "event")
                ET.SubElement(event_el, "string", {"key": "concept:name", "value": name})
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)
