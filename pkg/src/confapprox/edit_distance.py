"""Insertion/deletion edit distance between traces.

Substitution is not an edit operation, so the distance between ``s`` and
``t`` is ``len(s) + len(t) - 2 * LCS(s, t)``. The LCS table is computed
row by row with the bit-parallel update of Allison-Dix/Hyyro: one big-int
step per symbol of the second trace. Distance queries keep only the last
row; edit scripts keep every row and backtrace through popcounts.
"""
import enum
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

Trace = Tuple[str, ...]


class EditOp(enum.Enum):
    MATCH = "match"
    DELETE = "delete"
    INSERT = "insert"


@dataclass(frozen=True)
class EditScript:
    steps: Tuple[Tuple[EditOp, str], ...]

    @property
    def cost(self) -> int:
        return sum(1 for op, _ in self.steps if op is not EditOp.MATCH)

    def count(self, op: EditOp) -> int:
        return sum(1 for o, _ in self.steps if o is op)

    def source(self) -> Trace:
        return tuple(a for op, a in self.steps if op is not EditOp.INSERT)

    def target(self) -> Trace:
        return tuple(a for op, a in self.steps if op is not EditOp.DELETE)

    def apply(self, s: Sequence[Hashable]) -> Trace:
        """Replay the script on ``s``; raises ValueError if it does not fit ``s``."""
        out, i = [], 0
        for op, a in self.steps:
            if op is EditOp.INSERT:
                out.append(a)
                continue
            if i >= len(s) or s[i] != a:
                raise ValueError(f"script step {op.value} {a!r} does not match source at {i}")
            if op is EditOp.MATCH:
                out.append(a)
            i += 1
        if i != len(s):
            raise ValueError("script does not consume the whole source")
        return tuple(out)


def _match_masks(s: Sequence[Hashable]):
    masks = {}
    for i, a in enumerate(s):
        masks[a] = masks.get(a, 0) | (1 << i)
    return masks


def _lcs_masked(masks, n: int, t: Sequence[Hashable]) -> int:
    full = (1 << n) - 1
    v = full
    get = masks.get
    for b in t:
        u = v & get(b, 0)
        v = ((v + u) | (v - u)) & full
    return n - v.bit_count()


def lcs_length(s: Sequence[Hashable], t: Sequence[Hashable]) -> int:
    if len(s) < len(t):
        s, t = t, s
    if not t:
        return 0
    return _lcs_masked(_match_masks(s), len(s), t)


def edit_distance(s: Sequence[Hashable], t: Sequence[Hashable],
                  insert_cost: Optional[Mapping[Hashable, float]] = None,
                  delete_cost: Optional[Mapping[Hashable, float]] = None):
    """Minimum number of single-activity insertions/deletions turning ``s`` into ``t``.

    With per-activity ``insert_cost``/``delete_cost`` (missing keys cost 1)
    a weighted DP is used instead and the result may be fractional.
    """
    if insert_cost is None and delete_cost is None:
        return len(s) + len(t) - 2 * lcs_length(s, t)
    ins = (lambda a: insert_cost.get(a, 1)) if insert_cost else (lambda a: 1)
    dele = (lambda a: delete_cost.get(a, 1)) if delete_cost else (lambda a: 1)
    return _weighted_distance(s, t, ins, dele)


def _weighted_distance(s, t, ins: Callable, dele: Callable):
    prev = [0] * (len(t) + 1)
    for j in range(1, len(t) + 1):
        prev[j] = prev[j - 1] + ins(t[j - 1])
    for i in range(1, len(s) + 1):
        cur = [prev[0] + dele(s[i - 1])] + [0] * len(t)
        a = s[i - 1]
        for j in range(1, len(t) + 1):
            best = min(prev[j] + dele(a), cur[j - 1] + ins(t[j - 1]))
            if a == t[j - 1] and prev[j - 1] < best:
                best = prev[j - 1]
            cur[j] = best
        prev = cur
    return prev[-1]


def edit_script(s: Sequence[Hashable], t: Sequence[Hashable]) -> EditScript:
    """A minimum-cost script; at each backtrace cell MATCH is preferred, then DELETE, then INSERT."""
    n, m = len(s), len(t)
    masks = _match_masks(s)
    full = (1 << n) - 1
    # rows[j] encodes LCS(s[:i], t[:j]) for every i as i - popcount(rows[j] & low i bits)
    rows = [full]
    v = full
    for b in t:
        u = v & masks.get(b, 0)
        v = ((v + u) | (v - u)) & full
        rows.append(v)

    def lcs(i, j):
        return i - (rows[j] & ((1 << i) - 1)).bit_count()

    steps = []
    i, j = n, m
    while i or j:
        cur = lcs(i, j) if i and j else 0
        if i and j and s[i - 1] == t[j - 1] and cur == lcs(i - 1, j - 1) + 1:
            steps.append((EditOp.MATCH, s[i - 1]))
            i, j = i - 1, j - 1
        elif i and (j == 0 or cur == lcs(i - 1, j)):
            steps.append((EditOp.DELETE, s[i - 1]))
            i -= 1
        else:
            steps.append((EditOp.INSERT, t[j - 1]))
            j -= 1
    steps.reverse()
    return EditScript(tuple(steps))


class TraceIndex:
    """A fixed, sorted trace set packed for one-pass distance queries.

    All member traces share one big integer, each in its own bit segment
    followed by a zero guard bit. The bit-parallel LCS update never borrows
    (``u`` is a subset of ``v``) and its carries stop at the guard bits,
    so one pass over a query trace advances every member's LCS row at once.
    """

    def __init__(self, traces: Iterable[Sequence[Hashable]]):
        self.traces: List[Trace] = sorted(set(tuple(t) for t in traces))
        self.lengths = [len(t) for t in self.traces]
        masks: Dict[Hashable, int] = {}
        offsets = []
        full = 0
        off = 0
        for t in self.traces:
            offsets.append(off)
            for i, a in enumerate(t):
                masks[a] = masks.get(a, 0) | (1 << (off + i))
            full |= ((1 << len(t)) - 1) << off
            off += len(t) + 1
        self._masks = masks
        self._offsets = offsets
        self._full = full

    def __len__(self):
        return len(self.traces)

    def distances(self, s: Sequence[Hashable]) -> List[int]:
        full = self._full
        v = full
        get = self._masks.get
        for b in s:
            u = v & get(b, 0)
            v = ((v + u) | (v - u)) & full
        n = len(s)
        out = []
        for off, m in zip(self._offsets, self.lengths):
            lcs = m - ((v >> off) & ((1 << m) - 1)).bit_count()
            out.append(n + m - 2 * lcs)
        return out

    def nearest(self, s: Sequence[Hashable]) -> Tuple[int, Trace]:
        if not self.traces:
            raise ValueError("cannot take the minimum distance to an empty trace set")
        dists = self.distances(s)
        k = min(range(len(dists)), key=dists.__getitem__)  # first minimum = canonical tie-break
        return dists[k], self.traces[k]


def min_distance_to_set(s: Sequence[Hashable], targets) -> Tuple[int, Trace]:
    """Closest member of ``targets`` to ``s`` and its distance.

    Ties go to the member that comes first in sorted order. ``targets`` may
    be a prebuilt :class:`TraceIndex` to amortize packing across queries.
    """
    index = targets if isinstance(targets, TraceIndex) else TraceIndex(targets)
    return index.nearest(s)
