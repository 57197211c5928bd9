"""The annotation graph model and its set algebra.

An annotation graph is a labelled acyclic digraph over identified nodes,
together with a partial assignment of times to nodes.  The node set is never
stated independently: it is exactly the set of arc endpoints, so no graph can
contain an isolated node, and the empty graph is the graph with no arcs.

Construction goes through :func:`build`, which checks the full invariant
suite and raises a structured error on the first violation; :func:`validate`
runs the same checks on raw tuples and returns every violation instead of
raising, which is what the CLI and the soundness tests want.

Subgraphs are determined entirely by a subset of the arcs — nodes and times
follow by restriction — and the subgraphs of a fixed graph form a boolean
algebra under union, intersection and complement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import (
    AgError,
    ArcNotInGraph,
    ArcTimeReversed,
    CycleFound,
    MixedTimelines,
    NodeIdCollision,
    NotASubgraph,
    PathConditionViolated,
)
from .times import TimeRef, Timeline

NodeId = str

_DIGIT_RUN = re.compile(r"(\d+)")


def natural_key(text: str):
    """Sort key that orders embedded integers numerically ("n9" < "n10")."""
    return tuple(
        (0, int(part)) if part.isdigit() else (1, part)
        for part in _DIGIT_RUN.split(text)
    )


@dataclass(frozen=True)
class Label:
    """An ordered, non-empty tuple of uninterpreted string fields.

    By convention field 1 names the annotation type and field 2 carries the
    content; later fields are open (equivalence-class ids live in field 3 for
    the readers that use them).
    """

    fields: tuple[str, ...]

    def __post_init__(self):
        if not self.fields:
            raise ValueError("a label needs at least one field")
        if not all(isinstance(f, str) for f in self.fields):
            raise ValueError("label fields must be strings")

    @classmethod
    def of(cls, *fields: str) -> "Label":
        return cls(tuple(fields))

    @property
    def type(self) -> str:
        return self.fields[0]

    @property
    def content(self) -> Optional[str]:
        return self.fields[1] if len(self.fields) > 1 else None

    def field(self, index: int) -> Optional[str]:
        """1-based field access; None when the label is too short."""
        if index < 1:
            raise ValueError("label fields are numbered from 1")
        return self.fields[index - 1] if index <= len(self.fields) else None

    def __str__(self):
        return "/".join(self.fields)


@dataclass(frozen=True)
class Arc:
    """A labelled arc between two nodes."""

    source: NodeId
    label: Label
    target: NodeId

    def __str__(self):
        return f"<{self.source} {self.label} {self.target}>"


def arc(source: NodeId, *fields: str, target: NodeId) -> Arc:
    return Arc(source, Label.of(*fields), target)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    witness: Any = None

    def to_json(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]
    nodes: int
    arcs: int
    components: int
    timelines: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [v.to_json() for v in self.violations],
            "nodes": self.nodes,
            "arcs": self.arcs,
            "components": self.components,
            "timelines": list(self.timelines),
        }


_ERROR_TYPES = {
    "CycleFound": CycleFound,
    "ArcTimeReversed": ArcTimeReversed,
    "MixedTimelines": MixedTimelines,
    "PathConditionViolated": PathConditionViolated,
}


class AnnotationGraph:
    """An immutable annotation graph.  Use :func:`build` to construct one."""

    __slots__ = ("arcs", "times", "nodes")

    def __init__(self, arcs: frozenset, times: Mapping[NodeId, TimeRef], nodes: frozenset):
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "times", MappingProxyType(dict(times)))
        object.__setattr__(self, "nodes", nodes)

    def __setattr__(self, *_):
        raise AttributeError("annotation graphs are immutable")

    def time(self, node: NodeId) -> Optional[TimeRef]:
        return self.times.get(node)

    def __eq__(self, other):
        if not isinstance(other, AnnotationGraph):
            return NotImplemented
        return self.arcs == other.arcs and dict(self.times) == dict(other.times)

    def __hash__(self):
        return hash((self.arcs, frozenset(self.times.items())))

    def __len__(self):
        return len(self.arcs)

    def __iter__(self) -> Iterator[Arc]:
        return iter(sorted_arcs(self))

    def __repr__(self):
        timed = sum(1 for n in self.nodes if n in self.times)
        return f"<AnnotationGraph {len(self.arcs)} arcs, {len(self.nodes)} nodes ({timed} timed)>"


ArcSelector = Union[Callable[[Arc], bool], Iterable[Arc]]


def _undirected_components(nodes: Iterable[NodeId], arcs: Iterable[Arc]) -> list[set]:
    parent: dict[NodeId, NodeId] = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in arcs:
        rs, rt = find(a.source), find(a.target)
        if rs != rt:
            parent[rs] = rt
    groups: dict[NodeId, set] = {}
    for n in parent:
        groups.setdefault(find(n), set()).add(n)
    return sorted(groups.values(), key=lambda g: natural_key(min(g, key=natural_key)))


def _topological_order(nodes: Iterable[NodeId], succ: Mapping[NodeId, set]) -> Optional[list]:
    indeg = {n: 0 for n in nodes}
    for n, outs in succ.items():
        for m in outs:
            indeg[m] += 1
    frontier = sorted((n for n, d in indeg.items() if d == 0), key=natural_key)
    order = []
    while frontier:
        n = frontier.pop()
        order.append(n)
        for m in sorted(succ.get(n, ()), key=natural_key):
            indeg[m] -= 1
            if indeg[m] == 0:
                frontier.append(m)
    if len(order) != len(indeg):
        return None
    return order


def _find_cycle(succ: Mapping[NodeId, set]) -> list:
    state: dict[NodeId, int] = {}
    stack: list[NodeId] = []

    def walk(n) -> Optional[list]:
        state[n] = 1
        stack.append(n)
        for m in sorted(succ.get(n, ()), key=natural_key):
            if state.get(m) == 1:
                return stack[stack.index(m):] + [m]
            if m not in state:
                found = walk(m)
                if found:
                    return found
        state[n] = 2
        stack.pop()
        return None

    for n in sorted(succ, key=natural_key):
        if n not in state:
            found = walk(n)
            if found:
                return found
    return []


def validate(arcs: Iterable[Arc], times: Optional[Mapping[NodeId, TimeRef]] = None) -> ValidationReport:
    """Check the full invariant suite over raw tuples, collecting violations.

    Times given for ids that are not arc endpoints are ignored (restriction
    semantics); everything else that is wrong is reported, with a witness.
    """
    arcset = frozenset(arcs)
    violations: list[Violation] = []
    nodes: set = set()
    for a in arcset:
        if not a.source or not a.target:
            raise ValueError(f"empty node id on arc {a}")
        nodes.add(a.source)
        nodes.add(a.target)
    times = {n: t for n, t in (times or {}).items() if n in nodes}

    succ: dict[NodeId, set] = {n: set() for n in nodes}
    for a in arcset:
        if a.source == a.target:
            violations.append(Violation(
                "CycleFound", f"self-loop at node {a.source}", [a.source, a.source]))
        else:
            succ[a.source].add(a.target)

    order = _topological_order(nodes, succ)
    if order is None:
        cyc = _find_cycle(succ)
        violations.append(Violation("CycleFound", "arc set admits a cycle", cyc))

    components = _undirected_components(nodes, arcset)
    timelines: set = set()
    clean_components: list[set] = []
    for comp in components:
        comp_lines = sorted({times[n].timeline for n in comp if n in times})
        timelines.update(comp_lines)
        if len(comp_lines) > 1:
            violations.append(Violation(
                "MixedTimelines",
                f"component references {len(comp_lines)} timelines",
                {"nodes": sorted(comp, key=natural_key), "timelines": comp_lines}))
        else:
            clean_components.append(comp)
    clean_nodes = set().union(*clean_components) if clean_components else set()

    for a in sorted(arcset, key=lambda a: (natural_key(a.source), natural_key(a.target), a.label.fields)):
        ts, tt = times.get(a.source), times.get(a.target)
        if ts and tt and a.source in clean_nodes and ts.offset > tt.offset:
            violations.append(Violation(
                "ArcTimeReversed",
                f"arc {a} runs from {ts.spelled} back to {tt.spelled}",
                [a.source, list(a.label.fields), a.target]))

    if order is not None:
        violations.extend(_path_condition(order, succ, times, clean_nodes))

    return ValidationReport(
        ok=not violations,
        violations=tuple(violations),
        nodes=len(nodes),
        arcs=len(arcset),
        components=len(components),
        timelines=tuple(sorted(timelines)),
    )


def _path_condition(order: list, succ: Mapping[NodeId, set],
                    times: Mapping[NodeId, TimeRef], clean_nodes: set) -> list:
    """Propagate time bounds along the order; flag nodes whose bounds cross.

    A node's lower bound is the greatest time of any timed strict ancestor,
    taken segment-wise (a timed node restarts the bound).  The condition is
    violated exactly when a timed node sits below its lower bound, or an
    untimed node's lower bound exceeds its upper bound.
    """
    pred: dict[NodeId, set] = {n: set() for n in order}
    for n, outs in succ.items():
        for m in outs:
            pred[m].add(n)

    low: dict[NodeId, Fraction] = {}
    low_from: dict[NodeId, NodeId] = {}
    for n in order:
        if n not in clean_nodes:
            continue
        best, origin = None, None
        for p in sorted(pred[n], key=natural_key):
            if p not in clean_nodes:
                continue
            cand = times[p].offset if p in times else low.get(p)
            if cand is not None and (best is None or cand > best):
                best, origin = cand, p
        if best is not None:
            low[n] = best
            low_from[n] = origin

    up: dict[NodeId, Fraction] = {}
    up_from: dict[NodeId, NodeId] = {}
    for n in reversed(order):
        if n not in clean_nodes:
            continue
        best, origin = None, None
        for s in sorted(succ[n], key=natural_key):
            if s not in clean_nodes:
                continue
            cand = times[s].offset if s in times else up.get(s)
            if cand is not None and (best is None or cand < best):
                best, origin = cand, s
        if best is not None:
            up[n] = best
            up_from[n] = origin

    def back(n):  # walk lower-bound parents to the timed ancestor that set it
        path = [n]
        cur = n
        while cur in low_from:
            cur = low_from[cur]
            path.append(cur)
            if cur in times:
                break
        return list(reversed(path))

    def forward(n):  # walk upper-bound children to the timed descendant
        path = []
        cur = n
        while cur in up_from:
            cur = up_from[cur]
            path.append(cur)
            if cur in times:
                break
        return path

    found = []
    for n in order:
        if n in times and n in low and low[n] > times[n].offset:
            witness = back(n)
            found.append(Violation(
                "PathConditionViolated",
                f"path {'->'.join(witness)} descends from "
                f"{low[n]} to {times[n].offset}",
                witness))
        elif n not in times and n in low and n in up and low[n] > up[n]:
            witness = back(n) + forward(n)
            found.append(Violation(
                "PathConditionViolated",
                f"path {'->'.join(witness)} descends from {low[n]} to {up[n]}",
                witness))
    return found


def build(arcs: Iterable[Arc], times: Optional[Mapping[NodeId, TimeRef]] = None) -> AnnotationGraph:
    """Validate and construct a graph, raising on the first violation."""
    arcset = frozenset(arcs)
    report = validate(arcset, times)
    if not report.ok:
        v = report.violations[0]
        raise _ERROR_TYPES.get(v.code, AgError)(v.message, v.witness)
    nodes = frozenset(n for a in arcset for n in (a.source, a.target))
    kept = {n: t for n, t in (times or {}).items() if n in nodes}
    return AnnotationGraph(arcset, kept, nodes)


def _restrict(graph: AnnotationGraph, arcset: frozenset) -> AnnotationGraph:
    nodes = frozenset(n for a in arcset for n in (a.source, a.target))
    times = {n: t for n, t in graph.times.items() if n in nodes}
    return AnnotationGraph(arcset, times, nodes)


def subgraph(graph: AnnotationGraph, keep: ArcSelector) -> AnnotationGraph:
    """The subgraph determined by an arc subset (predicate or collection)."""
    if callable(keep):
        chosen = frozenset(a for a in graph.arcs if keep(a))
    else:
        chosen = frozenset(keep)
        foreign = chosen - graph.arcs
        if foreign:
            bad = min(foreign, key=lambda a: (natural_key(a.source), natural_key(a.target)))
            raise ArcNotInGraph(f"arc {bad} is not in the graph",
                               [bad.source, list(bad.label.fields), bad.target])
    return _restrict(graph, chosen)


def is_subgraph(graph: AnnotationGraph, candidate: AnnotationGraph) -> bool:
    if not candidate.arcs <= graph.arcs:
        return False
    expected = {n: graph.times[n] for n in candidate.nodes if n in graph.times}
    return dict(candidate.times) == expected


def _require_subgraph(graph: AnnotationGraph, candidate: AnnotationGraph, role: str):
    if not is_subgraph(graph, candidate):
        raise NotASubgraph(f"{role} operand is not a subgraph of the enclosing graph",
                          {"operand_arcs": len(candidate.arcs)})


def union(graph: AnnotationGraph, a: AnnotationGraph, b: AnnotationGraph) -> AnnotationGraph:
    _require_subgraph(graph, a, "first")
    _require_subgraph(graph, b, "second")
    return _restrict(graph, a.arcs | b.arcs)


def intersection(graph: AnnotationGraph, a: AnnotationGraph, b: AnnotationGraph) -> AnnotationGraph:
    _require_subgraph(graph, a, "first")
    _require_subgraph(graph, b, "second")
    return _restrict(graph, a.arcs & b.arcs)


def complement(graph: AnnotationGraph, a: AnnotationGraph) -> AnnotationGraph:
    _require_subgraph(graph, a, "the")
    return _restrict(graph, graph.arcs - a.arcs)


def disjoint_union(a: AnnotationGraph, b: AnnotationGraph) -> AnnotationGraph:
    shared = a.nodes & b.nodes
    if shared:
        raise NodeIdCollision(
            f"{len(shared)} node ids appear on both sides",
            sorted(shared, key=natural_key)[:10])
    times = dict(a.times)
    times.update(b.times)
    return AnnotationGraph(a.arcs | b.arcs, times, a.nodes | b.nodes)


def connected_components(graph: AnnotationGraph) -> list[AnnotationGraph]:
    """Subgraphs induced by the (undirected) connected components."""
    groups = _undirected_components(graph.nodes, graph.arcs)
    index = {}
    for i, g in enumerate(groups):
        for n in g:
            index[n] = i
    buckets: list[set] = [set() for _ in groups]
    for a in graph.arcs:
        buckets[index[a.source]].add(a)
    return [_restrict(graph, frozenset(bucket)) for bucket in buckets]


def is_anchored(graph: AnnotationGraph) -> bool:
    """Every node that lacks incoming arcs, or lacks outgoing arcs, is timed."""
    has_in: set = set()
    has_out: set = set()
    for a in graph.arcs:
        has_out.add(a.source)
        has_in.add(a.target)
    for n in graph.nodes:
        if n not in has_in and n not in graph.times:
            return False
        if n not in has_out and n not in graph.times:
            return False
    return True


def is_totally_anchored(graph: AnnotationGraph) -> bool:
    return all(n in graph.times for n in graph.nodes)


def instants(graph: AnnotationGraph) -> frozenset:
    """Arcs whose endpoints carry equal times on one timeline."""
    out = set()
    for a in graph.arcs:
        ts, tt = graph.times.get(a.source), graph.times.get(a.target)
        if ts is not None and tt is not None and ts == tt:
            out.add(a)
    return frozenset(out)


def sorted_arcs(graph: AnnotationGraph) -> list[Arc]:
    """Arcs in the canonical order used everywhere output must be stable.

    Key: timeline and effective lower bound of the source (unbounded arcs
    first), then source id, target id and label fields, with embedded
    integers compared numerically.
    """
    low: dict[NodeId, Optional[TimeRef]] = {}
    succ: dict[NodeId, set] = {n: set() for n in graph.nodes}
    for a in graph.arcs:
        if a.source != a.target:
            succ[a.source].add(a.target)
    order = _topological_order(graph.nodes, succ) or sorted(graph.nodes, key=natural_key)
    pred: dict[NodeId, set] = {n: set() for n in graph.nodes}
    for a in graph.arcs:
        pred[a.target].add(a.source)
    for n in order:
        if n in graph.times:
            low[n] = graph.times[n]
            continue
        best = None
        for p in pred[n]:
            cand = low.get(p)
            if cand is not None and (best is None or cand.offset > best.offset):
                best = cand
        low[n] = best

    def key(a: Arc):
        bound = low.get(a.source)
        if bound is None:
            head = (0, "", Fraction(0))
        else:
            head = (1, bound.timeline, bound.offset)
        return head + (natural_key(a.source), natural_key(a.target), a.label.fields)

    return sorted(graph.arcs, key=key)


EMPTY = AnnotationGraph(frozenset(), {}, frozenset())


class Corpus:
    """A named collection of graphs with globally unique node ids."""

    def __init__(self):
        self._graphs: dict[str, AnnotationGraph] = {}
        self._timelines: dict[str, Timeline] = {}

    def add(self, name: str, graph: AnnotationGraph) -> None:
        if name in self._graphs:
            raise ValueError(f"corpus already has a graph named {name!r}")
        taken = set()
        for g in self._graphs.values():
            taken |= g.nodes
        shared = taken & graph.nodes
        if shared:
            raise NodeIdCollision(
                f"graph {name!r} reuses {len(shared)} node ids",
                sorted(shared, key=natural_key)[:10])
        self._graphs[name] = graph

    def register_timeline(self, timeline: Timeline) -> None:
        known = self._timelines.get(timeline.id)
        if known is not None and known != timeline:
            raise ValueError(f"timeline {timeline.id!r} already registered differently")
        self._timelines[timeline.id] = timeline

    @property
    def graphs(self) -> Mapping[str, AnnotationGraph]:
        return MappingProxyType(self._graphs)

    @property
    def timelines(self) -> Mapping[str, Timeline]:
        return MappingProxyType(self._timelines)

    def union(self) -> AnnotationGraph:
        """The disjoint union of every member graph."""
        merged = EMPTY
        for name in sorted(self._graphs):
            merged = disjoint_union(merged, self._graphs[name])
        return merged

    def __len__(self):
        return len(self._graphs)
