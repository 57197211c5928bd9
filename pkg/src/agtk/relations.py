"""Precedence and inclusion relations, temporal bounds, equivalence classes.

Two precedence orders combine here: the structural one (a directed path
exists) and the temporal one (both nodes timed on one timeline, strictly
ordered).  Their union is not transitive — a time step can bridge separate
components, after which structure takes over — so the full precedence
relation is the transitive closure of the union.  Inclusion lifts the same
idea to arcs.

The strict readings are the definitional ones.  Non-strict variants, which
let spans share an endpoint, are what hierarchy checks and queries want: a
word starting exactly where its phrase starts still lies within the phrase.

A ``RelationContext`` caches reachability per graph.  Graphs are immutable,
so a context never goes stale.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .errors import ArcNotInGraph
from .model import AnnotationGraph, Arc, NodeId, natural_key
from .times import TimeRef


class RelationContext:
    """Cached reachability and closure queries for one graph."""

    def __init__(self, graph: AnnotationGraph):
        self.graph = graph
        self._succ: dict[NodeId, set] = {n: set() for n in graph.nodes}
        self._pred: dict[NodeId, set] = {n: set() for n in graph.nodes}
        for a in graph.arcs:
            self._succ[a.source].add(a.target)
            self._pred[a.target].add(a.source)
        # timed nodes per timeline, sorted by offset, for temporal steps
        self._by_timeline: dict[str, list[NodeId]] = {}
        for n in sorted(graph.nodes, key=natural_key):
            t = graph.times.get(n)
            if t is not None:
                self._by_timeline.setdefault(t.timeline, []).append(n)
        for line in self._by_timeline.values():
            line.sort(key=lambda n: graph.times[n].offset)
        self._down: dict[NodeId, frozenset] = {}
        self._up: dict[NodeId, frozenset] = {}
        self._prec: dict[NodeId, frozenset] = {}
        self._inc: dict[tuple, dict[Arc, frozenset]] = {}

    # ------------------------------------------------------------ structure

    def _reach(self, start: NodeId, step: dict) -> frozenset:
        seen: set = set()
        frontier = [start]
        while frontier:
            n = frontier.pop()
            for m in step[n]:
                if m not in seen:
                    seen.add(m)
                    frontier.append(m)
        seen.discard(start)  # acyclic, but keep the intent explicit
        return frozenset(seen)

    def descendants(self, node: NodeId) -> frozenset:
        if node not in self._down:
            self._down[node] = self._reach(node, self._succ)
        return self._down[node]

    def ancestors(self, node: NodeId) -> frozenset:
        if node not in self._up:
            self._up[node] = self._reach(node, self._pred)
        return self._up[node]

    # ----------------------------------------------------------- precedence

    def _later_timed(self, node: NodeId) -> list:
        t = self.graph.times.get(node)
        if t is None:
            return []
        line = self._by_timeline[t.timeline]
        return [m for m in line if self.graph.times[m].offset > t.offset]

    def precedence_set(self, node: NodeId) -> frozenset:
        """Everything reachable by any mix of structural and temporal steps."""
        if node in self._prec:
            return self._prec[node]
        seen: set = set()
        frontier = [node]
        while frontier:
            n = frontier.pop()
            for m in list(self._succ[n]) + self._later_timed(n):
                if m not in seen:
                    seen.add(m)
                    frontier.append(m)
        seen.discard(node)
        out = frozenset(seen)
        self._prec[node] = out
        return out

    # ------------------------------------------------------------ inclusion

    def _check_arc(self, arc: Arc):
        if arc not in self.graph.arcs:
            raise ArcNotInGraph(f"arc {arc} is not in this graph",
                                [arc.source, list(arc.label.fields), arc.target])

    def inclusion_set(self, arc: Arc, strict: bool) -> frozenset:
        """Transitive closure of one-step structural or temporal inclusion."""
        self._check_arc(arc)
        table = self._inc.setdefault(("inc", strict), {})
        if arc in table:
            return table[arc]
        seen: set = set()
        frontier = [arc]
        while frontier:
            p = frontier.pop()
            for q in self.graph.arcs:
                if q not in seen and q != arc and (
                        s_includes(self, p, q, strict=strict)
                        or t_includes(self, p, q, strict=strict)):
                    seen.add(q)
                    frontier.append(q)
        out = frozenset(seen)
        table[arc] = out
        return out


def s_precedes(ctx: RelationContext, n1: NodeId, n2: NodeId) -> bool:
    """A directed path runs from n1 to n2 (irreflexive)."""
    return n1 != n2 and n2 in ctx.descendants(n1)


def t_precedes(ctx: RelationContext, n1: NodeId, n2: NodeId) -> bool:
    """Both nodes timed on one timeline, n1 strictly earlier."""
    a, b = ctx.graph.times.get(n1), ctx.graph.times.get(n2)
    return (a is not None and b is not None
            and a.timeline == b.timeline and a.offset < b.offset)


def precedes(ctx: RelationContext, n1: NodeId, n2: NodeId) -> bool:
    """Transitive closure of the union of the two precedence orders."""
    return n1 != n2 and n2 in ctx.precedence_set(n1)


def _at_or_before(ctx, n1, n2):
    return n1 == n2 or s_precedes(ctx, n1, n2)


def s_includes(ctx: RelationContext, p: Arc, q: Arc, *, strict: bool = True) -> bool:
    """p's endpoints structurally bracket q's endpoints."""
    if strict:
        return s_precedes(ctx, p.source, q.source) and s_precedes(ctx, q.target, p.target)
    return _at_or_before(ctx, p.source, q.source) and _at_or_before(ctx, q.target, p.target)


def t_includes(ctx: RelationContext, p: Arc, q: Arc, *, strict: bool = True) -> bool:
    """p's endpoint times bracket q's endpoint times."""
    times = ctx.graph.times
    ps, pt = times.get(p.source), times.get(p.target)
    qs, qt = times.get(q.source), times.get(q.target)
    if None in (ps, pt, qs, qt):
        return False
    if not (ps.timeline == pt.timeline == qs.timeline == qt.timeline):
        return False
    if strict:
        return ps.offset < qs.offset and qt.offset < pt.offset
    return ps.offset <= qs.offset and qt.offset <= pt.offset


def includes(ctx: RelationContext, p: Arc, q: Arc, *, strict: bool = True) -> bool:
    """Transitive closure of one-step structural or temporal inclusion."""
    ctx._check_arc(q)
    return p != q and q in ctx.inclusion_set(p, strict)


def glb(ctx: RelationContext, a: Arc) -> Optional[TimeRef]:
    """Greatest time over timed strict structural predecessors of the source.

    Absence is reported as None, never invented; note that the source's own
    time does not participate.
    """
    ctx._check_arc(a)
    best_node = None
    for n in ctx.ancestors(a.source):
        t = ctx.graph.times.get(n)
        if t is None:
            continue
        if best_node is None or (t.offset, natural_key(n)) > (
                ctx.graph.times[best_node].offset, natural_key(best_node)):
            best_node = n
    return ctx.graph.times[best_node] if best_node is not None else None


def lub(ctx: RelationContext, a: Arc) -> Optional[TimeRef]:
    """Least time over timed strict structural successors of the target."""
    ctx._check_arc(a)
    best_node = None
    for n in ctx.descendants(a.target):
        t = ctx.graph.times.get(n)
        if t is None:
            continue
        if best_node is None or (t.offset, natural_key(n)) < (
                ctx.graph.times[best_node].offset, natural_key(best_node)):
            best_node = n
    return ctx.graph.times[best_node] if best_node is not None else None


def start_bound(ctx: RelationContext, a: Arc) -> Optional[TimeRef]:
    """Effective lower bound of the arc: its source's time, else the glb.

    On an anchored graph this always exists, which is what makes temporal
    queries total there.
    """
    own = ctx.graph.times.get(a.source)
    return own if own is not None else glb(ctx, a)


def end_bound(ctx: RelationContext, a: Arc) -> Optional[TimeRef]:
    """Effective upper bound of the arc: its target's time, else the lub."""
    own = ctx.graph.times.get(a.target)
    return own if own is not None else lub(ctx, a)


class EquivalenceClasses:
    """Arcs grouped by a shared id carried in one label field."""

    def __init__(self, graph: AnnotationGraph, field_index: int = 3):
        if field_index < 1:
            raise ValueError("label fields are numbered from 1")
        self.graph = graph
        self.field_index = field_index
        classes: dict[str, set] = {}
        for a in graph.arcs:
            value = a.label.field(field_index)
            if value:  # an empty field means "not classified"
                classes.setdefault(value, set()).add(a)
        self.classes: dict[str, frozenset] = {
            k: frozenset(v) for k, v in classes.items()}

    def class_of(self, a: Arc) -> Optional[str]:
        value = a.label.field(self.field_index)
        return value if value else None

    def linked(self, a: Arc) -> frozenset:
        """The other members of the arc's class (empty when unclassified)."""
        value = self.class_of(a)
        if value is None or value not in self.classes:
            return frozenset()
        return self.classes[value] - {a}

    def ids(self) -> list[str]:
        return sorted(self.classes, key=natural_key)


def equivalence_classes(graph: AnnotationGraph, field_index: int = 3) -> EquivalenceClasses:
    return EquivalenceClasses(graph, field_index)


def linked(classes: EquivalenceClasses, a: Arc) -> frozenset:
    return classes.linked(a)
