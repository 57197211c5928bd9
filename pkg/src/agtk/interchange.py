"""XML interchange: a flat arc-per-line surface form.

A graph serializes as an ``<annotation>`` element containing one ``<arc>``
per arc, each holding a ``<source>``, a ``<label>`` with positional
attributes ``att_1``, ``att_2``, ... and a ``<target>``.  Node offsets are
re-emitted with the exact lexical form they were read with, so a round trip
is byte stable.  Arc order carries no meaning on input; output uses the
canonical order so equal graphs produce equal bytes.

Node ids come in three shapes of increasing scope:

    17              local
    sw02/trans#17   annotation-qualified
    ldc.upenn.edu/sw02/trans#17   authority-qualified

``qualify`` rewrites all ids of a graph into a wider scope in one step.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union
from xml.etree import ElementTree

from .errors import ConflictingQualification, SchemaViolation
from .model import AnnotationGraph, Arc, Label, NodeId, build, sorted_arcs
from .times import TimeRef, Timeline


@dataclass(frozen=True)
class QualifiedId:
    """A node id split into (authority, annotation, local) parts."""

    authority: str
    annotation: str
    local: str

    @classmethod
    def parse(cls, node_id: str) -> "QualifiedId":
        if "#" in node_id:
            scope, local = node_id.rsplit("#", 1)
            if "/" in scope:
                authority, annotation = scope.rsplit("/", 1)
            else:
                authority, annotation = "", scope
        else:
            authority, annotation, local = "", "", node_id
        return cls(authority, annotation, local)

    def __str__(self):
        if self.authority:
            return f"{self.authority}/{self.annotation}#{self.local}"
        if self.annotation:
            return f"{self.annotation}#{self.local}"
        return self.local


def qualify(graph: AnnotationGraph, *, annotation: str = "",
            authority: str = "") -> AnnotationGraph:
    """Widen every node id's scope; already-qualified parts must agree.

    Qualifying twice with the same names is the identity; qualifying with a
    different annotation or authority than an id already carries is an
    error, never a silent rename.
    """
    def widen(node_id: NodeId) -> NodeId:
        q = QualifiedId.parse(node_id)
        if q.annotation and annotation and q.annotation != annotation:
            raise ConflictingQualification(
                f"id {node_id!r} already belongs to annotation {q.annotation!r}",
                node_id)
        if q.authority and authority and q.authority != authority:
            raise ConflictingQualification(
                f"id {node_id!r} already belongs to authority {q.authority!r}",
                node_id)
        return str(QualifiedId(authority or q.authority,
                               annotation or q.annotation, q.local))

    arcs = [Arc(widen(a.source), a.label, widen(a.target)) for a in graph.arcs]
    times = {widen(n): t for n, t in graph.times.items()}
    return build(arcs, times)


_ESCAPES = {"&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;"}


def _attr(value: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in value)


def _offset_text(ref: TimeRef, default_timeline: Optional[str]) -> tuple[str, Optional[str]]:
    """(offset attribute, timeline attribute or None)."""
    if default_timeline is not None and ref.timeline == default_timeline:
        return ref.spelled, None
    if "://" in ref.timeline:
        # a URL-shaped timeline would collide with the id#local syntax of
        # qualified node ids nowhere, but folding it into the offset keeps
        # one attribute: "proto://host/path#offset"
        return f"{ref.timeline}#{ref.spelled}", None
    return ref.spelled, ref.timeline


def _node_xml(tag: str, node: NodeId, ref: Optional[TimeRef],
              default_timeline: Optional[str]) -> str:
    if ref is None:
        return f'<{tag} id="{_attr(node)}"/>'
    offset, timeline = _offset_text(ref, default_timeline)
    if timeline is None:
        return f'<{tag} id="{_attr(node)}" offset="{_attr(offset)}"/>'
    return (f'<{tag} id="{_attr(node)}" offset="{_attr(offset)}"'
            f' timeline="{_attr(timeline)}"/>')


def _pick_default_timeline(graph: AnnotationGraph) -> Optional[str]:
    names = {t.timeline for t in graph.times.values()}
    if len(names) == 1:
        (only,) = names
        if "://" not in only:
            return only
    return None


def to_xml(graph: AnnotationGraph, *,
           timelines: Iterable[Timeline] = (),
           default_timeline: Union[str, None, type(Ellipsis)] = ...) -> str:
    """Serialize a graph to the interchange form.

    ``default_timeline`` set to ``...`` picks the single timeline of the
    graph when there is exactly one; pass ``None`` to force per-node
    timeline attributes, or a name to use as the element default.
    """
    if default_timeline is ...:
        default_timeline = _pick_default_timeline(graph)

    lines: list[str] = []
    declared = sorted(timelines, key=lambda t: t.id)
    if default_timeline is None:
        lines.append("<annotation>")
    else:
        lines.append(f'<annotation timeline="{_attr(default_timeline)}">')
    for tl in declared:
        attrs = f'id="{_attr(tl.id)}" unit="{_attr(tl.unit)}"'
        if tl.rate is not None:
            attrs += f' rate="{_attr(str(tl.rate))}"'
        if tl.signals:
            lines.append(f"  <timeline {attrs}>")
            for href in tl.signals:
                lines.append(f'    <signal href="{_attr(href)}"/>')
            lines.append("  </timeline>")
        else:
            lines.append(f"  <timeline {attrs}/>")
    for a in sorted_arcs(graph):
        src = _node_xml("source", a.source, graph.times.get(a.source), default_timeline)
        label = "<label " + " ".join(
            f'att_{i}="{_attr(f)}"' for i, f in enumerate(a.label.fields, start=1)
        ) + "/>"
        tgt = _node_xml("target", a.target, graph.times.get(a.target), default_timeline)
        lines.append(f"  <arc>{src}{label}{tgt}</arc>")
    if len(lines) == 1:
        return lines[0] + "</annotation>\n"
    lines.append("</annotation>")
    return "\n".join(lines) + "\n"


_ATT_NAME = re.compile(r"att_(\d+)$")


def _read_node(elem, default_timeline: Optional[str],
               times: dict, conflicts: list) -> NodeId:
    node_id = elem.get("id")
    if node_id is None:
        raise SchemaViolation(f"<{elem.tag}> without id", elem.tag)
    offset = elem.get("offset")
    if offset is not None:
        timeline = elem.get("timeline")
        if timeline is None:
            if "#" in offset and "://" in offset:
                timeline, offset = offset.rsplit("#", 1)
            elif default_timeline is not None:
                timeline = default_timeline
            else:
                raise SchemaViolation(
                    f"node {node_id!r} has an offset but no timeline", node_id)
        ref = TimeRef.parse(timeline, offset)
        old = times.get(node_id)
        if old is not None and old != ref:
            conflicts.append((node_id, old, ref))
        times[node_id] = ref
    return node_id


def _read_label(elem) -> Label:
    fields: dict[int, str] = {}
    for name, value in elem.attrib.items():
        m = _ATT_NAME.match(name)
        if not m:
            raise SchemaViolation(f"unknown label attribute {name!r}", name)
        fields[int(m.group(1))] = value
    if not fields:
        raise SchemaViolation("<label> with no att_N attributes", None)
    if sorted(fields) != list(range(1, len(fields) + 1)):
        raise SchemaViolation(
            f"label attributes not consecutive from att_1: {sorted(fields)}",
            sorted(fields))
    return Label.of(*(fields[i] for i in range(1, len(fields) + 1)))


def _read_timeline(elem) -> Timeline:
    tl_id = elem.get("id")
    if tl_id is None:
        raise SchemaViolation("<timeline> without id", None)
    unit = elem.get("unit", "seconds")
    rate = elem.get("rate")
    signals = tuple(sig.get("href", "") for sig in elem.findall("signal"))
    return Timeline(tl_id, unit=unit,
                    rate=Fraction(rate) if rate is not None else None,
                    signals=signals)


def read_xml(text: Union[str, bytes]) -> tuple[AnnotationGraph, list[Timeline], list[str]]:
    """Parse interchange XML; returns (graph, declared timelines, warnings)."""
    try:
        root = ElementTree.fromstring(text)
    except ElementTree.ParseError as exc:
        raise SchemaViolation(f"not well-formed: {exc}", str(exc)) from None
    if root.tag != "annotation":
        raise SchemaViolation(f"expected <annotation>, found <{root.tag}>", root.tag)

    default_timeline = root.get("timeline")
    times: dict[str, TimeRef] = {}
    conflicts: list = []
    warnings: list[str] = []
    timelines: list[Timeline] = []
    arcs: list[Arc] = []
    seen: set[Arc] = set()

    for child in root:
        if child.tag == "timeline":
            timelines.append(_read_timeline(child))
            continue
        if child.tag != "arc":
            raise SchemaViolation(f"unexpected <{child.tag}> in <annotation>", child.tag)
        src_elem = child.find("source")
        label_elem = child.find("label")
        tgt_elem = child.find("target")
        if src_elem is None or label_elem is None or tgt_elem is None:
            raise SchemaViolation("<arc> must hold source, label and target", None)
        src = _read_node(src_elem, default_timeline, times, conflicts)
        tgt = _read_node(tgt_elem, default_timeline, times, conflicts)
        a = Arc(src, _read_label(label_elem), tgt)
        if a in seen:
            warnings.append(f"duplicate arc collapsed: {a}")
            continue
        seen.add(a)
        arcs.append(a)

    if conflicts:
        node_id, old, new = conflicts[0]
        raise SchemaViolation(
            f"node {node_id!r} anchored at both {old.spelled}@{old.timeline} "
            f"and {new.spelled}@{new.timeline}", node_id)
    return build(arcs, times), timelines, warnings


def from_xml(text: Union[str, bytes]) -> AnnotationGraph:
    graph, _, _ = read_xml(text)
    return graph


def write_file(graph: AnnotationGraph, path, **kwargs) -> None:
    with io.open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_xml(graph, **kwargs))


def read_file(path) -> AnnotationGraph:
    with io.open(path, "r", encoding="utf-8") as fh:
        return from_xml(fh.read())
