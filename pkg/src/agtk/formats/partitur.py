"""Reader for anchor-linked multi-tier speech annotation.

The input is a sequence of "TIER: payload" lines.  One tier introduces a
numeric anchor per word; the other tiers hang material off those anchors:

    KAN: 3 das+            canonical form, declares anchor 3
    ORT: 3 das             orthography for anchor 3
    TRL: 3 das             transliteration chunk for anchor 3
    MAU: 9920 1599 1 2:    segment: start, duration, anchor, label
    DAS: 0,1,2 @(X Y)      dialogue act over an anchor run

Segment and word streams stay structurally separate; they are associated
through a shared anchor id carried in label field 3 (an equivalence class
per word).  Anchor -1 marks noise segments belonging to no word; those
carry no class id.  Dialogue-act arcs reuse the word chain's boundary
nodes, spanning the extent of their anchor run.

Times: a segment line covers samples start .. start+duration inclusive, so
its arc ends at offset start+duration+1, which is exactly where the next
segment begins in contiguous data.  Pass ``inclusive_ends=True`` to keep
the raw start+duration value instead (the boundary then belongs to both
segments' lexical extents, and abutting segments no longer share nodes).

A word's extent is the union of its segments, which must tile it without
gaps or overlaps.  Two adjacent words share a boundary node only when the
earlier word's known end equals the later word's known start; when either
side lacks segment data the chain continues through a node carrying no
time (a noise segment may sit between the words, so carrying the known
time across would assert a false boundary).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..errors import MalformedLine, OverlappingMAUWithinAnchor, UnknownAnchor
from ..model import AnnotationGraph, Arc, Label, build
from ..times import TimeRef, Timeline
from .common import DEFAULT_OPTIONS, NodeIds, ReaderOptions, physical_lines

DEFAULT_TIMELINE = Timeline("partitur", unit="samples", rate=Fraction(16000))

DEFAULT_TYPES = {
    "ORT": "O",
    "MAU": "M",
    "DAS": "D",
    # anchor inventory and transliteration contribute no arcs of their own
    "KAN": "",
    "TRL": "",
}


def read_partitur(text: str, opts: ReaderOptions = DEFAULT_OPTIONS, *,
                  inclusive_ends: bool = False) -> AnnotationGraph:
    timeline = opts.timeline or DEFAULT_TIMELINE
    types = dict(DEFAULT_TYPES)
    types.update(opts.type_names)

    anchors: list[int] = []
    ort: dict[int, str] = {}
    segments: list[tuple[int, Fraction, Fraction, int, str]] = []
    acts: list[tuple[int, list[int], str]] = []

    for lineno, line in physical_lines(text):
        if not line.strip():
            continue
        tier, _, payload = line.partition(":")
        tier, payload = tier.strip(), payload.strip()
        if not _:
            raise MalformedLine(f"line {lineno}: no tier prefix in {line!r}", lineno)
        if tier not in types:
            raise MalformedLine(f"line {lineno}: unknown tier {tier!r}", lineno)
        if tier == "KAN":
            anchor, _, _form = payload.partition(" ")
            anchors.append(_int(anchor, lineno))
        elif tier == "ORT":
            anchor, _, form = payload.partition(" ")
            ort[_int(anchor, lineno)] = form.strip()
        elif tier == "TRL":
            anchor, _, _chunk = payload.partition(" ")
            _int(anchor, lineno)  # validated, not represented
        elif tier == "MAU":
            parts = payload.split(None, 3)
            if len(parts) != 4:
                raise MalformedLine(f"line {lineno}: MAU needs "
                                    f"'start duration anchor label'", lineno)
            start = Fraction(_int(parts[0], lineno))
            duration = Fraction(_int(parts[1], lineno))
            segments.append((lineno, start, start + duration + (0 if inclusive_ends else 1),
                             _int(parts[2], lineno), parts[3]))
        elif tier == "DAS":
            run, _, label = payload.partition(" ")
            label = label.strip()
            if label.startswith("@"):
                label = label[1:]
            acts.append((lineno, [_int(p, lineno) for p in run.split(",")], label))

    known = set(anchors) | set(ort)
    for lineno, _, _, anchor, _ in segments:
        if anchor != -1 and anchor not in known:
            raise UnknownAnchor(f"line {lineno}: segment references anchor {anchor}",
                                anchor)
    for lineno, run, _ in acts:
        for anchor in run:
            if anchor not in known:
                raise UnknownAnchor(f"line {lineno}: act references anchor {anchor}",
                                    anchor)

    # word extents from the segment stream
    extent: dict[int, tuple[Fraction, Fraction]] = {}
    for anchor in sorted({a for _, _, _, a, _ in segments if a != -1}):
        runs = sorted((s, e) for _, s, e, a, _ in segments if a == anchor)
        for (_, prev_end), (start, _) in zip(runs, runs[1:]):
            if start != prev_end:
                raise OverlappingMAUWithinAnchor(
                    f"segments of anchor {anchor} do not tile: "
                    f"{prev_end} then {start}", anchor)
        extent[anchor] = (runs[0][0], runs[-1][1])

    ids = NodeIds()
    times: dict[str, TimeRef] = {}

    def timed(offset: Fraction) -> str:
        node = ids.fresh()
        times[node] = TimeRef(timeline.id, offset)
        return node

    arcs: list[Arc] = []

    # the word chain, in anchor order
    word_order = sorted(set(anchors) | set(ort))
    word_nodes: dict[int, tuple[str, str]] = {}
    prev_anchor: Optional[int] = None
    prev_target: Optional[str] = None
    for anchor in word_order:
        span = extent.get(anchor)
        share = (prev_target is not None
                 and (span is None) == (prev_anchor not in extent)
                 and (span is None or extent[prev_anchor][1] == span[0]))
        if share:
            source = prev_target
        elif span is not None:
            source = timed(span[0])
        else:
            source = ids.fresh()
        target = timed(span[1]) if span is not None else ids.fresh()
        word_nodes[anchor] = (source, target)
        word_type = types.get("ORT", "O")
        if word_type:
            arcs.append(Arc(source,
                            Label.of(word_type, ort.get(anchor, ""), str(anchor)),
                            target))
        prev_anchor, prev_target = anchor, target

    # the segment stream: its own chain, nodes shared where offsets meet
    seg_type = types.get("MAU", "M")
    if seg_type:
        boundary: dict[Fraction, str] = {}
        for _, start, end, anchor, label in sorted(segments, key=lambda s: (s[1], s[2])):
            for offset in (start, end):
                if offset not in boundary:
                    boundary[offset] = timed(offset)
            cls = str(anchor) if anchor != -1 else ""
            arcs.append(Arc(boundary[start], Label.of(seg_type, label, cls),
                            boundary[end]))

    act_type = types.get("DAS", "D")
    if act_type:
        for lineno, run, label in acts:
            source = word_nodes[min(run)][0]
            target = word_nodes[max(run)][1]
            arcs.append(Arc(source, Label.of(act_type, label), target))

    return build(arcs, times)


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise MalformedLine(f"line {lineno}: expected integer, got {token!r}",
                            lineno) from None
