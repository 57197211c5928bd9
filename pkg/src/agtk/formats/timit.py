"""Reader and writer for two-column time-aligned segmentation files.

Each line is "<time1> <time2> <label>" with integer sample offsets.  The
word file and the phone file describe the same recording, so boundaries
with equal offsets collapse to shared nodes.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..errors import MalformedLine, NonMonotonicTimes
from ..model import AnnotationGraph, Arc, Label, build
from ..times import TimeRef, Timeline
from .common import DEFAULT_OPTIONS, ReaderOptions, physical_lines

DEFAULT_TIMELINE = Timeline("timit", unit="samples", rate=Fraction(16000))


def _parse_lines(text: str, which: str):
    """[(lineno, start lexical, end lexical, label)] with monotonicity checks."""
    rows = []
    prev_end: Optional[Fraction] = None
    for lineno, line in physical_lines(text):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise MalformedLine(f"{which} line {lineno}: expected "
                                f"'<time1> <time2> <label>', got {line!r}", lineno)
        raw_start, raw_end, label = parts
        try:
            start, end = Fraction(raw_start), Fraction(raw_end)
        except (ValueError, ZeroDivisionError):
            raise MalformedLine(f"{which} line {lineno}: bad offset", lineno) from None
        if end < start:
            raise NonMonotonicTimes(f"{which} line {lineno}: {raw_end} < {raw_start}",
                                    lineno)
        if prev_end is not None and start < prev_end:
            raise NonMonotonicTimes(f"{which} line {lineno}: segment starts at "
                                    f"{raw_start}, before the previous end", lineno)
        prev_end = end
        rows.append((lineno, raw_start, raw_end, label))
    return rows


def read_timit(wrd_text: str, phn_text: str,
               opts: ReaderOptions = DEFAULT_OPTIONS) -> AnnotationGraph:
    """Two aligned files in, one totally anchored graph out.

    Node ids are "0", "1", ... in ascending offset order over the union of
    boundaries from both files.
    """
    timeline = opts.timeline or DEFAULT_TIMELINE
    word_type = opts.type_name("wrd", "W")
    phone_type = opts.type_name("phn", "P")
    words = _parse_lines(wrd_text, "wrd")
    phones = _parse_lines(phn_text, "phn")

    lexical: dict[Fraction, str] = {}
    for rows in (phones, words):  # words win ties, not that forms ever differ
        for _, raw_start, raw_end, _ in rows:
            lexical[Fraction(raw_start)] = raw_start
            lexical[Fraction(raw_end)] = raw_end
    node_of = {offset: str(i) for i, offset in enumerate(sorted(lexical))}

    arcs = []
    for type_name, rows in ((word_type, words), (phone_type, phones)):
        for _, raw_start, raw_end, label in rows:
            arcs.append(Arc(node_of[Fraction(raw_start)],
                            Label.of(type_name, label),
                            node_of[Fraction(raw_end)]))
    times = {node: TimeRef(timeline.id, offset, lexical[offset])
             for offset, node in node_of.items()}
    return build(arcs, times)


def write_timit(graph: AnnotationGraph, *, word_type: str = "W",
                phone_type: str = "P") -> tuple[str, str]:
    """The inverse mapping, for round-trip tests: (wrd text, phn text)."""
    def emit(type_name: str) -> str:
        rows = []
        for a in graph.arcs:
            if a.label.type != type_name:
                continue
            start = graph.times[a.source]
            end = graph.times[a.target]
            rows.append((start.offset, end.offset,
                         f"{start.spelled} {end.spelled} {a.label.content}"))
        return "".join(line + "\n" for _, _, line in sorted(rows))

    return emit(word_type), emit(phone_type)
