"""Reader for two-channel telephone transcripts with per-stretch times.

Lines look like "962.68 970.21 A: text...", possibly continued on indented
lines; the text may be empty.  Long turns arrive chopped into abutting
stretches purely to supply extra time marks, so consecutive stretches of
one speaker merge into a single turn when the gap between them is at most
``merge_gap`` seconds (and never when they overlap).  Interior marks stay
on the graph as timed nodes: where a merged turn has a real gap, a
single-field "pause" arc bridges it, keeping each turn one connected
component.  Cross-speaker overlap lives only in the times; different
speakers' turns never share nodes.

Tokens are kept verbatim with their punctuation attached, the way the
source writes them, so the punctuation policy option is not consulted.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import MalformedStretch
from ..model import AnnotationGraph, Arc, Label, build
from ..times import TimeRef, Timeline
from .common import DEFAULT_OPTIONS, NodeIds, ReaderOptions

DEFAULT_TIMELINE = Timeline("callhome", unit="seconds")

_STRETCH = re.compile(r"^(?P<start>\d+(?:\.\d+)?)\s+(?P<end>\d+(?:\.\d+)?)"
                      r"\s+(?P<speaker>\S+?):\s?(?P<text>.*)$")


def read_callhome(text: str, opts: ReaderOptions = DEFAULT_OPTIONS) -> AnnotationGraph:
    timeline = opts.timeline or DEFAULT_TIMELINE
    speaker_type = opts.type_name("speaker", "speaker")
    word_type = opts.type_name("word", "W")
    pause_type = opts.type_name("pause", "pause")

    stretches = []  # (speaker, start Fraction, raw start, end Fraction, raw end, tokens)
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line[:1].isspace():
            if current is None:
                raise MalformedStretch(f"line {lineno}: continuation with no stretch",
                                       lineno)
            current[5].extend(line.split())
            continue
        m = _STRETCH.match(line)
        if not m:
            raise MalformedStretch(f"line {lineno}: not '<start> <end> <spk>: text'",
                                   lineno)
        current = [m.group("speaker"), Fraction(m.group("start")), m.group("start"),
                   Fraction(m.group("end")), m.group("end"), m.group("text").split()]
        stretches.append(current)

    # group into turns per speaker, in time order
    turns: list[tuple[str, list]] = []
    by_speaker: dict[str, list] = {}
    for stretch in stretches:
        speaker = stretch[0]
        group = by_speaker.get(speaker)
        if group is not None:
            gap = stretch[1] - group[-1][3]
            if 0 <= gap <= opts.merge_gap:
                group.append(stretch)
                continue
        group = [stretch]
        by_speaker[speaker] = group
        turns.append((speaker, group))
    turns.sort(key=lambda t: (t[1][0][1], t[0]))

    ids = NodeIds()
    arcs: list[Arc] = []
    times: dict[str, TimeRef] = {}

    def timed(raw: str) -> str:
        node = ids.fresh()
        times[node] = TimeRef.parse(timeline.id, raw)
        return node

    for speaker, group in turns:
        first = timed(group[0][2])
        node = first
        for i, (_, start, raw_start, _end, raw_end, tokens) in enumerate(group):
            if i > 0:
                prev_end = group[i - 1][3]
                if start == prev_end:
                    pass  # abutting stretches share the mark node
                else:
                    nxt = timed(raw_start)
                    arcs.append(Arc(node, Label.of(pause_type), nxt))
                    node = nxt
            for j, token in enumerate(tokens):
                last_token = j == len(tokens) - 1
                nxt = timed(raw_end) if last_token else ids.fresh()
                arcs.append(Arc(node, Label.of(word_type, token), nxt))
                node = nxt
            if not tokens:
                nxt = timed(raw_end)
                if len(group) > 1:  # keep a multi-stretch turn's chain in one piece
                    arcs.append(Arc(node, Label.of(pause_type), nxt))
                node = nxt
        arcs.append(Arc(first, Label.of(speaker_type, speaker), node))

    return build(arcs, times)
