"""Reader for SGML speaker-turn transcripts with interior time anchors.

The input is tag soup, not XML: b_/e_ conventions mark ranges, and tags
like <time sec=...> stand alone between words.  Handled inventory:

    <turn speaker=... startTime=... endTime=...> ... </turn>
    <time sec=S>                       times the next word boundary
    <b_overlap startTime=S endTime=E>words<e_overlap>
                                       times the boundaries around the words
    <b_enamex type=T>words<e_enamex>   typed arc EN/T over the words
    <contraction e_form="[l=>r]...">   expansion arc over the next word
    <hyphen>                           a literal "-" inside a word

Each turn is its own connected component spanned by a speaker/ arc; word
boundaries inside it are untimed unless an anchor supplies an offset.
Overlap between turns is carried by the times alone.  Tokens opening with
"{" (noise marks) take no time: they hang off the current boundary, as
does punctuation under the default policy.
"""

from __future__ import annotations

import re
from typing import Optional

from ..errors import TimeOutsideTurn, UnbalancedTag
from ..model import AnnotationGraph, Arc, Label, build
from ..times import TimeRef, Timeline
from .common import (DEFAULT_OPTIONS, NodeIds, ReaderOptions, is_punct_token,
                     scan_sgml)

DEFAULT_TIMELINE = Timeline("utf", unit="seconds")

_EFORM_PART = re.compile(r"\[(?P<surface>[^=\]]*)=>(?P<expanded>[^\]]*)\]")


def expand_contraction(e_form: str) -> str:
    """The full form encoded by "[you=>you]['ve=>have]" is "you have"."""
    return " ".join(m.group("expanded") for m in _EFORM_PART.finditer(e_form))


class _Turn:
    def __init__(self, ids: NodeIds, timeline: str, attrs: dict):
        self.timeline = timeline
        self.ids = ids
        self.speaker = attrs.get("speaker", "")
        self.start = attrs.get("startTime")
        self.end = attrs.get("endTime")
        self.arcs: list[Arc] = []
        self.times: dict[str, TimeRef] = {}
        self.first = ids.fresh()
        if self.start is not None:
            self.times[self.first] = TimeRef.parse(timeline, self.start)
        self.node = self.first  # current word boundary
        self.pending_time: Optional[str] = None  # lexical offset for next boundary
        self.pending_expansion: Optional[str] = None
        self.enamex_open: list[tuple[str, str]] = []  # (type, source node)
        self.overlap_end: Optional[str] = None
        self.instant_at: dict[str, str] = {}

    def check_inside(self, lexical: str, what: str) -> None:
        ref = TimeRef.parse(self.timeline, lexical)
        for bound, cmp_ok in ((self.start, lambda b: b.offset <= ref.offset),
                              (self.end, lambda b: ref.offset <= b.offset)):
            if bound is not None and not cmp_ok(TimeRef.parse(self.timeline, bound)):
                raise TimeOutsideTurn(
                    f"{what} {lexical} outside turn "
                    f"[{self.start}, {self.end}] of {self.speaker}", lexical)

    def anchor_next_boundary(self, lexical: str, what: str) -> None:
        self.check_inside(lexical, what)
        self.pending_time = lexical

    def _begin_boundary(self) -> str:
        """The boundary a new word starts from, applying any pending anchor."""
        if self.pending_time is not None:
            if self.node in self.times:
                if self.times[self.node].spelled != self.pending_time:
                    fresh = self.ids.fresh()
                    self.times[fresh] = TimeRef.parse(self.timeline, self.pending_time)
                    self.node = fresh  # detached boundary; times disagree
            else:
                self.times[self.node] = TimeRef.parse(self.timeline, self.pending_time)
            self.pending_time = None
        return self.node

    def instant(self, type_name: str, token: str) -> None:
        base = self._begin_boundary()
        anchor = self.instant_at.get(base)
        if anchor is None:
            anchor = self.ids.fresh()
            if base in self.times:
                self.times[anchor] = self.times[base]
            self.instant_at[base] = anchor
        self.arcs.append(Arc(base, Label.of(type_name, token), anchor))

    def word(self, token: str, word_type: str, lexical_type: str) -> None:
        source = self._begin_boundary()
        target = self.ids.fresh()
        self.arcs.append(Arc(source, Label.of(word_type, token), target))
        if self.pending_expansion is not None:
            self.arcs.append(Arc(source, Label.of(lexical_type,
                                                  self.pending_expansion), target))
            self.pending_expansion = None
        self.node = target

    def close(self, speaker_type: str) -> None:
        if self.enamex_open:
            raise UnbalancedTag(f"unclosed b_enamex in turn of {self.speaker}",
                                self.enamex_open[0][0])
        if self.overlap_end is not None:
            self.anchor_next_boundary(self.overlap_end, "e_overlap")
            self.overlap_end = None
        if self.pending_time is not None:
            self._begin_boundary()
        if self.node == self.first:  # no words: the span still needs two nodes
            self.node = self.ids.fresh()
        if self.end is not None and self.node not in self.times:
            self.times[self.node] = TimeRef.parse(self.timeline, self.end)
        self.arcs.append(Arc(self.first, Label.of(speaker_type, self.speaker),
                             self.node))


def read_utf(sgml_text: str, opts: ReaderOptions = DEFAULT_OPTIONS) -> AnnotationGraph:
    timeline = opts.timeline or DEFAULT_TIMELINE
    speaker_type = opts.type_name("speaker", "speaker")
    word_type = opts.type_name("word", "W")
    lexical_type = opts.type_name("lexical", "L")
    entity_type = opts.type_name("enamex", "EN")
    punct_type = opts.type_name("punct", "punct")
    noise_type = opts.type_name("noise", "noise")
    policy = opts.punctuation

    ids = NodeIds()
    arcs: list[Arc] = []
    times: dict[str, TimeRef] = {}
    turn: Optional[_Turn] = None
    word_buffer: list[str] = []  # pieces joined by <hyphen>
    joining = False

    def flush_word() -> None:
        nonlocal joining
        if not word_buffer:
            return
        token = "".join(word_buffer)
        word_buffer.clear()
        joining = False
        if turn is None:
            return
        if token.startswith("{"):
            turn.instant(noise_type, token)
        elif is_punct_token(token):
            if policy == "instant":
                turn.instant(punct_type, token)
            elif policy == "separate":
                turn.word(token, punct_type, lexical_type)
            else:  # attach: fold into the chain as its own arc is avoided
                turn.word(token, punct_type, lexical_type)
        else:
            turn.word(token, word_type, lexical_type)

    def emit_text(data: str) -> None:
        pieces = data.split()
        if not pieces:
            if data and not data.strip():
                flush_word()
            return
        leading_space = data[:1].isspace()
        for i, piece in enumerate(pieces):
            if i > 0 or leading_space or not joining:
                flush_word()
            word_buffer.append(piece)
        if data[-1:].isspace():
            flush_word()

    for event in scan_sgml(sgml_text):
        kind = event[0]
        if kind == "text":
            emit_text(event[1])
            continue
        _, name, attrs = event
        if name == "hyphen":
            word_buffer.append("-")
            joining = True  # glue the next text piece onto this token
            continue
        flush_word()
        if name == "turn" and kind == "open":
            if turn is not None:
                raise UnbalancedTag("turn opened inside a turn", "turn")
            turn = _Turn(ids, timeline.id, attrs)
        elif name == "turn" and kind == "close":
            if turn is None:
                raise UnbalancedTag("</turn> with no open turn", "turn")
            turn.close(speaker_type)
            arcs.extend(turn.arcs)
            times.update(turn.times)
            turn = None
        elif turn is None:
            raise UnbalancedTag(f"<{name}> outside any turn", name)
        elif name == "time":
            turn.anchor_next_boundary(attrs.get("sec", ""), "time")
        elif name == "b_overlap":
            start = attrs.get("startTime")
            if start is not None:
                turn.anchor_next_boundary(start, "b_overlap")
            turn.overlap_end = attrs.get("endTime")
        elif name == "e_overlap":
            if turn.overlap_end is not None:
                turn.anchor_next_boundary(turn.overlap_end, "e_overlap")
                turn.overlap_end = None
        elif name == "b_enamex":
            turn.enamex_open.append((attrs.get("type", ""), turn.node))
        elif name == "e_enamex":
            if not turn.enamex_open:
                raise UnbalancedTag("e_enamex with no matching b_enamex", "e_enamex")
            etype, source = turn.enamex_open.pop()
            turn.arcs.append(Arc(source, Label.of(entity_type, etype), turn.node))
        elif name == "contraction":
            turn.pending_expansion = expand_contraction(attrs.get("e_form", ""))
        # unknown tags are ignored; the format is open-ended

    if turn is not None:
        raise UnbalancedTag("unclosed <turn>", "turn")
    if word_buffer:
        flush_word()
    return build(arcs, times)
