"""Reader for @-header / *speaker-line transcripts.

Utterance lines look like "*ROS:\tyahoo." and may continue on indented
lines.  A dependent "%snd" tier, when present, times the utterance it
follows: '%snd: "file" start end' with offsets in milliseconds.  Headers
("@Participants: ...") describe the transcript, not its contents; they are
available through read_chat_headers and never become arcs.

Each utterance is a separate connected component: a speaker/ arc spanning
it, one W/ arc per word with untimed interior boundaries, and punctuation
handled per the configured policy.  Scoping angle brackets around word
groups are dropped; bracketed event codes like "[>]" and terminators like
"+/." are kept as single tokens, which the default policy renders as
zero-claim arcs at the preceding boundary.
"""

from __future__ import annotations

import re
from typing import Optional

from ..errors import MalformedLine, OrphanDependentTier
from ..model import AnnotationGraph, Arc, Label, build
from ..times import TimeRef, Timeline
from .common import (DEFAULT_OPTIONS, NodeIds, ReaderOptions, is_punct_token,
                     logical_lines)

DEFAULT_TIMELINE = Timeline("chat", unit="milliseconds")

_SND = re.compile(r'^"(?P<file>[^"]*)"\s+(?P<start>\d+)\s+(?P<end>\d+)\s*$')
_CODE = re.compile(r"\[[^\]]*\]")
# trailing sentence punctuation split off a word token: "yahoo." -> yahoo + .
_TRAILING = re.compile(r"^(?P<word>.*?[A-Za-z0-9])(?P<punct>[^A-Za-z0-9]+)$")


def tokenize_utterance(text: str, *, split_trailing: bool) -> list[str]:
    out: list[str] = []
    pos = 0
    pieces: list[str] = []
    for m in _CODE.finditer(text):
        pieces.extend(text[pos:m.start()].split())
        pieces.append(m.group(0))
        pos = m.end()
    pieces.extend(text[pos:].split())
    for raw in pieces:
        token = raw.replace("<", "").replace(">", "") if not raw.startswith("[") else raw
        if not token:
            continue
        m = _TRAILING.match(token) if split_trailing else None
        if m:
            out.append(m.group("word"))
            out.append(m.group("punct"))
        else:
            out.append(token)
    return out


def chain_utterance(arcs: list, times: dict, ids: NodeIds, tokens: list[str],
                    *, speaker_type: str, speaker: str, word_type: str,
                    punct_type: str, policy: str,
                    start: Optional[TimeRef], end: Optional[TimeRef]) -> None:
    """Append one utterance component to arcs/times (shared reader core)."""
    if policy == "attach":
        merged: list[str] = []
        for token in tokens:
            if is_punct_token(token) and merged and not is_punct_token(merged[-1]):
                merged[-1] += token
            else:
                merged.append(token)
        tokens = merged

    words = [t for t in tokens if not (is_punct_token(t) and policy == "instant")]

    first = ids.fresh()
    if start is not None:
        times[first] = start
    node = first
    boundary_after: dict[int, str] = {-1: first}
    for i, token in enumerate(words):
        is_last = i == len(words) - 1
        nxt = ids.fresh()
        if is_last and end is not None:
            times[nxt] = end
        kind = punct_type if is_punct_token(token) else word_type
        arcs.append(Arc(node, Label.of(kind, token), nxt))
        node = nxt
        boundary_after[i] = node
    if not words:
        node = ids.fresh()
        if end is not None:
            times[node] = end
        boundary_after[0] = node

    if policy == "instant":
        instant_at: dict[str, str] = {}
        cursor = -1
        position = -1
        for token in tokens:
            if not is_punct_token(token):
                position += 1
                cursor = position
                continue
            base = boundary_after[cursor] if cursor in boundary_after else first
            if base not in instant_at:
                fresh = ids.fresh()
                if base in times:
                    times[fresh] = times[base]
                instant_at[base] = fresh
            arcs.append(Arc(base, Label.of(punct_type, token), instant_at[base]))

    last = node
    arcs.append(Arc(first, Label.of(speaker_type, speaker), last))


def read_chat(text: str, opts: ReaderOptions = DEFAULT_OPTIONS) -> AnnotationGraph:
    timeline = opts.timeline or DEFAULT_TIMELINE
    speaker_type = opts.type_name("speaker", "speaker")
    word_type = opts.type_name("word", "W")
    punct_type = opts.type_name("punct", "punct")

    ids = NodeIds()
    arcs: list = []
    times: dict[str, TimeRef] = {}
    pending: Optional[tuple[int, str, str]] = None  # lineno, speaker, text

    def flush(snd: Optional[tuple[TimeRef, TimeRef]]) -> None:
        nonlocal pending
        if pending is None:
            return
        _, speaker, content = pending
        pending = None
        tokens = tokenize_utterance(content,
                                    split_trailing=opts.punctuation != "attach")
        start, end = snd if snd else (None, None)
        chain_utterance(arcs, times, ids, tokens,
                        speaker_type=speaker_type, speaker=speaker,
                        word_type=word_type, punct_type=punct_type,
                        policy=opts.punctuation, start=start, end=end)

    for lineno, line in logical_lines(text):
        if not line.strip() or line.startswith("@"):
            flush(None)
            continue
        if line.startswith("*"):
            flush(None)
            head, sep, content = line.partition(":")
            if not sep:
                raise MalformedLine(f"line {lineno}: utterance without ':'", lineno)
            pending = (lineno, head[1:].strip(), content.strip())
            continue
        if line.startswith("%"):
            head, _, content = line.partition(":")
            if head[1:].strip() != "snd":
                continue  # other dependent tiers are out of scope
            if pending is None:
                raise OrphanDependentTier(
                    f"line {lineno}: %snd with no utterance to time", lineno)
            m = _SND.match(content.strip())
            if not m:
                raise MalformedLine(f"line {lineno}: bad %snd payload", lineno)
            flush((TimeRef.parse(timeline.id, m.group("start")),
                   TimeRef.parse(timeline.id, m.group("end"))))
            continue
        raise MalformedLine(f"line {lineno}: unrecognized line {line!r}", lineno)
    flush(None)
    return build(arcs, times)


def read_chat_headers(text: str) -> dict:
    """Transcript metadata: ordered headers plus a participant table."""
    headers: list[tuple[str, str]] = []
    participants: dict[str, tuple[str, str]] = {}
    for _, line in logical_lines(text):
        if not line.startswith("@"):
            continue
        key, _, value = line[1:].partition(":")
        key, value = key.strip(), value.strip()
        headers.append((key, value))
        if key == "Participants":
            for entry in value.split(","):
                fields = entry.split()
                if len(fields) >= 2:
                    participants[fields[0]] = (" ".join(fields[1:-1]), fields[-1])
    return {"headers": headers, "participants": participants}
