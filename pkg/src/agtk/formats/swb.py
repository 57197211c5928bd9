"""Reader merging four views of one conversation fragment.

The word file carries "SPK start duration token" lines (a "*" in the time
columns marks an untimed token, which chains after the previous word).
Optional companion texts add part-of-speech tokens, a disfluency
bracketing, and constituent trees.  The streams disagree about
punctuation on purpose: the word and disfluency views glue it onto the
preceding word, the part-of-speech and tree views separate it.  Both
conventions are kept: glued punctuation stays inside the W/ token, while
separated punctuation and tree-only symbols ([, +, ], *, *T*-1, E_S)
become zero-claim arcs at the boundary they follow.

Streams that split tokens (clitics: "one's" against "one" + "'s") share
the split: the first stream to cut a word introduces the untimed interior
boundary and later streams with the same cut reuse it.  Each boundary
node owns at most one auxiliary instant node, shared by every zero-claim
arc that lands there.

Words whose times abut share a boundary node; a timing gap keeps the
nodes apart (constituent and disfluency spans are what bridge the gap,
when they cover it).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from ..errors import AlignmentFailure, MalformedLine
from ..hierarchy import Leaf, SyntaxTree, parse_trees
from ..model import AnnotationGraph, Arc, Label, build
from ..times import TimeRef, Timeline
from .common import DEFAULT_OPTIONS, NodeIds, ReaderOptions, is_punct_token

DEFAULT_TIMELINE = Timeline("swb", unit="seconds")


class _Word:
    __slots__ = ("speaker", "token", "start", "end", "raw_start", "source",
                 "target", "splits")

    def __init__(self, speaker, token, start, end, raw_start):
        self.speaker = speaker
        self.token = token
        self.start = start  # Fraction or None
        self.end = end
        self.raw_start = raw_start
        self.source = None
        self.target = None
        self.splits = {}  # piece-text tuple -> interior node list


class _Builder:
    def __init__(self, timeline: Timeline):
        self.timeline = timeline
        self.ids = NodeIds()
        self.arcs: list[Arc] = []
        self.times: dict[str, TimeRef] = {}
        self.instant_at: dict[str, str] = {}

    def timed(self, offset: Fraction, lexical: Optional[str] = None) -> str:
        node = self.ids.fresh()
        self.times[node] = TimeRef(self.timeline.id, offset, lexical)
        return node

    def instant_anchor(self, base: str) -> str:
        aux = self.instant_at.get(base)
        if aux is None:
            aux = self.ids.fresh()
            if base in self.times:
                self.times[aux] = self.times[base]
            self.instant_at[base] = aux
        return aux

    def interior_nodes(self, word: _Word, pieces: tuple[str, ...]) -> list[str]:
        nodes = word.splits.get(pieces)
        if nodes is None:
            nodes = [self.ids.fresh() for _ in range(len(pieces) - 1)]
            word.splits[pieces] = nodes
        return nodes


def _parse_words(word_text: str, builder: _Builder) -> list[_Word]:
    words: list[_Word] = []
    for lineno, line in enumerate(word_text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split(None, 3)
        if len(parts) != 4:
            raise MalformedLine(f"word line {lineno}: expected "
                                f"'SPK start dur token'", lineno)
        speaker, raw_start, raw_dur, token = parts
        if raw_start == "*" or raw_dur == "*":
            words.append(_Word(speaker, token, None, None, None))
            continue
        try:
            start = Fraction(raw_start)
            end = start + Fraction(raw_dur)
        except (ValueError, ZeroDivisionError):
            raise MalformedLine(f"word line {lineno}: bad time in {line!r}",
                                lineno) from None
        words.append(_Word(speaker, token, start, end, raw_start))

    prev: Optional[_Word] = None
    for word in words:
        if word.start is None:  # untimed: hangs after the previous word
            word.source = prev.target if prev is not None else builder.ids.fresh()
            word.target = builder.ids.fresh()
        else:
            share = (prev is not None and prev.end is not None
                     and prev.speaker == word.speaker and prev.end == word.start)
            word.source = prev.target if share else builder.timed(word.start,
                                                                  word.raw_start)
            word.target = builder.timed(word.end)
        builder.arcs.append(Arc(word.source, Label.of("W", word.token), word.target))
        prev = word
    return words


class _StreamCursor:
    """Walks a token stream over the word chain, peeling subtokens."""

    def __init__(self, builder: _Builder, words: Sequence[_Word], stream: str):
        self.builder = builder
        self.words = words
        self.stream = stream
        self.wi = 0
        self.acc = ""
        self.pending: list = []  # (text, payload) pieces of the current word

    def _skip_noise(self) -> None:
        while (self.wi < len(self.words) and not self.acc
               and self.words[self.wi].token.startswith("[")):
            self.wi += 1

    def boundary(self) -> str:
        """The node a floating token hangs from right now."""
        if self.acc:  # mid-word: defer to the piece layout via a marker
            return ""
        self._skip_noise()
        if self.wi == 0:
            return self.words[0].source if self.words else self.builder.ids.fresh()
        return self.words[self.wi - 1].target

    def feed(self, text: str, payload) -> Optional[list]:
        """Consume one stream token; returns the completed word's layout."""
        self._skip_noise()
        if self.wi >= len(self.words):
            raise AlignmentFailure(
                f"{self.stream} token {text!r} after the last word", self.wi)
        token = self.words[self.wi].token
        if not token.startswith(self.acc + text):
            raise AlignmentFailure(
                f"{self.stream} token {text!r} does not continue "
                f"word {token!r} at {self.wi}", self.wi)
        self.acc += text
        self.pending.append((text, payload))
        if self.acc != token:
            return None
        layout = self._layout()
        self.acc = ""
        self.pending = []
        self.wi += 1
        return layout

    def floating(self, payload) -> tuple[str, str]:
        """(source, target) node pair for a non-consuming token."""
        if self.acc:
            self.pending.append((None, payload))
            return ("", "")
        base = self.boundary()
        return (base, self.builder.instant_anchor(base))

    def _layout(self) -> list:
        """[(text, payload, source, target)] for the completed word."""
        word = self.words[self.wi]
        pieces = tuple(t for t, _ in self.pending
                       if t is not None and not is_punct_token(t))
        interiors = self.builder.interior_nodes(word, pieces) if len(pieces) > 1 else []
        bounds = [word.source] + interiors + [word.target]
        out = []
        seg = 0
        node = word.source
        for text, payload in self.pending:
            if text is not None and not is_punct_token(text):
                out.append((text, payload, bounds[seg], bounds[seg + 1]))
                seg += 1
                node = bounds[seg]
            else:
                aux = self.builder.instant_anchor(node)
                out.append((text, payload, node, aux))
        return out

    def finish(self) -> None:
        if self.acc:
            raise AlignmentFailure(
                f"{self.stream} stream ends inside word "
                f"{self.words[self.wi].token!r}", self.wi)


def _read_pos(pos_text: str, builder: _Builder, words: Sequence[_Word],
              pos_type: str) -> None:
    cursor = _StreamCursor(builder, words, "pos")
    for raw in pos_text.split():
        if raw in ("[", "]") or raw.startswith("===") or raw.startswith("{"):
            continue  # chunk brackets and block decorations carry no content
        text, _, tag = raw.rpartition("/")
        if not _:
            text, tag = raw, ""
        layout = cursor.feed(text, tag)
        for item in layout or ():
            piece_text, piece_tag, source, target = item
            builder.arcs.append(Arc(source, Label.of(pos_type, piece_text, piece_tag),
                                    target))
    cursor.finish()


def _read_disfl(disfl_text: str, builder: _Builder, words: Sequence[_Word],
                disfl_type: str) -> None:
    pos = 0
    stack: list = []  # (kind, word index at open)
    spans: list = []
    tokens = disfl_text.split()
    for token in tokens:
        if token == "[":
            stack.append(("repair", pos))
        elif token == "]":
            if not stack:
                raise AlignmentFailure("']' with nothing open", pos)
            kind, start = stack.pop()
            spans.append((kind, start, pos))
        elif token == "}":
            if not stack:
                raise AlignmentFailure("'}' with nothing open", pos)
            kind, start = stack.pop()
            spans.append((kind, start, pos))
        elif token.startswith("{"):
            stack.append((token[1:] or "fill", pos))
        elif token in ("+", "/"):
            continue  # interruption point, slash-unit terminator
        else:
            while (pos < len(words)
                   and words[pos].token.startswith("[") and not token.startswith("<")):
                pos += 1
            if pos >= len(words):
                raise AlignmentFailure(f"disfl token {token!r} after last word", pos)
            want = words[pos].token
            if token != want and not (want.startswith("[") and token.startswith("<")):
                raise AlignmentFailure(
                    f"disfl token {token!r} vs word {want!r} at {pos}", pos)
            pos += 1
    if stack:
        raise AlignmentFailure("unclosed disfluency bracket", stack[-1][1])
    for kind, start, end in spans:
        if end <= start:
            continue
        builder.arcs.append(Arc(words[start].source, Label.of(disfl_type, kind),
                                words[end - 1].target))


_FLOATING_SUFFIXES = ("E_S", "N_S")


def _is_floating_leaf(token: str, cursor: _StreamCursor) -> bool:
    if token.startswith("*") or token == "0" or token in _FLOATING_SUFFIXES:
        return True
    if not is_punct_token(token):
        return False
    # punctuation that continues the current word is a piece, not a float
    if cursor.wi < len(cursor.words):
        word = cursor.words[cursor.wi].token
        if word.startswith(cursor.acc + token) and cursor.acc:
            return False
    return True


def _read_trees(tree_text: str, builder: _Builder, words: Sequence[_Word],
                tree_type: str) -> None:
    cursor = _StreamCursor(builder, words, "tree")

    def lay_leaf(leaf: Leaf) -> tuple[str, str]:
        token = leaf.token
        if _is_floating_leaf(token, cursor):
            source, target = cursor.floating(("float", token))
            if source:  # boundary float: emit now
                builder.arcs.append(Arc(source, Label.of(tree_type, token), target))
                return (source, target)
            return ("", "")  # mid-word: resolved at word completion
        layout = cursor.feed(token, ("piece", token))
        if layout is None:
            return ("", "")
        return _flush_layout(layout)

    deferred: list = []  # tree nodes awaiting leaf node resolution
    leaf_nodes: dict[int, tuple[str, str]] = {}
    counter = [0]

    def _flush_layout(layout) -> tuple[str, str]:
        last_pair = ("", "")
        for text, payload, source, target in layout:
            kind, token = payload
            if kind == "float" or (text is not None and is_punct_token(text)):
                builder.arcs.append(Arc(source, Label.of(tree_type, token), target))
            index = payload_index.pop(id(payload), None)
            if index is not None:
                leaf_nodes[index] = (source, target)
            last_pair = (source, target)
        return last_pair

    payload_index: dict[int, int] = {}

    def walk(node: SyntaxTree) -> tuple[int, int]:
        first = last = -1
        for child in node.children:
            if isinstance(child, Leaf):
                index = counter[0]
                counter[0] += 1
                payload = (("float" if _is_floating_leaf(child.token, cursor)
                            else "piece"), child.token)
                payload_index[id(payload)] = index
                if payload[0] == "float":
                    source, target = cursor.floating(payload)
                    if source:
                        builder.arcs.append(
                            Arc(source, Label.of(tree_type, child.token), target))
                        leaf_nodes[index] = (source, target)
                        payload_index.pop(id(payload), None)
                else:
                    layout = cursor.feed(child.token, payload)
                    if layout is not None:
                        _flush_layout(layout)
                lo = hi = index
            else:
                lo, hi = walk(child)
            if lo >= 0:
                first = lo if first < 0 else first
                last = hi
        if node.label and first >= 0:
            deferred.append((node.label, first, last))
        return first, last

    for tree in parse_trees(tree_text):
        walk(tree)
    cursor.finish()

    for label, first, last in deferred:
        if first not in leaf_nodes or last not in leaf_nodes:
            raise AlignmentFailure(f"tree node {label!r} covers no material", label)
        builder.arcs.append(Arc(leaf_nodes[first][0], Label.of(tree_type, label),
                                leaf_nodes[last][1]))


def read_swb(word_text: str, pos_text: Optional[str] = None,
             disfl_text: Optional[str] = None, tree_text: Optional[str] = None,
             opts: ReaderOptions = DEFAULT_OPTIONS) -> AnnotationGraph:
    timeline = opts.timeline or DEFAULT_TIMELINE
    builder = _Builder(timeline)
    words = _parse_words(word_text, builder)
    if pos_text:
        _read_pos(pos_text, builder, words, opts.type_name("pos", "Pos"))
    if disfl_text:
        _read_disfl(disfl_text, builder, words, opts.type_name("disfl", "DISF"))
    if tree_text:
        _read_trees(tree_text, builder, words, opts.type_name("tree", "T"))
    return build(builder.arcs, builder.times)
