"""Shared plumbing for the legacy-format readers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Union

from ..errors import MalformedLine
from ..times import Timeline

# How a reader treats punctuation tokens:
#   attach   - glue them onto the preceding word token
#   instant  - hang them off the preceding boundary with zero time claim
#   separate - give them their own slot in the word chain
PUNCTUATION_POLICIES = ("attach", "instant", "separate")


@dataclass(frozen=True)
class ReaderOptions:
    timeline: Optional[Timeline] = None  # None: the reader's own default
    merge_gap: Fraction = Fraction(1)  # seconds, same-speaker stretch merging
    punctuation: str = "instant"
    type_names: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.merge_gap < 0:
            raise ValueError("merge_gap must be nonnegative")
        policy = self.punctuation
        if policy == "separate-arc":  # tolerated spelling
            object.__setattr__(self, "punctuation", "separate")
        elif policy not in PUNCTUATION_POLICIES:
            raise ValueError(f"unknown punctuation policy {policy!r}")

    def type_name(self, tier: str, default: str) -> str:
        return self.type_names.get(tier, default)


DEFAULT_OPTIONS = ReaderOptions()


def is_punct_token(token: str) -> bool:
    """A token with no alphanumeric character claims no stretch of time."""
    return bool(token) and not any(ch.isalnum() for ch in token)


class NodeIds:
    """Deterministic node-id source: "0", "1", ... in construction order."""

    def __init__(self):
        self._next = 0

    def fresh(self) -> str:
        node = str(self._next)
        self._next += 1
        return node


def physical_lines(text: str) -> Iterator[tuple[int, str]]:
    """(1-based line number, line) pairs, newline stripped."""
    for i, line in enumerate(text.splitlines(), start=1):
        yield i, line


def logical_lines(text: str) -> Iterator[tuple[int, str]]:
    """Join indented continuation lines onto the line they continue.

    Yields (line number of the opening line, joined text).  Leading
    whitespace of a continuation collapses to a single space.
    """
    number = None
    parts: list[str] = []
    for i, line in enumerate(text.splitlines(), start=1):
        if line[:1] in (" ", "\t") and parts:
            parts.append(line.strip())
            continue
        if parts:
            yield number, " ".join(parts)
        number, parts = i, [line.rstrip()]
    if parts:
        yield number, " ".join(parts)


# A permissive SGML-ish scanner: no DTD, no entity expansion, just tags and
# text.  Close tags come out as ("close", name, {}); singleton "<x/>" as a
# plain open event.  Quoted attribute values may contain ">".

Event = tuple  # ("text", data) | ("open", name, attrs) | ("close", name, attrs)


def scan_sgml(text: str) -> Iterator[Event]:
    pos = 0
    n = len(text)
    while pos < n:
        lt = text.find("<", pos)
        if lt < 0:
            yield ("text", text[pos:])
            return
        if lt > pos:
            yield ("text", text[pos:lt])
        end = _tag_end(text, lt)
        if end < 0:  # a stray "<": treat as text
            yield ("text", text[lt])
            pos = lt + 1
            continue
        raw = text[lt + 1:end]
        pos = end + 1
        closing = raw.startswith("/")
        if closing:
            raw = raw[1:]
        if raw.endswith("/"):
            raw = raw[:-1]
        name, attrs = _parse_tag(raw)
        if not name:
            continue
        yield ("close" if closing else "open", name, attrs)


def _tag_end(text: str, start: int) -> int:
    """Index of the ">" closing the tag opened at ``start``, minding quotes."""
    quote = None
    for i in range(start + 1, len(text)):
        ch = text[i]
        if quote:
            if ch == quote:
                quote = None
        elif ch in ("'", '"'):
            quote = ch
        elif ch == ">":
            return i
        elif ch == "<":
            return -1
    return -1


def _parse_tag(raw: str) -> tuple[str, dict[str, str]]:
    i, n = 0, len(raw)
    while i < n and not raw[i].isspace():
        i += 1
    name = raw[:i]
    attrs: dict[str, str] = {}
    while i < n:
        while i < n and raw[i].isspace():
            i += 1
        if i >= n:
            break
        j = i
        while j < n and raw[j] not in "=" and not raw[j].isspace():
            j += 1
        key = raw[i:j]
        while j < n and raw[j].isspace():
            j += 1
        if j < n and raw[j] == "=":
            j += 1
            while j < n and raw[j].isspace():
                j += 1
            if j < n and raw[j] in ("'", '"'):
                quote = raw[j]
                k = raw.find(quote, j + 1)
                k = n if k < 0 else k
                attrs[key] = raw[j + 1:k]
                i = k + 1
            else:
                k = j
                while k < n and not raw[k].isspace():
                    k += 1
                attrs[key] = raw[j:k]
                i = k
        else:
            if key:
                attrs[key] = ""
            i = j
    return name, attrs


def parse_number(token: str, lineno: int, what: str = "number") -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise MalformedLine(f"line {lineno}: bad {what} {token!r}", lineno) from None


def read_text(source: Union[str, bytes]) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    return source
