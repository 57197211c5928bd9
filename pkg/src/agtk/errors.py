"""Error taxonomy shared by every layer of the toolkit.

Each error carries a stable machine-readable ``code`` (the class name), a
human message, and a ``witness``: the smallest piece of offending data that
justifies the rejection (a path, an arc tuple, a line number, ...).  The CLI
serializes these to JSON diagnostics, and the exit code is chosen from the
error's ``phase``: problems understanding the input are "parse" failures,
problems with an understood-but-ill-formed graph are "validate" failures.
"""

from __future__ import annotations

from typing import Any


class AgError(Exception):
    """Base class for structured toolkit errors."""

    phase = "validate"  # "parse" or "validate"; see the CLI exit-code contract

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.message = message
        self.witness = witness

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_json(self) -> dict:
        out = {"error": self.code, "message": self.message}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


# ---------------------------------------------------------------- graph model

class CycleFound(AgError):
    """The arc set admits a directed cycle (self-loops included)."""


class ArcTimeReversed(AgError):
    """An arc runs from a later time to an earlier one."""


class MixedTimelines(AgError):
    """A connected component references more than one timeline."""


class PathConditionViolated(AgError):
    """A directed path connects timed nodes whose times are out of order.

    This can hold even when no single arc is reversed, because interior
    nodes of the path may be untimed.
    """


class ArcNotInGraph(AgError):
    """An operation referenced an arc that the graph does not contain."""


class NodeIdCollision(AgError):
    """Two graphs being combined share a node identifier."""


class NotASubgraph(AgError):
    """A set operation was given an operand that is not a subgraph of the
    enclosing graph (foreign arcs, or disagreeing node times)."""


# ------------------------------------------------------------------ hierarchy

class MalformedTree(AgError):
    """Bracketed tree text could not be parsed."""
    phase = "parse"


class FringeMismatch(AgError):
    """A tree's fringe does not line up with the given word arcs."""


class CrossingBrackets(AgError):
    """Two constituent spans overlap without either containing the other."""


class AmbiguousNesting(AgError):
    """Two constituents cover the same span and no rank orders them."""


class UnknownToken(AgError):
    """A fringe or dependency entry referenced a word that does not exist."""


class MultipleHeads(AgError):
    """A dependency encoding assigned more than one head to a word."""


# -------------------------------------------------------------------- formats

class ReaderError(AgError):
    phase = "parse"


class MalformedLine(ReaderError):
    """A line of a legacy file does not match the format's line shape."""


class NonMonotonicTimes(ReaderError):
    """Segment times in a sequential file moved backwards."""


class UnknownAnchor(ReaderError):
    """A tier line referenced an anchor id that was never declared."""


class OverlappingMAUWithinAnchor(ReaderError):
    """Segment stretches attributed to one word are not contiguous."""


class OrphanDependentTier(ReaderError):
    """A dependent tier line appeared with no utterance to attach to."""


class MissingAudioAnchor(ReaderError):
    """A sentence element lacks the audio element that anchors it."""


class MalformedStretch(ReaderError):
    """A transcript stretch header does not parse."""


class UnbalancedTag(ReaderError):
    """An SGML begin tag has no matching end tag (or vice versa)."""


class TimeOutsideTurn(ReaderError):
    """A time anchor inside a turn lies outside the turn's stated span."""


class AlignmentFailure(ReaderError):
    """Parallel annotation streams could not be aligned token-by-token."""


class DanglingRef(ReaderError):
    """A reference attribute points at an id that is never defined."""


# ---------------------------------------------------------------- interchange

class SchemaViolation(AgError):
    """An interchange document strays from the expected element shape."""
    phase = "parse"


class ConflictingQualification(AgError):
    """An id is already qualified with a different namespace."""


# ---------------------------------------------------------------------- query

class QuerySyntaxError(AgError):
    """Query text does not conform to the query grammar."""
    phase = "parse"


class UnknownField(AgError):
    """A query referenced a label field position no arc could have."""
    phase = "parse"


class CrossTimelineComparison(AgError):
    """A temporal comparison mixed offsets from different timelines."""
    phase = "parse"
