"""Timelines and exact time references.

Offsets are exact rationals (``fractions.Fraction``); nothing in the toolkit
ever compares times through floats.  A ``TimeRef`` additionally remembers the
exact spelling it was read with, so a file converted and written back shows
``2391.606000`` and not some reformatted equivalent.  The spelling is carried
for output only: two refs are equal whenever timeline and offset agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

#: Recognised timeline units.  "ordinal" is an ordered, unitless domain
#: (text positions and the like); the others are physical.
UNITS = ("samples", "seconds", "milliseconds", "ordinal")


@dataclass(frozen=True)
class Timeline:
    """A reference domain for node times: a signal (or text) plus a unit."""

    id: str
    unit: str = "seconds"
    rate: Optional[Fraction] = None      # samples per second; required for "samples"
    signals: tuple[str, ...] = ()        # hrefs of the signal files, if known

    def __post_init__(self):
        if not self.id:
            raise ValueError("timeline id must be non-empty")
        if self.unit not in UNITS:
            raise ValueError(f"unknown timeline unit {self.unit!r} (expected one of {UNITS})")
        if self.unit == "samples" and (self.rate is None or self.rate <= 0):
            raise ValueError("sample timelines need a positive rate")


def parse_offset(text: str) -> Fraction:
    """Parse an offset literal: integer, decimal, or ``num/den`` rational."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad time offset {text!r}") from exc


def spell_offset(value: Fraction) -> str:
    """Canonical spelling for an offset with no remembered source form.

    Integers print bare, terminating decimals print as decimals, everything
    else prints as ``num/den``.
    """
    n, d = value.numerator, value.denominator
    if d == 1:
        return str(n)
    twos = fives = 0
    rest = d
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest != 1:
        return f"{n}/{d}"
    places = max(twos, fives)
    scaled = abs(n) * 10 ** places // d
    digits = str(scaled).rjust(places + 1, "0")
    sign = "-" if n < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


@dataclass(frozen=True, eq=False)
class TimeRef:
    """A point on a timeline.  Equality ignores the remembered spelling."""

    timeline: str
    offset: Fraction
    lexical: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.timeline:
            raise ValueError("time reference needs a timeline id")
        if not isinstance(self.offset, Fraction):
            object.__setattr__(self, "offset", Fraction(self.offset))

    @classmethod
    def parse(cls, timeline: str, text: str) -> "TimeRef":
        return cls(timeline, parse_offset(text), text.strip())

    @property
    def spelled(self) -> str:
        return self.lexical if self.lexical is not None else spell_offset(self.offset)

    def __eq__(self, other):
        if not isinstance(other, TimeRef):
            return NotImplemented
        return self.timeline == other.timeline and self.offset == other.offset

    def __hash__(self):
        return hash((self.timeline, self.offset))

    def __repr__(self):
        return f"TimeRef({self.timeline!r}, {self.spelled})"
