"""Reader for phrase-anchored XML field transcriptions.

Input is conforming XML.  Each S element carries an AUDIO child with
start/end offsets in seconds; its TRANSCR holds W elements (FORM plus
optional GLS) and PONCT marks, and TRADUC children give one phrasal
translation per language.  Only the phrase endpoints are timed; words
chain between them through untimed boundaries, each gloss rides on the
same pair of nodes as its word, and each translation spans the phrase.
"""

from __future__ import annotations

from typing import Optional
from xml.etree import ElementTree

from ..errors import MalformedLine, MissingAudioAnchor
from ..model import AnnotationGraph, Arc, Label, build
from ..times import TimeRef, Timeline
from .common import DEFAULT_OPTIONS, NodeIds, ReaderOptions

DEFAULT_LANGUAGE_TYPES = {"Francais": "F", "Anglais": "E"}


def _language_type(lang: str, opts: ReaderOptions) -> str:
    if lang in opts.type_names:
        return opts.type_names[lang]
    if lang in DEFAULT_LANGUAGE_TYPES:
        return DEFAULT_LANGUAGE_TYPES[lang]
    return lang[:1].upper() or "X"


def read_lacito(xml_text: str, opts: ReaderOptions = DEFAULT_OPTIONS) -> AnnotationGraph:
    try:
        root = ElementTree.fromstring(xml_text)
    except ElementTree.ParseError as exc:
        raise MalformedLine(f"not well-formed XML: {exc}", str(exc)) from None

    soundfile = root.find(".//SOUNDFILE")
    href = soundfile.get("href") if soundfile is not None else None
    timeline = opts.timeline or Timeline(href or "lacito", unit="seconds",
                                         signals=(href,) if href else ())
    word_type = opts.type_name("word", "W")
    gloss_type = opts.type_name("gloss", "G")
    punct_type = opts.type_name("punct", "punct")
    policy = opts.punctuation

    ids = NodeIds()
    arcs: list[Arc] = []
    times: dict[str, TimeRef] = {}

    for sentence in root.iter("S"):
        sid = sentence.get("id", "?")
        audio = sentence.find("AUDIO")
        if audio is None or audio.get("start") is None or audio.get("end") is None:
            raise MissingAudioAnchor(f"sentence {sid!r} has no AUDIO anchors", sid)
        first = ids.fresh()
        times[first] = TimeRef.parse(timeline.id, audio.get("start"))

        items: list[tuple[str, str, Optional[str]]] = []
        transcr = sentence.find("TRANSCR")
        for elem in transcr if transcr is not None else ():
            if elem.tag == "W":
                form = elem.findtext("FORM", "").strip()
                gloss = elem.findtext("GLS")
                items.append(("word", form, gloss.strip() if gloss else None))
            elif elem.tag == "PONCT":
                items.append(("punct", (elem.text or "").strip(), None))

        if policy == "attach":
            merged: list[tuple[str, str, Optional[str]]] = []
            for kind, form, gloss in items:
                if kind == "punct" and merged and merged[-1][0] == "word":
                    prev_kind, prev_form, prev_gloss = merged[-1]
                    merged[-1] = (prev_kind, prev_form + form, prev_gloss)
                else:
                    merged.append((kind, form, gloss))
            items = merged

        chained = [it for it in items
                   if it[0] == "word" or policy != "instant"]
        node = first
        boundary_after = {-1: first}
        for i, (kind, form, gloss) in enumerate(chained):
            nxt = ids.fresh()
            if i == len(chained) - 1:
                times[nxt] = TimeRef.parse(timeline.id, audio.get("end"))
            arc_type = word_type if kind == "word" else punct_type
            arcs.append(Arc(node, Label.of(arc_type, form), nxt))
            if kind == "word" and gloss is not None:
                arcs.append(Arc(node, Label.of(gloss_type, gloss), nxt))
            node = nxt
            boundary_after[i] = nxt
        if not chained:
            node = ids.fresh()
            times[node] = TimeRef.parse(timeline.id, audio.get("end"))
        last = node

        if policy == "instant":
            instant_at: dict[str, str] = {}
            cursor = -1
            position = -1
            for kind, form, _ in items:
                if kind == "word":
                    position += 1
                    cursor = position
                    continue
                base = boundary_after.get(cursor, first)
                if base not in instant_at:
                    fresh = ids.fresh()
                    if base in times:
                        times[fresh] = times[base]
                    instant_at[base] = fresh
                arcs.append(Arc(base, Label.of(punct_type, form), instant_at[base]))

        for traduc in sentence.findall("TRADUC"):
            lang = traduc.get("lang", "")
            content = " ".join((traduc.text or "").split())
            arcs.append(Arc(first, Label.of(_language_type(lang, opts), content),
                            last))

    return build(arcs, times)
