"""Trees, parse charts, and discontinuous structure over word arcs.

Hierarchy is not a separate data structure here: a constituent is just an
arc spanning the boundary nodes of the words it covers, so that proper span
containment reads as dominance.  ``tree_to_chart`` lays a bracketed tree
over a word-arc chain; ``chart_to_trees`` recovers the forest, complaining
about crossing spans and refusing to invent an order for same-span arcs
unless a rank list settles it.

Structures whose parts are scattered through the word string get two
encodings: dependency fields on the word arcs themselves (two extra label
fields holding equivalence-class ids: the arc's own dependent-set id and the
set it belongs to), and constituents over the smallest contiguous stretch
covering their fringe.  On contiguous input the second collapses to the
plain chart.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import (
    AmbiguousNesting,
    CrossingBrackets,
    FringeMismatch,
    MalformedTree,
    MultipleHeads,
    UnknownToken,
)
from .model import AnnotationGraph, Arc, Label, NodeId, build, natural_key
from .relations import RelationContext, s_precedes
from .times import TimeRef


@dataclass(frozen=True)
class Leaf:
    token: str
    position: Optional[int] = None  # explicit fringe position; None = reading order


@dataclass(frozen=True)
class SyntaxTree:
    label: str  # "" for a bare wrapper that labels nothing
    children: tuple = ()

    def leaves(self) -> list[Leaf]:
        out: list[Leaf] = []
        for c in self.children:
            if isinstance(c, Leaf):
                out.append(c)
            else:
                out.extend(c.leaves())
        return out

    def __str__(self):
        parts = [str(c) if isinstance(c, SyntaxTree) else c.token for c in self.children]
        head = self.label + " " if self.label else ""
        return "(" + head + " ".join(parts) + ")"


_TREE_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_trees(text: str) -> list[SyntaxTree]:
    """Parse a stream of bracketed trees (Penn style)."""
    tokens = _TREE_TOKEN.findall(text)
    pos = 0
    trees: list[SyntaxTree] = []

    def parse_node() -> Union[SyntaxTree, Leaf]:
        nonlocal pos
        tok = tokens[pos]
        if tok == ")":
            raise MalformedTree("unexpected ')'", pos)
        if tok != "(":
            pos += 1
            return Leaf(tok)
        pos += 1
        if pos >= len(tokens):
            raise MalformedTree("unclosed '('", pos)
        label = ""
        if tokens[pos] not in ("(", ")"):
            # a lone token inside parens is a leaf-like child, not a label,
            # when it is immediately closed: "(dog)" keeps no label
            if pos + 1 < len(tokens) and tokens[pos + 1] == ")":
                label = tokens[pos]
                pos += 1
            else:
                label = tokens[pos]
                pos += 1
        children = []
        while pos < len(tokens) and tokens[pos] != ")":
            children.append(parse_node())
        if pos >= len(tokens):
            raise MalformedTree("unclosed '('", pos)
        pos += 1  # drop ")"
        return SyntaxTree(label, tuple(children))

    while pos < len(tokens):
        node = parse_node()
        if isinstance(node, Leaf):
            raise MalformedTree(f"top-level token {node.token!r} outside a tree", pos)
        trees.append(node)
    return trees


def parse_tree(text: str) -> SyntaxTree:
    trees = parse_trees(text)
    if len(trees) != 1:
        raise MalformedTree(f"expected one tree, found {len(trees)}", len(trees))
    return trees[0]


def _number_leaves(tree: SyntaxTree) -> list[tuple[Leaf, int]]:
    """Pair each leaf with its fringe position (explicit or reading order)."""
    leaves = tree.leaves()
    out = []
    for i, leaf in enumerate(leaves):
        out.append((leaf, leaf.position if leaf.position is not None else i))
    return out


def _constituents(tree: SyntaxTree):
    """Yield (tree, positions) for every labelled internal node, outermost first."""
    def walk(node: SyntaxTree, counter: list):
        positions = []
        nodes = []
        for c in node.children:
            if isinstance(c, Leaf):
                pos = c.position if c.position is not None else counter[0]
                counter[0] += 1
                positions.append(pos)
            else:
                sub_nodes, sub_positions = walk(c, counter)
                nodes.extend(sub_nodes)
                positions.extend(sub_positions)
        if node.label:
            nodes.insert(0, (node, positions))
        return nodes, positions

    nodes, _ = walk(tree, [0])
    return nodes


def tree_to_chart(tree: SyntaxTree, word_arcs: Sequence[Arc], *,
                  constituent_type: str = "T",
                  times: Optional[Mapping[NodeId, TimeRef]] = None) -> AnnotationGraph:
    """Lay a tree over a word-arc chain; constituents become spanning arcs.

    The fringe must match the word arcs one to one, token for token
    (a word arc's content is its second label field).
    """
    numbered = _number_leaves(tree)
    if len(numbered) != len(word_arcs):
        raise FringeMismatch(
            f"tree fringe has {len(numbered)} tokens, chain has {len(word_arcs)} arcs",
            {"fringe": len(numbered), "words": len(word_arcs)})
    for leaf, pos in numbered:
        if not 0 <= pos < len(word_arcs):
            raise UnknownToken(f"fringe position {pos} outside the word chain", pos)
        want = word_arcs[pos].label.content
        if want != leaf.token:
            raise FringeMismatch(
                f"fringe token {leaf.token!r} does not match word {want!r} at {pos}",
                {"position": pos, "fringe": leaf.token, "word": want})

    arcs = set(word_arcs)
    for node, positions in _constituents(tree):
        lo, hi = min(positions), max(positions)
        arcs.add(Arc(word_arcs[lo].source,
                     Label.of(constituent_type, node.label),
                     word_arcs[hi].target))
    return build(arcs, times or {})


def encode_discontinuous(tree: SyntaxTree, word_arcs: Sequence[Arc], *,
                         constituent_type: str = "T",
                         times: Optional[Mapping[NodeId, TimeRef]] = None) -> AnnotationGraph:
    """Chart encoding for scrambled fringes: each constituent spans the
    smallest contiguous word stretch covering its leaves.

    Leaves carry explicit positions into ``word_arcs``; when the fringe is
    contiguous and in order this is exactly ``tree_to_chart``.
    """
    numbered = _number_leaves(tree)
    seen_positions = set()
    for leaf, pos in numbered:
        if not 0 <= pos < len(word_arcs):
            raise UnknownToken(f"leaf {leaf.token!r} points at position {pos}, "
                               f"but the chain has {len(word_arcs)} words", pos)
        if pos in seen_positions:
            raise UnknownToken(f"two leaves claim position {pos}", pos)
        seen_positions.add(pos)
        want = word_arcs[pos].label.content
        if want != leaf.token:
            raise FringeMismatch(
                f"leaf {leaf.token!r} does not match word {want!r} at {pos}",
                {"position": pos, "fringe": leaf.token, "word": want})

    arcs = set(word_arcs)
    for node, positions in _constituents(tree):
        lo, hi = min(positions), max(positions)
        arcs.add(Arc(word_arcs[lo].source,
                     Label.of(constituent_type, node.label),
                     word_arcs[hi].target))
    return build(arcs, times or {})


DependencyPairs = Union[Mapping[int, int], Iterable[tuple]]


def encode_dependencies(word_arcs: Sequence[Arc], heads: DependencyPairs, *,
                        times: Optional[Mapping[NodeId, TimeRef]] = None) -> AnnotationGraph:
    """Rewrite word arcs with two extra fields of equivalence-class ids.

    Field 3 names the arc's own set of dependents (empty string when it has
    none), field 4 names the set the arc belongs to, i.e. its head's
    dependent set; a root arc has no field 4.  Class ids are the head's word
    position, printed in decimal, so the numbers directly encode the
    dependency relation.
    """
    pairs = list(heads.items()) if isinstance(heads, Mapping) else list(heads)
    head_of: dict[int, int] = {}
    for dep, head in pairs:
        for idx in (dep, head):
            if not 0 <= idx < len(word_arcs):
                raise UnknownToken(f"dependency references word {idx}, "
                                   f"but the chain has {len(word_arcs)} words", idx)
        if dep in head_of and head_of[dep] != head:
            raise MultipleHeads(f"word {dep} has heads {head_of[dep]} and {head}", dep)
        if dep == head:
            raise MultipleHeads(f"word {dep} cannot head itself", dep)
        head_of[dep] = head

    dependents: dict[int, list] = {}
    for dep, head in head_of.items():
        dependents.setdefault(head, []).append(dep)

    arcs = []
    for i, a in enumerate(word_arcs):
        fields = list(a.label.fields[:2])
        if len(fields) < 2:
            fields += [""] * (2 - len(fields))
        own_set = str(i) if i in dependents else ""
        if i in head_of:
            arcs.append(Arc(a.source, Label.of(*fields, own_set, str(head_of[i])), a.target))
        elif own_set:
            arcs.append(Arc(a.source, Label.of(*fields, own_set), a.target))
        else:
            arcs.append(Arc(a.source, Label.of(*fields), a.target))
    return build(arcs, times or {})


def chain_word_arcs(graph: AnnotationGraph, word_type: str = "W") -> list[Arc]:
    """The graph's word arcs in chain order (structural precedence)."""
    words = [a for a in graph.arcs if a.label.type == word_type]
    if not words:
        return []
    ctx = RelationContext(graph)

    def before(a: Arc, b: Arc) -> bool:
        return a.target == b.source or s_precedes(ctx, a.target, b.source)

    ordered: list[Arc] = []
    remaining = sorted(words, key=lambda a: (natural_key(a.source), natural_key(a.target)))
    while remaining:
        head = None
        for cand in remaining:
            if all(cand is other or not before(other, cand) for other in remaining):
                head = cand
                break
        if head is None:  # not a chain; fall back to the stable order
            ordered.extend(remaining)
            break
        ordered.append(head)
        remaining.remove(head)
    return ordered


def chart_to_trees(graph: AnnotationGraph, *, constituent_type: str = "T",
                   word_type: str = "W",
                   rank: Optional[Sequence[str]] = None) -> list[SyntaxTree]:
    """Recover the constituent forest from a chart graph.

    ``rank`` orders same-span constituent labels outermost-first; a same-span
    pair that the rank list does not separate is reported as ambiguous
    rather than resolved arbitrarily.
    """
    words = chain_word_arcs(graph, word_type)
    if not words:
        return []
    start_index = {a.source: i for i, a in enumerate(words)}
    end_index = {a.target: i + 1 for i, a in enumerate(words)}

    spans: list[tuple[int, int, Arc]] = []
    for a in sorted(graph.arcs, key=lambda a: (natural_key(a.source), natural_key(a.target),
                                               a.label.fields)):
        if a.label.type != constituent_type:
            continue
        lo, hi = start_index.get(a.source), end_index.get(a.target)
        if lo is None or hi is None or lo >= hi:
            raise CrossingBrackets(
                f"constituent {a} does not span whole words",
                [a.source, list(a.label.fields), a.target])
        spans.append((lo, hi, a))

    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            (a_lo, a_hi, a), (b_lo, b_hi, b) = spans[i], spans[j]
            if a_lo < b_lo < a_hi < b_hi or b_lo < a_lo < b_hi < a_hi:
                raise CrossingBrackets(
                    f"spans of {a} and {b} cross",
                    [[a_lo, a_hi, list(a.label.fields)], [b_lo, b_hi, list(b.label.fields)]])

    rank_of = {label: i for i, label in enumerate(rank)} if rank else {}

    def depth_key(item):
        lo, hi, a = item
        label = a.label.content or ""
        if label in rank_of:
            return (lo, -(hi - lo), 0, rank_of[label])
        return (lo, -(hi - lo), 1, 0)

    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            (a_lo, a_hi, a), (b_lo, b_hi, b) = spans[i], spans[j]
            if (a_lo, a_hi) == (b_lo, b_hi):
                la, lb = a.label.content or "", b.label.content or ""
                if not (la in rank_of and lb in rank_of and rank_of[la] != rank_of[lb]):
                    raise AmbiguousNesting(
                        f"same span, no rank: {a} vs {b}",
                        [list(a.label.fields), list(b.label.fields)])

    ordered = sorted(spans, key=depth_key)
    leaves = [Leaf(a.label.content or "", i) for i, a in enumerate(words)]

    def assemble(lo: int, hi: int, items: list) -> list:
        """Children covering [lo, hi) from the given outermost-first spans."""
        out = []
        cursor = lo
        while cursor < hi:
            head = next((s for s in items if s[0] == cursor), None)
            if head is None:
                out.append(leaves[cursor])
                cursor += 1
                continue
            h_lo, h_hi, h_arc = head
            inside = [s for s in items if s is not head and h_lo <= s[0] and s[1] <= h_hi]
            node = SyntaxTree(h_arc.label.content or "",
                              tuple(assemble(h_lo, h_hi, inside)))
            out.append(node)
            cursor = h_hi
        return out

    forest = assemble(0, len(words), ordered)
    return [t for t in forest if isinstance(t, SyntaxTree)]
