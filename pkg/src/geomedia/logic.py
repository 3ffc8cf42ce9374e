"""Logical forms and their denotations over a world snapshot.

A form is a tree: nodes are predicates, each edge records which
argument slot of the parent the child fills. Exactly one ``answer``
node sits at the root and binds the answer variable A. Four tree
shapes are interpretable:

    answer(A,(REL(A,B),const(B,'name')))   media standing in REL to the entity
    answer(A,(view(A),const(B,'name')))    media depicting the entity (taken nearby)
    answer(A,(view(A),day(YYYYMMDD)))      media captured on that day
    answer(A,(view(A),month_is(M)))        media from month M around the user

Denotations are ordered by ascending distance to the anchor (the
entity, or the user for temporal forms), ties by media id.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import MalformedForm, UnknownEntity
from .geometry import (
    DEFAULT_GEOMETRY,
    GeometryConfig,
    SPATIAL_RELATIONS,
    eval_spatial,
    haversine_m,
)
from .world import WorldSnapshot, stamp_to_date

ANSWER = "answer"
CONST = "const"
VIEW = "view"
DAY = "day"
MONTH_IS = "month_is"


@dataclass(frozen=True)
class Predicate:
    symbol: str
    arity: int


def core_predicates() -> dict[str, Predicate]:
    table = {sym: Predicate(sym, 2) for sym in SPATIAL_RELATIONS}
    table[ANSWER] = Predicate(ANSWER, 2)
    table[CONST] = Predicate(CONST, 2)
    table[VIEW] = Predicate(VIEW, 1)
    table[DAY] = Predicate(DAY, 1)
    table[MONTH_IS] = Predicate(MONTH_IS, 1)
    return table


def registry_for(snapshot: WorldSnapshot | None = None) -> dict[str, Predicate]:
    """Core predicates plus one unary category predicate per fact kind."""
    table = core_predicates()
    if snapshot is not None:
        for fact in snapshot.facts:
            table.setdefault(fact.kind, Predicate(fact.kind, 1))
    return table


@dataclass(frozen=True)
class Edge:
    parent_slot: int
    child_slot: int
    child: "Node"


@dataclass(frozen=True)
class Node:
    predicate: str
    value: str | int | None = None
    edges: tuple[Edge, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class LogicalForm:
    root: Node

    def __post_init__(self):
        if self.root.predicate != ANSWER:
            raise MalformedForm("root must be the answer predicate")

    def canonical(self) -> str:
        return to_canonical_text(self)


@dataclass(frozen=True)
class Denotation:
    """Ordered media ids answering a query."""

    media_ids: tuple[str, ...]

    def __len__(self):
        return len(self.media_ids)

    def as_set(self) -> frozenset[str]:
        return frozenset(self.media_ids)


# --- construction ---------------------------------------------------------


def spatial_form(relation: str, entity_name: str) -> LogicalForm:
    if relation not in SPATIAL_RELATIONS:
        raise MalformedForm(f"not a spatial relation: {relation!r}")
    const_node = Node(CONST, value=entity_name)
    rel_node = Node(relation, edges=(Edge(2, 1, const_node),))
    return LogicalForm(Node(ANSWER, edges=(Edge(1, 1, rel_node),)))


def view_entity_form(entity_name: str) -> LogicalForm:
    const_node = Node(CONST, value=entity_name)
    view_node = Node(VIEW, edges=(Edge(1, 1, const_node),))
    return LogicalForm(Node(ANSWER, edges=(Edge(1, 1, view_node),)))


def day_form(day_stamp: int) -> LogicalForm:
    try:
        stamp_to_date(int(day_stamp))
    except (ValueError, TypeError) as exc:
        raise MalformedForm(f"day stamp {day_stamp!r} is not a calendar day") from exc
    day_node = Node(DAY, value=int(day_stamp))
    view_node = Node(VIEW, edges=(Edge(1, 1, day_node),))
    return LogicalForm(Node(ANSWER, edges=(Edge(1, 1, view_node),)))


def month_form(month: int) -> LogicalForm:
    if not 1 <= int(month) <= 12:
        raise MalformedForm(f"month out of range: {month!r}")
    month_node = Node(MONTH_IS, value=int(month))
    view_node = Node(VIEW, edges=(Edge(1, 1, month_node),))
    return LogicalForm(Node(ANSWER, edges=(Edge(1, 1, view_node),)))


# --- canonical text -------------------------------------------------------


def to_canonical_text(form: LogicalForm) -> str:
    """Render the fixed grammar; inverse of parse_canonical_text."""
    shape = _classify(form)
    kind = shape[0]
    if kind == "spatial":
        rel, name = shape[1], shape[2]
        return f"answer(A,({rel}(A,B),const(B,'{name}')))"
    if kind == "view_entity":
        return f"answer(A,(view(A),const(B,'{shape[1]}')))"
    if kind == "day":
        return f"answer(A,(view(A),day({shape[1]})))"
    return f"answer(A,(view(A),month_is({shape[1]})))"


_SPATIAL_RE = re.compile(
    r"^answer\(A,\((frontOf|behind|leftOf|rightOf|near)\(A,B\),const\(B,'([a-z0-9_]+)'\)\)\)$"
)
_VIEW_ENTITY_RE = re.compile(r"^answer\(A,\(view\(A\),const\(B,'([a-z0-9_]+)'\)\)\)$")
_DAY_RE = re.compile(r"^answer\(A,\(view\(A\),day\((\d+)\)\)\)$")
_MONTH_RE = re.compile(r"^answer\(A,\(view\(A\),month_is\((\d{1,2})\)\)\)$")


def parse_canonical_text(text: str) -> LogicalForm:
    """Rebuild a LogicalForm from its canonical rendering."""
    m = _SPATIAL_RE.match(text)
    if m:
        return spatial_form(m.group(1), m.group(2))
    m = _VIEW_ENTITY_RE.match(text)
    if m:
        return view_entity_form(m.group(1))
    m = _DAY_RE.match(text)
    if m:
        return day_form(int(m.group(1)))
    m = _MONTH_RE.match(text)
    if m:
        return month_form(int(m.group(1)))
    raise MalformedForm(f"unparseable canonical text: {text!r}")


# --- evaluation -----------------------------------------------------------


def _sole_child(node: Node, context: str) -> Node:
    if len(node.edges) != 1:
        raise MalformedForm(f"{context}: expected exactly one child on {node.predicate!r}")
    return node.edges[0].child


def _classify(form: LogicalForm) -> tuple:
    """Match the tree against the four interpretable shapes."""
    branch = _sole_child(form.root, "answer root")
    if branch.predicate in SPATIAL_RELATIONS:
        const_node = _sole_child(branch, "spatial branch")
        if const_node.predicate != CONST or not isinstance(const_node.value, str):
            raise MalformedForm("spatial branch must end in const(B,'name')")
        if const_node.edges:
            raise MalformedForm("const is a leaf")
        return ("spatial", branch.predicate, const_node.value)
    if branch.predicate == VIEW:
        if branch.value is not None:
            raise MalformedForm("view carries no value")
        leaf = _sole_child(branch, "view branch")
        if leaf.edges:
            raise MalformedForm(f"{leaf.predicate} is a leaf")
        if leaf.predicate == CONST and isinstance(leaf.value, str):
            return ("view_entity", leaf.value)
        if leaf.predicate == DAY and isinstance(leaf.value, int):
            return ("day", leaf.value)
        if leaf.predicate == MONTH_IS and isinstance(leaf.value, int) and 1 <= leaf.value <= 12:
            return ("month", leaf.value)
        raise MalformedForm(f"uninterpretable view branch leaf: {leaf.predicate!r}")
    raise MalformedForm(f"uninterpretable branch: {branch.predicate!r}")


def evaluate(
    form: LogicalForm,
    w: WorldSnapshot,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> Denotation:
    """Denote a logical form against the snapshot.

    Spatial and view-of-entity forms anchor on the named entity; day
    forms filter on the capture day alone; month forms keep media from
    that month within here_radius of the user. Raises UnknownEntity
    for unresolvable names and MalformedForm for alien tree shapes.
    """
    shape = _classify(form)
    kind = shape[0]

    if kind in ("spatial", "view_entity"):
        name = shape[2] if kind == "spatial" else shape[1]
        fact = w.lookup(name)
        if fact is None:
            raise UnknownEntity(f"{name!r} names no fact", detail={"entity": name})
        anchor = fact.coords
        relation = shape[1] if kind == "spatial" else "near"
        hits = [m for m in w.media if eval_spatial(relation, anchor, m.coords, geometry)]
    else:
        anchor = w.context.coords
        if kind == "day":
            hits = [m for m in w.media if m.timestamp == shape[1]]
        else:
            hits = [
                m
                for m in w.media
                if m.month == shape[1]
                and haversine_m(anchor[0], anchor[1], m.lat, m.lon) <= geometry.here_radius_m
            ]

    hits.sort(key=lambda m: (haversine_m(anchor[0], anchor[1], m.lat, m.lon), m.id))
    return Denotation(tuple(m.id for m in hits))
