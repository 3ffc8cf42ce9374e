"""Query parsing: tokens, candidate logical forms, features, scoring.

The mapping from words to predicates is deliberately loose: a spatial
phrase triggers every relation predicate, a month word triggers every
month index, and a query with a trigger but no recognized entity
hypothesizes view(entity) readings over the whole fact lexicon. The
log-linear score, not the lexicon, decides which reading wins; that
mapping is what training learns from question/answer pairs.

Scores are softmax-normalized over the full candidate set. Ties are
broken by the canonical text of the form, so parsing is deterministic
for fixed (text, parameters, lexicon).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import NoCandidates
from .geometry import SPATIAL_RELATIONS
from .lexicon import Lexicon, words_of
from .logic import (
    LogicalForm,
    day_form,
    month_form,
    spatial_form,
    view_entity_form,
)
from .world import month_of_stamp, stamp_to_date

WH = "WH"
SPATIAL = "SPATIAL"
TEMPORAL = "TEMPORAL"
ENTITY = "ENTITY"
MONTH = "MONTH"
NUMBER = "NUMBER"
STOP = "STOP"

TAGS = (WH, SPATIAL, TEMPORAL, ENTITY, MONTH, NUMBER, STOP)

BEAM_CAP = 200

_TEMPORAL_WORDS = frozenset({"ago", "day", "days", "week", "weeks", "month", "months", "year", "years"})


@dataclass(frozen=True)
class Token:
    surface: str
    position: int
    tag: str


@dataclass(frozen=True)
class ScoredParse:
    form: LogicalForm
    canonical: str
    score: float
    probability: float


@dataclass(frozen=True)
class ParseResult:
    beam: tuple[ScoredParse, ...]

    @property
    def argmax(self) -> ScoredParse:
        return self.beam[0]


@dataclass(frozen=True)
class ParamVector:
    """Sparse feature weights owned by one model (shared or a user fork)."""

    weights: Mapping[str, float] = field(default_factory=dict)
    owner: str = "shared"
    version: int = 0
    config_hash: str = "none"

    def get(self, key: str) -> float:
        return self.weights.get(key, 0.0)

    def dot(self, feats: Mapping[str, float]) -> float:
        return sum(self.weights.get(k, 0.0) * v for k, v in feats.items())

    def updated(self, delta: Mapping[str, float], scale: float = 1.0) -> "ParamVector":
        new = dict(self.weights)
        for k, v in delta.items():
            new[k] = new.get(k, 0.0) + scale * v
        return ParamVector(
            weights=new, owner=self.owner, version=self.version + 1, config_hash=self.config_hash
        )

    def save(self, path: str | Path) -> None:
        """Write the versioned flat file: JSON header, then sorted key/weight lines."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {"owner": self.owner, "version": self.version, "config_hash": self.config_hash}
                )
                + "\n"
            )
            for key in sorted(self.weights):
                fh.write(f"{key}\t{self.weights[key]!r}\n")

    @classmethod
    def load(cls, path: str | Path) -> "ParamVector":
        with open(path, encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            weights = {}
            for line in fh:
                if not line.strip():
                    continue
                key, value = line.rstrip("\n").split("\t")
                weights[key] = float(value)
        return cls(
            weights=weights,
            owner=header["owner"],
            version=header["version"],
            config_hash=header.get("config_hash", "none"),
        )


def config_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()[:12]


class Parser:
    """Lexicon-bound parser over one world's entity table."""

    def __init__(self, lexicon: Lexicon, beam_cap: int = BEAM_CAP):
        self.lexicon = lexicon
        self.beam_cap = beam_cap

    # -- tokenization -----------------------------------------------------

    def tokenize_and_tag(self, text: str) -> list[Token]:
        """Fold, split, and tag; multiword aliases and spatial phrases
        collapse into single tokens (longest match, left to right).
        ENTITY surfaces are the canonical fact name."""
        words = words_of(text)
        lex = self.lexicon
        tokens: list[Token] = []
        i = 0
        while i < len(words):
            entity = lex.match_entity(words, i)
            if entity is not None:
                name, used = entity
                tokens.append(Token(name, len(tokens), ENTITY))
                i += used
                continue
            spatial = lex.match_spatial(words, i)
            if spatial is not None:
                phrase, _ = spatial
                tokens.append(Token(phrase, len(tokens), SPATIAL))
                i += len(phrase.split())
                continue
            word = words[i]
            if word in lex.months:
                tag = MONTH
            elif word.isdigit():
                tag = NUMBER
            elif word in lex.wh_words:
                tag = WH
            elif word in _TEMPORAL_WORDS:
                tag = TEMPORAL
            else:
                tag = STOP
            tokens.append(Token(word, len(tokens), tag))
            i += 1
        return tokens

    # -- candidate generation ----------------------------------------------

    def generate_candidates(self, tokens: Sequence[Token]) -> list[LogicalForm]:
        """Enumerate well-formed single-branch forms from the triggers.

        Raises NoCandidates when nothing fires. Deterministic order,
        deduplicated on canonical text, capped at beam_cap.
        """
        entities = _unique([t.surface for t in tokens if t.tag == ENTITY])
        spatial_tokens = [t for t in tokens if t.tag == SPATIAL]
        months = _unique([self.lexicon.months[t.surface] for t in tokens if t.tag == MONTH])
        numbers = _unique([int(t.surface) for t in tokens if t.tag == NUMBER])
        any_trigger = bool(entities or spatial_tokens or months or numbers) or any(
            t.tag in (WH, TEMPORAL) for t in tokens
        )

        forms: list[LogicalForm] = []
        for name in entities:
            if spatial_tokens:
                for rel in SPATIAL_RELATIONS:
                    forms.append(spatial_form(rel, name))
            else:
                forms.append(spatial_form("near", name))
            forms.append(view_entity_form(name))
        for n in numbers:
            forms.append(day_form(n))
            month = _month_reading(n)
            if month is not None:
                forms.append(month_form(month))
        for m in months:
            for idx in range(1, 13):
                forms.append(month_form(idx))
        if not entities and any_trigger:
            # no entity resolved: hypothesize a view reading per known fact
            for name in self.lexicon.entity_pool():
                forms.append(view_entity_form(name))

        deduped: list[LogicalForm] = []
        seen: set[str] = set()
        for form in forms:
            text = form.canonical()
            if text not in seen:
                seen.add(text)
                deduped.append(form)
        if not deduped:
            raise NoCandidates(" ".join(t.surface for t in tokens))
        return deduped[: self.beam_cap]

    # -- features -----------------------------------------------------------

    def featurize(self, tokens: Sequence[Token], form: LogicalForm) -> dict[str, float]:
        """Indicator/count features tying surface phrases to predicates.

        lex:* fires for each (trigger token, predicate instance) pair
        linked in the form, edge:* for each tree edge, count:* per
        predicate symbol, and unmatched:SPATIAL counts spatial tokens
        the form ignores.
        """
        feats: dict[str, float] = {}

        def bump(key: str, amount: float = 1.0):
            feats[key] = feats.get(key, 0.0) + amount

        nodes = _walk(form.root)
        for node in nodes:
            bump(f"count:{node.predicate}")
            for edge in node.edges:
                bump(f"edge:{node.predicate}->{edge.child.predicate}")

        spatial_used = False
        for node in nodes:
            label = _instance_label(node)
            for token in tokens:
                if _links(token, node, self.lexicon):
                    bump(f"lex:{_squash(token.surface)}->{label}")
                    if token.tag == SPATIAL:
                        spatial_used = True
        if not spatial_used:
            n_spatial = sum(1 for t in tokens if t.tag == SPATIAL)
            if n_spatial:
                bump("unmatched:SPATIAL", float(n_spatial))
        return feats

    # -- scoring --------------------------------------------------------------

    def chart(self, text: str) -> "ParseChart":
        """Tokenize, enumerate and featurize once; scoring reuses this."""
        tokens = self.tokenize_and_tag(text)
        forms = self.generate_candidates(tokens)
        canon = [f.canonical() for f in forms]
        feats = [self.featurize(tokens, f) for f in forms]
        return ParseChart(text=text, tokens=tokens, forms=forms, canonicals=canon, features=feats)

    def parse_topk(self, text: str, params: ParamVector, k: int = 1) -> ParseResult:
        """Score all candidates and return the k best.

        The softmax runs over the full candidate set; the returned
        beam's probabilities are renormalized so they sum to one.
        """
        chart = self.chart(text)
        return chart.topk(params, k)


@dataclass
class ParseChart:
    text: str
    tokens: list[Token]
    forms: list[LogicalForm]
    canonicals: list[str]
    features: list[dict[str, float]]

    def scores(self, params: ParamVector) -> list[float]:
        return [params.dot(f) for f in self.features]

    def distribution(self, params: ParamVector) -> list[float]:
        return _softmax(self.scores(params))

    def topk(self, params: ParamVector, k: int) -> ParseResult:
        scores = self.scores(params)
        probs = _softmax(scores)
        order = sorted(range(len(self.forms)), key=lambda i: (-scores[i], self.canonicals[i]))
        chosen = order[: max(1, k)]
        mass = sum(probs[i] for i in chosen)
        beam = tuple(
            ScoredParse(
                form=self.forms[i],
                canonical=self.canonicals[i],
                score=scores[i],
                probability=probs[i] / mass if mass > 0 else 1.0 / len(chosen),
            )
            for i in chosen
        )
        return ParseResult(beam=beam)


def _softmax(scores: Sequence[float]) -> list[float]:
    top = max(scores)
    exps = [math.exp(s - top) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


def _unique(items):
    seen = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def _walk(node) -> list:
    out = [node]
    for edge in node.edges:
        out.extend(_walk(edge.child))
    return out


def _squash(surface: str) -> str:
    return surface.replace(" ", "_")


def _instance_label(node) -> str:
    if node.predicate == "month_is":
        return f"month_is:{node.value}"
    if node.predicate == "const":
        return f"const:{node.value}"
    return node.predicate


def _month_reading(number: int) -> int | None:
    """A bare number read as a month: 1-12 directly, or the month
    digits of a full day stamp."""
    if 1 <= number <= 12:
        return number
    try:
        stamp_to_date(number)
    except (ValueError, TypeError):
        return None
    return month_of_stamp(number)


def _links(token: Token, node, lexicon: Lexicon) -> bool:
    """Did this token trigger this predicate instance?"""
    if token.tag == SPATIAL:
        return node.predicate in SPATIAL_RELATIONS
    if token.tag == ENTITY:
        return node.predicate == "const" and node.value == token.surface
    if token.tag == MONTH:
        return node.predicate == "month_is" and node.value == lexicon.months[token.surface]
    if token.tag == NUMBER:
        n = int(token.surface)
        if node.predicate == "day":
            return node.value == n
        if node.predicate == "month_is":
            return _month_reading(n) == node.value
    return False
