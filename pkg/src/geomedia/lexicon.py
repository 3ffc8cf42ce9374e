"""Surface-form tables: spatial keywords, month names, wh-words, entities.

The phrase inventory ships as a JSON config file rather than code so a
deployment can extend it without touching the engine. Entity aliases
come from the world snapshot at parse time.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .world import _UMLAUTS

# user-relative relation keys used by phrase tables and the resolver
FRONT_KEY = "front_of"
RIGHT_KEY = "right_of"
BEHIND_KEY = "behind"
LEFT_KEY = "left_of"
NEAR_KEY = "near"

DIRECTIONAL_KEYS = (FRONT_KEY, RIGHT_KEY, BEHIND_KEY, LEFT_KEY)


def fold_text(text: str) -> str:
    """Lowercase and strip diacritics the same way entity names are."""
    s = text.lower()
    for uml, repl in _UMLAUTS.items():
        s = s.replace(uml, repl)
    s = unicodedata.normalize("NFKD", s)
    return "".join(ch for ch in s if not unicodedata.combining(ch))


def words_of(text: str) -> list[str]:
    """Split folded text into alphanumeric words (underscores kept)."""
    return re.findall(r"[a-z0-9_]+", fold_text(text))


@dataclass
class Lexicon:
    spatial: dict[str, str]  # surface phrase -> relation key
    canonical_surface: dict[str, str]  # relation key -> preferred phrase
    wh_words: frozenset[str]
    deixis: tuple[str, ...]
    months: dict[str, int]
    number_words: dict[str, int]
    temporal_units: tuple[str, ...]
    entities: Mapping[str, str] = field(default_factory=dict)  # alias -> fact name

    @classmethod
    def load(cls, path: str | Path | None = None) -> "Lexicon":
        if path is None:
            raw = resources.files("geomedia.data").joinpath("phrases.json").read_text("utf-8")
        else:
            raw = Path(path).read_text(encoding="utf-8")
        obj = json.loads(raw)
        return cls(
            spatial={fold_text(k): v for k, v in obj["spatial"].items()},
            canonical_surface=dict(obj["canonical_surface"]),
            wh_words=frozenset(obj["wh_words"]),
            deixis=tuple(obj["deixis"]),
            months={fold_text(k): v for k, v in obj["months"].items()},
            number_words=dict(obj["number_words"]),
            temporal_units=tuple(obj["temporal_units"]),
        )

    def with_entities(self, entities: Mapping[str, str]) -> "Lexicon":
        """Bind this lexicon to a world's alias -> fact-name table."""
        return Lexicon(
            spatial=self.spatial,
            canonical_surface=self.canonical_surface,
            wh_words=self.wh_words,
            deixis=self.deixis,
            months=self.months,
            number_words=self.number_words,
            temporal_units=self.temporal_units,
            entities=dict(entities),
        )

    def entity_pool(self) -> list[str]:
        """Distinct canonical fact names, sorted for determinism."""
        return sorted(set(self.entities.values()))

    def spatial_phrases_by_length(self) -> list[list[str]]:
        """Spatial phrases as word lists, longest first (greedy matching)."""
        phrases = [p.split() for p in self.spatial]
        return sorted(phrases, key=lambda ws: (-len(ws), ws))

    def match_spatial(self, words: list[str], start: int) -> tuple[str, str] | None:
        """Longest spatial phrase starting at ``start``; (phrase, relation key)."""
        best = None
        for phrase_words in self.spatial_phrases_by_length():
            n = len(phrase_words)
            if words[start : start + n] == phrase_words:
                phrase = " ".join(phrase_words)
                best = (phrase, self.spatial[phrase])
                break
        return best

    def match_entity(self, words: list[str], start: int, max_len: int = 6) -> tuple[str, int] | None:
        """Longest alias match at ``start``; returns (fact name, words used)."""
        limit = min(len(words) - start, max_len)
        for n in range(limit, 0, -1):
            candidate = "_".join(words[start : start + n]).strip("_")
            if candidate in self.entities:
                return (self.entities[candidate], n)
        return None


_DEFAULT: Lexicon | None = None


def default_lexicon() -> Lexicon:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = Lexicon.load()
    return _DEFAULT
