"""Resolution of egocentric and deictic query language against context.

Two reference frames are supported. In the geomagnetic frame spatial
keywords keep their canonical compass meaning (front = north, right =
east, behind = south, left = west). In the user-centric frame the
user's quantized heading rotates that mapping, and the query text is
rewritten accordingly before parsing: facing east, "in front of" turns
into "on the right of".

Deictic place words pin an anchor to the user's coordinates, and
relative day phrases ("five days ago") are converted into absolute
YYYYMMDD stamps using the context clock.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ConflictingTemporal
from .lexicon import DIRECTIONAL_KEYS, Lexicon, default_lexicon, fold_text
from .world import UserContext, shift_stamp

GEOMAGNETIC = "geomagnetic"
USER_CENTRIC = "user_centric"
FRAMES = (GEOMAGNETIC, USER_CENTRIC)

NORTH, EAST, SOUTH, WEST = "north", "east", "south", "west"
CARDINALS = (NORTH, EAST, SOUTH, WEST)

# quarter-turn cycle of the user-relative keys, clockwise from north
_ROTATION_CYCLE = ("front_of", "right_of", "behind", "left_of")


def quantize_heading(heading_deg: float) -> str:
    """Snap a heading to the nearest cardinal.

    Midpoints round clockwise: 45 -> east, 135 -> south, 225 -> west,
    315 -> north.
    """
    idx = int(((heading_deg % 360.0) + 45.0) // 90.0) % 4
    return CARDINALS[idx]


def rewrite_relation(relation_key: str, facing: str) -> str:
    """Rotate a user-relative relation into its geomagnetic equivalent.

    Facing east, "front_of" means east, which the canonical frame calls
    "right_of". Near is rotation-invariant and passes through.
    """
    if relation_key not in DIRECTIONAL_KEYS:
        return relation_key
    if facing not in CARDINALS:
        raise ValueError(f"not a cardinal: {facing!r}")
    turns = CARDINALS.index(facing)
    idx = _ROTATION_CYCLE.index(relation_key)
    return _ROTATION_CYCLE[(idx + turns) % 4]


@dataclass(frozen=True)
class ResolvedQuery:
    """Parse-ready text plus whatever context resolution extracted."""

    text: str
    frame: str
    anchor_override: tuple[float, float] | None = None
    day_stamp: int | None = None
    month: int | None = None


_UNIT_DAYS = {"day": 1, "week": 7}
_UNIT_MONTHS = {"month": 1, "year": 12}


def _temporal_pattern(lexicon: Lexicon) -> re.Pattern:
    number_words = "|".join(sorted(lexicon.number_words, key=len, reverse=True))
    units = "|".join(lexicon.temporal_units)
    return re.compile(
        rf"\b(\d+|{number_words})\s+({units})s?\s+ago\b",
        re.IGNORECASE,
    )


def _spatial_pattern(lexicon: Lexicon) -> re.Pattern:
    parts = []
    for phrase_words in lexicon.spatial_phrases_by_length():
        parts.append(r"\b" + r"\s+".join(re.escape(w) for w in phrase_words) + r"\b")
    return re.compile("|".join(parts), re.IGNORECASE)


def resolve(
    query_text: str,
    ctx: UserContext,
    frame: str = GEOMAGNETIC,
    lexicon: Lexicon | None = None,
) -> ResolvedQuery:
    """Rewrite a raw query against the user's context.

    Returns the (possibly rewritten) text plus anchor/day/month
    extractions. Raises ConflictingTemporal when a relative day phrase
    and a month name both appear. Deterministic, and idempotent on its
    own output under the geomagnetic frame.
    """
    if frame not in FRAMES:
        raise ValueError(f"unknown frame: {frame!r}")
    lexicon = lexicon or default_lexicon()
    text = query_text

    if frame == USER_CENTRIC:
        facing = quantize_heading(ctx.heading_deg)
        pattern = _spatial_pattern(lexicon)

        def _rotate(match: re.Match) -> str:
            phrase = fold_text(re.sub(r"\s+", " ", match.group(0)))
            key = lexicon.spatial.get(phrase)
            if key not in DIRECTIONAL_KEYS:
                return match.group(0)
            rotated = rewrite_relation(key, facing)
            return lexicon.canonical_surface[rotated]

        text = pattern.sub(_rotate, text)

    day_stamp = None
    tpattern = _temporal_pattern(lexicon)
    match = tpattern.search(text)
    if match is not None:
        count_raw, unit = match.group(1).lower(), match.group(2).lower()
        count = int(count_raw) if count_raw.isdigit() else lexicon.number_words[count_raw]
        if unit in _UNIT_DAYS:
            day_stamp = shift_stamp(ctx.query_time, days=-count * _UNIT_DAYS[unit])
        else:
            day_stamp = shift_stamp(ctx.query_time, months=-count * _UNIT_MONTHS[unit])
        text = text[: match.start()] + str(day_stamp) + text[match.end() :]

    month = None
    folded_words = set(re.findall(r"[a-z0-9_]+", fold_text(text)))
    for word, number in lexicon.months.items():
        if word in folded_words:
            month = number
            break
    if day_stamp is not None and month is not None:
        raise ConflictingTemporal(
            f"query names both a relative day ({day_stamp}) and a month ({month})"
        )

    anchor_override = None
    for deictic in lexicon.deixis:
        dpat = re.compile(r"\b" + r"\s+".join(re.escape(w) for w in deictic.split()) + r"\b", re.IGNORECASE)
        if dpat.search(text):
            anchor_override = ctx.coords
            break

    return ResolvedQuery(
        text=text,
        frame=frame,
        anchor_override=anchor_override,
        day_stamp=day_stamp,
        month=month,
    )
