"""Synthetic question/answer corpora and scripted relevance annotators.

Queries come from three fixed templates (spatial relation to an entity,
"N units ago", "this place in <month>"), with slots drawn uniformly
from a seeded generator. The gold answer of each pair is the
denotation of the template's canonical logical form; pairs whose gold
comes out empty are resampled.

Scripted annotators are deterministic stand-ins for human judges: one
reads spatial words geomagnetically, the other relative to a fixed
heading, which makes the two disagree about everything except 'near'.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from .context import GEOMAGNETIC, USER_CENTRIC, quantize_heading, rewrite_relation
from .errors import ExhaustedSampling
from .geometry import (
    BEHIND,
    DEFAULT_GEOMETRY,
    FRONT_OF,
    LEFT_OF,
    NEAR,
    RIGHT_OF,
    GeometryConfig,
    eval_spatial,
    haversine_m,
)
from .lexicon import Lexicon, default_lexicon, words_of
from .logic import day_form, month_form, spatial_form, evaluate
from .world import (
    GeoFact,
    MediaRecord,
    UserContext,
    WorldSnapshot,
    WorldStore,
    shift_stamp,
)

CANONICAL_PREDICATE = {
    "front_of": FRONT_OF,
    "right_of": RIGHT_OF,
    "behind": BEHIND,
    "left_of": LEFT_OF,
    "near": NEAR,
}

SPATIAL_SLOTS = ("in front", "behind", "on the right", "on the left")
TEMPORAL_UNITS = ("day", "week", "month", "year")
MONTH_NAMES = (
    "january", "february", "march", "april", "may", "june",
    "july", "august", "september", "october", "november", "december",
)

TEMPLATES = ("spatial", "days_ago", "month")


@dataclass(frozen=True)
class GenConfig:
    n: int
    seed: int
    fixed_here: tuple[float, float]
    frame: str = GEOMAGNETIC
    query_time: int | None = None  # defaults to the newest media day in the world
    user_id: str = "synth"
    heading_deg: float | None = None  # None samples a cardinal per pair
    templates: tuple[str, ...] = TEMPLATES


def generate_dataset(w: WorldSnapshot, config: GenConfig, geometry: GeometryConfig = DEFAULT_GEOMETRY):
    """Draw seeded template instances with non-empty gold.

    Raises ExhaustedSampling after 100*n failed draws (worlds whose
    media cannot answer the templates).
    """
    from .learning import TrainingPair  # local import breaks a module cycle

    rng = random.Random(config.seed)
    if config.query_time is not None:
        query_time = config.query_time
    else:
        if not w.media:
            raise ExhaustedSampling("world has no media")
        query_time = max(m.timestamp for m in w.media)
    fact_names = sorted({f.name for f in w.facts})
    if not fact_names:
        raise ExhaustedSampling("world has no facts")

    pairs: list[TrainingPair] = []
    attempts = 0
    budget = 100 * config.n
    while len(pairs) < config.n:
        if attempts >= budget:
            raise ExhaustedSampling(
                f"drew {attempts} samples for {len(pairs)}/{config.n} non-empty pairs"
            )
        attempts += 1
        heading = (
            config.heading_deg
            if config.heading_deg is not None
            else rng.choice((0.0, 90.0, 180.0, 270.0))
        )
        ctx = UserContext(
            user_id=config.user_id,
            lat=config.fixed_here[0],
            lon=config.fixed_here[1],
            heading_deg=heading,
            query_time=query_time,
        )
        template = rng.choice(config.templates)
        world = w.with_context(ctx)

        if template == "spatial":
            slot = rng.choice(SPATIAL_SLOTS)
            entity = rng.choice(fact_names)
            text = f"what is there {slot} of {entity.replace('_', ' ')}?"
            key = _slot_key(slot)
            if config.frame == USER_CENTRIC:
                key = rewrite_relation(key, quantize_heading(heading))
            gold = evaluate(spatial_form(CANONICAL_PREDICATE[key], entity), world, geometry)
        elif template == "days_ago":
            count = rng.randint(1, 30)
            unit = rng.choice(TEMPORAL_UNITS)
            plural = "s" if count != 1 else ""
            text = f"what happened here {count} {unit}{plural} ago?"
            if unit in ("day", "week"):
                stamp = shift_stamp(query_time, days=-count * (7 if unit == "week" else 1))
            else:
                stamp = shift_stamp(query_time, months=-count * (12 if unit == "year" else 1))
            gold = evaluate(day_form(stamp), world, geometry)
        else:
            month = rng.randint(1, 12)
            text = f"what did this place look like in {MONTH_NAMES[month - 1]}?"
            gold = evaluate(month_form(month), world, geometry)

        if len(gold) == 0:
            continue
        pairs.append(TrainingPair(query_text=text, context=ctx, gold_ids=gold.as_set()))
    return pairs


def _slot_key(slot: str) -> str:
    return {
        "in front": "front_of",
        "behind": "behind",
        "on the right": "right_of",
        "on the left": "left_of",
    }[slot]


# --- scripted annotators -----------------------------------------------------


@dataclass
class ScriptedAnnotator:
    """Deterministic relevance oracle for one labelling convention.

    ``convention`` is geomagnetic or user_centric; a user-centric
    annotator judges spatial words relative to ``heading_deg``
    regardless of what any context says.
    """

    convention: str
    heading_deg: float = 0.0
    lexicon: Lexicon = field(default_factory=default_lexicon)
    geometry: GeometryConfig = DEFAULT_GEOMETRY

    def __call__(self, query_text: str, media: MediaRecord, w: WorldSnapshot) -> bool:
        reading = self._read(query_text, w)
        if reading is None:
            return False
        kind = reading[0]
        if kind == "spatial":
            relation, anchor = reading[1], reading[2]
            return eval_spatial(relation, anchor, media.coords, self.geometry)
        if kind == "day":
            return media.timestamp == reading[1]
        month, anchor = reading[1], reading[2]
        return (
            media.month == month
            and haversine_m(anchor[0], anchor[1], media.lat, media.lon)
            <= self.geometry.here_radius_m
        )

    def gold_set(self, query_text: str, w: WorldSnapshot) -> frozenset[str]:
        return frozenset(m.id for m in w.media if self(query_text, m, w))

    def _read(self, query_text: str, w: WorldSnapshot):
        """Template-level extraction; no learned components involved."""
        lexicon = self.lexicon.with_entities(w.entity_names())
        words = words_of(query_text)

        match = re.search(r"\b(\d+)\s+(day|week|month|year)s?\s+ago\b", query_text.lower())
        if match:
            count, unit = int(match.group(1)), match.group(2)
            if unit in ("day", "week"):
                stamp = shift_stamp(
                    w.context.query_time, days=-count * (7 if unit == "week" else 1)
                )
            else:
                stamp = shift_stamp(
                    w.context.query_time, months=-count * (12 if unit == "year" else 1)
                )
            return ("day", stamp)

        for word in words:
            if word in lexicon.months:
                return ("month", lexicon.months[word], w.context.coords)

        relation_key = None
        entity = None
        i = 0
        while i < len(words):
            hit = lexicon.match_entity(words, i)
            if hit is not None:
                entity = hit[0]
                i += hit[1]
                continue
            spatial = lexicon.match_spatial(words, i)
            if spatial is not None and relation_key is None:
                relation_key = spatial[1]
                i += len(spatial[0].split())
                continue
            i += 1
        if entity is None:
            return None
        fact = w.lookup(entity)
        if fact is None:
            return None
        if relation_key is None:
            relation_key = "near"
        if self.convention == USER_CENTRIC:
            relation_key = rewrite_relation(relation_key, quantize_heading(self.heading_deg))
        return ("spatial", CANONICAL_PREDICATE[relation_key], fact.coords)


def scripted_annotator(
    convention: str,
    heading_deg: float = 0.0,
    lexicon: Lexicon | None = None,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> ScriptedAnnotator:
    if convention not in (GEOMAGNETIC, USER_CENTRIC):
        raise ValueError(f"unknown convention: {convention!r}")
    return ScriptedAnnotator(
        convention=convention,
        heading_deg=heading_deg,
        lexicon=lexicon or default_lexicon(),
        geometry=geometry,
    )


# --- demo world ---------------------------------------------------------------

_NAME_POOL = (
    ("bus_stop", "universitaet_mensa"),
    ("building", "campus_center"),
    ("atm", "postbank"),
    ("bus_stop", "bus_terminal"),
    ("building", "library_main"),
    ("building", "physics_tower"),
    ("cafe", "cafe_botanik"),
    ("restaurant", "mensa_garden"),
    ("building", "computer_science_hall"),
    ("building", "east_gate"),
    ("building", "west_gate"),
    ("supermarket", "campus_market"),
    ("pharmacy", "linden_pharmacy"),
    ("cafe", "espresso_corner"),
    ("building", "sports_hall"),
    ("atm", "sparkasse_point"),
    ("restaurant", "bistro_nord"),
    ("building", "guest_house"),
    ("cafe", "reading_room_cafe"),
    ("building", "lecture_hall_one"),
    ("building", "lecture_hall_two"),
    ("bus_stop", "south_campus_stop"),
    ("park", "botanical_garden"),
    ("building", "admin_tower"),
    ("cafe", "kiosk_am_markt"),
    ("building", "workshop_yard"),
    ("restaurant", "pasta_haus"),
    ("building", "media_lab"),
    ("gym", "uni_fit"),
    ("building", "north_annex"),
)

_METERS_PER_DEG_LAT = 111_194.9266


def _offset(lat: float, lon: float, dist_m: float, bearing_deg: float) -> tuple[float, float]:
    rad = math.radians(bearing_deg)
    dlat = dist_m * math.cos(rad) / _METERS_PER_DEG_LAT
    dlon = dist_m * math.sin(rad) / (_METERS_PER_DEG_LAT * math.cos(math.radians(lat)))
    return (lat + dlat, lon + dlon)


def random_world(
    seed: int,
    n_facts: int = 25,
    n_media: int = 240,
    center: tuple[float, float] = (49.2556, 7.0452),
    query_time: int = 20150516,
) -> WorldStore:
    """Build a seeded campus-like world.

    Media ring the facts at cone range but stay out of the tight
    'near' disc, cluster around the center (deictic month queries
    find answers), and spread over recent days.
    """
    if n_facts > len(_NAME_POOL):
        raise ValueError(f"name pool holds only {len(_NAME_POOL)} facts")
    rng = random.Random(seed)
    store = WorldStore()

    facts = []
    for kind, name in _NAME_POOL[:n_facts]:
        dist = rng.uniform(0.0, 600.0)
        bearing = rng.uniform(0.0, 360.0)
        lat, lon = _offset(center[0], center[1], dist, bearing)
        fact = GeoFact(kind=kind, name=name, lat=lat, lon=lon)
        store.add_fact(fact)
        facts.append(fact)

    positions: list[tuple[float, float]] = []
    while len(positions) < n_media:
        roll = rng.random()
        if roll < 0.55:
            fact = rng.choice(facts)
            positions.append(
                _offset(
                    fact.lat, fact.lon, rng.uniform(110.0, 460.0), rng.uniform(0.0, 360.0)
                )
            )
        elif roll < 0.80:
            positions.append(
                _offset(
                    center[0], center[1], rng.uniform(5.0, 90.0), rng.uniform(0.0, 360.0)
                )
            )
        else:
            positions.append(
                _offset(
                    center[0], center[1], rng.uniform(0.0, 900.0), rng.uniform(0.0, 360.0)
                )
            )

    lines = []
    day_span = 35
    for i, (lat, lon) in enumerate(positions):
        media_id = f"m{i:04d}"
        if i % 3 == 0:
            # recent: inside the day-template window
            stamp = shift_stamp(query_time, days=-(i % day_span))
        elif i % 3 == 1:
            # one per month over the preceding year
            stamp = shift_stamp(query_time, months=-(i % 12 + 1))
        else:
            stamp = shift_stamp(query_time, days=-rng.randint(0, 720))
        kind = "video" if rng.random() < 0.15 else "image"
        lines.append(
            json.dumps(
                {
                    "id": media_id,
                    "kind": kind,
                    "lat": lat,
                    "lon": lon,
                    "timestamp": stamp,
                    "uri": f"media/{media_id}.{'mp4' if kind == 'video' else 'png'}",
                }
            )
        )
    store.ingest_media_manifest("\n".join(lines))
    return store


# --- corpus files ---------------------------------------------------------------


def save_corpus(pairs, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            ctx = pair.context
            fh.write(
                json.dumps(
                    {
                        "query_text": pair.query_text,
                        "context": {
                            "user_id": ctx.user_id,
                            "lat": ctx.lat,
                            "lon": ctx.lon,
                            "heading_deg": ctx.heading_deg,
                            "query_time": ctx.query_time,
                        },
                        "gold_ids": sorted(pair.gold_ids),
                    }
                )
                + "\n"
            )


def load_corpus(path: str | Path):
    from .learning import TrainingPair

    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            ctx = obj["context"]
            pairs.append(
                TrainingPair(
                    query_text=obj["query_text"],
                    context=UserContext(
                        user_id=ctx["user_id"],
                        lat=ctx["lat"],
                        lon=ctx["lon"],
                        heading_deg=ctx["heading_deg"],
                        query_time=ctx["query_time"],
                    ),
                    gold_ids=frozenset(obj["gold_ids"]),
                )
            )
    return pairs
