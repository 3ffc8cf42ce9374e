"""World state: geographic facts, media records and per-user context.

The store is the single mutable object in the engine. Readers never see
it directly; they work on immutable snapshots that freeze facts, media
and one user's context together with a monotonically increasing version.
"""

from __future__ import annotations

import datetime
import json
import logging
import math
import re
import threading
import unicodedata
import xml.parsers.expat
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable, Mapping

from .errors import (
    AliasCollision,
    AllLinesInvalid,
    EmptyName,
    InvalidCoordinate,
    InvalidHeading,
    MalformedXml,
    UnknownFact,
    UnknownUser,
)

log = logging.getLogger(__name__)

MEDIA_KINDS = ("image", "video")

# Node tags whose value we accept as an entity category, in precedence
# order for nodes carrying more than one of them.
OSM_KIND_TAGS = ("amenity", "building", "shop", "highway", "leisure")

_UMLAUTS = {"ä": "ae", "ö": "oe", "ü": "ue", "ß": "ss"}


def normalize_name(raw: str) -> str:
    """Canonicalize an entity name for use as an identifier.

    Lowercases, expands German umlauts/eszett, strips diacritics from
    any other letters, and collapses each maximal run of characters
    outside [a-z0-9] into a single underscore (none leading/trailing).
    Idempotent on its own output.

    Raises EmptyName if nothing survives.
    """
    if raw is None:
        raise EmptyName("name is missing")
    s = raw.lower()
    for uml, repl in _UMLAUTS.items():
        s = s.replace(uml, repl)
    s = unicodedata.normalize("NFKD", s)
    s = "".join(ch for ch in s if not unicodedata.combining(ch))
    s = re.sub(r"[^a-z0-9]+", "_", s).strip("_")
    if not s:
        raise EmptyName(f"name {raw!r} normalizes to nothing")
    return s


# --- calendar helpers on YYYYMMDD integer stamps ------------------------


def stamp_to_date(stamp: int) -> datetime.date:
    """Parse a YYYYMMDD integer; raises ValueError on impossible dates."""
    return datetime.date(stamp // 10000, (stamp // 100) % 100, stamp % 100)


def date_to_stamp(d: datetime.date) -> int:
    return d.year * 10000 + d.month * 100 + d.day


def month_of_stamp(stamp: int) -> int:
    return (stamp // 100) % 100


def shift_stamp(stamp: int, *, days: int = 0, months: int = 0) -> int:
    """Shift a day stamp back/forward by calendar days and months.

    Month arithmetic clamps the day-of-month to the target month's
    length (May 31 minus one month is April 30).
    """
    d = stamp_to_date(stamp)
    if months:
        total = d.year * 12 + (d.month - 1) + months
        year, month = divmod(total, 12)
        month += 1
        # clamp to month length
        for day in (d.day, 30, 29, 28):
            try:
                d = datetime.date(year, month, day)
                break
            except ValueError:
                continue
    if days:
        d = d + datetime.timedelta(days=days)
    return date_to_stamp(d)


# --- domain types --------------------------------------------------------


@dataclass(frozen=True)
class GeoFact:
    """A named geographic entity extracted from map data."""

    kind: str
    name: str
    lat: float
    lon: float
    aliases: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.name not in self.aliases:
            object.__setattr__(self, "aliases", self.aliases | {self.name})

    @property
    def coords(self) -> tuple[float, float]:
        return (self.lat, self.lon)


@dataclass(frozen=True)
class MediaRecord:
    """One geo/time-tagged photo or video."""

    id: str
    kind: str
    lat: float
    lon: float
    timestamp: int  # YYYYMMDD
    uri: str

    @property
    def month(self) -> int:
        return month_of_stamp(self.timestamp)

    @property
    def coords(self) -> tuple[float, float]:
        return (self.lat, self.lon)


@dataclass(frozen=True)
class UserContext:
    """Where a user is, which way they face, and their clock."""

    user_id: str
    lat: float
    lon: float
    heading_deg: float
    query_time: int  # YYYYMMDD

    def __post_init__(self):
        _check_coords(self.lat, self.lon)
        h = self.heading_deg
        if not isinstance(h, (int, float)) or not math.isfinite(h):
            raise InvalidHeading(f"heading {h!r} is not a finite number")
        object.__setattr__(self, "heading_deg", float(h) % 360.0)
        try:
            stamp_to_date(self.query_time)
        except (ValueError, TypeError):
            raise InvalidCoordinate(f"query_time {self.query_time!r} is not a valid day stamp")

    @property
    def coords(self) -> tuple[float, float]:
        return (self.lat, self.lon)


def _check_coords(lat, lon) -> None:
    ok = (
        isinstance(lat, (int, float))
        and isinstance(lon, (int, float))
        and math.isfinite(lat)
        and math.isfinite(lon)
        and -90.0 <= lat <= 90.0
        and -180.0 <= lon <= 180.0
    )
    if not ok:
        raise InvalidCoordinate(f"lat={lat!r} lon={lon!r}")


class WorldSnapshot:
    """Immutable view of the world for one query.

    Facts and media are tuples; ``context`` is the single user context
    the query runs under. ``version`` strictly increases across
    snapshots taken from the same store.
    """

    __slots__ = ("facts", "media", "context", "version", "_name_index")

    def __init__(
        self,
        facts: tuple[GeoFact, ...],
        media: tuple[MediaRecord, ...],
        context: UserContext,
        version: int,
    ):
        self.facts = facts
        self.media = media
        self.context = context
        self.version = version
        index: dict[str, GeoFact] = {}
        for fact in facts:
            for alias in sorted(fact.aliases):
                index.setdefault(alias, fact)
        self._name_index = index

    def lookup(self, name: str) -> GeoFact | None:
        """Resolve a normalized name or alias; earliest ingested fact wins."""
        return self._name_index.get(name)

    def entity_names(self) -> Mapping[str, str]:
        """Alias -> canonical fact name, for lexicon construction."""
        return {alias: fact.name for alias, fact in self._name_index.items()}

    def with_context(self, context: UserContext) -> "WorldSnapshot":
        """Same world, different user context (training/simulation use)."""
        return WorldSnapshot(self.facts, self.media, context, self.version)


@dataclass
class OsmIngestReport:
    facts_added: int = 0
    nodes_skipped: int = 0
    duplicates: int = 0


@dataclass
class MediaIngestReport:
    added: int = 0
    invalid: list[tuple[int, str]] = field(default_factory=list)


class _OsmNodeReader:
    """Expat-driven extraction of (lat, lon, tags) per <node> element."""

    def __init__(self):
        self.nodes: list[tuple[str, str, dict[str, str]]] = []
        self._current: tuple[str, str] | None = None
        self._tags: dict[str, str] = {}

    def start(self, element, attrs):
        if element == "node":
            self._current = (attrs.get("lat"), attrs.get("lon"))
            self._tags = {}
        elif element == "tag" and self._current is not None:
            k, v = attrs.get("k"), attrs.get("v")
            if k is not None:
                self._tags.setdefault(k, v or "")

    def end(self, element):
        if element == "node" and self._current is not None:
            self.nodes.append((self._current[0], self._current[1], self._tags))
            self._current = None


class WorldStore:
    """Single-writer world state with snapshot reads.

    All mutating operations and snapshot() bump one shared version
    counter, so any two snapshots are ordered even when nothing changed
    in between.
    """

    def __init__(self):
        self._facts: dict[tuple[str, str], GeoFact] = {}
        self._media: dict[str, MediaRecord] = {}
        self._contexts: dict[str, UserContext] = {}
        self._version = 0
        self._lock = threading.Lock()

    # -- facts ------------------------------------------------------------

    def ingest_osm_xml(self, source: bytes | str | IO) -> OsmIngestReport:
        """Add one GeoFact per named node carrying a recognized kind tag.

        Unnamed nodes and nodes without a recognized kind tag count as
        skipped. A second node with the same (kind, name) keeps the
        first and logs a warning. Raises MalformedXml (with the byte
        offset) on broken XML and InvalidCoordinate on bad lat/lon.
        """
        data = _read_source(source)
        reader = _OsmNodeReader()
        parser = xml.parsers.expat.ParserCreate()
        parser.StartElementHandler = reader.start
        parser.EndElementHandler = reader.end
        try:
            parser.Parse(data, True)
        except xml.parsers.expat.ExpatError as exc:
            raise MalformedXml(str(exc), byte_offset=parser.ErrorByteIndex) from exc

        report = OsmIngestReport()
        with self._lock:
            for raw_lat, raw_lon, tags in reader.nodes:
                raw_name = tags.get("name")
                kind = None
                for tag in OSM_KIND_TAGS:
                    if tag in tags and tags[tag]:
                        kind = normalize_name(tags[tag])
                        break
                if raw_name is None or not raw_name.strip() or kind is None:
                    report.nodes_skipped += 1
                    continue
                try:
                    lat, lon = float(raw_lat), float(raw_lon)
                except (TypeError, ValueError):
                    raise InvalidCoordinate(f"node lat={raw_lat!r} lon={raw_lon!r}")
                _check_coords(lat, lon)
                name = normalize_name(raw_name)
                key = (kind, name)
                if key in self._facts:
                    log.warning("duplicate fact %s/%s ignored (first wins)", kind, name)
                    report.duplicates += 1
                    continue
                self._facts[key] = GeoFact(kind=kind, name=name, lat=lat, lon=lon)
                report.facts_added += 1
            self._version += 1
        return report

    def add_fact(self, fact: GeoFact) -> None:
        """Direct insertion, used by fixtures and persistence reload."""
        _check_coords(fact.lat, fact.lon)
        with self._lock:
            self._facts.setdefault((fact.kind, fact.name), fact)
            self._version += 1

    def add_alias(self, kind: str, name: str, alias_raw: str) -> str:
        """Attach a normalized alias to an existing fact.

        Raises UnknownFact if the fact does not exist, EmptyName if the
        alias normalizes to nothing, and AliasCollision if the alias
        already belongs to a different fact (as name or alias).
        """
        alias = normalize_name(alias_raw)
        with self._lock:
            fact = self._facts.get((kind, name))
            if fact is None:
                raise UnknownFact(f"no fact {kind}/{name}")
            for other in self._facts.values():
                if other is not fact and alias in other.aliases:
                    raise AliasCollision(f"alias {alias!r} already names {other.kind}/{other.name}")
            self._facts[(kind, name)] = replace(fact, aliases=fact.aliases | {alias})
            self._version += 1
        return alias

    # -- media ------------------------------------------------------------

    def ingest_media_manifest(self, source: str | bytes | IO | Iterable[str]) -> MediaIngestReport:
        """Load line-delimited JSON media records.

        Each line needs id, kind, lat, lon, timestamp, uri; unknown
        fields are ignored. Bad lines are collected with their line
        numbers and do not abort the ingest unless every line is bad
        (AllLinesInvalid). An empty manifest adds nothing.
        """
        lines = _read_lines(source)
        report = MediaIngestReport()
        with self._lock:
            total = 0
            for lineno, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                total += 1
                problem = self._ingest_media_line(line)
                if problem is None:
                    report.added += 1
                else:
                    report.invalid.append((lineno, problem))
            self._version += 1
        if total and report.added == 0:
            raise AllLinesInvalid(f"all {total} manifest lines invalid", detail=report.invalid)
        return report

    def _ingest_media_line(self, line: str) -> str | None:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            return f"not JSON: {exc.msg}"
        if not isinstance(obj, dict):
            return "not a JSON object"
        missing = [k for k in ("id", "kind", "lat", "lon", "timestamp", "uri") if k not in obj]
        if missing:
            return f"missing fields: {', '.join(missing)}"
        media_id = obj["id"]
        if not isinstance(media_id, str) or not media_id:
            return "id must be a non-empty string"
        if media_id in self._media:
            return f"duplicate id {media_id!r}"
        if obj["kind"] not in MEDIA_KINDS:
            return f"kind must be one of {MEDIA_KINDS}"
        lat, lon = obj["lat"], obj["lon"]
        try:
            _check_coords(lat, lon)
        except InvalidCoordinate as exc:
            return exc.message
        try:
            stamp_to_date(int(obj["timestamp"]))
        except (ValueError, TypeError):
            return f"timestamp {obj['timestamp']!r} is not a valid YYYYMMDD day"
        if not isinstance(obj["uri"], str) or not obj["uri"]:
            return "uri must be a non-empty string"
        self._media[media_id] = MediaRecord(
            id=media_id,
            kind=obj["kind"],
            lat=float(lat),
            lon=float(lon),
            timestamp=int(obj["timestamp"]),
            uri=obj["uri"],
        )
        return None

    # -- context and snapshots ---------------------------------------------

    def set_user_context(
        self, user_id: str, lat: float, lon: float, heading_deg: float, query_time: int
    ) -> int:
        """Record a user's position/heading/clock; returns the new version."""
        ctx = UserContext(
            user_id=user_id, lat=lat, lon=lon, heading_deg=heading_deg, query_time=query_time
        )
        with self._lock:
            self._contexts[user_id] = ctx
            self._version += 1
            return self._version

    def get_context(self, user_id: str) -> UserContext:
        ctx = self._contexts.get(user_id)
        if ctx is None:
            raise UnknownUser(f"no context for user {user_id!r}")
        return ctx

    def get_media(self, media_id: str) -> MediaRecord | None:
        return self._media.get(media_id)

    def snapshot(self, user_id: str) -> WorldSnapshot:
        """Freeze facts, media and the user's context for one query."""
        with self._lock:
            ctx = self._contexts.get(user_id)
            if ctx is None:
                raise UnknownUser(f"no context for user {user_id!r}")
            self._version += 1
            return WorldSnapshot(
                facts=tuple(self._facts.values()),
                media=tuple(self._media.values()),
                context=ctx,
                version=self._version,
            )

    def snapshot_with(self, context: UserContext) -> WorldSnapshot:
        """Freeze facts and media under a caller-supplied context.

        For offline work (training, simulation) where the context comes
        from data rather than a registered user.
        """
        with self._lock:
            self._version += 1
            return WorldSnapshot(
                facts=tuple(self._facts.values()),
                media=tuple(self._media.values()),
                context=context,
                version=self._version,
            )

    @property
    def version(self) -> int:
        return self._version

    @property
    def fact_count(self) -> int:
        return len(self._facts)

    @property
    def media_count(self) -> int:
        return len(self._media)

    # -- persistence --------------------------------------------------------

    def save(self, data_dir: str | Path) -> None:
        """Write facts and media as JSON lines under data_dir."""
        base = Path(data_dir)
        base.mkdir(parents=True, exist_ok=True)
        with self._lock:
            with open(base / "facts.jsonl", "w", encoding="utf-8") as fh:
                for fact in self._facts.values():
                    fh.write(
                        json.dumps(
                            {
                                "kind": fact.kind,
                                "name": fact.name,
                                "lat": fact.lat,
                                "lon": fact.lon,
                                "aliases": sorted(fact.aliases),
                            }
                        )
                        + "\n"
                    )
            with open(base / "media.jsonl", "w", encoding="utf-8") as fh:
                for rec in self._media.values():
                    fh.write(
                        json.dumps(
                            {
                                "id": rec.id,
                                "kind": rec.kind,
                                "lat": rec.lat,
                                "lon": rec.lon,
                                "timestamp": rec.timestamp,
                                "uri": rec.uri,
                            }
                        )
                        + "\n"
                    )

    def load(self, data_dir: str | Path) -> None:
        """Reload facts and media previously written by save()."""
        base = Path(data_dir)
        facts_path = base / "facts.jsonl"
        media_path = base / "media.jsonl"
        with self._lock:
            if facts_path.exists():
                with open(facts_path, encoding="utf-8") as fh:
                    for line in fh:
                        if not line.strip():
                            continue
                        obj = json.loads(line)
                        fact = GeoFact(
                            kind=obj["kind"],
                            name=obj["name"],
                            lat=obj["lat"],
                            lon=obj["lon"],
                            aliases=frozenset(obj.get("aliases", ())),
                        )
                        self._facts.setdefault((fact.kind, fact.name), fact)
            if media_path.exists():
                with open(media_path, encoding="utf-8") as fh:
                    for line in fh:
                        if not line.strip():
                            continue
                        obj = json.loads(line)
                        self._media.setdefault(
                            obj["id"],
                            MediaRecord(
                                id=obj["id"],
                                kind=obj["kind"],
                                lat=obj["lat"],
                                lon=obj["lon"],
                                timestamp=int(obj["timestamp"]),
                                uri=obj["uri"],
                            ),
                        )
            self._version += 1


def _read_source(source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, str):
        # a one-line string naming an existing file is a path ("" is not:
        # Path("") aliases the current directory)
        if source and "\n" not in source and Path(source).is_file():
            return Path(source).read_bytes()
        return source.encode("utf-8")
    data = source.read()
    return data if isinstance(data, bytes) else data.encode("utf-8")


def _read_lines(source) -> list[str]:
    if isinstance(source, bytes):
        return source.decode("utf-8").splitlines()
    if isinstance(source, str):
        if source and "\n" not in source and Path(source).is_file():
            return Path(source).read_text(encoding="utf-8").splitlines()
        return source.splitlines()
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return data.splitlines()
    return list(source)
