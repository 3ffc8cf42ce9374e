"""Query-serving engine: the object the HTTP service and CLI drive.

Ties the world store, resolver, parser, interpreter and parameter
store together, remembers what each query showed (for feedback
joining), and owns persistence of the whole state to a data directory.
"""

from __future__ import annotations

import datetime
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .context import FRAMES, GEOMAGNETIC, resolve
from .errors import MissingMediaFile, UnknownQuery, UnshownMark
from .geometry import DEFAULT_GEOMETRY, GeometryConfig
from .learning import (
    FeedbackEvent,
    ParamStore,
    TrainConfig,
    TrainingReport,
    feedback_update,
    train,
)
from .lexicon import Lexicon, default_lexicon
from .logic import evaluate
from .parsing import ParamVector, Parser
from .world import MediaRecord, UserContext, WorldStore, date_to_stamp

QUERY_HISTORY_LIMIT = 10_000


@dataclass(frozen=True)
class QueryRecord:
    """What one query showed, kept so later feedback can be joined."""

    query_id: str
    user_id: str
    resolved_text: str
    context: UserContext
    shown: tuple[str, ...]


@dataclass(frozen=True)
class QueryOutcome:
    query_id: str
    user_id: str
    resolved_text: str
    logical_form: str
    frame: str
    params_version: int
    world_version: int
    retrievals: tuple[MediaRecord, ...]


class RetrievalEngine:
    def __init__(
        self,
        store: WorldStore | None = None,
        lexicon: Lexicon | None = None,
        geometry: GeometryConfig = DEFAULT_GEOMETRY,
        feedback_eta: float = 0.1,
        media_root: str | Path | None = None,
        history_limit: int = QUERY_HISTORY_LIMIT,
    ):
        self.store = store if store is not None else WorldStore()
        self.lexicon = lexicon if lexicon is not None else default_lexicon()
        self.geometry = geometry
        self.feedback_eta = feedback_eta
        self.media_root = Path(media_root) if media_root is not None else Path(".")
        self.params = ParamStore()
        self._history_limit = history_limit
        self._history: dict[str, OrderedDict[str, QueryRecord]] = {}
        self._parser: Parser | None = None
        self._parser_entities: Mapping[str, str] | None = None
        self._lock = threading.RLock()

    @classmethod
    def from_data_dir(cls, data_dir: str | Path, **kwargs) -> "RetrievalEngine":
        """Engine over a persisted data directory (empty dir = empty world)."""
        engine = cls(media_root=kwargs.pop("media_root", data_dir), **kwargs)
        engine.load(data_dir)
        return engine

    # -- context & queries ---------------------------------------------------

    def set_context(
        self,
        user_id: str,
        lat: float,
        lon: float,
        heading_deg: float,
        query_time: int | None = None,
    ) -> int:
        if query_time is None:
            query_time = date_to_stamp(datetime.date.today())
        return self.store.set_user_context(user_id, lat, lon, heading_deg, query_time)

    def query(self, user_id: str, text: str, frame: str = GEOMAGNETIC) -> QueryOutcome:
        if frame not in FRAMES:
            raise ValueError(f"unknown frame: {frame!r}")
        ctx = self.store.get_context(user_id)
        snap = self.store.snapshot(user_id)
        parser = self._parser_for(snap.entity_names())
        params = self.params.for_user(user_id)

        resolved = resolve(text, ctx, frame, self.lexicon)
        best = parser.parse_topk(resolved.text, params, k=1).argmax
        denotation = evaluate(best.form, snap, self.geometry)
        retrievals = tuple(self.store.get_media(mid) for mid in denotation.media_ids)

        record = QueryRecord(
            query_id=uuid.uuid4().hex,
            user_id=user_id,
            resolved_text=resolved.text,
            context=ctx,
            shown=denotation.media_ids,
        )
        with self._lock:
            bucket = self._history.setdefault(user_id, OrderedDict())
            bucket[record.query_id] = record
            while len(bucket) > self._history_limit:
                bucket.popitem(last=False)
        return QueryOutcome(
            query_id=record.query_id,
            user_id=user_id,
            resolved_text=resolved.text,
            logical_form=best.canonical,
            frame=frame,
            params_version=params.version,
            world_version=snap.version,
            retrievals=retrievals,
        )

    def feedback(
        self, user_id: str, query_id: str, marks: Mapping[str, bool] | Iterable[tuple[str, bool]]
    ) -> int:
        """Apply one relevance verdict to the user's fork; returns its version."""
        record = self._history.get(user_id, {}).get(query_id)
        if record is None:
            raise UnknownQuery(f"no stored query {query_id!r} for user {user_id!r}")
        items = marks.items() if isinstance(marks, Mapping) else list(marks)
        shown = set(record.shown)
        marked: set[str] = set()
        for media_id, relevant in items:
            if media_id not in shown:
                raise UnshownMark(f"media {media_id!r} was not shown for this query")
            if relevant:
                marked.add(media_id)

        with self._lock:
            params = self.params.ensure_fork(user_id)
            snap = self.store.snapshot_with(record.context)
            parser = self._parser_for(snap.entity_names())
            event = FeedbackEvent(
                user_id=user_id,
                query_text=record.resolved_text,
                context=record.context,
                shown=record.shown,
                marked_relevant=frozenset(marked),
                timestamp=record.context.query_time,
            )
            updated = feedback_update(
                event, snap, params, parser, self.feedback_eta, self.geometry
            )
            self.params.put(updated)
            return updated.version

    # -- media ----------------------------------------------------------------

    def media_record(self, media_id: str) -> MediaRecord | None:
        return self.store.get_media(media_id)

    def media_path(self, record: MediaRecord) -> Path:
        """Filesystem location for an ingested record; the file must exist."""
        path = Path(record.uri)
        if not path.is_absolute():
            path = self.media_root / path
        if not path.is_file():
            raise MissingMediaFile(f"media file for {record.id!r} is gone: {path}")
        return path

    # -- training --------------------------------------------------------------

    def train_shared(self, pairs, config: TrainConfig) -> TrainingReport:
        """Retrain the shared parameters from scratch on a corpus."""
        snap = self.store.snapshot_with(pairs[0].context)
        parser = self._parser_for(snap.entity_names())
        params, report = train(pairs, snap, config, parser, geometry=self.geometry)
        self.params.put(params)
        return report

    def parser_for_current_world(self, context: UserContext) -> Parser:
        return self._parser_for(self.store.snapshot_with(context).entity_names())

    def _parser_for(self, entities: Mapping[str, str]) -> Parser:
        with self._lock:
            if self._parser is None or self._parser_entities != entities:
                self._parser = Parser(self.lexicon.with_entities(entities))
                self._parser_entities = dict(entities)
            return self._parser

    # -- persistence --------------------------------------------------------------

    def save(self, data_dir: str | Path) -> None:
        base = Path(data_dir)
        self.store.save(base)
        params_dir = base / "params"
        params_dir.mkdir(parents=True, exist_ok=True)
        self.params.shared.save(params_dir / "shared.theta")
        for owner, fork in self.params.forks().items():
            fork.save(params_dir / f"{owner}.theta")

    def load(self, data_dir: str | Path) -> None:
        base = Path(data_dir)
        self.store.load(base)
        params_dir = base / "params"
        shared_path = params_dir / "shared.theta"
        store = ParamStore(
            ParamVector.load(shared_path) if shared_path.exists() else None
        )
        if params_dir.is_dir():
            for path in sorted(params_dir.glob("*.theta")):
                if path.name == "shared.theta":
                    continue
                store.put(ParamVector.load(path))
        self.params = store
        self._parser = None
        self._parser_entities = None
