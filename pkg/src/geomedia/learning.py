"""Weakly supervised training of the parse scorer, plus online feedback.

Supervision is (query, answer-set) pairs: a candidate form is
"consistent" when its denotation equals the gold set, and one update
moves the feature expectation of the consistent candidates ahead of
the expectation over all candidates,

    theta' = theta + eta * (E_consistent[phi] - E_all[phi]),

which is the gradient of the log-probability mass the model puts on
consistent parses. Training is full-batch over epochs with L2 decay
and step-halving, so the regularized objective never decreases from
one epoch to the next. Relevance feedback reuses the same update on a
per-user copy of the parameters: marked-relevant media become the gold
set, and an all-irrelevant verdict demotes the served parse instead.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .context import GEOMAGNETIC, resolve
from .errors import AlreadyForked, EmptyDataset, NoCandidates, UnknownEntity
from .geometry import DEFAULT_GEOMETRY, GeometryConfig
from .logic import evaluate
from .parsing import ParamVector, ParseChart, Parser, config_hash
from .world import UserContext, WorldSnapshot


@dataclass(frozen=True)
class TrainingPair:
    """One weakly labelled example: the asker's context and the media
    ids that count as the right answer."""

    query_text: str
    context: UserContext
    gold_ids: frozenset[str]

    def __post_init__(self):
        if not self.gold_ids:
            raise ValueError("gold_ids must be non-empty")
        object.__setattr__(self, "gold_ids", frozenset(self.gold_ids))


@dataclass(frozen=True)
class FeedbackEvent:
    """A user's verdict on what a query showed them.

    query_text carries the resolver output for the original query, so
    replaying it under the default frame reproduces the served parse.
    """

    user_id: str
    query_text: str
    context: UserContext
    shown: tuple[str, ...]
    marked_relevant: frozenset[str]
    timestamp: int

    def __post_init__(self):
        object.__setattr__(self, "shown", tuple(self.shown))
        object.__setattr__(self, "marked_relevant", frozenset(self.marked_relevant))
        if not self.marked_relevant <= set(self.shown):
            raise ValueError("marked_relevant must be a subset of shown")


@dataclass(frozen=True)
class TrainConfig:
    seed: int
    epochs: int = 10
    eta: float = 0.1
    l2: float = 1e-4
    frame: str = GEOMAGNETIC

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "epochs": self.epochs,
            "eta": self.eta,
            "l2": self.l2,
            "frame": self.frame,
        }


@dataclass
class EpochStats:
    objective: float
    eta: float
    halvings: int


@dataclass
class TrainingReport:
    initial_objective: float = 0.0
    epochs: list[EpochStats] = field(default_factory=list)
    skipped_pairs: int = 0
    config_hash: str = "none"

    @property
    def objectives(self) -> list[float]:
        return [e.objective for e in self.epochs]


@dataclass
class _PairChart:
    """Per-pair cache: candidates, features, and which are consistent.

    The candidate set does not depend on the parameters, so this is
    computed once per dataset and reused across epochs.
    """

    chart: ParseChart
    consistent: list[int]


def _build_pair_chart(
    pair: TrainingPair,
    w: WorldSnapshot,
    parser: Parser,
    frame: str,
    geometry: GeometryConfig,
) -> _PairChart | None:
    resolved = resolve(pair.query_text, pair.context, frame, parser.lexicon)
    try:
        chart = parser.chart(resolved.text)
    except NoCandidates:
        return None
    world = w.with_context(pair.context)
    consistent = []
    for i, form in enumerate(chart.forms):
        try:
            denotation = evaluate(form, world, geometry)
        except UnknownEntity:
            continue
        if denotation.as_set() == pair.gold_ids:
            consistent.append(i)
    return _PairChart(chart=chart, consistent=consistent)


def consistent_forms(
    pair: TrainingPair,
    w: WorldSnapshot,
    parser: Parser,
    frame: str = GEOMAGNETIC,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
):
    """Candidates whose denotation equals the pair's gold set."""
    cached = _build_pair_chart(pair, w, parser, frame, geometry)
    if cached is None:
        return []
    return [cached.chart.forms[i] for i in cached.consistent]


def _pair_gradient(cached: _PairChart, params: ParamVector) -> dict[str, float] | None:
    """E_consistent[phi] - E_all[phi] for one pair; None when skipped."""
    if not cached.consistent:
        return None
    probs = cached.chart.distribution(params)
    consistent_mass = sum(probs[i] for i in cached.consistent)
    if consistent_mass <= 0.0:
        return None
    grad: dict[str, float] = {}
    for i in cached.consistent:
        weight = probs[i] / consistent_mass
        for key, value in cached.chart.features[i].items():
            grad[key] = grad.get(key, 0.0) + weight * value
    for i, feats in enumerate(cached.chart.features):
        p = probs[i]
        for key, value in feats.items():
            grad[key] = grad.get(key, 0.0) - p * value
    return grad


def _pair_objective(cached: _PairChart, params: ParamVector) -> float | None:
    """log of the probability mass on consistent candidates."""
    if not cached.consistent:
        return None
    probs = cached.chart.distribution(params)
    mass = sum(probs[i] for i in cached.consistent)
    if mass <= 0.0:
        return None
    return math.log(mass)


def grad_step(
    pair: TrainingPair,
    w: WorldSnapshot,
    params: ParamVector,
    eta: float,
    parser: Parser,
    frame: str = GEOMAGNETIC,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> ParamVector:
    """One promotion step toward the pair's consistent candidates.

    Returns the parameters unchanged when no candidate is consistent.
    """
    cached = _build_pair_chart(pair, w, parser, frame, geometry)
    if cached is None:
        return params
    grad = _pair_gradient(cached, params)
    if grad is None:
        return params
    return params.updated(grad, scale=eta)


def _regularized_objective(
    charts: list[_PairChart], params: ParamVector, l2: float
) -> float:
    total = 0.0
    for cached in charts:
        value = _pair_objective(cached, params)
        if value is not None:
            total += value
    penalty = 0.5 * l2 * sum(v * v for v in params.weights.values())
    return total - penalty


def train(
    dataset: list[TrainingPair],
    w: WorldSnapshot,
    config: TrainConfig,
    parser: Parser,
    start: ParamVector | None = None,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> tuple[ParamVector, TrainingReport]:
    """Batch gradient ascent on the log consistent-parse mass.

    Each epoch sums per-pair gradients (in a seeded shuffled order),
    applies L2 decay, and halves the step until the regularized
    objective does not decrease (at most 10 halvings; failing that the
    epoch keeps the previous parameters). Deterministic for fixed
    (dataset, config, seed).
    """
    if not dataset:
        raise EmptyDataset("training needs at least one pair")
    rng = random.Random(config.seed)
    chash = config_hash(config.as_dict())

    trainable: list[_PairChart] = []
    skipped = 0
    for pair in dataset:
        cached = _build_pair_chart(pair, w, parser, config.frame, geometry)
        if cached is None or not cached.consistent:
            skipped += 1
        else:
            trainable.append(cached)

    params = start if start is not None else ParamVector(config_hash=chash)
    if params.config_hash == "none":
        params = ParamVector(
            weights=dict(params.weights),
            owner=params.owner,
            version=params.version,
            config_hash=chash,
        )
    report = TrainingReport(skipped_pairs=skipped, config_hash=chash)
    report.initial_objective = _regularized_objective(trainable, params, config.l2)

    eta = config.eta
    best = report.initial_objective
    for _ in range(config.epochs):
        order = list(range(len(trainable)))
        rng.shuffle(order)
        halvings = 0
        while True:
            grad_total: dict[str, float] = {}
            for idx in order:
                grad = _pair_gradient(trainable[idx], params)
                if grad is None:
                    continue
                for key, value in grad.items():
                    grad_total[key] = grad_total.get(key, 0.0) + value
            for key, value in params.weights.items():
                grad_total[key] = grad_total.get(key, 0.0) - config.l2 * value
            candidate = params.updated(grad_total, scale=eta)
            objective = _regularized_objective(trainable, candidate, config.l2)
            if objective >= best:
                params = candidate
                best = objective
                break
            if halvings >= 10:
                # keep previous parameters; objective unchanged
                objective = best
                break
            eta /= 2.0
            halvings += 1
        report.epochs.append(EpochStats(objective=best, eta=eta, halvings=halvings))
    return params, report


def fork_params(user_id: str, shared: ParamVector) -> ParamVector:
    """Copy the shared parameters into a per-user fork."""
    return ParamVector(
        weights=dict(shared.weights),
        owner=user_id,
        version=shared.version,
        config_hash=shared.config_hash,
    )


def feedback_update(
    event: FeedbackEvent,
    w: WorldSnapshot,
    params: ParamVector,
    parser: Parser,
    eta: float = 0.1,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> ParamVector:
    """Fold one relevance verdict into a user's parameters.

    Marked media become gold for a promotion step. An empty verdict
    demotes the currently served parse:

        theta' = theta - eta * (phi(argmax) - E_all[phi])

    which is a no-op when only one candidate exists.
    """
    if event.marked_relevant:
        pair = TrainingPair(
            query_text=event.query_text,
            context=event.context,
            gold_ids=frozenset(event.marked_relevant),
        )
        return grad_step(pair, w, params, eta, parser, GEOMAGNETIC, geometry)

    resolved = resolve(event.query_text, event.context, GEOMAGNETIC, parser.lexicon)
    try:
        chart = parser.chart(resolved.text)
    except NoCandidates:
        return params
    probs = chart.distribution(params)
    scores = chart.scores(params)
    order = sorted(
        range(len(chart.forms)), key=lambda i: (-scores[i], chart.canonicals[i])
    )
    top = order[0]
    delta: dict[str, float] = dict(chart.features[top])
    for i, feats in enumerate(chart.features):
        for key, value in feats.items():
            delta[key] = delta.get(key, 0.0) - probs[i] * value
    return params.updated(delta, scale=-eta)


def run_feedback_rounds(
    user_id: str,
    annotator,
    queries,
    w: WorldSnapshot,
    params: ParamVector,
    parser: Parser,
    eta: float = 0.1,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> ParamVector:
    """Simulate a user's feedback session.

    ``queries`` is a sequence of (query_text, context); ``annotator`` is
    a callable (query_text, media, world) -> bool. Each round serves the
    query with the current parameters, lets the annotator mark the shown
    media, and applies feedback_update. Unparseable queries and queries
    that showed nothing are skipped; there is no gallery to judge, so a
    simulated user submits no verdict.
    """
    media_by_id = {m.id: m for m in w.media}
    for text, ctx in queries:
        world = w.with_context(ctx)
        try:
            resolved = resolve(text, ctx, GEOMAGNETIC, parser.lexicon)
            best = parser.parse_topk(resolved.text, params, k=1).argmax
        except NoCandidates:
            continue
        try:
            shown = evaluate(best.form, world, geometry).media_ids
        except UnknownEntity:
            continue
        if not shown:
            continue
        marked = frozenset(
            mid for mid in shown if annotator(text, media_by_id[mid], world)
        )
        event = FeedbackEvent(
            user_id=user_id,
            query_text=resolved.text,
            context=ctx,
            shown=shown,
            marked_relevant=marked,
            timestamp=ctx.query_time,
        )
        params = feedback_update(event, world, params, parser, eta, geometry)
    return params


class ParamStore:
    """Shared parameters plus per-user forks, with explicit fork control."""

    def __init__(self, shared: ParamVector | None = None):
        self.shared = shared if shared is not None else ParamVector()
        self._forks: dict[str, ParamVector] = {}

    def for_user(self, user_id: str) -> ParamVector:
        return self._forks.get(user_id, self.shared)

    def has_fork(self, user_id: str) -> bool:
        return user_id in self._forks

    def fork(self, user_id: str) -> ParamVector:
        if user_id in self._forks:
            raise AlreadyForked(f"user {user_id!r} already has a fork")
        forked = fork_params(user_id, self.shared)
        self._forks[user_id] = forked
        return forked

    def ensure_fork(self, user_id: str) -> ParamVector:
        if user_id not in self._forks:
            self._forks[user_id] = fork_params(user_id, self.shared)
        return self._forks[user_id]

    def forks(self) -> dict[str, ParamVector]:
        return dict(self._forks)

    def put(self, params: ParamVector) -> None:
        if params.owner == "shared":
            self.shared = params
        else:
            self._forks[params.owner] = params
