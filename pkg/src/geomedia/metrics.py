"""Retrieval scoring, learning curves, and cross-user comparison.

The headline precision/recall/f1 follow the conventions of the figures
this engine is benchmarked against: precision is relevant/retrieved,
but recall divides by the number of test queries rather than by the
number of relevant items. Both are percentages and f1 combines the two
percentages directly. ``standard_recall`` (relevant/total relevant) is
reported alongside when the caller can supply the denominator.

"Accuracy" throughout means exact set match between a query's
retrieval and its gold answer.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .context import GEOMAGNETIC, resolve
from .errors import NoCandidates, UnknownEntity
from .geometry import DEFAULT_GEOMETRY, GeometryConfig
from .logic import evaluate
from .parsing import ParamVector, Parser
from .learning import TrainConfig, TrainingPair, train
from .synth import GenConfig, generate_dataset
from .world import UserContext, WorldSnapshot


@dataclass(frozen=True)
class EvalReport:
    n_queries: int
    retrieved: int
    relevant: int
    precision: float
    recall: float
    f1: float
    accuracy: float | None = None
    standard_recall: float | None = None

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def as_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def score_run(
    predictions: Sequence[Sequence[str]],
    relevance: Sequence[Mapping[str, bool]],
    n_queries: int,
    gold: Sequence[frozenset[str]] | None = None,
    total_relevant: int | None = None,
) -> EvalReport:
    """Aggregate per-query retrievals into one report.

    ``relevance`` runs parallel to ``predictions`` and must label every
    retrieved id. ``gold`` enables the accuracy field; ``total_relevant``
    enables standard recall.
    """
    if n_queries <= 0:
        raise ValueError("n_queries must be positive")
    if len(predictions) != len(relevance):
        raise ValueError("predictions and relevance must run parallel")
    if gold is not None and len(gold) != len(predictions):
        raise ValueError("gold must run parallel to predictions")

    retrieved = 0
    relevant = 0
    for retrieval, labels in zip(predictions, relevance):
        for media_id in retrieval:
            if media_id not in labels:
                raise ValueError(f"retrieved id {media_id!r} has no relevance label")
            retrieved += 1
            if labels[media_id]:
                relevant += 1

    precision = 100.0 * relevant / retrieved if retrieved else 0.0
    recall = 100.0 * relevant / n_queries
    accuracy = None
    if gold is not None:
        hits = sum(
            1 for retrieval, want in zip(predictions, gold) if frozenset(retrieval) == want
        )
        accuracy = 100.0 * hits / n_queries
    standard = None
    if total_relevant is not None and total_relevant > 0:
        standard = 100.0 * relevant / total_relevant
    return EvalReport(
        n_queries=n_queries,
        retrieved=retrieved,
        relevant=relevant,
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
        accuracy=accuracy,
        standard_recall=standard,
    )


# --- serving helpers ----------------------------------------------------------


def run_pairs(
    pairs: Sequence[TrainingPair],
    w: WorldSnapshot,
    params: ParamVector,
    parser: Parser,
    frame: str = GEOMAGNETIC,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> list[tuple[str, ...]]:
    """Serve each pair's query with the given parameters.

    Unparseable queries retrieve nothing (and therefore miss).
    """
    out: list[tuple[str, ...]] = []
    for pair in pairs:
        world = w.with_context(pair.context)
        try:
            resolved = resolve(pair.query_text, pair.context, frame, parser.lexicon)
            best = parser.parse_topk(resolved.text, params, k=1).argmax
            out.append(evaluate(best.form, world, geometry).media_ids)
        except (NoCandidates, UnknownEntity):
            out.append(())
    return out


def score_against_gold(
    pairs: Sequence[TrainingPair],
    predictions: Sequence[Sequence[str]],
    with_standard_recall: bool = False,
) -> EvalReport:
    """Score predictions where relevance means membership in the pair's gold."""
    relevance = [
        {media_id: media_id in pair.gold_ids for media_id in retrieval}
        for pair, retrieval in zip(pairs, predictions)
    ]
    total = sum(len(pair.gold_ids) for pair in pairs) if with_standard_recall else None
    return score_run(
        predictions,
        relevance,
        n_queries=len(pairs),
        gold=[pair.gold_ids for pair in pairs],
        total_relevant=total,
    )


def exact_match_accuracy(
    pairs: Sequence[TrainingPair],
    w: WorldSnapshot,
    params: ParamVector,
    parser: Parser,
    frame: str = GEOMAGNETIC,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> float:
    predictions = run_pairs(pairs, w, params, parser, frame, geometry)
    hits = sum(
        1
        for pair, retrieval in zip(pairs, predictions)
        if frozenset(retrieval) == pair.gold_ids
    )
    return 100.0 * hits / len(pairs) if pairs else 0.0


def learning_curve(
    w: WorldSnapshot,
    gen_config: GenConfig,
    sizes: Sequence[int],
    eval_pairs: Sequence[TrainingPair],
    train_config: TrainConfig,
    parser: Parser,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> list[tuple[int, float]]:
    """Train one fresh model per size and measure held-out accuracy.

    Size 0 means the untrained (all-zero) parameter vector.
    """
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    points: list[tuple[int, float]] = []
    for size in sizes:
        if size == 0:
            params = ParamVector()
        else:
            dataset = generate_dataset(
                w, dataclasses.replace(gen_config, n=size), geometry
            )
            params, _ = train(dataset, w, train_config, parser, geometry=geometry)
        accuracy = exact_match_accuracy(
            eval_pairs, w, params, parser, train_config.frame, geometry
        )
        points.append((size, accuracy))
    return points


def curve_csv(points: Sequence[tuple[int, float]]) -> str:
    lines = ["size,accuracy"]
    lines.extend(f"{size},{accuracy:.4f}" for size, accuracy in points)
    return "\n".join(lines) + "\n"


# --- cross-user comparison ------------------------------------------------------

RelevanceOracle = Callable[..., bool]


def cross_user_matrix(
    models: Mapping[str, ParamVector],
    annotators: Mapping[str, RelevanceOracle],
    probes: Sequence[tuple[str, UserContext]],
    w: WorldSnapshot,
    parser: Parser,
    geometry: GeometryConfig = DEFAULT_GEOMETRY,
) -> dict[tuple[str, str], EvalReport]:
    """Score every model under every annotator on a shared probe set.

    Entry (i, j) evaluates user i's parameters by user j's notion of
    relevance. Serving always runs in the canonical frame; whatever a
    model has absorbed from feedback is what differentiates the rows.
    """
    if len(models) < 2:
        raise ValueError("need at least two users")
    if set(models) != set(annotators):
        raise ValueError("models and annotators must cover the same users")
    if not probes:
        raise ValueError("probe set is empty")

    media_by_id = {m.id: m for m in w.media}
    matrix: dict[tuple[str, str], EvalReport] = {}
    for model_user in sorted(models):
        params = models[model_user]
        predictions: list[tuple[str, ...]] = []
        worlds = []
        for text, ctx in probes:
            world = w.with_context(ctx)
            worlds.append(world)
            try:
                resolved = resolve(text, ctx, GEOMAGNETIC, parser.lexicon)
                best = parser.parse_topk(resolved.text, params, k=1).argmax
                predictions.append(evaluate(best.form, world, geometry).media_ids)
            except (NoCandidates, UnknownEntity):
                predictions.append(())
        for judge in sorted(annotators):
            oracle = annotators[judge]
            relevance = []
            for (text, _ctx), retrieval, world in zip(probes, predictions, worlds):
                relevance.append(
                    {mid: oracle(text, media_by_id[mid], world) for mid in retrieval}
                )
            matrix[(model_user, judge)] = score_run(
                predictions, relevance, n_queries=len(probes)
            )
    return matrix


def format_matrix(matrix: Mapping[tuple[str, str], EvalReport]) -> str:
    """Render f1 entries as a model-by-annotator table."""
    users = sorted({pair[0] for pair in matrix})
    judges = sorted({pair[1] for pair in matrix})
    width = max(12, max(len(u) for u in users + judges) + 2)
    header = "model\\judge".ljust(width) + "".join(j.rjust(width) for j in judges)
    rows = [header]
    for user in users:
        cells = "".join(f"{matrix[(user, j)].f1:{width}.2f}" for j in judges)
        rows.append(user.ljust(width) + cells)
    return "\n".join(rows)
