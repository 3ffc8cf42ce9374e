"""Contextual retrieval of geo/time-tagged media from natural-language queries.

Questions like "what is in front of the bus terminal?" are parsed into
small logical forms, interpreted against a world of map facts, media
metadata and the asker's position/heading/time, and answered with an
ordered set of media. The parse scorer is trained from (question,
answer-set) pairs only and can be forked and personalized per user
through relevance feedback.
"""

from .context import GEOMAGNETIC, USER_CENTRIC, ResolvedQuery, resolve
from .engine import QueryOutcome, RetrievalEngine
from .errors import RetrievalError
from .geometry import (
    DEFAULT_GEOMETRY,
    GeometryConfig,
    SPATIAL_RELATIONS,
    eval_spatial,
    haversine_m,
    initial_bearing_deg,
)
from .learning import (
    FeedbackEvent,
    ParamStore,
    TrainConfig,
    TrainingPair,
    TrainingReport,
    feedback_update,
    fork_params,
    grad_step,
    run_feedback_rounds,
    train,
)
from .lexicon import Lexicon, default_lexicon
from .logic import (
    Denotation,
    LogicalForm,
    day_form,
    evaluate,
    month_form,
    parse_canonical_text,
    spatial_form,
    to_canonical_text,
    view_entity_form,
)
from .metrics import (
    EvalReport,
    cross_user_matrix,
    exact_match_accuracy,
    f1_score,
    learning_curve,
    score_run,
)
from .parsing import ParamVector, Parser, ParseResult, ScoredParse
from .synth import GenConfig, generate_dataset, random_world, scripted_annotator
from .world import (
    GeoFact,
    MediaRecord,
    UserContext,
    WorldSnapshot,
    WorldStore,
    normalize_name,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_GEOMETRY",
    "Denotation",
    "EvalReport",
    "FeedbackEvent",
    "GEOMAGNETIC",
    "GenConfig",
    "GeoFact",
    "GeometryConfig",
    "Lexicon",
    "LogicalForm",
    "MediaRecord",
    "ParamStore",
    "ParamVector",
    "ParseResult",
    "Parser",
    "QueryOutcome",
    "ResolvedQuery",
    "RetrievalEngine",
    "RetrievalError",
    "SPATIAL_RELATIONS",
    "ScoredParse",
    "TrainConfig",
    "TrainingPair",
    "TrainingReport",
    "USER_CENTRIC",
    "UserContext",
    "WorldSnapshot",
    "WorldStore",
    "cross_user_matrix",
    "day_form",
    "default_lexicon",
    "eval_spatial",
    "evaluate",
    "exact_match_accuracy",
    "f1_score",
    "feedback_update",
    "fork_params",
    "generate_dataset",
    "grad_step",
    "haversine_m",
    "initial_bearing_deg",
    "learning_curve",
    "month_form",
    "normalize_name",
    "parse_canonical_text",
    "random_world",
    "resolve",
    "run_feedback_rounds",
    "score_run",
    "scripted_annotator",
    "spatial_form",
    "to_canonical_text",
    "train",
    "view_entity_form",
]
