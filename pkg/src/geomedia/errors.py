"""Exception types raised across the retrieval engine.

Every error carries a stable machine-readable ``code`` (used verbatim in
HTTP error bodies) plus a human message and an optional ``detail`` payload.
"""

from __future__ import annotations


class RetrievalError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str = "", detail=None):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.detail = detail


class EmptyName(RetrievalError):
    """A name normalized to the empty string."""

    code = "empty_name"


class MalformedXml(RetrievalError):
    """OSM input is not well-formed XML; ``byte_offset`` locates the defect."""

    code = "malformed_xml"

    def __init__(self, message: str, byte_offset: int):
        super().__init__(message, detail={"byte_offset": byte_offset})
        self.byte_offset = byte_offset


class InvalidCoordinate(RetrievalError):
    """Latitude outside [-90, 90], longitude outside [-180, 180], or not a number."""

    code = "invalid_coordinate"


class InvalidHeading(RetrievalError):
    """Heading is not a finite number."""

    code = "invalid_heading"


class UnknownFact(RetrievalError):
    """No fact with the given key exists in the store."""

    code = "unknown_fact"


class AliasCollision(RetrievalError):
    """Alias already names a different fact."""

    code = "alias_collision"


class AllLinesInvalid(RetrievalError):
    """Every line of a non-empty media manifest failed validation."""

    code = "all_lines_invalid"


class UnknownUser(RetrievalError):
    """No context has been set for this user."""

    code = "unknown_user"


class UnknownEntity(RetrievalError):
    """A const node references a name that resolves to no fact."""

    code = "unknown_entity"


class MalformedForm(RetrievalError):
    """Logical form does not match any interpretable shape."""

    code = "malformed_form"


class NoCandidates(RetrievalError):
    """No lexical trigger fired, so no candidate parse exists."""

    code = "no_candidates"

    def __init__(self, resolved_text: str):
        super().__init__(
            "no candidate parses for query", detail={"resolved_text": resolved_text}
        )
        self.resolved_text = resolved_text


class ConflictingTemporal(RetrievalError):
    """Query contains both a day-offset phrase and a month name."""

    code = "conflicting_temporal"


class EmptyDataset(RetrievalError):
    """Training requires at least one pair."""

    code = "empty_dataset"


class AlreadyForked(RetrievalError):
    """A parameter fork already exists for this user."""

    code = "already_forked"


class UnknownQuery(RetrievalError):
    """query_id not present in the feedback window."""

    code = "unknown_query"


class ExhaustedSampling(RetrievalError):
    """Could not draw enough non-empty-gold pairs from the world."""

    code = "exhausted_sampling"


class UnshownMark(RetrievalError):
    """Feedback marks reference media that were not shown for the query."""

    code = "unshown_mark"


class MissingMediaFile(RetrievalError):
    """Media record exists but its file is gone."""

    code = "missing_media_file"
