"""Exception taxonomy shared across the library.

Loaders collect per-record problems into :class:`RecordError` lists instead of
failing fast; everything else raises.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class NewscapError(Exception):
    """Base class for all library errors."""


class MalformedFile(NewscapError):
    """The container (JSON / JSON-lines / TSV) could not be parsed."""


class DuplicateClipId(NewscapError):
    def __init__(self, clip_id: str):
        super().__init__(f"duplicate clip_id: {clip_id!r}")
        self.clip_id = clip_id


class DuplicateCaptionKey(NewscapError):
    def __init__(self, clip_id: str, model_id: str):
        super().__init__(f"duplicate caption key: ({clip_id!r}, {model_id!r})")
        self.clip_id = clip_id
        self.model_id = model_id


class InvalidBounds(NewscapError):
    """Bad duration bounds or histogram bin widths."""


@dataclass
class RecordError:
    """A single rejected record: its position and what was wrong with it."""

    index: int
    fields: list[str] = field(default_factory=list)

    def __str__(self) -> str:
        return f"record {self.index}: invalid/missing fields {self.fields}"


class DimensionMismatch(NewscapError):
    pass


class ZeroVector(NewscapError):
    pass


class EmptyTokenization(NewscapError):
    pass


class NoFrames(NewscapError):
    pass


class IncompleteMatrix(NewscapError):
    def __init__(self, missing):
        super().__init__(f"missing (clip, model) pairs: {sorted(missing)}")
        self.missing = sorted(missing)


class TooFewClips(NewscapError):
    pass


class LengthMismatch(NewscapError):
    pass


class MissingResource(NewscapError):
    """A requested matcher stage has no resource bound (e.g. synonym table)."""


class BackendError(NewscapError):
    """Base for failures originating at a model backend."""


class BackendUnavailable(BackendError):
    pass


class FixtureMiss(BackendError):
    def __init__(self, kind: str, key: str):
        super().__init__(f"fixture miss for kind={kind} key={key}")
        self.kind = kind
        self.key = key


class ProtocolError(BackendError):
    pass


class BackendTimeout(BackendUnavailable):
    pass


class EmptyTable(NewscapError):
    pass
