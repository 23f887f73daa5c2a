"""Typed error taxonomy shared by the engine, the store, the service and the CLI.

Every error carries a stable machine ``code`` (its class name) so the HTTP
layer and the CLI can report it uniformly.
"""

from __future__ import annotations


class PodiumError(Exception):
    """Base class for all engine errors."""

    http_status = 400

    @property
    def code(self) -> str:
        return type(self).__name__


class SchemaError(PodiumError):
    """Document structure is wrong (missing/mistyped field); names the path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantError(PodiumError):
    """Document is well-formed but violates a domain invariant; names the path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class RangeError(PodiumError):
    """Requested time span is empty or out of bounds."""


class EmptySeries(PodiumError):
    """A series statistic was asked of a series with no usable samples."""


class DegenerateMean(PodiumError):
    """Coefficient of variation is undefined: |mean| below tolerance."""


class InsufficientFrames(PodiumError):
    """Not enough keypoint frames for a pairwise statistic."""


class DegeneratePose(PodiumError):
    """Pose cannot be normalized (zero shoulder width or null pose vector)."""


class NoPoses(PodiumError):
    """Clustering was asked of a span with no usable poses."""


class DegenerateData(PodiumError):
    """Regression input carries no ordinal contrast or no variance."""


class SingularInformation(PodiumError):
    """Observed information matrix is not invertible; no standard errors."""


class UndefinedFactor(PodiumError):
    """A selected factor has no defined value on the query span."""

    def __init__(self, factor_id: str):
        super().__init__(f"factor {factor_id!r} is undefined on the query span")
        self.factor_id = factor_id


class EmptyCandidates(PodiumError):
    """No recommendation candidates remain after exclusions."""


class EmptyScript(PodiumError):
    """Script-based operation on a span with no sentences."""


class EmptyCorpus(PodiumError):
    """Corpus-wide statistic asked of an empty corpus."""


class NotFound(PodiumError):
    """Unknown speech id."""

    http_status = 404


class DuplicateId(PodiumError):
    """Ingest would overwrite an existing speech without --force."""

    http_status = 409


class StorageError(PodiumError):
    """Corpus store is damaged or an I/O operation failed."""

    http_status = 500
