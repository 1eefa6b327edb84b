"""Exception hierarchy shared across the pipeline.

Every error carries a ``module`` tag so the CLI can report which stage
failed without inspecting tracebacks.
"""

from __future__ import annotations


class SmokescanError(Exception):
    """Base class for all pipeline errors."""

    module = "core"


# media ingest ---------------------------------------------------------------

class UnsupportedFormat(SmokescanError):
    """Input bytes are neither MP4 nor valid UTF-8 text."""

    module = "ingest"


class DecodeError(SmokescanError):
    """Video stream could not be decoded."""

    module = "ingest"


class EmptyVideoWarning(UserWarning):
    """Video shorter than one sampling interval; yields an empty sequence."""


# backend gateways -----------------------------------------------------------

class BackendUnavailable(SmokescanError):
    """Remote backend refused, timed out, or is unreachable."""

    module = "backend"


class MalformedResponse(SmokescanError):
    """Remote backend answered with data violating the wire contract."""

    module = "backend"


# filtering ------------------------------------------------------------------

class EmptyTrace(SmokescanError):
    module = "filter"


# classification / fusion ----------------------------------------------------

class MismatchedSource(SmokescanError):
    """Two selections refer to different frame sequences."""

    module = "classify"


class IndexOutOfRange(SmokescanError):
    """Selection contains a frame index outside the sequence."""

    module = "classify"


# text / corpus --------------------------------------------------------------

class InvalidSpan(SmokescanError):
    module = "ner"


class DictionaryTooSmall(SmokescanError):
    module = "corpus"


class BadTemplate(SmokescanError):
    """Prompt template must contain exactly one word-list placeholder."""

    module = "corpus"


# store ----------------------------------------------------------------------

class StoreError(SmokescanError):
    module = "store"


class DuplicateRunId(StoreError):
    pass


class UnknownRun(StoreError):
    pass


class UnknownUnit(StoreError):
    pass


class StorageFull(StoreError):
    pass


# service / cli --------------------------------------------------------------

class BindError(SmokescanError):
    module = "service"


class GoldFormatError(SmokescanError):
    module = "eval"
