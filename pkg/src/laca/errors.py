"""Exception hierarchy shared across the package.

Everything raised on purpose derives from :class:`LacaError`, so callers
(and the CLI) can distinguish our validation failures from genuine bugs.
"""

from __future__ import annotations


class LacaError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(LacaError):
    """A file could not be parsed (malformed JSON/JSONL/CSV)."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" in {path}"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{message}{where}")


class ValidationError(LacaError):
    """Data parsed fine but violates an invariant."""


class DuplicateId(ValidationError):
    """The same id appears twice where ids must be unique."""

    def __init__(self, duplicate: str, line: int | None = None):
        self.duplicate = duplicate
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate id {duplicate!r}{where}")


class MissingColumn(ParseError):
    """A CSV file lacks a required header column."""


class IllegalLabel(ValidationError):
    """A rating carries a label that is not legal for its code."""

    def __init__(self, document_id: str, code_id: str | None, value: str):
        self.document_id = document_id
        self.code_id = code_id
        self.value = value
        super().__init__(
            f"illegal label {value!r} for code {code_id!r} on document {document_id!r}"
        )


class SampleTooLarge(LacaError):
    """Requested sample size exceeds the corpus size."""


class InvalidInput(LacaError):
    """An argument is outside the documented domain."""


class DuplicateDecision(LacaError):
    """More than one decision for the same (document, code) by one rater."""


class DegenerateTable(LacaError):
    """A ratings table does not meet the minimum shape for a statistic."""


class UndefinedKappa(LacaError):
    """Chance agreement is 1, so the kappa denominator vanishes."""


class NoDecisions(LacaError):
    """A computation was asked for but no usable decisions exist."""


class MissingHumanRatings(LacaError):
    """A human rating file covers none of the sampled documents."""


class ProviderError(LacaError):
    """Base class for completion-provider failures."""


class NetworkError(ProviderError):
    """Transport failure that persisted through the retry policy."""


class RateLimited(ProviderError):
    """Rate limiting that persisted through the retry policy."""


class ReplayMiss(ProviderError):
    """Replay mode saw a request absent from the cassette."""

    def __init__(self, request_hash: str):
        self.request_hash = request_hash
        super().__init__(f"no cassette entry for request hash {request_hash}")


class MalformedResponse(ProviderError):
    """The wire payload lacks the expected fields."""
