"""Shared exception types.

The CLI maps these onto exit codes: ``UsageError`` -> 1, ``DataError``
(and subclasses) -> 2.
"""


class TopicHashError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(TopicHashError):
    """Bad command-line arguments or out-of-range configuration values."""


class DataError(TopicHashError):
    """Invalid input data: missing files, schema violations, contract breaches."""


class FormatError(DataError):
    """A file failed to parse; the message names the file and line."""

    def __init__(self, path, lineno, reason):
        self.path = str(path)
        self.lineno = lineno
        self.reason = reason
        super().__init__(f"{self.path}:{lineno}: {reason}")


class NoInVocabularyLemmas(DataError):
    """A document has no lemma in the model vocabulary; callers may skip it."""
