"""
Game Toolkit Errors
Typed exception hierarchy shared by the analyzers, transformations and the
synthesizer. Entry points catch GameError and map it to exit codes or HTTP
responses; everything else is treated as an internal failure.
"""

from typing import Any, Optional, Sequence, Tuple


class GameError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 2
    http_status = 422

    def to_dict(self) -> dict:
        return {'error': type(self).__name__, 'message': str(self)}


class ResourceLimitError(GameError):
    """
    A configured cap was exceeded.

    Args:
        limit_name (str): Name of the limit as it appears in limits_config.json
        limit (int): Configured value
        explored (int): How much was explored when the cap was hit
    """

    def __init__(self, limit_name: str, limit: int, explored: int, what: str = ''):
        self.limit_name = limit_name
        self.limit = limit
        self.explored = explored
        detail = f" while {what}" if what else ''
        super().__init__(f"{limit_name}={limit} exceeded{detail} (explored {explored})")

    def to_dict(self) -> dict:
        data = super().to_dict()
        data.update({'limit_name': self.limit_name, 'limit': self.limit, 'explored': self.explored})
        return data


class AlphabetMismatchError(GameError):
    """Two objects that must share an alphabet do not."""


class UnknownLetterError(GameError):
    """A word or document refers to a letter outside the declared alphabet."""

    def __init__(self, letter: Any, alphabet_name: str = 'alphabet'):
        self.letter = letter
        super().__init__(f"letter {letter!r} is not in the {alphabet_name}")


class NonFunctionalError(GameError):
    """
    A relation expected to be a function is not.

    The counterexample is a pair of words that agree on the input component
    and disagree on the output component.
    """

    def __init__(self, message: str, counterexample: Optional[Tuple[Sequence, Sequence]] = None):
        self.counterexample = counterexample
        super().__init__(message)


class HierarchyViolationError(GameError):
    """An operation requiring hierarchical information was given a game without it."""

    def __init__(self, message: str, witness: Any = None):
        self.witness = witness
        super().__init__(message)


class ObservabilityError(GameError):
    """A coloring or condition is not observable by every player."""


class NotRecurringError(GameError):
    """Synthesis was requested on a game without recurring hierarchical information."""

    def __init__(self, message: str, witness: Any = None):
        self.witness = witness
        super().__init__(message)


class DocumentError(GameError):
    """A JSON document is malformed; location is a path such as moves[3].to."""

    http_status = 400

    def __init__(self, message: str, location: str = ''):
        self.message = message
        self.location = location
        where = f" at {location}" if location else ''
        super().__init__(f"{message}{where}")

    def to_dict(self) -> dict:
        data = super().to_dict()
        data['location'] = self.location
        return data


class DecompositionError(GameError):
    """Observations do not factor through the requested pipeline order."""


class AggregationError(GameError):
    """A router priority aggregation table is not monotone or not decisive."""


class PreconditionError(GameError):
    """A structural precondition of an operation does not hold."""
