from __future__ import annotations

from dataclasses import dataclass

Location = tuple[int, int] | None


@dataclass(frozen=True)
class ModelError:
    code: str
    message: str
    location: Location = None


class FdlError(Exception):
    """Base class for all domain errors raised by the toolkit."""


class ResolutionError(FdlError):
    """One or more reference or invariant errors found while resolving a model."""

    def __init__(self, errors: list[ModelError]):
        self.errors = list(errors)
        super().__init__("; ".join(f"{e.code}: {e.message}" for e in self.errors))


class InvalidGenome(FdlError):
    pass


class MismatchedObjectives(FdlError, ValueError):
    pass


class NoObjectives(FdlError):
    pass


class TooLarge(FdlError):
    pass


class NoCompatibleDevices(FdlError):
    pass


class AlreadyExpanded(FdlError):
    pass


class IncompatibleLine(FdlError):
    pass


class Unscheduled(FdlError):
    pass


class CyclicRelation(FdlError):
    pass
