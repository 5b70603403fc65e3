class EndspaceError(Exception):
    """Base class for domain errors; the CLI maps these to exit status 1."""


class StructureError(EndspaceError):
    """Input is malformed (bad matrix shape, asymmetric distances, bad indices)."""


class NotUltrametricError(EndspaceError):
    pass


class PreconditionError(EndspaceError):
    """An operation was called outside its hypothesis (e.g. non-rigid input)."""


class NotPeriodicError(EndspaceError):
    """An exact decision needs an eventually periodic description."""
