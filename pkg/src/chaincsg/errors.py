"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto
its documented status codes (2 validation, 3 geometry, 4 I/O).
"""


class ChainCSGError(Exception):
    exit_code = 1


class ValidationError(ChainCSGError, ValueError):
    exit_code = 2


class DimensionError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnboundedResultError(ValidationError):
    pass


class GeometryError(ChainCSGError):
    exit_code = 3


class DegenerateFaceError(GeometryError):
    pass


class NonRegularError(GeometryError):
    pass


class NonWatertightError(GeometryError):
    pass


class ExactnessError(GeometryError):
    pass


class ClassificationError(GeometryError):
    pass


class ChainIOError(ChainCSGError, OSError):
    exit_code = 4
