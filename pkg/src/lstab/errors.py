"""Exception types raised by lstab."""


class LStabError(Exception):
    """Base class for all lstab errors."""


class ConfigError(LStabError):
    """Invalid configuration or command-line usage."""


class DataError(LStabError):
    """Problems with input data (schema, parsing, integrity, dimensions)."""


class SchemaError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        if row is not None:
            message = f"{message} (row {row}, column {column!r})"
        super().__init__(message)
        self.row = row
        self.column = column


class IntegrityError(DataError):
    pass


class DimensionError(DataError):
    pass


class DomainError(DataError):
    pass


class TupleNotFound(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class SizeError(DataError):
    """Oracle refused a problem too large to enumerate."""


class UnsupportedOperation(LStabError):
    pass


class RankingError(LStabError):
    """External ranking process failed or produced malformed output."""
