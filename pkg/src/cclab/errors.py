"""Shared exception types for cclab."""


class CapacityError(Exception):
    """A requested object exceeds the desk-scale size guard."""


class StructureError(Exception):
    """A protocol tree is malformed (predicate outside its reachable set,
    bad speaker tag, or a node that is neither internal nor leaf)."""


class InvariantError(Exception):
    """An internal invariant that should be unreachable was violated.

    Raising this is itself a bug: tests treat reachability as a failure.
    """


class ParseError(Exception):
    """A file could not be parsed.  Carries 1-based line/column positions."""

    def __init__(self, message, line, col=None):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}" if col is None else f"line {line}, col {col}"
        super().__init__(f"{where}: {message}")
