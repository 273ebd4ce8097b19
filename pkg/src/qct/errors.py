"""Exception hierarchy shared across the package.

Every error raised on invalid input names the violated invariant in its
message, so callers (in particular the CLI) can surface it verbatim.
"""


class QctError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QctError):
    """An object violates one of its declared invariants."""


class DimensionError(ValidationError):
    """Shapes or algebra dimensions of the operands do not match."""


class InternalError(QctError):
    """An operation produced an output violating its own contract."""


class ProtocolError(QctError):
    """A protocol is malformed (alternation, mailbox or move-count mismatch)."""


class ParseError(QctError):
    """A document could not be parsed against the JSON schema."""
