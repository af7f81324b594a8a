"""Exception types shared across the package."""


class KronnetError(Exception):
    """Base class for all errors raised by this package."""


class BadConfig(KronnetError):
    """Model configuration is structurally invalid (shape, types, schema)."""


class EntryOutOfRange(BadConfig):
    """A seed-matrix entry lies outside [0, 1]."""


class BadLevels(BadConfig):
    """Level counts violate 1 <= untied_levels <= levels."""


class Overflow(KronnetError):
    """An exact integer quantity exceeds its permitted range."""


class CapExceeded(KronnetError):
    """A dense enumeration would exceed the configured entry cap."""


class IndexOutOfRange(KronnetError):
    """A node index lies outside [0, n_nodes)."""


class GroupCapExceeded(KronnetError):
    """The number of distinct probability groups exceeds the configured cap."""


class BadArgs(KronnetError):
    """An argument violates a documented precondition."""
