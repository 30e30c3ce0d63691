"""Exception hierarchy shared across the package.

The CLI maps ValidationError to exit code 1 and InternalError to exit
code 2; everything else is a plain bug.
"""


class ValidationError(ValueError):
    """User-supplied input is malformed or violates a stated precondition."""


class InternalError(RuntimeError):
    """A computed quantity broke an internal invariant (upstream bug)."""


class OutOfWindowError(ValidationError):
    """An OAM shift would move population outside the representable window."""
