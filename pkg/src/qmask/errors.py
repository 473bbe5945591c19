"""Exception types shared across the package."""


class QmaskError(Exception):
    """Base class for library errors."""


class NotPrimePower(QmaskError, ValueError):
    pass


class NoMolsExists(QmaskError, ValueError):
    """No pair of orthogonal Latin squares exists for the requested order."""


class UnsupportedOrder(QmaskError, ValueError):
    """Orthogonal squares exist but no built-in construction covers the order."""


class InvalidMols(QmaskError, ValueError):
    pass


class NotIsometric(QmaskError, ValueError):
    pass


class CoefficientMismatch(QmaskError):
    """Schmidt coefficient multisets differ between images that should share a marginal."""


class DisagreementAtTolerance(QmaskError):
    """The masking verdict and the erasure-correction verdict disagree."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class KLViolated(QmaskError):
    """The code fails the Knill-Laflamme conditions for the channel's errors."""


class SchemaError(QmaskError, ValueError):
    """A JSON artifact does not match its schema; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
