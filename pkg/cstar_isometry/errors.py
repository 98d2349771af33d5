"""Module for the exceptions raised by the isometry toolkit."""
from typing import Optional


class CStarError(Exception):
    """Root of all toolkit errors.

    Parameters:
        message (str): Human readable description.
        residual (float, optional): The numeric residual behind the verdict, if any.
    """

    def __init__(self, message: str, residual: Optional[float] = None) -> None:
        super().__init__(message)
        self.residual = residual


class SingularMatrixError(CStarError):
    """A matrix failed the relative singular value gate."""


class SignatureMismatch(CStarError):
    """An element does not match the signature an operation expects."""


class IncompatibleSignatures(CStarError):
    """Two signatures cannot be related by the requested map."""


class NotCentralProjection(CStarError):
    pass


class NotJordanIso(CStarError):
    pass


class AmbiguousBlock(CStarError):
    """Neither the direct nor the transpose multiplicativity test passed on a block."""


class InvalidCertificate(CStarError):
    pass


class NotNormalized(CStarError):
    """The map does not send the identity to the identity."""


class NotSingleBlock(CStarError):
    pass


class InconsistentExtension(CStarError):
    """Reconstructions with two different shifts disagree; no real-linear extension exists."""


class DecompositionError(CStarError):
    """Raised by callers that need a certificate when decomposition rejected the map."""

    def __init__(self, failure) -> None:
        super().__init__(f"decomposition failed at {failure.describe()}", failure.residual)
        self.failure = failure


class MalformedInput(CStarError):
    """Interchange data is unreadable or ill-formed.

    Parameters:
        field (str): Dotted path of the offending field.
        message (str): What is wrong with it.
    """

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field
