"""Exception hierarchy shared by the kernel, the analysis pipeline and the CLI."""

from __future__ import annotations


class VicarError(Exception):
    """Base class for every error raised by vicar."""


class ExpressionSyntaxError(VicarError, ValueError):
    """An expression string does not conform to the grammar."""

    def __init__(self, message: str, source: str, position: int):
        self.source = source
        self.position = position
        pointer = " " * position + "^"
        super().__init__(f"{message} at column {position + 1}\n  {source}\n  {pointer}")


class UnknownIdentifier(ExpressionSyntaxError):
    """An identifier is neither a declared symbol nor a supported function."""


class DomainEvaluationError(VicarError, ArithmeticError):
    """Numeric evaluation left the real domain (negative radicand, log of non-positive, 1/0)."""


class ProblemFileError(VicarError):
    """A problem file failed to load or validate. Carries every message found."""

    def __init__(self, messages: list[str]):
        self.messages = messages
        super().__init__("\n".join(messages))


class EigenVerificationFailed(VicarError):
    """Supplied eigendata does not satisfy the eigen equation."""

    def __init__(self, label: int, component: int, residual: str):
        self.label = label
        self.component = component
        self.residual = residual
        super().__init__(
            f"Eigenvector {label} fails the eigen equation in component {component}: "
            f"residual {residual}"
        )


class AutoSolveUnavailable(VicarError):
    """Eigendata could not be computed automatically; the user must supply it."""


class SingularEigenvectorMatrix(VicarError):
    """The eigenvector matrix is not invertible on the domain box."""


class ExpansionMismatch(VicarError):
    """The two expansions of the eigenform derivatives disagree."""


class MissingEigendata(VicarError):
    """An analysis step needs eigendata that was neither supplied nor computable."""


class MissingCandidate(VicarError):
    """`check` was asked to verify a problem file without a multiplier or Cartan candidate."""
