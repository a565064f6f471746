"""
Exception hierarchy shared by every module.

Each exception carries the CLI exit status it maps to and the name of the
module that raised it.
"""

from typing import Optional


class DvHilbertError(Exception):
    """Base class for library errors."""

    exit_code = 2

    def __init__(self, message: str, module: str = "dvhilbert"):
        super().__init__(message)
        self.module = module

    def __str__(self) -> str:
        return f"{self.module}: {super().__str__()}"


class InputError(DvHilbertError):
    """Invalid argument or malformed specification string."""


class ConfigError(InputError):
    """Unknown key or malformed value in a config file or flag."""


class HypothesisError(DvHilbertError):
    """A weight or symbol does not satisfy the conditions an operation needs."""

    def __init__(self, condition: str, subject: str, module: str, detail: str = ""):
        message = f"{condition} condition {detail or 'fails'} for {subject}"
        super().__init__(message, module)
        self.condition = condition
        self.subject = subject


class DegenerateBlock(DvHilbertError):
    """A sigma basis element was requested on a block where the symbol vanishes."""


class ResourceError(DvHilbertError):
    """The requested matrix does not fit the configured memory budget."""


class NumericalError(DvHilbertError):
    """Base class for non-convergence outcomes (exit status 3)."""

    exit_code = 3


class AccuracyNotReached(NumericalError):
    """Adaptive quadrature hit its panel budget; carries the best estimate."""

    def __init__(self, value: float, error: float, module: str = "quadrature", reason: str = ""):
        message = f"accuracy not reached (value={value:.17g}, error={error:.3g})"
        if reason:
            message = f"{message}: {reason}"
        super().__init__(message, module)
        self.value = value
        self.error = error


class DivergentQuantity(NumericalError):
    """A requested quantity is infinite; carries the divergence verdict."""

    def __init__(self, what: str, verdict, module: str):
        super().__init__(f"{what} diverges ({verdict.describe()})", module)
        self.verdict = verdict


class MomentUnderflow(NumericalError):
    """A moment is below the double range; extended precision is required."""

    def __init__(self, subject: str, x: float):
        super().__init__(
            f"moment x={x:g} of {subject} underflows in double precision; "
            "set precision = extended",
            "weights",
        )
        self.x = x


class SpectrumError(NumericalError):
    """Singular value computation did not converge."""


class VerificationFailed(DvHilbertError):
    """At least one verification assertion failed."""

    exit_code = 1

    def __init__(self, failed: int, total: int, detail: Optional[str] = None):
        message = f"{failed} of {total} assertions failed"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message, "verify")
        self.failed = failed
        self.total = total
