class CavityDiffusionError(Exception):
    """Base class for every error raised by this package."""

    exit_code: int = 1


class SceneConfigError(CavityDiffusionError, ValueError):
    """
    Raised when a scene or run configuration is invalid.

    Every violation found is collected so that the user sees them all at once.

    Args:
        messages (list[str] | str): One message per violated invariant.
    """

    exit_code: int = 2

    def __init__(self, messages: list[str] | str):
        self.messages = [messages] if isinstance(messages, str) else list(messages)
        super().__init__("; ".join(self.messages))


class NumericalFailure(CavityDiffusionError, ArithmeticError):
    """Raised on singular solves or ill-conditioned linear systems."""

    exit_code: int = 3


class DegenerateKernelError(NumericalFailure):
    """Raised when a Liouvillian has no unique stationary state."""


class CrossCheckFailure(CavityDiffusionError):
    """Raised when two computation routes disagree beyond tolerance."""

    exit_code: int = 4


class OutputWriteError(CavityDiffusionError):
    """Raised when a result file cannot be written."""
