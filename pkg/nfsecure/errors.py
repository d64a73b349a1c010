class NfSecureError(Exception):
    """Base class for errors raised by the library."""


class ConfigError(NfSecureError, ValueError):
    """Invalid scene, layout or experiment configuration."""


class NumericalError(NfSecureError, ArithmeticError):
    """A solver could not produce a finite, well-posed result."""


class SingularSystemError(NumericalError):
    """The mu = 0 beamformer system is numerically singular (needs positive mu)."""


class SolveAborted(NumericalError):
    """An inner solver failed; `trace` holds the secrecy trace up to the failure."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])
