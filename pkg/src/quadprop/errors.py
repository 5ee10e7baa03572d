"""Exception hierarchy shared by all quadprop modules."""


class QuadpropError(Exception):
    """Base class for every error raised by quadprop."""


class ParseError(QuadpropError, ValueError):
    """Malformed coefficient expression.

    Parameters
    ----------
    message : str
        Human readable diagnostic.
    offset : int
        Byte offset into the UTF-8 encoded source where the problem was found.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownIdentifierError(ParseError):
    def __init__(self, name, offset):
        super().__init__(f'unknown identifier "{name}"', offset)
        self.name = name


class NonFiniteError(QuadpropError, ArithmeticError):
    """Evaluation produced inf/nan or hit a domain error."""


class CausticError(QuadpropError):
    """Requested time is at (or numerically indistinguishable from) a zero of u."""

    def __init__(self, t, message=None):
        super().__init__(message or f"caustic at t={t!r}: characteristic u(t) vanishes")
        self.t = t


class IntegrationError(QuadpropError):
    """The ODE integrator failed; ``t`` is the time it reached."""

    def __init__(self, t, message):
        super().__init__(f"integration failed at t={t!r}: {message}")
        self.t = t


class ConvergenceError(QuadpropError):
    """Shooting or focusing iteration did not converge."""


class NyquistError(QuadpropError):
    """Quadrature grid too coarse for the local phase of the integrand."""


class SupportError(QuadpropError):
    """Wavefunction does not decay at the grid edges."""


class StepSizeError(QuadpropError):
    """No finite-difference step meets the requested truncation tolerance."""
