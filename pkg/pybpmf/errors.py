# coding: utf-8
"""Exceptions and warning categories raised by pybpmf."""


class PybpmfError(Exception):
    """Base class of every error raised by this package."""


class EmptyBelief(PybpmfError, ArithmeticError):
    """All weights of a discrete belief vanished (numerical underflow upstream)."""


class InvalidPilotConfig(PybpmfError, ValueError):
    """Pilot layout cannot be built from the requested dimensions."""


class PilotViolation(PybpmfError, ValueError):
    """A user transmits on a subcarrier reserved for another user's pilot."""


class LengthMismatch(PybpmfError, ValueError):
    """Bit or symbol sequence does not fit the requested framing."""


class ZeroChannelBelief(PybpmfError, ArithmeticError):
    """Channel belief has (numerically) zero second moment."""


class ZeroSymbolBelief(PybpmfError, ArithmeticError):
    """Symbol belief has (numerically) zero second moment."""


class SingularTapSystem(PybpmfError, ArithmeticError):
    """Regularised tap-domain system could not be solved."""


class ConfigParse(PybpmfError, ValueError):
    """Configuration text is not in the key-value format."""


class ConfigInvalid(PybpmfError, ValueError):
    """Configuration parsed but violates one or more invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class MalformedResults(PybpmfError, ValueError):
    """Results file contains a line that is not a trial record."""


class DegenerateDivision(RuntimeWarning):
    """Gaussian division produced non-positive precision and was clamped."""


class ZeroResidual(RuntimeWarning):
    """Noise-precision update saw zero residual power and was clamped."""
