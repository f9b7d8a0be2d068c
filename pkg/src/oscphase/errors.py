"""Exception hierarchy shared by every oscphase module."""

from __future__ import annotations


class OscPhaseError(Exception):
    """Base class for all domain and numerical failures raised by oscphase."""

    #: short tag used in machine-readable result records
    status = "Error"


# -- numerical kernel ---------------------------------------------------------

class NonConvergence(OscPhaseError, ArithmeticError):
    status = "NonConvergence"


class NonFinite(OscPhaseError, ArithmeticError):
    """A function value or ODE state became non-finite (or exceeded the blow-up bound).

    ``last_time`` is the last time at which the state was still valid, when known.
    """

    status = "NonFinite"

    def __init__(self, message: str, last_time: float | None = None):
        super().__init__(message)
        self.last_time = last_time


class StepUnderflow(OscPhaseError, ArithmeticError):
    status = "StepUnderflow"


class NoBracket(OscPhaseError, ValueError):
    status = "NoBracket"


# -- classical data -----------------------------------------------------------

class DegenerateBasis(OscPhaseError, ValueError):
    status = "DegenerateBasis"


class Resonance(OscPhaseError, ValueError):
    status = "Resonance"


# -- wavefunctions ------------------------------------------------------------

class Overflow(OscPhaseError, OverflowError):
    status = "Overflow"


class RepresentationMismatch(OscPhaseError, ValueError):
    status = "RepresentationMismatch"


class NotQuasiPeriodic(OscPhaseError):
    status = "NotQuasiPeriodic"


# -- phases -------------------------------------------------------------------

class PhaseUndefined(OscPhaseError):
    status = "PhaseUndefined"


class FictitiousSolutionPresent(OscPhaseError, ValueError):
    status = "FictitiousSolutionPresent"


# -- Mathieu ------------------------------------------------------------------

class NoPeriodicEnvelope(OscPhaseError):
    status = "NoPeriodicEnvelope"


class NonPositive(OscPhaseError, ArithmeticError):
    status = "NonPositive"


class ResonantDenominator(OscPhaseError, ZeroDivisionError):
    status = "ResonantDenominator"


# -- front end ----------------------------------------------------------------

class ConfigError(OscPhaseError, ValueError):
    status = "ConfigError"
