"""Exception types raised across the library.

The CLI maps these onto its exit-code contract, so commands can
distinguish bad input (schema/config), failed mathematical checks, and
the named abort conditions of the amplification pipeline.
"""


class NearRepError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NearRepError):
    """Input violates a structural invariant (shape, finiteness, residual)."""


class SchemaError(NearRepError):
    """A JSON/CSV/word file does not match the documented format."""


class NonSquareError(ValidationError):
    pass


class OverflowGuardError(NearRepError):
    """Materializing this product would exceed the configured max_dim."""


class DimensionTooLargeError(NearRepError):
    pass


class DimensionTooSmallError(NearRepError):
    pass


class RankMismatchError(NearRepError):
    pass


class ZeroRankError(NearRepError):
    pass


class PreconditionViolatedError(NearRepError):
    """A stated operation hypothesis fails, e.g. the compression bound of
    the almost-commuting fix."""


class OrthogonalityViolatedError(NearRepError):
    pass


class UnknownFunctionError(NearRepError):
    pass


class UnknownGeneratorError(NearRepError):
    pass


class UnknownFixtureError(NearRepError):
    pass


class BadParamsError(NearRepError):
    pass


class EmptyEError(NearRepError):
    pass


class ModeUnavailableError(NearRepError):
    pass


class GammaOutOfRangeError(NearRepError):
    """An element's normalized trace makes amplification impossible
    (trace equal to 1, or an explicit gamma outside [0, 1))."""

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class DefectBudgetExceededError(NearRepError):
    """Base representation too rough for the requested tolerance; tensor
    powers would amplify the homomorphism defect past it."""


class NotPSDError(ValidationError):
    pass


class NotUnitalError(ValidationError):
    pass


class OnbSearchExhausted(NearRepError):
    """No Haar rotation placed a full orthonormal basis inside the target
    set within the allowed number of tries.

    Carries the per-try column pass rates as a diagnostic for whether the
    measure hypothesis plausibly holds.
    """

    def __init__(self, max_tries, pass_rates):
        self.max_tries = max_tries
        self.pass_rates = tuple(float(r) for r in pass_rates)
        best = max(self.pass_rates) if self.pass_rates else 0.0
        super().__init__(
            f"no orthonormal basis found in {max_tries} tries "
            f"(best per-try column pass rate {best:.6f})"
        )


class DegenerateSingularValueWarning(UserWarning):
    """Polar factor extracted from a nearly singular matrix; the unitary
    part is deterministic for the backend but not stable under input
    perturbation."""
