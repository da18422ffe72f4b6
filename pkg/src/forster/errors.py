"""Exception types shared across the package."""


class ForsterError(Exception):
    """Base class for all algorithmic errors raised by this package.

    Carries an optional ``details`` dict with diagnostic values so that the
    CLI can emit a structured error report.
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ZeroVector(ForsterError):
    """A point with zero (or numerically zero) norm entered the pipeline."""


class SingularTransform(ForsterError):
    """A transform failed the invertibility criterion."""


class NotSymmetric(ForsterError):
    """Matrix expected to be symmetric is not, beyond tolerance."""


class NotPSD(ForsterError):
    """Matrix expected to be PSD has a Rayleigh quotient below -tol."""


class EigenFailed(ForsterError):
    """Approximate eigendecomposition failed verification after all retries."""


class AllEqual(ForsterError):
    """Eigenvalue gap split requested but all consecutive gaps are ~zero."""


class PreconditionViolated(ForsterError):
    """An operation was called outside its stated precondition."""


class IterationCapExceeded(ForsterError):
    """The improvement loop hit its iteration cap without terminating."""


class NoProgress(ForsterError):
    """No probed step decreased the potential (practical-mode line search)."""


class CertificateInvalid(ForsterError):
    """A dense-subspace certificate failed its direct count verification."""


class DoesNotSpan(ForsterError):
    """The point set does not span the ambient space."""


class GapTooSmall(ForsterError):
    """Condition-reduction step requires a larger singular gap (g <= 10)."""


class MaxRoundsExceeded(ForsterError):
    """Rounding loop failed to bring the condition number under threshold."""


class MagnitudeCapExceeded(ForsterError):
    """Entry rounding would need integers above the exact-float cap 2**53."""


class DegenerateInput(ForsterError):
    """Recursive decomposition lost all points at some level."""


class NotSeparable(ForsterError):
    """Margin perceptron exhausted its update budget on every start."""


class RoundBudgetExceeded(ForsterError):
    """Decision-list learner ran out of rounds before its stop rule fired."""


class BadSpec(ForsterError):
    """Unparseable synthetic-data specification string."""
