"""Exception types shared across the package."""


class OrbisolError(Exception):
    """Base class for all package errors."""


class GeometryError(OrbisolError):
    """Structural defect in a geometry spec (bad index, dim mismatch)."""


class NonDiagonalRicci(OrbisolError):
    """Ricci of a diagonal metric has off-diagonal entries beyond tolerance."""


class SingularMetric(OrbisolError):
    """A metric scalar is zero or negative where positivity is required."""


class NonScalarCasimir(OrbisolError):
    """Casimir operator is not scalar on a declared irreducible summand."""


class ZeroLeadingCoefficient(OrbisolError):
    """Series inversion requested with vanishing leading coefficient."""


class LeadTooSingular(OrbisolError):
    """Laurent split requested on a series with a pole worse than t^-2."""


class InitialConditionViolated(OrbisolError):
    """One of the singular-point initial conditions fails numerically."""

    def __init__(self, quantity, value):
        self.quantity = quantity
        self.value = value
        super().__init__(f"initial condition violated: {quantity} = {value:.3e}")


class ConsistencyViolated(OrbisolError):
    """A recursion right-hand side has a component outside the operator image."""


class ParityViolated(OrbisolError):
    """An odd-order potential coefficient fails to vanish."""


class StabilizationNotReached(OrbisolError):
    """Kernel orders did not stabilize within the scan limit."""


class StepSizeUnderflow(OrbisolError):
    """The adaptive integrator failed to advance."""


class DataError(OrbisolError):
    """Invalid initial data (violates minimality or block support)."""
