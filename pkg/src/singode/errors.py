"""Exception types shared across the package."""
from __future__ import annotations


class SingodeError(Exception):
    """Base class for all package errors."""


class NumericalError(SingodeError):
    """A numerical procedure could not produce a trustworthy result."""


class NotOnLocus(SingodeError):
    def __init__(self, q, delta_value: float):
        super().__init__(f"point {tuple(q)} is not on the singular locus (delta = {delta_value!r})")
        self.q = q
        self.delta_value = delta_value


class NonTransversal(NumericalError):
    def __init__(self, lambda1: float):
        super().__init__(f"direction is tangent to the singular locus (lambda1 = {lambda1!r})")
        self.lambda1 = lambda1


class DegenerateEigen(NumericalError):
    def __init__(self, lambda2: float):
        super().__init__(f"M_p vanishes in this direction (lambda2 = {lambda2!r})")
        self.lambda2 = lambda2


class NotSingularPoint(SingodeError):
    def __init__(self, residual: float):
        super().__init__(f"jet point is not a singular point of the lifted field (|F| = {residual!r})")
        self.residual = residual


class StepSizeUnderflow(NumericalError):
    def __init__(self, t: float, state, trajectory=None):
        super().__init__(f"step size underflow at t = {t!r}, state = {tuple(state)}")
        self.t = t
        self.state = state
        self.trajectory = trajectory


class SeedRejected(NumericalError):
    pass


class InsufficientSamples(NumericalError):
    pass


class NotTraceable(SingodeError):
    def __init__(self, verdict):
        super().__init__(f"classification {verdict} does not allow tracing")
        self.verdict = verdict
