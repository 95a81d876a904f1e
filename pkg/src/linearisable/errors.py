"""Exception hierarchy shared by all modules."""


class LinearisableError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LinearisableError, ValueError):
    """Exact division by zero, evaluation at a pole, or an invalid argument."""


class PrecisionExhausted(LinearisableError, ArithmeticError):
    """A truncated series ran out of reliable coefficients."""

    def __init__(self, message="reliable window exhausted", step=None):
        super().__init__(message)
        self.step = step


class SpecError(LinearisableError, ValueError):
    """Malformed expression or spec file.  ``offset`` is a character offset when known."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class SingularOrbit(LinearisableError):
    def __init__(self, step, message=None):
        super().__init__(message or f"identically-zero denominator at step {step}")
        self.step = step


class DegenerateStage(LinearisableError):
    def __init__(self, step, stage=None):
        where = f" (stage {stage})" if stage is not None else ""
        super().__init__(f"zero-determinant stage matrix at step {step}{where}")
        self.step = step
        self.stage = stage


class SingularStep(LinearisableError):
    def __init__(self, step, message=None):
        super().__init__(message or f"vanishing leading coefficient at n={step}")
        self.step = step


class BlowUp(LinearisableError):
    def __init__(self, where, message=None):
        super().__init__(message or f"blow-up at {where}")
        self.where = where


class ConstraintViolated(LinearisableError):
    def __init__(self, coefficients):
        super().__init__(f"constraint polynomial is nonzero: {coefficients}")
        self.coefficients = coefficients


class LinearisationUnavailable(LinearisableError):
    def __init__(self, stage, message=None):
        super().__init__(message or f"leading coefficient of stage {stage} vanishes on the interval")
        self.stage = stage
