"""Integrability diagnostics: degree growth, singularity confinement, cascade
linearisation and derivative-matching linearisation, discrete and continuous."""

__version__ = "0.1.0"

from .errors import (BlowUp, ConstraintViolated, DegenerateStage, DomainError,  # noqa: E402
                     LinearisableError, LinearisationUnavailable, PrecisionExhausted,
                     SingularOrbit, SingularStep, SpecError)

__all__ = [
    "__version__", "BlowUp", "ConstraintViolated", "DegenerateStage", "DomainError",
    "LinearisableError", "LinearisationUnavailable", "PrecisionExhausted", "SingularOrbit",
    "SingularStep", "SpecError",
]
