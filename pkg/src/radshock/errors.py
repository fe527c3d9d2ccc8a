"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front end and a
``details`` mapping that is serialized into the machine-readable error record.
"""

from __future__ import annotations


class RadShockError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 3

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def to_record(self) -> dict:
        record = {"error": type(self).__name__, "message": str(self)}
        for key, value in self.details.items():
            record[key] = _plain(value)
        return record


def _plain(value):
    try:
        import numpy as np
    except ImportError:  # pragma: no cover
        return value
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


# -- validation refusals (exit status 2) -------------------------------------

class ValidationError(RadShockError):
    exit_code = 2


class DomainError(ValidationError):
    """Non-physical input (non-positive density or energy, gamma <= 1, ...)."""


class LaxError(ValidationError):
    """The jump does not satisfy the 1-shock Lax inequalities."""


class GammaConditionError(ValidationError):
    """Adiabatic index outside the range covered by the existence theory."""


class DegenerateShockError(ValidationError):
    """Zero amplitude: the profile is constant and there is nothing to compute."""


class DiscriminantError(ValidationError):
    """f(0)**2 - 2 a**2 <= 0: no C^2 profile can cross vhat = 0."""


class AmplitudeTooLargeError(ValidationError):
    """A small-amplitude hypothesis (node ordering, f' > 0, ...) fails."""


class ConfigError(ValidationError):
    """Malformed run configuration."""


# -- numerical failures (exit status 3) --------------------------------------

class NumericalError(RadShockError):
    exit_code = 3


class IntegrationError(NumericalError):
    """The ODE integrator failed or exhausted its step budget."""


class ContainmentError(NumericalError):
    """A trajectory left its trapping region K1 / K2."""


class NullclineError(NumericalError):
    """The nullcline geometry does not match the small-amplitude picture."""


class ReparametrizationError(NumericalError):
    """The map from eta to xi is not monotone."""


class GluingError(NumericalError):
    """One-sided derivatives of w at xi = 0 do not match."""


class ReconstructionError(NumericalError):
    """Reconstructed physical fields are non-physical."""


class PaddingError(NumericalError):
    """Convolution evaluation point too close to the edge of the grid."""


class ExpansionOrderError(NumericalError):
    """Requested expansion order exceeds what the node conditions allow."""


class FitError(NumericalError):
    """Not enough profile samples near xi = 0 for the expansion fit."""


class VerificationError(NumericalError):
    """One or more verification gates failed."""


# -- I/O (exit status 4) -----------------------------------------------------

class ProfileFormatError(RadShockError):
    exit_code = 4
