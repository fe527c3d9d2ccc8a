"""Scalar radiating Burgers model.

For ``u_t + (u**2/2)_x = -q_x`` with ``-q_xx + q = -u_x`` a traveling wave of
speed ``s = (u_- + u_+)/2`` integrates once to ``q = (a**2 - vhat**2)/2`` with
``vhat = u - s``, and the profile equation becomes the reduced planar system
with ``f = 1``.  Every quantity of the node analysis is then explicit, which
makes it an exact oracle for the gas pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateShockError, DiscriminantError, DomainError
from .glue import Profile
from .reduced import ReducedSystem
from .verify import DEFAULT_PAD_TOL, convolution_q, interior_mask

AMPLITUDE_MAX = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class BabySystem:
    u_minus: float
    u_plus: float

    def __post_init__(self):
        if not (math.isfinite(self.u_minus) and math.isfinite(self.u_plus)):
            raise DomainError("end states must be finite", u_minus=self.u_minus,
                              u_plus=self.u_plus)
        if self.u_minus == self.u_plus:
            raise DegenerateShockError("zero amplitude: u_- = u_+", a=0.0)
        if self.u_minus < self.u_plus:
            raise DomainError("shock requires u_- > u_+", u_minus=self.u_minus,
                              u_plus=self.u_plus)

    @property
    def a(self) -> float:
        return 0.5 * (self.u_minus - self.u_plus)

    @property
    def s(self) -> float:
        return 0.5 * (self.u_minus + self.u_plus)

    @classmethod
    def centred(cls, a: float, s: float = 0.0) -> "BabySystem":
        return cls(u_minus=s + a, u_plus=s - a)


def baby_reduced(a: float) -> ReducedSystem:
    """Reduced system with ``f = 1``; refuses ``a >= 1/sqrt(2)``."""
    if not math.isfinite(a) or a < 0.0:
        raise DomainError(f"amplitude must be a finite positive number, got {a!r}", a=a)
    if a == 0.0:
        raise DegenerateShockError("zero amplitude: the profile is constant", a=a)
    disc = 1.0 - 2.0 * a * a
    if disc <= 0.0:
        raise DiscriminantError("no smooth profile: 1 - 2 a^2 <= 0", f0=1.0, a=a,
                                discriminant=disc, a_max=AMPLITUDE_MAX)
    return ReducedSystem(a=float(a), f_coeffs=(1.0,), label="baby")


def baby_fields(profile: Profile, system: BabySystem) -> dict:
    """``u`` and the algebraic flux ``q = (a**2 - vhat**2)/2``."""
    a, v = profile.a, profile.v_hat
    return {"u": v + system.s, "q": 0.5 * (a - v) * (a + v)}


def baby_energy_check(profile: Profile, hermite: bool = True,
                      tol: float = DEFAULT_PAD_TOL) -> float:
    """Max |K_q u - (a**2 - vhat**2)/2| over the interior window.

    ``K_q u`` is the flux obtained from the profile by convolution, so the
    check does not presuppose the first integral.  ``hermite=False`` uses the
    piecewise-linear (second-order) quadrature.
    """
    mask = interior_mask(profile.xi, tol)
    a, v = profile.a, profile.v_hat
    q = convolution_q(profile.xi, v, profile.w if hermite else None, at=mask, tol=tol)
    return float(np.max(np.abs(q - 0.5 * (a - v[mask]) * (a + v[mask]))))
