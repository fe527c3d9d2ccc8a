"""Gamma-law gas thermodynamics and 1-shock Rankine-Hugoniot data.

The Hugoniot half-curve through a given pre-shock (left) state is
parametrized by the pre-shock Mach number ``M = v_- / c_-`` measured in the
shock frame.  For a gamma-law gas the amplitude ``a = (v_- - v_+)/2`` is an
explicit increasing function of ``M``,

    a(M) = c_- (M**2 - 1) / ((gamma + 1) M),

so the Mach number hitting a prescribed amplitude is the positive root of a
quadratic and no iterative root finding is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateShockError, DomainError, LaxError, NumericalError

RH_RTOL = 1e-12
AMPLITUDE_RTOL = 1e-10


@dataclass(frozen=True)
class GasConstants:
    gamma: float
    R: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 1.0):
            raise DomainError(f"adiabatic index must satisfy gamma > 1, got {self.gamma!r}",
                              gamma=self.gamma)
        if not (math.isfinite(self.R) and self.R > 0.0):
            raise DomainError(f"gas constant must be positive, got {self.R!r}", R=self.R)


@dataclass(frozen=True)
class GasState:
    """Primitive state: density, bulk velocity, specific internal energy."""

    rho: float
    u: float
    e: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.rho, self.u, self.e)):
            raise DomainError("gas state must be finite", rho=self.rho, u=self.u, e=self.e)
        if self.rho <= 0.0 or self.e <= 0.0:
            raise DomainError(f"density and internal energy must be positive, got "
                              f"rho={self.rho!r}, e={self.e!r}", rho=self.rho, e=self.e)

    def reflected(self) -> "GasState":
        """State seen in the mirror frame x -> -x."""
        return GasState(self.rho, -self.u, self.e)


@dataclass(frozen=True)
class Thermo:
    P: float
    theta: float
    E: float
    c: float


def thermo(state: GasState, consts: GasConstants) -> Thermo:
    """Pressure, temperature, total specific energy and sound speed."""
    g = consts.gamma
    P = (g - 1.0) * state.rho * state.e
    return Thermo(P=P,
                  theta=P / (consts.R * state.rho),
                  E=state.e + 0.5 * state.u ** 2,
                  c=math.sqrt(g * (g - 1.0) * state.e))


def rh_constants(state: GasState, sigma: float, consts: GasConstants):
    """Mass, momentum and energy fluxes of ``state`` in the frame moving at ``sigma``.

    Returns ``(j, C1, C2)`` such that ``rho v = j``, ``rho v^2 + P = j C1`` and
    ``rho v (e + v^2/2) + P v = j C2`` with ``v = u - sigma``.  ``C1`` and
    ``C2`` are NaN for a frame with no mass flux.
    """
    v = state.u - sigma
    P = (consts.gamma - 1.0) * state.rho * state.e
    j = state.rho * v
    momentum = state.rho * v * v + P
    energy = state.rho * v * (state.e + 0.5 * v * v) + P * v
    if j == 0.0:
        return j, math.nan, math.nan
    return j, momentum / j, energy / j


@dataclass(frozen=True)
class ShockData:
    left: GasState
    right: GasState
    sigma: float
    consts: GasConstants
    j: float = field(init=False)
    C1: float = field(init=False)
    C2: float = field(init=False)
    v_minus: float = field(init=False)
    v_plus: float = field(init=False)
    a: float = field(init=False)

    def __post_init__(self):
        j, C1, C2 = rh_constants(self.left, self.sigma, self.consts)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "C1", C1)
        object.__setattr__(self, "C2", C2)
        object.__setattr__(self, "v_minus", self.left.u - self.sigma)
        object.__setattr__(self, "v_plus", self.right.u - self.sigma)
        object.__setattr__(self, "a", 0.5 * abs(self.v_minus - self.v_plus))

    @property
    def v_mid(self) -> float:
        """Centre ``(v_- + v_+)/2`` of the velocity jump, equal to gamma C1/(gamma+1)."""
        return 0.5 * (self.v_minus + self.v_plus)

    def rh_residuals(self) -> dict:
        """Relative mismatch of the three jump identities evaluated on both sides."""
        jl, C1l, C2l = rh_constants(self.left, self.sigma, self.consts)
        jr, C1r, C2r = rh_constants(self.right, self.sigma, self.consts)
        return {
            "mass": abs(jr - jl) / abs(jl),
            "momentum": abs(jr * C1r - jl * C1l) / abs(jl * C1l),
            "energy": abs(jr * C2r - jl * C2l) / abs(jl * C2l),
        }

    def summary(self) -> dict:
        return {
            "rho_minus": self.left.rho, "u_minus": self.left.u, "e_minus": self.left.e,
            "rho_plus": self.right.rho, "u_plus": self.right.u, "e_plus": self.right.e,
            "sigma": self.sigma, "j": self.j, "C1": self.C1, "C2": self.C2,
            "v_minus": self.v_minus, "v_plus": self.v_plus, "a": self.a,
            "gamma": self.consts.gamma, "R": self.consts.R,
        }


@dataclass(frozen=True)
class LaxReport:
    ok: bool
    margins: dict

    def __bool__(self):
        return self.ok


def lax_check(shock: ShockData) -> LaxReport:
    """1-shock Lax inequalities ``u+ - c+ < sigma < u+`` and ``sigma < u- - c-``.

    Margins are signed so that every inequality holds iff its margin is positive.
    """
    cm = thermo(shock.left, shock.consts).c
    cp = thermo(shock.right, shock.consts).c
    s = shock.sigma
    margins = {
        "right_subsonic": s - (shock.right.u - cp),
        "right_behind": shock.right.u - s,
        "left_supersonic": (shock.left.u - cm) - s,
    }
    return LaxReport(ok=all(m > 0.0 for m in margins.values()), margins=margins)


def mach_for_amplitude(a: float, c: float, gamma: float) -> float:
    """Pre-shock Mach number whose jump has half-amplitude ``a``."""
    k = (gamma + 1.0) * a / c
    return 0.5 * (k + math.sqrt(k * k + 4.0))


def shock_from_mach(left: GasState, consts: GasConstants, mach: float) -> ShockData:
    """1-shock with pre-shock state ``left`` and shock-frame Mach number ``mach``."""
    if not mach > 1.0:
        raise DomainError(f"pre-shock Mach number must exceed 1, got {mach!r}", mach=mach)
    g = consts.gamma
    c = thermo(left, consts).c
    m2 = mach * mach
    ratio = (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0)
    v_minus = mach * c
    sigma = left.u - v_minus
    v_plus = v_minus / ratio
    P_minus = (g - 1.0) * left.rho * left.e
    P_plus = P_minus * (1.0 + 2.0 * g * (m2 - 1.0) / (g + 1.0))
    rho_plus = left.rho * ratio
    right = GasState(rho=rho_plus, u=v_plus + sigma, e=P_plus / ((g - 1.0) * rho_plus))
    return ShockData(left=left, right=right, sigma=sigma, consts=consts)


def shock_from_amplitude(left: GasState, consts: GasConstants, a: float) -> ShockData:
    """Build the 1-shock of amplitude ``a`` issued from the pre-shock state ``left``.

    Raises
    ------
    DegenerateShockError
        If ``a`` is zero.
    LaxError
        If the constructed jump violates the Lax inequalities.
    NumericalError
        If the jump identities or the amplitude are not reproduced to
        ``RH_RTOL`` / ``AMPLITUDE_RTOL``.
    """
    if not math.isfinite(a) or a < 0.0:
        raise DomainError(f"amplitude must be a finite positive number, got {a!r}", a=a)
    if a == 0.0:
        raise DegenerateShockError("zero amplitude: left and right states coincide", a=a)
    c = thermo(left, consts).c
    shock = shock_from_mach(left, consts, mach_for_amplitude(a, c, consts.gamma))

    res = shock.rh_residuals()
    if max(res.values()) > RH_RTOL:
        raise NumericalError("Rankine-Hugoniot identities not reproduced", residuals=res, a=a)
    if abs(shock.a - a) > AMPLITUDE_RTOL * a:
        raise NumericalError("amplitude not reproduced", requested=a, obtained=shock.a)
    lax = lax_check(shock)
    if not lax.ok:
        raise LaxError("constructed jump violates the Lax inequalities", margins=lax.margins)
    if not (shock.right.rho > shock.left.rho and 0.0 < shock.v_plus < shock.v_minus):
        raise LaxError("constructed jump is not compressive",
                       rho_minus=shock.left.rho, rho_plus=shock.right.rho)
    return shock


def reflect_shock(shock: ShockData) -> ShockData:
    """Mirror image under x -> -x, u -> -u.

    A 1-shock becomes a 3-shock and vice versa; the old right state becomes
    the new left state.
    """
    return ShockData(left=shock.right.reflected(), right=shock.left.reflected(),
                     sigma=-shock.sigma, consts=shock.consts)


def shock3_from_amplitude(pre_shock: GasState, consts: GasConstants, a: float) -> ShockData:
    """3-shock of amplitude ``a`` whose pre-shock state is the *right* state ``pre_shock``.

    Obtained by mirroring the 1-shock issued from the reflected state.  Its
    traveling profile is the mirror of the 1-shock profile.
    """
    return reflect_shock(shock_from_amplitude(pre_shock.reflected(), consts, a))


@dataclass(frozen=True)
class ShockLimits:
    sigma: float
    j: float
    C1: float
    C2: float
    f0: float

    def as_array(self) -> np.ndarray:
        return np.array([self.sigma, self.j, self.C1, self.C2])


def small_shock_limits(left: GasState, consts: GasConstants) -> ShockLimits:
    """Limits of (sigma, j, C1, C2) and of f(0) as the amplitude tends to zero."""
    g, R = consts.gamma, consts.R
    c = thermo(left, consts).c
    C1 = c + (g - 1.0) * left.e / c
    j = left.rho * c
    f0 = (4.0 * g ** 3 * (g - 1.0) ** 2 / (R ** 4 * (g + 1.0) ** 8)) * C1 ** 7 / j
    return ShockLimits(sigma=left.u - c, j=j, C1=C1, C2=g * left.e + 0.5 * c * c, f0=f0)
