"""The reduced planar system and its phase-plane geometry.

With ``vhat = v - (v_- + v_+)/2`` the traveling-wave equation becomes

    vhat' = w,    vhat w' = -w**2 - f(vhat) w + (vhat**2 - a**2)/2,

where ``f`` is a degree-7 polynomial fixed by (gamma, R, j, C1).  Rescaling
the independent variable by ``d eta = d xi / V`` removes the singular factor
and gives the auxiliary system ``V' = V W``, ``W' = -W**2 - f(V) W + (V**2-a**2)/2``
whose equilibria are the saddles ``(+-a, 0)`` and the node ``(0, w0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import bisect

from .errors import (AmplitudeTooLargeError, DegenerateShockError, DiscriminantError,
                     NullclineError)
from .gas import GasConstants, GasState, ShockData, small_shock_limits

GAMMA_MAX = (math.sqrt(7.0) + 1.0) / (math.sqrt(7.0) - 1.0)


def f_factors(gamma: float, R: float, j: float, C1: float):
    """Prefactor and the three linear factors of f, as (prefactor, [(root-shift, slope, power)])."""
    g1 = gamma + 1.0
    pref = 4.0 * (gamma - 1.0) / (j * R ** 4 * g1)
    return pref, [(C1 / g1, -1.0, 3), (gamma * C1 / g1, 1.0, 3), ((gamma - 1.0) * C1 / g1, 2.0, 1)]


def f_polynomial(gamma: float, R: float, j: float, C1: float) -> Polynomial:
    pref, factors = f_factors(gamma, R, j, C1)
    p = Polynomial([pref])
    for shift, slope, power in factors:
        p = p * Polynomial([shift, slope]) ** power
    return p


def f_product(gamma: float, R: float, j: float, C1: float, v):
    """Direct evaluation of f from its factored form (independent of the expansion)."""
    pref, factors = f_factors(gamma, R, j, C1)
    v = np.asarray(v, dtype=float)
    out = np.full_like(v, pref)
    for shift, slope, power in factors:
        out = out * (shift + slope * v) ** power
    return out


def fprime_product(gamma: float, R: float, j: float, C1: float, v):
    """f' from the factorization that exposes the sign change at gamma = GAMMA_MAX."""
    g1 = gamma + 1.0
    v = np.asarray(v, dtype=float)
    r7 = C1 / math.sqrt(7.0)
    lin = 2.0 * v + (gamma - 1.0) * C1 / g1
    return (14.0 * (gamma - 1.0) / (j * R ** 4 * g1)
            * (C1 / g1 - v) ** 2 * (v + gamma * C1 / g1) ** 2 * (lin + r7) * (r7 - lin))


@dataclass(frozen=True)
class ReducedSystem:
    """Planar ODE instance: amplitude ``a`` and the polynomial ``f``.

    ``gamma, R, j, C1`` are ``None`` for systems that do not come from the gas
    (the scalar model with ``f = 1``).
    """

    a: float
    f_coeffs: tuple
    gamma: Optional[float] = None
    R: Optional[float] = None
    j: Optional[float] = None
    C1: Optional[float] = None
    label: str = "gas"
    f: Polynomial = field(init=False, repr=False, compare=False)
    F: Polynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.f_coeffs)
        object.__setattr__(self, "f_coeffs", coeffs)
        object.__setattr__(self, "f", Polynomial(coeffs))
        # (f(V) - f(0)) / V
        object.__setattr__(self, "F", Polynomial(coeffs[1:] if len(coeffs) > 1 else (0.0,)))

    @property
    def f0(self) -> float:
        return self.f_coeffs[0]

    @property
    def fp0(self) -> float:
        return self.f_coeffs[1] if len(self.f_coeffs) > 1 else 0.0

    @property
    def discriminant(self) -> float:
        return self.f0 ** 2 - 2.0 * self.a ** 2

    @property
    def is_gas(self) -> bool:
        return self.gamma is not None

    def taylor0(self, k: int) -> float:
        """``f^(k)(0) / k!``, i.e. the k-th monomial coefficient."""
        return self.f_coeffs[k] if k < len(self.f_coeffs) else 0.0


def build_reduced(shock: ShockData, check: bool = True) -> ReducedSystem:
    """Reduced system of a 1-shock.

    Raises ``DiscriminantError`` (carrying ``f0`` and ``a``) when
    ``f(0)**2 - 2 a**2 <= 0`` and ``check`` is set.
    """
    g, R = shock.consts.gamma, shock.consts.R
    p = f_polynomial(g, R, shock.j, shock.C1)
    sys = ReducedSystem(a=shock.a, f_coeffs=tuple(p.coef), gamma=g, R=R, j=shock.j,
                        C1=shock.C1, label="gas")
    if check and sys.discriminant <= 0.0:
        raise DiscriminantError("no smooth profile: f(0)^2 - 2 a^2 <= 0",
                                f0=sys.f0, a=sys.a, discriminant=sys.discriminant)
    return sys


def limit_polynomial(left: GasState, consts: GasConstants) -> Polynomial:
    """f built from the zero-amplitude limits of j and C1."""
    lim = small_shock_limits(left, consts)
    return f_polynomial(consts.gamma, consts.R, lim.j, lim.C1)


def f_derivatives(sys: ReducedSystem, k: int) -> Polynomial:
    """k-th derivative of f as a polynomial (identically zero for k >= 8)."""
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    return sys.f.deriv(k) if k else sys.f


def horner(coeffs, x: float) -> float:
    """Scalar Horner evaluation, coefficients in increasing degree."""
    r = 0.0
    for c in reversed(coeffs):
        r = r * x + c
    return r


def vector_field(sys: ReducedSystem, V, W):
    """Right-hand side of the auxiliary system."""
    V = np.asarray(V, dtype=float)
    W = np.asarray(W, dtype=float)
    return V * W, -W * W - sys.f(V) * W + 0.5 * (V * V - sys.a ** 2)


def jacobian(sys: ReducedSystem, V: float, W: float) -> np.ndarray:
    fv = sys.f(V)
    fpv = sys.f.deriv()(V)
    return np.array([[W, V], [-fpv * W + V, -2.0 * W - fv]])


@dataclass(frozen=True)
class EquilibriumReport:
    f0: float
    fp0: float
    w0: float
    mu1: float
    mu2: float
    nu1: float
    nu2: float
    lambda1: float
    lambda2: float
    b0: float
    r2: tuple
    R2: tuple
    e1_0: tuple
    e2_0: tuple = (0.0, 1.0)

    @property
    def tangency_slope(self) -> float:
        """Limit of W'/V' at the node along the non-trivial orbits."""
        return self.b0 / (self.f0 + 3.0 * self.w0)

    @property
    def glue_derivative(self) -> float:
        """Expected w'(0) of the glued profile."""
        return self.w0 * self.tangency_slope

    @property
    def stiffness(self) -> float:
        return self.lambda2 / self.lambda1

    def summary(self) -> dict:
        return {
            "f0": self.f0, "fp0": self.fp0, "w0": self.w0,
            "mu1": self.mu1, "mu2": self.mu2, "nu1": self.nu1, "nu2": self.nu2,
            "lambda1": self.lambda1, "lambda2": self.lambda2, "b0": self.b0,
            "r2": list(self.r2), "R2": list(self.R2), "e1_0": list(self.e1_0),
        }


def node_ordinate(f0: float, a: float) -> float:
    """Negative root of ``w**2 + f0 w + a**2/2``, evaluated without cancellation."""
    disc = f0 * f0 - 2.0 * a * a
    if disc <= 0.0:
        raise DiscriminantError("no smooth profile: f(0)^2 - 2 a^2 <= 0", f0=f0, a=a,
                                discriminant=disc)
    return -a * a / (f0 + math.sqrt(disc))


def _saddle_eigs(fa: float, a: float):
    root = math.sqrt(fa * fa + 4.0 * a * a)
    pos = 2.0 * a * a / (fa + root) if fa > 0 else 0.5 * (-fa + root)
    return 0.5 * (-fa - root), pos


def equilibria(sys: ReducedSystem) -> EquilibriumReport:
    """Equilibria, eigenvalues and eigenvectors of the auxiliary system."""
    a = sys.a
    if a == 0.0:
        raise DegenerateShockError("zero amplitude: saddles and node coincide", a=a)
    f0, fp0 = sys.f0, sys.fp0
    w0 = node_ordinate(f0, a)
    mu1, mu2 = _saddle_eigs(float(sys.f(a)), a)
    nu1, nu2 = _saddle_eigs(float(sys.f(-a)), a)
    lam1 = w0
    lam2 = -2.0 * w0 - f0
    b0 = -fp0 * w0
    if not lam2 < lam1:
        raise AmplitudeTooLargeError(
            "amplitude too large for C2 theory: node eigenvalues not ordered "
            "(need f(0) + 3 w0 > 0)", f0=f0, w0=w0, a=a, lambda1=lam1, lambda2=lam2)
    return EquilibriumReport(f0=f0, fp0=fp0, w0=w0, mu1=mu1, mu2=mu2, nu1=nu1, nu2=nu2,
                             lambda1=lam1, lambda2=lam2, b0=b0, r2=(a, mu2), R2=(-a, nu2),
                             e1_0=(f0 + 3.0 * w0, b0))


@dataclass(frozen=True)
class NullclineData:
    W1: Callable
    W2: Callable
    Delta: Callable
    slope_from_node: Callable
    Vbar: float
    W1_at_Vbar: float
    Vbar_degenerate: bool


def nullclines(sys: ReducedSystem, w0: Optional[float] = None,
               n_scan: int = 1001) -> NullclineData:
    """Branches of ``W**2 + f(V) W - (V**2 - a**2)/2 = 0`` over ``[-a, a]``.

    ``Vbar`` is the minimizer of the upper branch ``W1`` in ``(-a, 0)``; when
    ``f'`` vanishes identically the minimizer sits at ``V = 0`` and
    ``Vbar_degenerate`` is set.
    """
    a = sys.a
    f, fp = sys.f, sys.f.deriv()
    if w0 is None:
        w0 = node_ordinate(sys.f0, a)
    sqrt_d0 = sys.f0 + 2.0 * w0

    def Delta(V):
        V = np.asarray(V, dtype=float)
        return f(V) ** 2 + 2.0 * (V * V - a * a)

    def W1(V):
        V = np.asarray(V, dtype=float)
        fv = f(V)
        root = np.sqrt(Delta(V))
        return np.where(fv > 0, (V - a) * (V + a) / np.where(fv > 0, fv + root, 1.0),
                        0.5 * (-fv + root))

    def W2(V):
        V = np.asarray(V, dtype=float)
        return 0.5 * (-f(V) - np.sqrt(Delta(V)))

    def slope_from_node(V):
        """(W1(V) - w0) / V, regular at V = 0."""
        V = np.asarray(V, dtype=float)
        Fv = sys.F(V)
        fv = f(V)
        return 0.5 * (-Fv + (Fv * (fv + sys.f0) + 2.0 * V) / (np.sqrt(Delta(V)) + sqrt_d0))

    grid = np.linspace(-a, a, n_scan)
    if np.any(Delta(grid) <= 0.0):
        raise NullclineError("nullcline discriminant f(V)^2 + 2(V^2 - a^2) is not positive "
                             "on [-a, a]", a=a)

    def numer(V):
        # sign of W1'(V)
        return V - W1(V) * fp(V)

    left = np.linspace(-a, 0.0, n_scan)
    vals = numer(left)
    signs = np.sign(vals[1:-1])
    changes = int(np.count_nonzero(np.diff(signs[signs != 0])))
    end = float(numer(0.0))
    if end <= 0.0 and np.all(vals[1:-1] < 0.0):
        if abs(end) <= 1e-14 * a and np.all(np.abs(sys.f.deriv().coef) == 0.0):
            return NullclineData(W1, W2, Delta, slope_from_node, 0.0, float(W1(0.0)), True)
        raise NullclineError("W1 has no interior minimum in (-a, 0): f'(0) <= 0",
                             a=a, fp0=sys.fp0)
    if changes > 1:
        raise NullclineError("W1' changes sign more than once in (-a, 0); amplitude too "
                             "large for the nullcline geometry", a=a, sign_changes=changes)
    Vbar = bisect(lambda V: float(numer(V)), -a, 0.0, xtol=1e-17 * a, maxiter=200)
    return NullclineData(W1, W2, Delta, slope_from_node, Vbar, float(W1(Vbar)), False)


def gamma_condition(consts: GasConstants):
    """Whether 1 < gamma < (sqrt7+1)/(sqrt7-1); returns ``(ok, margin)``."""
    margin = GAMMA_MAX - consts.gamma
    return (consts.gamma > 1.0 and margin > 0.0), margin


def check_hypotheses(sys: ReducedSystem, n_grid: int = 1001) -> dict:
    """Evaluate each small-amplitude hypothesis on a grid over ``[-a, a]``.

    The keys are ordered the way the hypotheses are used by the existence
    argument; the first ``False`` entry is the binding one.
    """
    a = sys.a
    V = np.linspace(-a, a, n_grid)
    fv = sys.f(V)
    out = {
        "discriminant": sys.discriminant > 0.0,
        "f_positive": bool(np.all(fv > 0.0)),
        # not applicable (None) when f is constant: the node geometry then degenerates
        # symmetrically and W1 has its minimum at V = 0
        "fprime_positive": (bool(np.all(sys.f.deriv()(V) > 0.0))
                            if np.any(sys.f.deriv().coef != 0.0) else None),
        "nullcline_discriminant": bool(np.all(fv ** 2 + 2.0 * (V * V - a * a) > 0.0)),
    }
    if out["discriminant"]:
        w0 = node_ordinate(sys.f0, a)
        out["node_ordering"] = sys.f0 + 3.0 * w0 > 0.0
    else:
        out["node_ordering"] = False
    return out


def first_failing_hypothesis(sys: ReducedSystem) -> Optional[str]:
    for name, ok in check_hypotheses(sys).items():
        if ok is False:
            return name
    return None
