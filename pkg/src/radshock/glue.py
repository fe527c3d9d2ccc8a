"""From the two auxiliary orbits to the shock profile in the physical variable xi."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.interpolate import BPoly

from .errors import GluingError, ReconstructionError, ReparametrizationError
from .gas import ShockData
from .manifold import Trajectory
from .reduced import EquilibriumReport, ReducedSystem

FIELD_NAMES = ("v", "rho", "u", "e", "theta", "P", "q", "n")


def xi_of_eta(traj: Trajectory, w0: float, method: str = "ode") -> np.ndarray:
    """Xi(eta) = -int_eta^inf V, sampled at the orbit's eta values.

    ``method="ode"`` uses the running integral carried by the integrator;
    ``method="trapezoid"`` applies the trapezoidal rule to the (eta, V)
    samples.  The part beyond the last sample is closed analytically with
    the node behaviour ``W ~ w0 + S V``.
    """
    V_end, S_end = traj.V[-1], traj.S[-1]
    tail = -(V_end / w0) * (1.0 - 0.5 * S_end * V_end / w0)
    if method == "ode":
        running = traj.X
    elif method == "trapezoid":
        running = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(traj.eta) * (traj.V[1:] + traj.V[:-1]))))
    else:
        raise ValueError(f"unknown quadrature method {method!r}")
    xi = running - running[-1] - tail
    steps = np.diff(xi)
    ok = np.all(steps > 0) if traj.side == "flat" else np.all(steps < 0)
    if not ok:
        bad = int(np.flatnonzero(steps <= 0 if traj.side == "flat" else steps >= 0)[0])
        raise ReparametrizationError(f"xi(eta) is not monotone on the {traj.side} orbit",
                                     side=traj.side, index=bad, eta=float(traj.eta[bad]))
    return xi


def _w_prime(sys: ReducedSystem, w0: float, V, S):
    """dw/dxi = W S + dS/deta, finite at the node."""
    V = np.asarray(V, dtype=float)
    S = np.asarray(S, dtype=float)
    W = w0 + V * S
    dS = -w0 * sys.F(V) - 2.0 * V * S * S - 3.0 * w0 * S - sys.f(V) * S + 0.5 * V
    return W * S + dS


def one_sided_derivative(x1: float, x2: float, y0: float, y1: float, y2: float) -> float:
    """Derivative at 0 of the parabola through (0, y0), (x1, y1), (x2, y2)."""
    return ((y1 - y0) * x2 / (x1 * (x2 - x1))) - ((y2 - y0) * x1 / (x2 * (x2 - x1)))


@dataclass
class Profile:
    """Shock profile sampled on a strictly increasing xi grid containing 0.

    ``dw`` holds dw/dxi evaluated from the ODE (not by differencing).
    ``fields`` is filled by :func:`reconstruct` for gas profiles.
    """

    xi: np.ndarray
    v_hat: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    sys: ReducedSystem
    report: EquilibriumReport
    dw_minus: float
    dw_plus: float
    shock: Optional[ShockData] = None
    fields: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def a(self) -> float:
        return self.sys.a

    @property
    def i0(self) -> int:
        return int(np.flatnonzero(self.xi == 0.0)[0])

    @property
    def thickness(self) -> float:
        """a / |w0|: width over which vhat drops by ~a near the centre."""
        return self.sys.a / abs(self.report.w0)

    def columns(self) -> dict:
        cols = {"xi": self.xi, "v_hat": self.v_hat, "w": self.w}
        cols.update(self.fields)
        return cols


def glue(flat: Trajectory, sharp: Trajectory, sys: ReducedSystem, report: EquilibriumReport,
         match_tol: float = 1e-4, deriv_floor: float = 1e-6,
         method: str = "ode") -> Profile:
    """Glue the two orbits at xi = 0 into one profile.

    The one-sided derivatives of w at 0 are taken from the parabola through
    ``(0, w0)`` and the two samples nearest 0 with ``|vhat| >= deriv_floor * a``
    on each side.  They must agree with each other and with
    ``-f'(0) w0**2 / (f(0) + 3 w0)`` to ``match_tol`` (relative, with the
    scale ``w0**2 / a`` used when that limit is exactly zero).

    Raises ``GluingError`` carrying both one-sided values otherwise.
    """
    w0 = report.w0
    xf = xi_of_eta(flat, w0, method)
    xs = xi_of_eta(sharp, w0, method)[::-1]

    def side_arrays(traj, rev):
        sl = slice(None, None, -1) if rev else slice(None)
        V, S = traj.V[sl], traj.S[sl]
        return V, w0 + V * S, _w_prime(sys, w0, V, S)

    vf, wf, dwf = side_arrays(flat, False)
    vs, ws, dws = side_arrays(sharp, True)

    def estimate(x, v, w, from_left):
        idx = np.flatnonzero(np.abs(v) >= deriv_floor * sys.a)
        if from_left:
            pick = idx[-2:][::-1]
        else:
            pick = idx[:2]
        if len(pick) < 2:
            raise GluingError("not enough samples near xi = 0 to estimate w'(0)")
        i1, i2 = pick
        return one_sided_derivative(x[i1], x[i2], w0, w[i1], w[i2])

    d_minus = estimate(xf, vf, wf, True)
    d_plus = estimate(xs, vs, ws, False)
    target = report.glue_derivative
    # a vanishing target (f'(0) = 0) is measured against the natural size w0**2 / a
    scale = abs(target) if target != 0.0 else w0 * w0 / sys.a
    mismatch = max(abs(d_minus - d_plus), abs(d_minus - target), abs(d_plus - target))
    if mismatch > match_tol * scale:
        raise GluingError("C2 gluing failed: one-sided derivatives of w at xi = 0 disagree",
                          dw_minus=d_minus, dw_plus=d_plus, expected=target, tol=match_tol)

    xi = np.concatenate((xf, [0.0], xs))
    v_hat = np.concatenate((vf, [0.0], vs))
    w = np.concatenate((wf, [w0], ws))
    dw = np.concatenate((dwf, [0.5 * (d_minus + d_plus)], dws))
    if not np.all(np.diff(xi) > 0):
        raise ReparametrizationError("glued xi grid is not strictly increasing")
    return Profile(xi=xi, v_hat=v_hat, w=w, dw=dw, sys=sys, report=report,
                   dw_minus=d_minus, dw_plus=d_plus,
                   meta={"grid": "native", "n_flat": len(xf), "n_sharp": len(xs),
                         "xi_min": float(xi[0]), "xi_max": float(xi[-1])})


def uniform_grid(xi_min: float, xi_max: float, h: float) -> np.ndarray:
    """Uniform grid of spacing ``h`` inside ``[xi_min, xi_max]`` with a node at 0."""
    k0 = math.ceil(xi_min / h)
    k1 = math.floor(xi_max / h)
    return np.arange(k0, k1 + 1) * h


def resample(profile: Profile, h: Optional[float] = None,
             points_per_thickness: float = 400.0) -> Profile:
    """Resample onto a uniform grid by quintic Hermite interpolation of vhat.

    The interpolant matches vhat, w = vhat' and dw = vhat'' at every native
    sample, so w and dw on the new grid come from its first and second
    derivatives.  Physical fields are dropped; call :func:`reconstruct` again.
    """
    if h is None:
        h = profile.thickness / points_per_thickness
    spline = BPoly.from_derivatives(profile.xi,
                                    np.column_stack((profile.v_hat, profile.w, profile.dw)))
    xi = uniform_grid(profile.xi[0], profile.xi[-1], h)
    v_hat = spline(xi)
    w = spline.derivative(1)(xi)
    dw = spline.derivative(2)(xi)
    i0 = int(np.flatnonzero(xi == 0.0)[0])
    v_hat[i0] = 0.0
    w[i0] = profile.report.w0
    dw[i0] = 0.5 * (profile.dw_minus + profile.dw_plus)
    meta = dict(profile.meta, grid="uniform", h=h)
    return replace(profile, xi=xi, v_hat=v_hat, w=w, dw=dw, fields={}, meta=meta)


def reconstruct(profile: Profile, shock: ShockData) -> Profile:
    """Attach the physical fields (v, rho, u, e, theta, P, q, n).

    ``q`` follows from the energy balance in closed form,
    ``q = j (gamma+1) / (2 (gamma-1)) (v - v_-)(v - v_+)``, and ``n = theta**4 - dq/dxi``
    with ``dq/dxi = j (gamma+1)/(gamma-1) vhat w``.
    """
    g, R = shock.consts.gamma, shock.consts.R
    a = shock.a
    v_hat, w = profile.v_hat, profile.w
    if np.any(np.abs(v_hat) >= a):
        raise ReconstructionError("vhat leaves (-a, a)", a=a,
                                  max_abs=float(np.max(np.abs(v_hat))))
    v = v_hat + shock.v_mid
    if np.any(v <= 0.0):
        raise ReconstructionError("non-positive velocity in the shock frame",
                                  min_v=float(v.min()))
    if np.any(shock.C1 - v <= 0.0):
        raise ReconstructionError("negative temperature: C1 - v <= 0", C1=shock.C1,
                                  max_v=float(v.max()))
    rho = shock.j / v
    e = (shock.C1 - v) * v / (g - 1.0)
    theta = (shock.C1 - v) * v / R
    P = (g - 1.0) * rho * e
    k = shock.j * (g + 1.0) / (g - 1.0)
    q = 0.5 * k * (v_hat - a) * (v_hat + a)
    n = theta ** 4 - k * v_hat * w
    fields = {"v": v, "rho": rho, "u": v + shock.sigma, "e": e, "theta": theta, "P": P,
              "q": q, "n": n}
    return replace(profile, shock=shock, fields=fields)
