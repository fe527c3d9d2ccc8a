"""Shooting along the unstable manifolds of the saddles ``(+-a, 0)``.

The auxiliary system is integrated in the equivalent coordinates

    V,   S = (W - w0) / V,   X = int V d eta,

in which it reads

    V' = V (w0 + V S)
    S' = -w0 (f(V) - f(0))/V - 2 V S**2 - 3 w0 S - f(V) S + V/2
    X' = V.

Both right-hand sides are polynomial, the node ``(0, w0)`` becomes the
regular equilibrium ``(0, w1)``, and ``W - w0 = V S`` keeps full relative
precision down to ``V ~ 1e-13 a``.  ``X`` is the running integral used to
map eta to the physical coordinate xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.integrate import DOP853, Radau

from .errors import ContainmentError, IntegrationError
from .reduced import EquilibriumReport, NullclineData, ReducedSystem, horner

Side = Literal["flat", "sharp"]


@dataclass(frozen=True)
class ManifoldOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    offset: float = 1e-6
    max_halvings: int = 8
    terminal_tol: float = 1e-10
    slack: float = 1e-14
    max_steps: int = 200_000
    method: str = "auto"
    # above this node stiffness ratio lambda2/lambda1, "auto" switches to Radau
    stiff_ratio: float = 1e3


@dataclass
class Trajectory:
    side: str
    eta: np.ndarray
    V: np.ndarray
    S: np.ndarray
    X: np.ndarray
    w0: float
    offset: float
    method: str
    n_rejected_starts: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def W(self) -> np.ndarray:
        return self.w0 + self.V * self.S

    @property
    def terminal_error(self) -> float:
        return float(abs(self.V[-1]) * math.hypot(1.0, self.S[-1]))

    @property
    def terminal_slope(self) -> float:
        """(W - w0)/V at the last sample."""
        return float(self.S[-1])

    def w_increments(self) -> np.ndarray:
        # W differences without the cancellation of w0
        return np.diff(self.V * self.S)

    def w_minima(self) -> int:
        """Number of interior local minima of W along the orbit."""
        d = self.w_increments()
        s = np.sign(d[d != 0.0])
        return int(np.count_nonzero((s[:-1] < 0) & (s[1:] > 0)))

    def convergence_rate(self, tail_fraction: float = 0.2) -> float:
        """Least-squares slope of log distance to the node over the last samples."""
        dist = np.abs(self.V) * np.hypot(1.0, self.S)
        n = max(5, int(len(dist) * tail_fraction))
        return float(np.polyfit(self.eta[-n:], np.log(dist[-n:]), 1)[0])


def _rhs_factory(sys: ReducedSystem, w0: float):
    fc = sys.f_coeffs
    Fc = sys.f_coeffs[1:] or (0.0,)

    def rhs(t, y):
        V, S = y[0], y[1]
        fv = horner(fc, V)
        Fv = horner(Fc, V)
        return np.array([V * (w0 + V * S),
                         -w0 * Fv - 2.0 * V * S * S - 3.0 * w0 * S - fv * S + 0.5 * V,
                         V])

    fpc = tuple(k * c for k, c in enumerate(fc))[1:] or (0.0,)
    Fpc = tuple(k * c for k, c in enumerate(Fc))[1:] or (0.0,)

    def jac(t, y):
        V, S = y[0], y[1]
        fv = horner(fc, V)
        return np.array([
            [w0 + 2.0 * V * S, V * V, 0.0],
            [-w0 * horner(Fpc, V) - 2.0 * S * S - horner(fpc, V) * S + 0.5,
             -4.0 * V * S - 3.0 * w0 - fv, 0.0],
            [1.0, 0.0, 0.0],
        ])

    return rhs, jac


class _Containment:
    """Trapping-region test in (V, S) coordinates.

    Returns the name of the violated boundary, or ``None``.
    """

    def __init__(self, sys: ReducedSystem, w0: float, nc: NullclineData, side: Side,
                 slack: float):
        self.sys, self.w0, self.nc, self.side, self.slack = sys, w0, nc, side, slack
        # W1(Vbar) - w0 = Vbar * slope_from_node(Vbar) <= 0
        self.floor_gap = float(nc.Vbar * nc.slope_from_node(nc.Vbar)) if not nc.Vbar_degenerate \
            else 0.0

    def __call__(self, V: float, S: float):
        a, w0, tol = self.sys.a, self.w0, self.slack
        W = w0 + V * S
        if self.side == "flat":
            if not V > 0.0:
                return "V = 0"
            if not V < a:
                return "V = a"
        else:
            if not V < 0.0:
                return "V = 0"
            if not V > -a:
                return "V = -a"
        if not W < tol * abs(w0):
            return "W = 0"
        if self.side == "sharp" and not self.nc.Vbar_degenerate and V >= self.nc.Vbar:
            # W >= W1(Vbar), written as (W - w0) - (W1(Vbar) - w0) > 0
            if not V * S - self.floor_gap > -tol * abs(w0):
                return "W = W1(Vbar)"
            return None
        # W > W1(V) <=> V (S - slope) > 0
        slope = float(self.nc.slope_from_node(V))
        margin = (S - slope) if V > 0 else (slope - S)
        if not margin > -tol * (abs(S) + abs(slope)):
            return "W = W1(V)"
        return None


def _start_point(sys: ReducedSystem, report: EquilibriumReport, side: Side, s: float):
    if side == "flat":
        eq, vec = (sys.a, 0.0), report.r2
    else:
        eq, vec = (-sys.a, 0.0), report.R2
    norm = math.hypot(*vec)
    return eq[0] - s * vec[0] / norm, eq[1] - s * vec[1] / norm


def integrate_manifold(sys: ReducedSystem, report: EquilibriumReport, nc: NullclineData,
                       side: Side, opts: ManifoldOptions = ManifoldOptions()) -> Trajectory:
    """Integrate the unstable manifold of ``(a, 0)`` (flat) or ``(-a, 0)`` (sharp).

    The orbit is started at ``offset * a`` from the saddle along the unstable
    eigenvector and followed until it lies within
    ``terminal_tol * max(a, |w0|)`` of the node.  Every accepted step is
    tested against the trapping region; the starting offset is halved (at
    most ``max_halvings`` times) if the first step leaves it.

    Raises
    ------
    ContainmentError
        Naming the boundary of K1 / K2 that was crossed.
    IntegrationError
        On solver failure or when ``max_steps`` is exhausted.
    """
    if side not in ("flat", "sharp"):
        raise ValueError(f"side must be 'flat' or 'sharp', got {side!r}")
    a, w0 = sys.a, report.w0
    method = opts.method
    if method == "auto":
        method = "Radau" if report.stiffness > opts.stiff_ratio else "DOP853"
    solver_cls = {"DOP853": DOP853, "Radau": Radau}[method]
    rhs, jac = _rhs_factory(sys, w0)
    inside = _Containment(sys, w0, nc, side, opts.slack)
    atol = np.array([opts.atol * a * opts.terminal_tol,
                     opts.atol * (abs(w0) / a + abs(report.tangency_slope)),
                     opts.atol * a / abs(w0)])
    target = opts.terminal_tol * max(a, abs(w0))

    s = opts.offset * a
    for attempt in range(opts.max_halvings + 1):
        V0, W0 = _start_point(sys, report, side, s)
        y0 = np.array([V0, (W0 - w0) / V0, 0.0])
        where = inside(V0, y0[1])
        if where is None:
            kw = {"jac": jac} if method == "Radau" else {}
            solver = solver_cls(rhs, 0.0, y0, np.inf, rtol=opts.rtol, atol=atol, **kw)
            etas, Vs, Ss, Xs = [0.0], [V0], [y0[1]], [0.0]
            try:
                _march(solver, inside, target, opts.max_steps, etas, Vs, Ss, Xs, side)
            except _FirstStepExit as exc:
                where = exc.where
            else:
                return Trajectory(side=side, eta=np.array(etas), V=np.array(Vs),
                                  S=np.array(Ss), X=np.array(Xs), w0=w0, offset=s,
                                  method=method, n_rejected_starts=attempt)
        s *= 0.5
    raise ContainmentError(f"{side} orbit leaves its trapping region at the first step "
                           f"(boundary {where}) for every starting offset",
                           side=side, boundary=where, offset=s, a=a)


class _FirstStepExit(Exception):
    def __init__(self, where):
        self.where = where


def _march(solver, inside, target, max_steps, etas, Vs, Ss, Xs, side):
    for n in range(max_steps):
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(f"integrator failed on {side} orbit: {msg}", side=side,
                                   eta=solver.t, state=solver.y.tolist())
        V, S, X = solver.y
        where = inside(V, S)
        if where is not None:
            if n == 0:
                raise _FirstStepExit(where)
            raise ContainmentError(f"{side} orbit crossed the boundary {where} of its "
                                   f"trapping region; amplitude outside the validity range",
                                   side=side, boundary=where, eta=solver.t,
                                   V=V, W=float(inside.w0 + V * S))
        etas.append(solver.t)
        Vs.append(V)
        Ss.append(S)
        Xs.append(X)
        if abs(V) * math.hypot(1.0, S) <= target:
            return
    raise IntegrationError(f"{side} orbit did not reach the node within {max_steps} steps",
                           side=side, eta=solver.t, state=solver.y.tolist())
