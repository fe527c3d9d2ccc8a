"""Independent checks of computed profiles.

The convolution operators ``K_q g = 1/2 int e^{-|x-y|} sgn(x-y) g(y) dy`` and
``K_n g = 1/2 int e^{-|x-y|} g(y) dy`` are evaluated exactly against a
piecewise polynomial interpolant of ``g`` (cubic Hermite when the derivative
of ``g`` is available, linear otherwise), in O(N) by two recursive sweeps.
Beyond the grid ``g`` is continued by its end values and the tails are
integrated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import bisect

from .errors import ExpansionOrderError, FitError, PaddingError
from .gas import GasConstants, GasState, small_shock_limits
from .glue import Profile
from .reduced import GAMMA_MAX, ReducedSystem, f_polynomial, node_ordinate

DEFAULT_PAD_TOL = 1e-10
REGULARITY_CAP = 64

# acceptance thresholds of the verification gates
GATES = {
    "integral_residual": 1e-5,
    "ode_residual": 1e-4,
    "q_crosscheck": 1e-6,
    "n_residual": 1e-4,
    "mass": 1e-10,
    "momentum": 1e-10,
    "energy": 1e-8,
    "tail_state": 1e-6,
    "tail_q": 1e-8,
}


# ---------------------------------------------------------------------------
# exponential-kernel convolution
# ---------------------------------------------------------------------------

def _moments(h: np.ndarray) -> np.ndarray:
    """``N_k(h) = int_0^1 e^{-h s} s^k ds`` for k = 0..3, shape (4, len(h))."""
    h = np.asarray(h, dtype=float)
    out = np.empty((4,) + h.shape)
    small = h <= 2.0
    if np.any(small):
        hs = h[small]
        term = np.ones_like(hs)
        acc = np.zeros((4,) + hs.shape)
        for m in range(40):
            for k in range(4):
                acc[k] += term / (m + k + 1)
            term = term * (-hs) / (m + 1)
        out[:, small] = acc
    big = ~small
    if np.any(big):
        hb = h[big]
        eh = np.exp(-hb)
        n = (1.0 - eh) / hb
        out[0, big] = n
        for k in range(1, 4):
            n = (k * n - eh) / hb
            out[k, big] = n
    return out


def exponential_sweeps(xi, g, dg=None):
    """Left and right exponential integrals of ``g``.

    Returns ``(L, R)`` with ``L(x) = int_{-inf}^x e^{-(x-y)} g(y) dy`` and
    ``R(x) = int_x^inf e^{-(y-x)} g(y) dy`` at every grid node.

    ``xi`` must be non-decreasing; a repeated node carries a jump of ``g``.
    """
    xi = np.asarray(xi, dtype=float)
    g = np.asarray(g, dtype=float)
    if xi.ndim != 1 or xi.shape != g.shape or len(xi) < 2:
        raise ValueError("xi and g must be 1-d arrays of equal length >= 2")
    h = np.diff(xi)
    if np.any(h < 0.0):
        raise ValueError("xi must be non-decreasing")
    N0, N1, N2, N3 = _moments(h)
    decay = np.exp(-h)
    gl, gr = g[:-1], g[1:]
    if dg is None:
        right = h * (gl * (N0 - N1) + gr * N1)
        left = h * (gr * (N0 - N1) + gl * N1)
    else:
        dg = np.asarray(dg, dtype=float)
        dl, dr = dg[:-1], dg[1:]
        I00 = 2.0 * N3 - 3.0 * N2 + N0
        I10 = N3 - 2.0 * N2 + N1
        I01 = -2.0 * N3 + 3.0 * N2
        I11 = N3 - N2
        right = h * (gl * I00 + h * dl * I10 + gr * I01 + h * dr * I11)
        left = h * (gr * I00 - h * dr * I10 + gl * I01 - h * dl * I11)
    n = len(xi)
    L = np.empty(n)
    R = np.empty(n)
    L[0] = g[0]
    for i in range(n - 1):
        L[i + 1] = decay[i] * L[i] + left[i]
    R[-1] = g[-1]
    for i in range(n - 2, -1, -1):
        R[i] = decay[i] * R[i + 1] + right[i]
    return L, R


def required_padding(tol: float = DEFAULT_PAD_TOL) -> float:
    """Distance to the grid edge at which the kernel weight drops below ``tol``."""
    return math.log(1.0 / tol)


def interior_mask(xi, tol: float = DEFAULT_PAD_TOL) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    pad = required_padding(tol)
    return (xi - xi[0] >= pad) & (xi[-1] - xi >= pad)


def _select(xi, at, tol):
    if at is None:
        return slice(None)
    idx = np.arange(len(xi))[at] if np.asarray(at).dtype == bool else np.asarray(at, dtype=int)
    xi = np.asarray(xi, dtype=float)
    dist = np.minimum(xi[idx] - xi[0], xi[-1] - xi[idx])
    pad = required_padding(tol)
    if np.any(dist < pad):
        worst = int(idx[np.argmin(dist)])
        raise PaddingError(f"evaluation point xi={xi[worst]:.6g} lies {dist.min():.3g} from the "
                           f"grid edge; at least {pad:.3g} of padding is required",
                           required_padding=pad, distance=float(dist.min()), xi=float(xi[worst]))
    return idx


def convolution_q(xi, source, dsource=None, at=None, tol: float = DEFAULT_PAD_TOL):
    """``1/2 int e^{-|x-y|} sgn(x-y) source(y) dy`` on the grid.

    Parameters
    ----------
    xi : array_like
        Non-decreasing grid.
    source : array_like
        Samples of the integrand (``theta**4`` for the radiative flux).
    dsource : array_like, optional
        Samples of ``d source / d xi``; selects cubic Hermite interpolation.
    at : array_like of int or bool, optional
        Evaluation nodes.  Each must be at least ``log(1/tol)`` away from both
        grid edges, otherwise ``PaddingError`` is raised.  ``None`` returns the
        values at every node without the padding check.
    """
    idx = _select(xi, at, tol)
    g = np.asarray(source, dtype=float)
    # the odd kernel annihilates constants; centring reduces roundoff
    shift = 0.5 * (g[0] + g[-1])
    L, R = exponential_sweeps(xi, g - shift, dsource)
    return (0.5 * (L - R))[idx]


def convolution_n(xi, source, dsource=None, at=None, tol: float = DEFAULT_PAD_TOL):
    """``1/2 int e^{-|x-y|} source(y) dy`` on the grid (see :func:`convolution_q`)."""
    idx = _select(xi, at, tol)
    g = np.asarray(source, dtype=float)
    shift = 0.5 * (g[0] + g[-1])
    L, R = exponential_sweeps(xi, g - shift, dsource)
    return (0.5 * (L + R) + shift)[idx]


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def _gas_source(profile: Profile):
    """theta**4 and its xi-derivative along a gas profile."""
    s = profile.sys
    v = profile.fields["v"] if "v" in profile.fields else profile.v_hat + profile.shock.v_mid
    theta = (s.C1 - v) * v / s.R
    dtheta = (s.C1 - 2.0 * v) * profile.w / s.R
    return theta ** 4, 4.0 * theta ** 3 * dtheta


def flux_from_convolution(profile: Profile, at=None, tol: float = DEFAULT_PAD_TOL):
    """Radiative flux (or its f = 1 analogue) computed by convolution."""
    if profile.sys.is_gas:
        src, dsrc = _gas_source(profile)
    else:
        src, dsrc = profile.v_hat, profile.w
    return convolution_q(profile.xi, src, dsrc, at=at, tol=tol)


def flux_algebraic(profile: Profile) -> np.ndarray:
    """Flux from the energy balance: closed form in vhat."""
    s, v_hat, a = profile.sys, profile.v_hat, profile.a
    if s.is_gas:
        k = s.j * (s.gamma + 1.0) / (s.gamma - 1.0)
        return 0.5 * k * (v_hat - a) * (v_hat + a)
    return 0.5 * (a - v_hat) * (a + v_hat)


def integral_residual(profile: Profile, tol: float = DEFAULT_PAD_TOL) -> float:
    """Max over the interior window of |LHS - RHS| / a**2 for the integral equation.

    For the gas, ``LHS = (v - v_-)(v - v_+)`` and ``RHS`` is
    ``(gamma-1)/(j (gamma+1) R**4)`` times the signed-kernel integral of
    ``v**4 (C1 - v)**4``.  For ``f = 1`` the equation is
    ``(a**2 - vhat**2)/2 = K_q vhat``.
    """
    mask = interior_mask(profile.xi, tol)
    if not np.any(mask):
        raise PaddingError("profile grid has no interior window",
                           required_padding=required_padding(tol),
                           width=float(profile.xi[-1] - profile.xi[0]))
    s, a, v_hat = profile.sys, profile.a, profile.v_hat[mask]
    conv = flux_from_convolution(profile, at=mask, tol=tol)
    if s.is_gas:
        lhs = (v_hat - a) * (v_hat + a)
        rhs = 2.0 * (s.gamma - 1.0) / (s.j * (s.gamma + 1.0)) * conv
    else:
        lhs = 0.5 * (a - v_hat) * (a + v_hat)
        rhs = conv
    return float(np.max(np.abs(lhs - rhs)) / a ** 2)


def ode_residual_array(profile: Profile) -> np.ndarray:
    """Pointwise residual of the second-order equation, divided by a**2.

    ``v''`` is obtained from ``w`` by second-order finite differences.
    """
    s, a, xi, w = profile.sys, profile.a, profile.xi, profile.w
    d2 = np.gradient(w, xi, edge_order=2)
    v_hat = profile.v_hat
    if s.is_gas:
        g1 = s.gamma + 1.0
        v = profile.fields["v"] if "v" in profile.fields else v_hat + profile.shock.v_mid
        drag = 4.0 * (s.gamma - 1.0) / (s.j * g1 * s.R ** 4) * (s.C1 - v) ** 3 * v ** 3 \
            * (s.C1 - 2.0 * v)
        res = (v - s.gamma * s.C1 / g1) * d2 + w * w - drag * w - 0.5 * (v_hat - a) * (v_hat + a)
    else:
        res = v_hat * d2 + w * w + s.f(v_hat) * w - 0.5 * (v_hat - a) * (v_hat + a)
    return res / a ** 2


def ode_residual(profile: Profile) -> float:
    return float(np.max(np.abs(ode_residual_array(profile))))


def n_residual(profile: Profile) -> float:
    """Max of |-n'' + n - theta**4| over the interior, relative to max |q'|.

    ``n''`` comes from second differences of the reconstructed ``n``.
    """
    n = profile.fields["n"]
    theta4 = profile.fields["theta"] ** 4
    xi = profile.xi
    d2 = np.gradient(np.gradient(n, xi, edge_order=2), xi, edge_order=2)
    # n - theta**4 = -q' exactly; keep the small difference explicit
    n_minus = n - theta4
    res = -d2 + n_minus
    scale = np.max(np.abs(n_minus))
    inner = slice(2, -2)
    return float(np.max(np.abs(res[inner])) / scale)


@dataclass
class QCrossCheck:
    max_abs_diff: float
    q_max: float
    relative: float
    n_max_abs_diff: Optional[float] = None


def q_crosscheck(profile: Profile, tol: float = DEFAULT_PAD_TOL) -> QCrossCheck:
    """Algebraic flux against the convolution flux on the interior window.

    For gas profiles the reconstructed ``n`` is also compared with the
    convolution ``1/2 int e^{-|x-y|} theta(y)**4 dy``.
    """
    mask = interior_mask(profile.xi, tol)
    if not np.any(mask):
        raise PaddingError("profile grid has no interior window",
                           required_padding=required_padding(tol))
    s = profile.sys
    q_alg = flux_algebraic(profile)
    conv = flux_from_convolution(profile, at=mask, tol=tol)
    if s.is_gas:
        conv = conv / s.R ** 4
    diff = float(np.max(np.abs(q_alg[mask] - conv)))
    qmax = float(np.max(np.abs(q_alg)))
    n_diff = None
    if s.is_gas and "n" in profile.fields:
        src, dsrc = _gas_source(profile)
        n_conv = convolution_n(profile.xi, src, dsrc, at=mask, tol=tol) / s.R ** 4
        n_diff = float(np.max(np.abs(profile.fields["n"][mask] - n_conv)))
    return QCrossCheck(max_abs_diff=diff, q_max=qmax, relative=diff / qmax,
                       n_max_abs_diff=n_diff)


def conservation_residuals(profile: Profile) -> dict:
    """Pointwise relative defects of the three integrated balance laws."""
    s, F = profile.sys, profile.fields
    rho, v, e, q = F["rho"], F["v"], F["e"], F["q"]
    g = s.gamma
    shock = profile.shock
    mass = np.max(np.abs(rho * v - s.j)) / s.j
    mom = np.max(np.abs(rho * v * v + (g - 1.0) * rho * e - s.j * s.C1)) / (s.j * s.C1)
    en = np.max(np.abs(rho * v * (e + 0.5 * v * v) + (g - 1.0) * rho * v * e + q
                       - s.j * shock.C2)) / (s.j * shock.C2)
    return {"mass": float(mass), "momentum": float(mom), "energy": float(en)}


def tail_errors(profile: Profile) -> dict:
    """Distance of the first / last samples to the end states."""
    F, sh = profile.fields, profile.shock
    left = max(abs(F["rho"][0] - sh.left.rho), abs(F["u"][0] - sh.left.u),
               abs(F["e"][0] - sh.left.e))
    right = max(abs(F["rho"][-1] - sh.right.rho), abs(F["u"][-1] - sh.right.u),
                abs(F["e"][-1] - sh.right.e))
    return {"state_left": float(left), "state_right": float(right),
            "q_left": float(abs(F["q"][0])), "q_right": float(abs(F["q"][-1]))}


def derivative_consistency(profile: Profile) -> float:
    """Max |D vhat - w| / (a / thickness) with D the centred difference."""
    fd = np.gradient(profile.v_hat, profile.xi, edge_order=2)
    return float(np.max(np.abs(fd - profile.w)) * profile.thickness / profile.a)


# ---------------------------------------------------------------------------
# expansion near the glue point
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpansionCoeffs:
    order: int
    w: tuple
    b: tuple
    denominators: tuple

    def polynomial(self, k: Optional[int] = None) -> Polynomial:
        """Truncated expansion ``w0 + w1 v + ... + wk v**k``."""
        k = len(self.w) - 1 if k is None else k
        return Polynomial(self.w[:k + 1])


def max_expansion_order(sys: ReducedSystem) -> int:
    """Largest n for which the coefficients up to w_{n+1} exist (-1 if none)."""
    w0 = node_ordinate(sys.f0, sys.a)
    if w0 == 0.0:
        return REGULARITY_CAP
    return min(REGULARITY_CAP, math.ceil(sys.f0 / -w0) - 4)


def expansion_coeffs(sys: ReducedSystem, n: int) -> ExpansionCoeffs:
    """Coefficients w_0..w_{n+1}, b_0..b_n of the expansion of w in powers of vhat.

    Raises ``ExpansionOrderError`` (with the largest available order) when
    some denominator ``f(0) + (k+2) w0``, k <= n+1, is not positive.
    """
    if n < 0:
        raise ValueError("expansion order must be non-negative")
    w0 = node_ordinate(sys.f0, sys.a)
    denoms = tuple(sys.f0 + (k + 2) * w0 for k in range(1, n + 2))
    if any(d <= 0.0 for d in denoms):
        raise ExpansionOrderError(f"expansion of order {n} not available at a={sys.a:g}",
                                  order=n, max_order=max_expansion_order(sys), a=sys.a)
    c = [sys.taylor0(i) for i in range(n + 2)]
    w = [w0]
    b = []
    for k in range(n + 1):
        bk = 0.5 if k == 1 else 0.0
        bk -= sum(c[i] * w[k + 1 - i] for i in range(1, k + 2))
        bk -= sum((i + 1) * w[i] * w[k + 1 - i] for i in range(1, k + 1))
        b.append(bk)
        w.append(bk / denoms[k])
    return ExpansionCoeffs(order=n, w=tuple(w), b=tuple(b), denominators=denoms)


def regularity_order(sys: ReducedSystem, cap: int = REGULARITY_CAP) -> int:
    """Largest n with ``f(0) + (n+4) w0 > 0``, clamped to ``[0, cap]``."""
    w0 = node_ordinate(sys.f0, sys.a)
    if w0 == 0.0:
        return cap
    return int(min(cap, max(0, math.ceil(sys.f0 / -w0) - 5)))


@dataclass
class FitReport:
    w1_fit: float
    w2_fit: float
    w1_rel_err: float
    w2_rel_err: float
    n_samples: int
    remainder_slopes: dict = field(default_factory=dict)
    remainder_monotone: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.remainder_monotone.values())


def expansion_fit(profile: Profile, coeffs: ExpansionCoeffs, window=(1e-3, 1e-1),
                  trend_window=(1e-4, 1e-3), degree: int = 5, noise_rtol: float = 1e-9,
                  min_samples: int = 8) -> FitReport:
    """Compare the profile near xi = 0 with the truncated expansion.

    ``(w - w0)/vhat`` is fitted by a polynomial of ``degree`` in ``vhat`` over
    ``window[0] a <= |vhat| <= window[1] a`` (both sides); its constant and
    linear coefficients estimate ``w1`` and ``w2``.  For each available k the
    remainder ``r_k = (w - sum_{i<=k} w_i vhat**i) / vhat**k`` must decrease
    in magnitude toward 0 over the decade ``trend_window`` (units of a) on each
    side, ignoring values below the noise floor
    ``(4 eps |w0| + noise_rtol |w - w0|) / |vhat|**k``.
    The trend decade sits below the fit window: there the leading term of
    each remainder dominates, whereas inside the fit window a small ``w1``
    can make ``w - w0`` change sign.
    """
    a, w0 = profile.a, coeffs.w[0]
    v, w = profile.v_hat, profile.w
    absv = np.abs(v)
    sel = (absv >= window[0] * a) & (absv <= window[1] * a)
    if np.count_nonzero(sel) < min_samples:
        raise FitError(f"only {int(np.count_nonzero(sel))} samples with |vhat|/a in "
                       f"[{window[0]:g}, {window[1]:g}]; integrate closer to the node",
                       n_samples=int(np.count_nonzero(sel)), required=min_samples)
    vs, ws = v[sel], w[sel]
    ratio = (ws - w0) / vs
    p = Polynomial.fit(vs, ratio, degree).convert()
    w1_fit, w2_fit = float(p.coef[0]), float(p.coef[1]) if len(p.coef) > 1 else 0.0
    w1, w2 = coeffs.w[1], coeffs.w[2]
    rel1 = abs(w1_fit - w1) / abs(w1) if w1 != 0.0 else abs(w1_fit) * a / abs(w0)
    rel2 = abs(w2_fit - w2) / abs(w2)

    slopes, mono = {}, {}
    last = (absv >= trend_window[0] * a) & (absv <= trend_window[1] * a)
    if np.count_nonzero(last & (v > 0)) < 2 or np.count_nonzero(last & (v < 0)) < 2:
        raise FitError("fewer than two samples per side in the remainder trend window",
                       trend_window=list(trend_window))
    for k in range(len(coeffs.w)):
        slopes[k], mono[k] = _remainder_trend(v, w, coeffs, k, last, noise_rtol)
    return FitReport(w1_fit=w1_fit, w2_fit=w2_fit, w1_rel_err=rel1, w2_rel_err=rel2,
                     n_samples=int(np.count_nonzero(sel)), remainder_slopes=slopes,
                     remainder_monotone=mono)


def _remainder_trend(v, w, coeffs, k, sel, noise_rtol):
    poly = coeffs.polynomial(k)
    vs, ws = v[sel], w[sel]
    r = (ws - poly(vs)) / vs ** k
    w0 = coeffs.w[0]
    floor = (4.0 * np.finfo(float).eps * abs(w0) + noise_rtol * np.abs(ws - w0)) / np.abs(vs) ** k
    ok = True
    slope_pts = []
    for side in (vs > 0, vs < 0):
        order = np.argsort(np.abs(vs[side]))[::-1]  # toward vhat = 0
        rr = np.abs(r[side][order])
        ff = floor[side][order]
        keep = rr > ff
        rr = rr[keep]
        if len(rr) >= 2 and np.any(np.diff(rr) > 0.0):
            ok = False
        slope_pts.append((np.abs(vs[side][order])[keep], rr))
    xs = np.concatenate([p[0] for p in slope_pts])
    ys = np.concatenate([p[1] for p in slope_pts])
    pos = ys > 0
    slope = float(np.polyfit(np.log(xs[pos]), np.log(ys[pos]), 1)[0]) if np.count_nonzero(pos) >= 2 \
        else float("nan")
    return slope, ok


def ell1_measured(traj, sys: ReducedSystem, window=(1e-4, 1e-3)) -> float:
    """Median of ``S''/V'`` along a trajectory, with ``S = (W - w0)/V``.

    Derivatives come from the vector field written relative to the node, so
    no finite differences or cancellation against ``a**2`` are involved.
    Diagnostic only: its limit at the node equals ``w0 * w2``.
    """
    V, W = np.asarray(traj.V), np.asarray(traj.W)
    sel = (np.abs(V) >= window[0] * sys.a) & (np.abs(V) <= window[1] * sys.a)
    if not np.any(sel):
        return float("nan")
    V, W = V[sel], W[sel]
    w0 = traj.w0
    S = (W - w0) / V
    f = sys.f(V)
    fp = sys.f.deriv()(V)
    p1 = Polynomial(sys.f_coeffs[1:] or (0.0,))
    dp1 = p1.deriv()(V)
    dV = V * W
    dS = -S * (2.0 * W + w0 + f) - w0 * p1(V) + 0.5 * V
    dW = V * (dS + S * W)
    d2S = -dS * (2.0 * W + w0 + f) - S * (2.0 * dW + fp * dV) - w0 * dp1 * dV + 0.5 * dV
    return float(np.median(d2S / dV))


# ---------------------------------------------------------------------------
# gamma condition and the sign of f'(0) in the small-amplitude limit
# ---------------------------------------------------------------------------

def gamma_condition(consts: GasConstants):
    """``(ok, margin)`` with ok iff 1 < gamma < (sqrt 7 + 1)/(sqrt 7 - 1)."""
    margin = GAMMA_MAX - consts.gamma
    return bool(consts.gamma > 1.0 and margin > 0.0), float(margin)


def limit_fprime0(left: GasState, gamma: float, R: float = 1.0) -> float:
    """f'(0) of the polynomial built from the zero-amplitude limits of j and C1."""
    consts = GasConstants(gamma, R)
    lim = small_shock_limits(left, consts)
    return float(f_polynomial(gamma, R, lim.j, lim.C1).deriv()(0.0))


def gamma_threshold(left: GasState, lo: float = 2.0, hi: float = 2.5, R: float = 1.0,
                    xtol: float = 1e-12) -> float:
    """Bisection for the adiabatic index at which the limiting f'(0) changes sign."""
    return float(bisect(lambda g: limit_fprime0(left, g, R), lo, hi, xtol=xtol))


# ---------------------------------------------------------------------------
# aggregated gates
# ---------------------------------------------------------------------------

@dataclass
class VerificationReport:
    values: dict
    thresholds: dict

    @property
    def failed(self) -> list:
        return [k for k, v in self.values.items()
                if k in self.thresholds and not (v <= self.thresholds[k])]

    @property
    def ok(self) -> bool:
        return not self.failed

    def as_dict(self) -> dict:
        return {"values": dict(self.values), "thresholds": dict(self.thresholds),
                "failed": self.failed, "ok": self.ok}


def verify_profile(profile: Profile, tol: float = DEFAULT_PAD_TOL,
                   thresholds: Optional[dict] = None) -> VerificationReport:
    """Run every residual check that applies to ``profile``."""
    th = dict(GATES if thresholds is None else thresholds)
    vals = {
        "integral_residual": integral_residual(profile, tol),
        "ode_residual": ode_residual(profile),
        "q_crosscheck": q_crosscheck(profile, tol).relative,
    }
    if profile.sys.is_gas and profile.fields:
        vals["n_residual"] = n_residual(profile)
        vals.update(conservation_residuals(profile))
        tails = tail_errors(profile)
        vals["tail_state"] = max(tails["state_left"], tails["state_right"])
        vals["tail_q"] = max(tails["q_left"], tails["q_right"])
    return VerificationReport(values=vals, thresholds={k: th[k] for k in vals if k in th})
