import math
from dataclasses import replace

import mpmath as mp
import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from radshock.baby import baby_reduced
from radshock.errors import ExpansionOrderError, PaddingError
from radshock.gas import GasConstants, shock_from_amplitude
from radshock.reduced import GAMMA_MAX, build_reduced, node_ordinate
from radshock.verify import (GATES, convolution_n, convolution_q, exponential_sweeps,
                             expansion_coeffs, expansion_fit, gamma_condition, gamma_threshold,
                             integral_residual, interior_mask, max_expansion_order, n_residual,
                             ode_residual, q_crosscheck, regularity_order, required_padding,
                             verify_profile)

from conftest import GAS, LEFT

mp.mp.dps = 30


# ---------------------------------------------------------------- convolution

def _q_quad(g, x, kinks=()):
    lo = [k for k in kinks if k < x]
    hi = [k for k in kinks if k > x]
    left = mp.quad(lambda y: mp.exp(-(x - y)) * g(y), [-mp.inf, *lo, x])
    right = mp.quad(lambda y: mp.exp(-(y - x)) * g(y), [x, *hi, mp.inf])
    return 0.5 * (left - right), 0.5 * (left + right)


def test_constant_source_has_zero_flux():
    xi = np.linspace(-40, 40, 801)
    g = np.full_like(xi, 3.7)
    assert np.max(np.abs(convolution_q(xi, g))) == 0.0
    assert np.allclose(convolution_n(xi, g, np.zeros_like(g)), 3.7, rtol=1e-15)


def test_heaviside_through_repeated_node():
    left = np.linspace(-40, 0, 401)
    xi = np.concatenate([left, -left[::-1]])
    g = np.concatenate([np.zeros(401), np.ones(401)])
    i0 = np.flatnonzero(xi == 0.0)
    mask = np.zeros(len(xi), bool)
    mask[i0] = True
    q = convolution_q(xi, g, np.zeros_like(g), at=mask)
    n = convolution_n(xi, g, np.zeros_like(g), at=mask)
    assert np.allclose(q, -0.5, atol=1e-15)
    assert np.allclose(n, 0.5, atol=1e-15)
    # away from the jump: q(x) = -e^{-x}/2 for x > 0
    j = np.flatnonzero((xi > 1) & (xi < 10))
    assert np.allclose(convolution_q(xi, g, np.zeros_like(g))[j], -0.5 * np.exp(-xi[j]),
                       atol=1e-14)


def test_linear_source_exact_on_linear_scheme():
    xi = np.linspace(-40, 40, 161)  # kinks at +-1 fall on nodes
    g = np.clip(xi, -1.0, 1.0)
    for x in (-0.5, 0.0, 0.7):
        k = np.flatnonzero(np.isclose(xi, x))
        if not len(k):
            continue
        mask = np.zeros(len(xi), bool)
        mask[k] = True
        qo, no = _q_quad(lambda y: mp.mpf(-1) if y < -1 else (mp.mpf(1) if y > 1 else y), x,
                         kinks=(-1, 1))
        assert convolution_q(xi, g, at=mask)[0] == pytest.approx(float(qo), abs=1e-14)


@pytest.mark.parametrize("h", [0.2, 0.1])
def test_smooth_source_against_quadrature(h):
    xi = np.arange(-40, 40 + h / 2, h)
    g, dg = np.tanh(xi), 1 / np.cosh(xi) ** 2
    mask = np.zeros(len(xi), bool)
    pts = [int(np.argmin(np.abs(xi - x))) for x in (-1.0, 0.0, 0.5, 2.0)]
    mask[pts] = True
    q = convolution_q(xi, g, dg, at=mask)
    n = convolution_n(xi, g, dg, at=mask)
    for qi, ni, x in zip(q, n, xi[mask]):
        qo, no = _q_quad(mp.tanh, mp.mpf(x))
        assert abs(qi - float(qo)) < 1e-2 * h ** 4
        assert abs(ni - float(no)) < 1e-2 * h ** 4


def test_hermite_fourth_order_linear_second_order():
    errs_h, errs_l = [], []
    x0 = 0.3
    qo, _ = _q_quad(mp.tanh, mp.mpf(x0))
    for h in (0.1, 0.05):
        xi = np.unique(np.concatenate([np.arange(-40, 40 + h / 2, h), [x0]]))
        mask = xi == x0
        g, dg = np.tanh(xi), 1 / np.cosh(xi) ** 2
        errs_h.append(abs(convolution_q(xi, g, dg, at=mask)[0] - float(qo)))
        errs_l.append(abs(convolution_q(xi, g, at=mask)[0] - float(qo)))
    assert 12 < errs_h[0] / errs_h[1] < 20
    assert 3.5 < errs_l[0] / errs_l[1] < 4.5


def test_padding_enforced():
    xi = np.linspace(-30, 30, 601)
    g = np.tanh(xi)
    assert required_padding(1e-10) == pytest.approx(math.log(1e10))
    mask = interior_mask(xi)
    assert mask.any() and not mask[0] and not mask[-1]
    bad = np.zeros(len(xi), bool)
    bad[10] = True
    with pytest.raises(PaddingError) as info:
        convolution_q(xi, g, at=bad)
    assert info.value.details["required_padding"] == pytest.approx(math.log(1e10))


def test_sweeps_reject_bad_grid():
    with pytest.raises(ValueError):
        exponential_sweeps(np.array([0.0, 1.0, 0.5]), np.zeros(3))


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-3, 3))
def test_q_is_linear_and_odd(c0, c1):
    xi = np.linspace(-40, 40, 401)
    g = np.tanh(xi)
    q = convolution_q(xi, c0 + c1 * g)
    assert np.allclose(q, c1 * convolution_q(xi, g), atol=1e-12 * (1 + abs(c0) + abs(c1)))
    mid = slice(100, 301)
    assert np.allclose(convolution_q(xi, g)[mid], convolution_q(xi, g)[mid][::-1], atol=1e-12)


# ---------------------------------------------------------------- residuals

def test_desk_residuals(desk):
    rep = desk.verification
    assert rep.ok, rep.failed
    assert set(GATES) <= set(rep.values)


def test_integral_residual_detects_corruption(desk):
    p = desk.profile
    base = integral_residual(p)
    bent = replace(p, v_hat=1.01 * p.v_hat, fields={})
    assert integral_residual(bent) >= 10 * base


def test_ode_residual_detects_corruption(desk):
    p = desk.profile
    w = p.w.copy()
    w[p.i0 + 3] *= 1.001
    assert ode_residual(replace(p, w=w)) > 10 * ode_residual(p)


def test_n_residual_and_crosscheck(desk, baby):
    assert n_residual(desk.profile) < GATES["n_residual"]
    qc = q_crosscheck(desk.profile)
    assert qc.relative < 1e-6
    assert q_crosscheck(baby.profile).relative < 1e-6


def test_verify_profile_custom_threshold(baby):
    rep = verify_profile(baby.profile, thresholds={**GATES, "ode_residual": 0.0})
    assert rep.failed == ["ode_residual"]
    assert rep.as_dict()["ok"] is False


# ---------------------------------------------------------------- expansion

def _series_oracle(sys, n):
    """Solve V W W' = -W^2 - f W + (V^2 - a^2)/2 order by order with sympy."""
    V = sympy.Symbol("V")
    c = [sympy.Float(sys.taylor0(i), 30) for i in range(n + 2)]
    w = [sympy.Float(node_ordinate(sys.f0, sys.a), 30)]
    for m in range(1, n + 2):
        wm = sympy.Symbol("wm")
        W = sum(w[i] * V ** i for i in range(m)) + wm * V ** m
        f = sum(c[i] * V ** i for i in range(m + 1))
        expr = sympy.expand(V * W * sympy.diff(W, V) + W ** 2 + f * W
                            - (V ** 2 - sympy.Float(sys.a, 30) ** 2) / 2)
        w.append(sympy.solve(expr.coeff(V, m), wm)[0])
    return [float(x) for x in w]


@pytest.mark.parametrize("a", [1e-3, 3e-3])
def test_gas_expansion_matches_series(a):
    sys = build_reduced(shock_from_amplitude(LEFT, GAS, a))
    co = expansion_coeffs(sys, 3)
    oracle = _series_oracle(sys, 3)
    assert np.allclose(co.w, oracle, rtol=1e-10, atol=0)


def test_baby_expansion():
    sys = baby_reduced(0.5)
    co = expansion_coeffs(sys, max_expansion_order(sys))
    w0 = co.w[0]
    assert w0 == pytest.approx(-0.14644660940672623780, rel=1e-14)
    assert co.w[1] == 0.0
    assert co.w[2] == pytest.approx(0.5 / (1 + 4 * w0), rel=1e-14)
    assert np.allclose(co.w, _series_oracle(sys, co.order), rtol=1e-10, atol=1e-14)


def test_first_order_coefficient_formula(desk):
    sys = desk.sys
    co = expansion_coeffs(sys, 1)
    w0 = co.w[0]
    assert co.w[1] == pytest.approx(-sys.fp0 * w0 / (sys.f0 + 3 * w0), rel=1e-13)
    assert co.w[1] * w0 == pytest.approx(desk.report.glue_derivative, rel=1e-13)


def test_expansion_order_error():
    sys = baby_reduced(0.5)
    assert max_expansion_order(sys) == 3
    with pytest.raises(ExpansionOrderError) as info:
        expansion_coeffs(sys, 4)
    assert info.value.details["max_order"] == 3
    with pytest.raises(ValueError):
        expansion_coeffs(sys, -1)


def test_regularity_order():
    assert regularity_order(baby_reduced(0.5)) == 2
    assert regularity_order(baby_reduced(1e-3)) == 64
    orders = [regularity_order(baby_reduced(a)) for a in np.linspace(0.05, 0.7, 30)]
    assert all(x >= y for x, y in zip(orders, orders[1:]))
    for a in (0.1, 0.3, 0.6):
        sys = baby_reduced(a)
        n = regularity_order(sys)
        w0 = node_ordinate(sys.f0, sys.a)
        if 0 < n < 64:
            assert sys.f0 + (n + 4) * w0 > 0 and sys.f0 + (n + 5) * w0 <= 0


def test_expansion_fit(desk, baby):
    fit = expansion_fit(desk.native, expansion_coeffs(desk.sys, 3))
    assert fit.w1_rel_err < 1e-3 and fit.w2_rel_err < 1e-2 and fit.ok
    fit = expansion_fit(baby.native, expansion_coeffs(baby.sys, 3))
    assert fit.w2_rel_err < 1e-2 and fit.ok


# ---------------------------------------------------------------- gamma

def test_gamma_condition():
    ok, margin = gamma_condition(GasConstants(1.4, 1.0))
    assert ok and margin == pytest.approx(2.215250437021530196834 - 1.4, rel=1e-14)
    assert not gamma_condition(GasConstants(2.3, 1.0))[0]
    assert gamma_condition(GasConstants(2.2152, 1.0))[0]
    assert not gamma_condition(GasConstants(2.2153, 1.0))[0]
    assert GAMMA_MAX == pytest.approx((math.sqrt(7) + 1) / (math.sqrt(7) - 1), rel=1e-15)


def test_gamma_threshold_bisection():
    g = gamma_threshold(LEFT)
    assert abs(g - 2.215250437021530196834) < 1e-9


def test_ell1_diagnostic(desk, baby):
    from radshock.verify import ell1_measured
    for res in (desk, baby):
        co = expansion_coeffs(res.sys, 1)
        series = co.w[0] * co.w[2]
        for t in (res.flat, res.sharp):
            assert ell1_measured(t, res.sys) == pytest.approx(series, rel=1e-3)
    assert math.isnan(ell1_measured(desk.flat, desk.sys, window=(2.0, 3.0)))
