"""Acceptance criteria 1-11, one PASS/FAIL line each.

Run under pytest (the lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import A_BABY, A_DESK, GAS, LEFT, record_acceptance  # noqa: E402
from radshock.baby import baby_energy_check, baby_reduced  # noqa: E402
from radshock.errors import DiscriminantError  # noqa: E402
from radshock.gas import (GasConstants, GasState, lax_check, shock_from_amplitude,  # noqa: E402
                          small_shock_limits)
from radshock.pipeline import PipelineOptions, baby_profile, gas_profile  # noqa: E402
from radshock.reduced import build_reduced, equilibria  # noqa: E402
from radshock.verify import (expansion_coeffs, expansion_fit, gamma_threshold,  # noqa: E402
                             integral_residual, limit_fprime0, n_residual, ode_residual,
                             q_crosscheck, regularity_order)

SEED = 20240601


def _report(n, ok, detail):
    line = f"Criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    record_acceptance(line)
    print(line)
    assert ok, line


def _fluxes(state, sigma, gamma):
    v = state.u - sigma
    P = (gamma - 1) * state.rho * state.e
    return np.array([state.rho * v, state.rho * v * v + P,
                     state.rho * v * (state.e + v * v / 2) + P * v])


def test_criterion_1_rankine_hugoniot():
    rng = np.random.default_rng(SEED)
    worst, lax_ok = 0.0, True
    for _ in range(50):
        left = GasState(rng.uniform(0.1, 10), rng.uniform(-5, 5), rng.uniform(0.1, 10))
        gamma = float(rng.choice([1.2, 1.4, 5 / 3, 2.0]))
        a = float(10 ** rng.uniform(-4, -2))
        sh = shock_from_amplitude(left, GasConstants(gamma), a)
        fl, fr = _fluxes(sh.left, sh.sigma, gamma), _fluxes(sh.right, sh.sigma, gamma)
        consts = np.array([sh.j, sh.j * sh.C1, sh.j * sh.C2])
        worst = max(worst, float(np.max(np.abs(fl - fr) / np.abs(fl))),
                    float(np.max(np.abs(fl - consts) / np.abs(consts))))
        lax_ok &= bool(lax_check(sh).ok and sh.right.rho > sh.left.rho
                       and 0 < sh.v_plus < sh.v_minus)
    _report(1, worst <= 1e-12 and lax_ok,
            f"max RH relative residual {worst:.2e} (<= 1e-12), Lax/compressive on all 50: {lax_ok}")


def test_criterion_2_small_shock_limits():
    lim = small_shock_limits(LEFT, GAS)
    amps = [1e-2, 1e-3, 1e-4]
    errs = []
    for a in amps:
        sh = shock_from_amplitude(LEFT, GAS, a)
        errs.append(np.abs(np.array([sh.sigma, sh.j, sh.C1, sh.C2]) - lim.as_array()))
    errs = np.array(errs)
    rates = np.log10(errs[:-1] / errs[1:])
    f0 = build_reduced(shock_from_amplitude(LEFT, GAS, A_DESK)).f0
    rel_f0 = abs(f0 - lim.f0) / abs(lim.f0)
    ok = bool(np.all(rates >= 0.9)) and rel_f0 <= 0.05
    _report(2, ok, f"min order {rates.min():.3f} (>= 0.9); f(0) at a=1e-3 {f0:.6e} vs "
                   f"limit {lim.f0:.6e}, rel err {rel_f0:.2e} (<= 5%)")


def test_criterion_3_gamma_threshold():
    pos = [limit_fprime0(LEFT, g) for g in (1.5, 2.0, 2.2)]
    neg = [limit_fprime0(LEFT, g) for g in (2.23, 2.5)]
    g_star = gamma_threshold(LEFT)
    ok = all(x > 0 for x in pos) and all(x < 0 for x in neg) and 2.215 <= g_star <= 2.2155
    _report(3, ok, f"f'(0) limit signs + for 1.5,2.0,2.2 and - for 2.23,2.5: "
                   f"{all(x > 0 for x in pos) and all(x < 0 for x in neg)}; "
                   f"threshold {g_star:.10f} in [2.215, 2.2155]")


def _contained(traj, nc, a):
    V, W = traj.V, traj.W
    slack = 1e-14 * abs(traj.w0)
    ok = bool(np.all(W < 0) and np.all(np.abs(V) < a))
    if traj.side == "flat":
        ok &= bool(np.all(V > 0) and np.all(W - nc.W1(V) > -slack))
    else:
        below = V < nc.Vbar
        ok &= bool(np.all(V < 0) and np.all(W[below] - nc.W1(V[below]) > -slack))
        if not nc.Vbar_degenerate:
            ok &= bool(np.all(W[~below] - nc.W1_at_Vbar > -slack))
    return ok


def test_criterion_4_heteroclinic(desk):
    rep, nc, a = desk.report, desk.nullclines, desk.sys.a
    term = max(math.hypot(t.V[-1], t.W[-1] - rep.w0) for t in (desk.flat, desk.sharp))
    contained = _contained(desk.flat, nc, a) and _contained(desk.sharp, nc, a)
    mono = bool(np.all(np.diff(desk.flat.V) < 0) and np.all(np.diff(desk.sharp.V) > 0))
    Ws = desk.sharp.W
    minima = int(np.count_nonzero((Ws[1:-1] < Ws[:-2]) & (Ws[1:-1] <= Ws[2:])))
    ok = term <= 1e-10 and contained and mono and minima == 1
    _report(4, ok, f"terminal distance {term:.2e} (<= 1e-10), contained {contained}, "
                   f"V monotone {mono}, interior minima of W# {minima}")


def test_criterion_5_gluing(desk):
    rep, p = desk.report, desk.native
    sys_ = desk.sys
    target = -sys_.fp0 * rep.w0 ** 2 / (sys_.f0 + 3 * rep.w0)
    jump = abs(p.dw_plus - p.dw_minus)
    rel = max(abs(p.dw_minus - target), abs(p.dw_plus - target)) / abs(target)
    ok = jump <= 1e-6 * abs(target) and rel <= 1e-4
    _report(5, ok, f"|w'(0+)-w'(0-)|/|w'(0)| {jump / abs(target):.2e} (<= 1e-6), "
                   f"match to closed form {rel:.2e} (<= 1e-4)")


def test_criterion_6_integral_residual(desk):
    p = desk.profile
    r = integral_residual(p)
    bent = integral_residual(replace(p, v_hat=1.01 * p.v_hat, fields={}))
    ok = r <= 1e-5 and bent >= 10 * r
    _report(6, ok, f"scaled residual {r:.2e} (<= 1e-5); 1% corruption gives {bent:.2e} "
                   f"({bent / r:.1e}x, >= 10x)")


def test_criterion_7_ode_residual(desk, desk_halved):
    r1, r2 = ode_residual(desk.profile), ode_residual(desk_halved.profile)
    ok = r1 <= 1e-4 and r1 / r2 >= 3
    _report(7, ok, f"scaled residual {r1:.2e} (<= 1e-4); halved tolerances {r2:.2e}, "
                   f"ratio {r1 / r2:.2f} (>= 3)")


def test_criterion_8_flux_crosscheck(desk, desk_halved):
    qc = q_crosscheck(desk.profile)
    n1, n2 = n_residual(desk.profile), n_residual(desk_halved.profile)
    ok = qc.relative <= 1e-6 and n1 / n2 >= 3
    _report(8, ok, f"q algebraic vs convolution {qc.relative:.2e} (<= 1e-6); n residual "
                   f"{n1:.2e} -> {n2:.2e} under halving, ratio {n1 / n2:.2f} (>= 3)")


def test_criterion_9_expansion(desk):
    co = expansion_coeffs(desk.sys, 3)
    fit = expansion_fit(desk.native, co)
    w1 = co.w[1]
    slope = max(abs(t.terminal_slope - w1) / abs(w1) for t in (desk.flat, desk.sharp))
    ok = fit.w1_rel_err <= 1e-3 and fit.w2_rel_err <= 1e-2 and slope <= 1e-6
    _report(9, ok, f"w1 fit rel err {fit.w1_rel_err:.2e} (<= 1e-3), w2 fit rel err "
                   f"{fit.w2_rel_err:.2e} (<= 1e-2), terminal slope vs w1 {slope:.2e} (<= 1e-6)")


def test_criterion_10_baby(baby):
    w0 = equilibria(baby_reduced(A_BABY)).w0
    w0_err = abs(w0 - (-1 + math.sqrt(0.5)) / 2)
    try:
        baby_profile(0.8)
        refused = False
    except DiscriminantError:
        refused = True
    w1 = expansion_coeffs(baby.sys, 1).w[1]
    n_reg = regularity_order(baby.sys)
    fi = baby_energy_check(baby.profile)
    ok = w0_err <= 1e-12 and refused and w1 == 0.0 and n_reg == 2 and fi <= 1e-8
    _report(10, ok, f"w0 err {w0_err:.1e} (<= 1e-12), a=0.8 refused {refused}, w1 = {w1!r}, "
                    f"regularity order {n_reg}, first integral {fi:.2e} (<= 1e-8)")


def test_criterion_11_tails(desk):
    F, sh = desk.profile.fields, desk.shock
    state = max(abs(F[k][i] - getattr(st, k)) for k in ("rho", "u", "e")
                for i, st in ((0, sh.left), (-1, sh.right)))
    q = max(abs(F["q"][0]), abs(F["q"][-1]))
    ok = state <= 1e-6 and q <= 1e-8
    _report(11, ok, f"(rho, u, e) tails {state:.2e} (<= 1e-6), q tails {q:.2e} (<= 1e-8)")


if __name__ == "__main__":
    fixtures = {"desk": gas_profile(LEFT, GAS, A_DESK),
                "desk_halved": gas_profile(LEFT, GAS, A_DESK, PipelineOptions().halved()),
                "baby": baby_profile(A_BABY)}
    failed = 0
    for name, fn in sorted(((k, v) for k, v in globals().items() if k.startswith("test_")),
                           key=lambda kv: int(kv[0].split("_")[2])):
        args = [fixtures[p] for p in fn.__code__.co_varnames[:fn.__code__.co_argcount]]
        try:
            fn(*args)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
