"""End-to-end construction of a profile and its summary record."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .baby import BabySystem, baby_fields, baby_reduced
from .errors import (AmplitudeTooLargeError, ExpansionOrderError, GammaConditionError,
                     RadShockError)
from .gas import GasConstants, GasState, ShockData, lax_check, shock_from_amplitude
from .glue import Profile, glue, reconstruct, resample
from .manifold import ManifoldOptions, Trajectory, integrate_manifold
from .reduced import (EquilibriumReport, NullclineData, ReducedSystem, build_reduced,
                      check_hypotheses, equilibria, nullclines)
from .verify import (DEFAULT_PAD_TOL, VerificationReport, ell1_measured, expansion_coeffs,
                     expansion_fit, gamma_condition, max_expansion_order, regularity_order,
                     verify_profile)


@dataclass(frozen=True)
class PipelineOptions:
    manifold: ManifoldOptions = field(default_factory=ManifoldOptions)
    points_per_thickness: float = 400.0
    match_tol: float = 1e-4
    pad_tol: float = DEFAULT_PAD_TOL
    expansion_order: int = 1
    xi_method: str = "ode"
    require_gamma_condition: bool = True

    def halved(self) -> "PipelineOptions":
        """Every discretization tolerance halved (integrator and output spacing)."""
        m = replace(self.manifold, rtol=0.5 * self.manifold.rtol,
                    atol=0.5 * self.manifold.atol)
        return replace(self, manifold=m, points_per_thickness=2.0 * self.points_per_thickness)


@dataclass
class PipelineResult:
    sys: ReducedSystem
    report: EquilibriumReport
    nullclines: NullclineData
    flat: Trajectory
    sharp: Trajectory
    native: Profile
    profile: Profile
    shock: Optional[ShockData] = None
    baby: Optional[BabySystem] = None
    verification: Optional[VerificationReport] = None


def _orbits(sys: ReducedSystem, opts: PipelineOptions):
    report = equilibria(sys)
    nc = nullclines(sys, report.w0)
    flat = integrate_manifold(sys, report, nc, "flat", opts.manifold)
    sharp = integrate_manifold(sys, report, nc, "sharp", opts.manifold)
    native = glue(flat, sharp, sys, report, match_tol=opts.match_tol, method=opts.xi_method)
    return report, nc, flat, sharp, native


def gas_profile(left: GasState, consts: GasConstants, a: float,
                opts: PipelineOptions = PipelineOptions(), verify: bool = True) -> PipelineResult:
    """Shock, reduced system, both orbits, glued and reconstructed profile."""
    if opts.require_gamma_condition:
        ok, margin = gamma_condition(consts)
        if not ok:
            raise GammaConditionError(
                f"gamma={consts.gamma:g} is outside the range 1 < gamma < 2.21525 where "
                f"f'(0) > 0 for small shocks", gamma=consts.gamma, margin=margin)
    shock = shock_from_amplitude(left, consts, a)
    sys = build_reduced(shock)
    hyp = check_hypotheses(sys)
    for name in ("f_positive", "fprime_positive", "nullcline_discriminant", "node_ordering"):
        if hyp[name] is False:
            raise AmplitudeTooLargeError(f"small-amplitude hypothesis '{name}' fails at "
                                         f"a={a:g}", hypothesis=name, a=a)
    report, nc, flat, sharp, native = _orbits(sys, opts)
    profile = resample(native, points_per_thickness=opts.points_per_thickness)
    profile = reconstruct(profile, shock)
    res = PipelineResult(sys=sys, report=report, nullclines=nc, flat=flat, sharp=sharp,
                         native=native, profile=profile, shock=shock)
    if verify:
        res.verification = verify_profile(profile, opts.pad_tol)
    return res


def baby_profile(a: float, s: float = 0.0, opts: PipelineOptions = PipelineOptions(),
                 verify: bool = True) -> PipelineResult:
    system = BabySystem.centred(a, s)
    sys = baby_reduced(a)
    report, nc, flat, sharp, native = _orbits(sys, opts)
    profile = resample(native, points_per_thickness=opts.points_per_thickness)
    profile.fields.update(baby_fields(profile, system))
    res = PipelineResult(sys=sys, report=report, nullclines=nc, flat=flat, sharp=sharp,
                         native=native, profile=profile, baby=system)
    if verify:
        res.verification = verify_profile(profile, opts.pad_tol)
    return res


def _finite(x):
    return x if (not isinstance(x, float) or math.isfinite(x)) else None


def summary(res: PipelineResult, order: Optional[int] = None) -> dict:
    """Flat JSON-ready record of a pipeline run."""
    sys, rep = res.sys, res.report
    out = {"model": sys.label, "a": sys.a, "f_coeffs": list(sys.f_coeffs)}
    if res.shock is not None:
        out.update(res.shock.summary())
        lax = lax_check(res.shock)
        out["lax_ok"] = lax.ok
        out["lax_margins"] = lax.margins
        out["rh_residuals"] = res.shock.rh_residuals()
    if res.baby is not None:
        out.update({"u_minus": res.baby.u_minus, "u_plus": res.baby.u_plus, "s": res.baby.s})
    out.update(rep.summary())
    out["lambda_ratio"] = rep.stiffness
    out["tangency_slope"] = rep.tangency_slope
    out["glue_derivative"] = rep.glue_derivative
    out["dw_minus"] = res.native.dw_minus
    out["dw_plus"] = res.native.dw_plus
    out["Vbar"] = res.nullclines.Vbar
    out["Vbar_degenerate"] = res.nullclines.Vbar_degenerate
    out["hypotheses"] = check_hypotheses(sys)
    for t in (res.flat, res.sharp):
        out[f"{t.side}_terminal_error"] = t.terminal_error
        out[f"{t.side}_terminal_slope"] = t.terminal_slope
        out[f"{t.side}_steps"] = len(t.eta) - 1
        out[f"{t.side}_method"] = t.method
        out[f"{t.side}_offset"] = t.offset
    out["sharp_w_minima"] = res.sharp.w_minima()
    out["n_points"] = len(res.profile.xi)
    out["h"] = res.profile.meta.get("h")
    out["regularity_order"] = regularity_order(sys)
    n = max_expansion_order(sys) if order is None else order
    n = max(0, min(n, 8))
    try:
        co = expansion_coeffs(sys, n)
        out["expansion"] = {"order": co.order, "w": list(co.w), "b": list(co.b)}
        try:
            fit = expansion_fit(res.native, co)
            out["expansion_fit"] = {"w1_fit": fit.w1_fit, "w2_fit": fit.w2_fit,
                                    "w1_rel_err": _finite(fit.w1_rel_err),
                                    "w2_rel_err": _finite(fit.w2_rel_err),
                                    "remainders_monotone": fit.ok}
        except RadShockError as exc:  # diagnostic only
            out["expansion_fit"] = {"error": str(exc)}
        if co.order >= 1:
            out["ell1"] = {"series": co.w[0] * co.w[2],
                           "flat": _finite(ell1_measured(res.flat, sys)),
                           "sharp": _finite(ell1_measured(res.sharp, sys))}
    except ExpansionOrderError as exc:
        out["expansion"] = exc.to_record()
    if res.verification is not None:
        out["residuals"] = res.verification.values
        out["gates_failed"] = res.verification.failed
        out["ok"] = res.verification.ok
    return out
