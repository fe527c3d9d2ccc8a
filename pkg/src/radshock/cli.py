"""Command line front end: ``radshock profile|sweep|baby|verify|expansion``.

Exit status: 0 success, 2 validation refusal, 3 numerical failure or failed
verification gate, 4 I/O.  Errors are printed to stdout as one JSON record.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .baby import baby_reduced
from .errors import ConfigError, ProfileFormatError, RadShockError, VerificationError
from .gas import GasConstants, GasState, shock_from_amplitude
from .manifold import ManifoldOptions
from .pipeline import PipelineOptions, baby_profile, gas_profile, summary
from .profile_io import (COLUMN_TOL, DERIVATIVE_TOL, profile_from_columns, read_columns,
                         write_profile)
from .reduced import build_reduced
from .verify import (derivative_consistency, expansion_coeffs, regularity_order,
                     verify_profile)

CONFIG_KEYS = {"left", "gamma", "R", "a", "rtol", "atol", "offset", "terminal_tol",
               "points_per_thickness", "order", "out", "format", "model", "s"}


@dataclass
class RunConfig:
    left: tuple = (1.0, 0.0, 1.0)
    gamma: list = field(default_factory=lambda: [1.4])
    R: float = 1.0
    a: list = field(default_factory=lambda: [1e-3])
    rtol: float = 1e-10
    atol: float = 1e-12
    offset: float = 1e-6
    terminal_tol: float = 1e-10
    points_per_thickness: float = 400.0
    order: int = 1
    out: Optional[str] = None
    format: str = "csv"
    model: str = "gas"
    s: float = 0.0

    def validate(self) -> "RunConfig":
        nums = [*self.left, *self.gamma, *self.a, self.R, self.rtol, self.atol, self.offset,
                self.terminal_tol, self.points_per_thickness, self.s]
        if not all(isinstance(x, (int, float)) and math.isfinite(x) for x in nums):
            raise ConfigError("all numeric configuration fields must be finite numbers")
        if len(self.left) != 3:
            raise ConfigError("left state must be [rho, u, e]")
        if not self.a:
            raise ConfigError("amplitude list is empty")
        if not self.gamma:
            raise ConfigError("gamma list is empty")
        if any(x <= 0.0 for x in self.a):
            raise ConfigError("amplitudes must be positive", a=list(self.a))
        if not (isinstance(self.order, int) and self.order >= 0):
            raise ConfigError("expansion order must be a non-negative integer", order=self.order)
        if min(self.rtol, self.atol, self.offset, self.terminal_tol,
               self.points_per_thickness) <= 0.0:
            raise ConfigError("tolerances and grid density must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.model not in ("gas", "baby"):
            raise ConfigError(f"unknown model {self.model!r}")
        return self

    def options(self) -> PipelineOptions:
        m = ManifoldOptions(rtol=self.rtol, atol=self.atol, offset=self.offset,
                            terminal_tol=self.terminal_tol)
        return PipelineOptions(manifold=m, points_per_thickness=self.points_per_thickness,
                               expansion_order=self.order)

    @property
    def left_state(self) -> GasState:
        return GasState(*self.left)


def _as_list(x):
    return [float(v) for v in x] if isinstance(x, (list, tuple)) else [float(x)]


def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ProfileFormatError(f"cannot read config {path}: {exc}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}", path=path) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}", keys=sorted(unknown))
    return raw


def build_config(args) -> RunConfig:
    raw = load_config(args.config)
    cfg = RunConfig()
    try:
        if "left" in raw:
            left = raw["left"]
            cfg.left = tuple(float(left[k]) for k in ("rho", "u", "e")) if isinstance(left, dict) \
                else tuple(float(v) for v in left)
        for key in ("R", "rtol", "atol", "offset", "terminal_tol", "points_per_thickness", "s"):
            if key in raw:
                setattr(cfg, key, float(raw[key]))
        if "gamma" in raw:
            cfg.gamma = _as_list(raw["gamma"])
        if "a" in raw:
            cfg.a = _as_list(raw["a"])
        for key in ("order", "out", "format", "model"):
            if key in raw:
                setattr(cfg, key, raw[key])
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"malformed config value: {exc}") from exc
    # command line flags win over the file
    flag_map = {"gamma": "gamma", "a": "a"}
    for attr, key in flag_map.items():
        val = getattr(args, attr, None)
        if val is not None:
            setattr(cfg, key, val)
    for attr in ("R", "rtol", "atol", "order", "out", "format", "points_per_thickness", "s",
                 "model"):
        val = getattr(args, attr, None)
        if val is not None:
            setattr(cfg, attr, val)
    for i, attr in enumerate(("rho", "u", "e")):
        val = getattr(args, attr, None)
        if val is not None:
            left = list(cfg.left)
            left[i] = val
            cfg.left = tuple(left)
    return cfg.validate()


def _float_list(text: str):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc
    return vals


def _emit(record: dict, out_dir: Optional[str], name: str):
    text = json.dumps(record, indent=2, sort_keys=True, default=_jsonable)
    print(text)
    if out_dir is not None:
        _write(Path(out_dir) / name, text + "\n")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ProfileFormatError(f"cannot write {path}: {exc}", path=str(path)) from exc


def _write_profile(res, cfg: RunConfig):
    if cfg.out is None:
        return None
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ProfileFormatError(f"cannot create {out}: {exc}", path=str(out)) from exc
    return str(write_profile(res.profile, out / f"profile.{cfg.format}", cfg.format))


def _gate(record: dict, res):
    if res.verification is not None and not res.verification.ok:
        err = VerificationError("verification gates failed: " + ", ".join(res.verification.failed),
                                gates=res.verification.failed)
        record["error"] = err.to_record()
        return err.exit_code
    return 0


# -- subcommands ---------------------------------------------------------------

def cmd_profile(args) -> int:
    cfg = build_config(args)
    if len(cfg.a) != 1 or len(cfg.gamma) != 1:
        raise ConfigError("profile takes a single amplitude and gamma; use sweep for lists")
    res = gas_profile(cfg.left_state, GasConstants(cfg.gamma[0], cfg.R), cfg.a[0], cfg.options())
    record = summary(res, cfg.order)
    record["profile_file"] = _write_profile(res, cfg)
    code = _gate(record, res)
    _emit(record, cfg.out, "summary.json")
    return code


def cmd_baby(args) -> int:
    cfg = build_config(args)
    if len(cfg.a) != 1:
        raise ConfigError("baby takes a single amplitude")
    res = baby_profile(cfg.a[0], cfg.s, cfg.options())
    record = summary(res, cfg.order)
    record["profile_file"] = _write_profile(res, cfg)
    code = _gate(record, res)
    _emit(record, cfg.out, "summary.json")
    return code


SWEEP_COLUMNS = ("index", "gamma", "a", "status", "exit_code", "error", "f0", "fp0",
                 "fp0_sign", "discriminant", "sigma", "j", "C1", "C2", "w0", "lambda1",
                 "lambda2", "regularity_order", "integral_residual", "ode_residual",
                 "q_crosscheck", "ok")


def sweep_row(index: int, left: tuple, gamma: float, R: float, a: float,
              opts: PipelineOptions, full: bool = True) -> dict:
    """One sweep row; failures are recorded in the row rather than raised."""
    row = {k: None for k in SWEEP_COLUMNS}
    row.update(index=index, gamma=gamma, a=a)
    try:
        consts = GasConstants(gamma, R)
        left_state = GasState(*left)
        shock = shock_from_amplitude(left_state, consts, a)
        sysr = build_reduced(shock, check=False)
        row.update(sigma=shock.sigma, j=shock.j, C1=shock.C1, C2=shock.C2, f0=sysr.f0,
                   fp0=sysr.fp0, fp0_sign=int(np.sign(sysr.fp0)),
                   discriminant=sysr.discriminant)
        if full:
            res = gas_profile(left_state, consts, a, opts)
            rep = res.report
            row.update(w0=rep.w0, lambda1=rep.lambda1, lambda2=rep.lambda2,
                       regularity_order=regularity_order(res.sys),
                       ok=res.verification.ok, **{k: res.verification.values[k] for k in
                                                 ("integral_residual", "ode_residual",
                                                  "q_crosscheck")})
            row["status"] = "ok" if res.verification.ok else "gate_failed"
            row["exit_code"] = 0 if res.verification.ok else VerificationError.exit_code
            if not res.verification.ok:
                row["error"] = ",".join(res.verification.failed)
        else:
            row.update(status="ok", exit_code=0)
    except RadShockError as exc:
        row.update(status="error", exit_code=exc.exit_code, error=f"{type(exc).__name__}: {exc}")
    return row


def sweep_threads() -> int:
    raw = os.environ.get("RADSHOCK_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"RADSHOCK_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("RADSHOCK_THREADS must be >= 1")
    return n


def run_sweep(cfg: RunConfig, full: bool = True, threads: Optional[int] = None) -> list:
    pairs = [(g, a) for g in cfg.gamma for a in cfg.a]
    opts = cfg.options()
    n = sweep_threads() if threads is None else threads
    jobs = [(i, cfg.left, g, cfg.R, a, opts, full) for i, (g, a) in enumerate(pairs)]
    if n == 1:
        return [sweep_row(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        # map preserves input order regardless of completion order
        return list(pool.map(lambda job: sweep_row(*job), jobs))


def _sweep_csv(rows: list) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for r in rows:
        cells = []
        for k in SWEEP_COLUMNS:
            v = r[k]
            if v is None:
                cells.append("")
            elif isinstance(v, float):
                cells.append(repr(v))
            else:
                s = str(v)
                cells.append('"' + s.replace('"', '""') + '"' if ("," in s or '"' in s) else s)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    rows = run_sweep(cfg, full=not args.diagnostics_only)
    if cfg.out is not None:
        if cfg.format == "csv":
            _write(Path(cfg.out) / "sweep.csv", _sweep_csv(rows))
        else:
            _write(Path(cfg.out) / "sweep.json", json.dumps(rows, indent=2) + "\n")
    print(json.dumps({"rows": rows, "n_rows": len(rows),
                      "n_failed": sum(r["status"] != "ok" for r in rows)}, indent=2))
    return 0


def verify_file(path) -> dict:
    """Recompute every residual of a profile file from its columns."""
    cols = read_columns(path)
    prof, checks = profile_from_columns(cols)
    report = verify_profile(prof)
    values = dict(report.values)
    thresholds = dict(report.thresholds)
    values["columns"] = max(checks.values())
    thresholds["columns"] = COLUMN_TOL
    values["derivative"] = derivative_consistency(prof)
    thresholds["derivative"] = DERIVATIVE_TOL
    failed = [k for k in values if k in thresholds and not values[k] <= thresholds[k]]
    return {"file": str(path), "model": prof.sys.label, "a": prof.a, "values": values,
            "thresholds": thresholds, "column_checks": checks, "failed": failed,
            "ok": not failed}


def cmd_verify(args) -> int:
    record = verify_file(args.file)
    code = 0
    if not record["ok"]:
        err = VerificationError("verification gates failed: " + ", ".join(record["failed"]),
                                gates=record["failed"])
        record["error"] = err.to_record()
        code = err.exit_code
    _emit(record, args.out, "verify.json")
    return code


def cmd_expansion(args) -> int:
    cfg = build_config(args)
    if len(cfg.a) != 1 or len(cfg.gamma) != 1:
        raise ConfigError("expansion takes a single amplitude and gamma")
    if cfg.model == "baby":
        sysr = baby_reduced(cfg.a[0])
    else:
        shock = shock_from_amplitude(cfg.left_state, GasConstants(cfg.gamma[0], cfg.R), cfg.a[0])
        sysr = build_reduced(shock)
    co = expansion_coeffs(sysr, cfg.order)
    record = {"model": sysr.label, "a": sysr.a, "order": co.order, "w": list(co.w),
              "b": list(co.b), "denominators": list(co.denominators),
              "regularity_order": regularity_order(sysr)}
    _emit(record, cfg.out, "expansion.json")
    return 0


# -- parser --------------------------------------------------------------------

def _common(p, amplitude=True, gas=True):
    p.add_argument("--config", help="JSON run configuration (flags override it)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), help="profile / table file format")
    if amplitude:
        p.add_argument("--a", type=_float_list, help="amplitude (comma list for sweep)")
    if gas:
        p.add_argument("--gamma", type=_float_list, help="adiabatic index (comma list for sweep)")
        p.add_argument("--R", type=float, help="gas constant")
        p.add_argument("--rho", type=float, help="left density")
        p.add_argument("--u", type=float, help="left velocity")
        p.add_argument("--e", type=float, help="left specific internal energy")
    p.add_argument("--rtol", type=float, help="integrator relative tolerance")
    p.add_argument("--atol", type=float, help="integrator absolute tolerance")
    p.add_argument("--points-per-thickness", dest="points_per_thickness", type=float,
                   help="output grid density (samples per a/|w0|)")
    p.add_argument("--order", type=int, help="expansion order n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radshock",
                                     description="Radiative shock profiles: compute, sweep, verify.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="compute and verify one gas profile")
    _common(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("sweep", help="summaries over lists of gamma and a")
    _common(p)
    p.add_argument("--diagnostics-only", action="store_true",
                   help="only shock and f(0), f'(0) columns; skip the profile")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("baby", help="profile of the scalar model with f = 1")
    _common(p, gas=False)
    p.add_argument("--s", type=float, help="shock speed (u_- + u_+)/2")
    p.set_defaults(func=cmd_baby)

    p = sub.add_parser("verify", help="recompute all residuals from a profile file")
    p.add_argument("file")
    p.add_argument("--out", help="directory for verify.json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("expansion", help="expansion coefficients w_k, b_k")
    _common(p)
    p.add_argument("--model", choices=("gas", "baby"))
    p.set_defaults(func=cmd_expansion)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except RadShockError as exc:
        print(json.dumps(exc.to_record(), default=_jsonable))
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 4


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
