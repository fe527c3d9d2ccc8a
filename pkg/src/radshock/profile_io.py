"""Profile files: CSV/JSON serialization and reconstruction of all constants from a file."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .baby import BabySystem
from .errors import ProfileFormatError
from .gas import GasConstants, GasState, ShockData
from .glue import Profile
from .reduced import ReducedSystem, equilibria, f_polynomial

GAS_COLUMNS = ("xi", "v_hat", "w", "v", "rho", "u", "e", "theta", "P", "q", "n")
BABY_COLUMNS = ("xi", "v_hat", "w", "u", "q")

# identities that hold exactly up to roundoff on a written profile
COLUMN_TOL = 1e-9
DERIVATIVE_TOL = 1e-4


def profile_columns(profile: Profile) -> dict:
    names = GAS_COLUMNS if profile.sys.is_gas else BABY_COLUMNS
    cols = profile.columns()
    missing = [n for n in names if n not in cols]
    if missing:
        raise ValueError(f"profile lacks columns {missing}; reconstruct it first")
    return {n: np.asarray(cols[n], dtype=float) for n in names}


def format_csv(columns: dict) -> str:
    names = list(columns)
    data = np.column_stack([columns[n] for n in names])
    buf = io.StringIO()
    np.savetxt(buf, data, fmt="%.17g", delimiter=",", header=",".join(names), comments="")
    return buf.getvalue()


def write_profile(profile: Profile, path, fmt: str = "csv") -> Path:
    path = Path(path)
    cols = profile_columns(profile)
    if fmt == "csv":
        text = format_csv(cols)
    elif fmt == "json":
        text = json.dumps({k: [float(x) for x in v] for k, v in cols.items()}, indent=None,
                          allow_nan=False) + "\n"
    else:
        raise ValueError(f"unknown profile format {fmt!r}")
    try:
        path.write_text(text)
    except OSError as exc:
        raise ProfileFormatError(f"cannot write {path}: {exc}", path=str(path)) from exc
    return path


def read_columns(path) -> dict:
    """Columns of a CSV or JSON profile file, as float arrays."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProfileFormatError(f"cannot read {path}: {exc}", path=str(path)) from exc
    try:
        if path.suffix == ".json":
            raw = json.loads(text)
            cols = {k: np.asarray(v, dtype=float) for k, v in raw.items()}
        else:
            rows = list(csv.reader(io.StringIO(text)))
            if len(rows) < 2:
                raise ValueError("no data rows")
            header = [h.strip() for h in rows[0]]
            data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
            if data.shape[1] != len(header):
                raise ValueError("row width does not match the header")
            cols = {h: data[:, i] for i, h in enumerate(header)}
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise ProfileFormatError(f"malformed profile file {path}: {exc}", path=str(path)) from exc
    lengths = {len(v) for v in cols.values()}
    if len(lengths) != 1:
        raise ProfileFormatError("columns have different lengths", path=str(path))
    for k, v in cols.items():
        if not np.all(np.isfinite(v)):
            raise ProfileFormatError(f"non-finite values in column {k!r}", path=str(path))
    if tuple(cols) not in (GAS_COLUMNS, BABY_COLUMNS):
        raise ProfileFormatError(f"unexpected columns {list(cols)}; expected "
                                 f"{','.join(GAS_COLUMNS)} or {','.join(BABY_COLUMNS)}",
                                 path=str(path))
    if not np.all(np.diff(cols["xi"]) > 0.0):
        raise ProfileFormatError("xi column is not strictly increasing", path=str(path))
    if not np.any(cols["xi"] == 0.0):
        raise ProfileFormatError("xi grid does not contain 0", path=str(path))
    return cols


def _profile_shell(cols, sys, shock, fields, meta):
    xi, v_hat, w = cols["xi"], cols["v_hat"], cols["w"]
    report = equilibria(sys)
    i0 = int(np.flatnonzero(xi == 0.0)[0])
    dw = np.gradient(w, xi, edge_order=2)
    return Profile(xi=xi, v_hat=v_hat, w=w, dw=dw, sys=sys, report=report,
                   dw_minus=float(dw[i0]), dw_plus=float(dw[i0]), shock=shock, fields=fields,
                   meta=meta)


def profile_from_columns(cols: dict):
    """Rebuild a Profile and its constants from the file columns alone.

    Gas: ``gamma = 1 + P/(rho e)``, ``R = P/(rho theta)``, ``j = rho v``,
    ``sigma = u - v``, ``C1 = (rho v**2 + P)/j`` and
    ``C2 = (rho v (e + v**2/2) + P v + q)/j`` (medians over the samples).
    The end velocities are the roots of ``v**2 - 2 gamma C1 v/(gamma+1) +
    2 (gamma-1) C2/(gamma+1)``; the amplitude is taken from the better
    conditioned relation ``a**2 = vhat**2 - 2 q (gamma-1)/(j (gamma+1))`` and the
    root formula is reported as a consistency check.

    Returns ``(profile, checks)`` where ``checks`` maps identity names to
    relative mismatches.
    """
    v_hat, w, xi = cols["v_hat"], cols["w"], cols["xi"]
    checks = {}
    if "rho" not in cols:
        q = cols["q"]
        a = float(math.sqrt(np.median(2.0 * q + v_hat ** 2)))
        s = float(np.median(cols["u"] - v_hat))
        sys = ReducedSystem(a=a, f_coeffs=(1.0,), label="baby")
        system = BabySystem.centred(a, s)
        checks["u"] = float(np.max(np.abs(cols["u"] - (v_hat + s))) / a)
        checks["q"] = float(np.max(np.abs(q - 0.5 * (a - v_hat) * (a + v_hat))) / a ** 2)
        prof = _profile_shell(cols, sys, None, {"u": cols["u"], "q": q},
                              {"source": "file", "s": s})
        prof.meta["baby"] = system
        return prof, checks

    v, rho, u, e, theta, P, q, n = (cols[k] for k in ("v", "rho", "u", "e", "theta", "P", "q", "n"))
    gamma = float(1.0 + np.median(P / (rho * e)))
    R = float(np.median(P / (rho * theta)))
    j = float(np.median(rho * v))
    sigma = float(np.median(u - v))
    C1 = float(np.median((rho * v * v + P) / j))
    C2 = float(np.median((rho * v * (e + 0.5 * v * v) + P * v + q) / j))
    g1 = gamma + 1.0
    k = j * g1 / (gamma - 1.0)
    a2 = float(np.median(v_hat ** 2 - 2.0 * q / k))
    if not a2 > 0.0:
        raise ProfileFormatError("file does not describe a shock (a**2 <= 0)", a2=a2)
    a = math.sqrt(a2)
    v_mid = gamma * C1 / g1
    disc = v_mid ** 2 - 2.0 * (gamma - 1.0) * C2 / g1
    checks["roots"] = abs(disc - a2) / max(a2, 1e3 * np.finfo(float).eps * v_mid ** 2)
    v_minus, v_plus = v_mid + a, v_mid - a
    consts = GasConstants(gamma, R)
    left = GasState(rho=j / v_minus, u=v_minus + sigma, e=(C1 - v_minus) * v_minus / (gamma - 1.0))
    right = GasState(rho=j / v_plus, u=v_plus + sigma, e=(C1 - v_plus) * v_plus / (gamma - 1.0))
    shock = ShockData(left=left, right=right, sigma=sigma, consts=consts)
    sys = ReducedSystem(a=a, f_coeffs=tuple(f_polynomial(gamma, R, shock.j, shock.C1).coef),
                        gamma=gamma, R=R, j=shock.j, C1=shock.C1, label="gas")
    theta4 = ((C1 - v) * v / R) ** 4
    checks.update({
        "v": float(np.max(np.abs(v - (v_hat + v_mid))) / a),
        "rho": float(np.max(np.abs(rho * v - j)) / j),
        "u": float(np.max(np.abs(u - (v + sigma))) / a),
        "e": float(np.max(np.abs(e - (C1 - v) * v / (gamma - 1.0))) / np.max(e)),
        "theta": float(np.max(np.abs(theta - (C1 - v) * v / R)) / np.max(theta)),
        "P": float(np.max(np.abs(P - (gamma - 1.0) * rho * e)) / np.max(P)),
        "q": float(np.max(np.abs(q - 0.5 * k * (v_hat - a) * (v_hat + a))) / (k * a2)),
        "n": float(np.max(np.abs(n - (theta4 - k * v_hat * w))) / np.max(np.abs(k * v_hat * w))),
    })
    fields = {name: cols[name] for name in ("v", "rho", "u", "e", "theta", "P", "q", "n")}
    prof = _profile_shell(cols, sys, shock, fields, {"source": "file"})
    return prof, checks
