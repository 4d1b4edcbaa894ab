"""Numerical certificates: weighted norms, shape checks, energies, inequality chains."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicSpline

from .model import (Nonlinearity, Potential, Profile, PucciParams, Sign, central_diff, reflect,
                    second_diff)


class DegenerateInputError(ValueError):
    pass


class FitError(ValueError):
    pass


class NotFoundError(RuntimeError):
    pass


class NotApplicableError(ValueError):
    pass


def eta1_select(params: PucciParams, V0: float, c2: float, eta0: float) -> float:
    """Weight exponent strictly inside both admissibility constraints, with a 10% margin."""
    if not c2 > 0:
        raise ValueError("decay estimate c2 must be positive")
    bound = math.sqrt(V0 / (2.0 * params.Lam)) / (1.0 + 0.5 * eta0)
    return 0.9 * min(c2, bound)


def xnorm(u: Profile, eta1: float) -> float:
    """``max_x exp(eta1 |x|) |u(x)|`` over the grid."""
    return float(np.max(np.exp(eta1 * np.abs(u.x)) * np.abs(u.values)))


def single_max_check(u: Profile, rtol: float = 1e-13) -> tuple[bool, float]:
    """Whether the discrete slope changes sign exactly once.

    Increments below ``rtol * max|u|`` count as flat. A flat run between the
    rising and falling parts is tolerated when it spans at most two cells.
    """
    vals = u.values
    top = float(np.max(np.abs(vals)))
    if top == 0.0:
        raise DegenerateInputError("profile is identically zero")
    d = np.diff(vals)
    s = np.where(np.abs(d) <= rtol * top, 0, np.sign(d)).astype(int)
    nz = np.nonzero(s)[0]
    loc = float(u.x[int(np.argmax(vals))])
    if nz.size == 0:
        return False, loc
    signs = s[nz]
    changes = np.nonzero(signs[1:] != signs[:-1])[0]
    if changes.size != 1 or signs[0] != 1:
        return False, loc
    gap = nz[changes[0] + 1] - nz[changes[0]] - 1
    return bool(gap <= 2), loc


def decay_fit(u: Profile, window=(0.7, 0.95), side: str = "right") -> tuple[float, float]:
    """Least-squares line through ``log u`` on ``window * L``; returns ``(c1, c2)``."""
    a, b = window
    x = u.x
    mask = (np.abs(x) >= a * u.L) & (np.abs(x) <= b * u.L)
    mask &= (x > 0) if side == "right" else (x < 0)
    xs, ys = np.abs(x[mask]), u.values[mask]
    if xs.size < 2:
        raise FitError("fit window contains fewer than two nodes")
    if np.any(ys <= 0):
        raise FitError("nonpositive values in the fit window")
    slope, intercept = np.polyfit(xs, np.log(ys), 1)
    return float(math.exp(intercept)), float(-slope)


# ---------------------------------------------------------------------------
# energies


class EnergyName(str, enum.Enum):
    E_MU = "E_mu"
    E_V = "E_V"
    E_VINF = "E_Vinf"
    H_PM = "H_pm"


@dataclass(frozen=True)
class EnergyKind:
    name: EnergyName
    mu: float | None = None

    @classmethod
    def E_mu(cls, mu: float) -> "EnergyKind":
        return cls(EnergyName.E_MU, float(mu))

    @classmethod
    def E_V(cls) -> "EnergyKind":
        return cls(EnergyName.E_V)

    @classmethod
    def E_Vinf(cls) -> "EnergyKind":
        return cls(EnergyName.E_VINF)

    @classmethod
    def H_pm(cls) -> "EnergyKind":
        return cls(EnergyName.H_PM)


def energy_series(u, kind: EnergyKind, params: PucciParams | None = None, V: Potential | None = None,
                  landscape=None, z: float | None = None):
    """Pointwise energy along a profile (or a trajectory, for ``E_mu``).

    ``E_mu``: ``u'^2/2 + G_inf(u)/mu``.
    ``E_V``, ``E_Vinf``, ``H_pm``: ``mu_b u'^2/2 + F(u) - W u^2/2`` where
    ``mu_b`` is ``Lam`` (plus) or ``lam`` (minus) and ``W`` is ``V(x)``,
    ``Vinf`` or ``V(z)`` respectively. For ``H_pm``, ``z`` defaults to the
    inflection point right of the maximum.
    """
    if not isinstance(u, Profile):
        # trajectory: exact derivative samples are available
        if kind.name is not EnergyName.E_MU:
            raise ValueError("trajectories only support E_mu")
        return 0.5 * u.up**2 + np.asarray(landscape.G_inf(u.u)) / kind.mu
    vals = u.values
    up = u.derivative()
    if kind.name is EnergyName.E_MU:
        out = 0.5 * up**2 + np.asarray(landscape.G_inf(vals)) / kind.mu
        return u.with_values(out, provenance="energy")
    mu_b = params.tail_mu
    F = np.asarray(landscape.f.F(vals))
    if kind.name is EnergyName.E_V:
        W = np.asarray(V(u.x))
    elif kind.name is EnergyName.E_VINF:
        W = landscape.Vinf
    else:
        if z is None:
            _, z = inflection_points(u, V, landscape.f)
        W = float(V(z))
    out = 0.5 * mu_b * up**2 + F - 0.5 * W * vals**2
    return u.with_values(out, provenance="energy")


# ---------------------------------------------------------------------------
# inflection / level points


class _Interp:
    """Cubic splines of ``u`` and of its centered-difference derivative."""

    def __init__(self, u: Profile):
        self.x = u.x
        self.u = CubicSpline(self.x, u.values)
        self.up = CubicSpline(self.x, central_diff(u.values, u.h))


def _locate(u: Profile, V: Potential, f: Nonlinearity, forcing=None, interp: _Interp | None = None):
    x, vals = u.x, u.values
    if np.any(vals[1:-1] <= 0):
        raise NotApplicableError("candidate must be positive at interior nodes")
    k0 = int(np.argmax(vals))
    sp = interp or _Interp(u)

    def hfun(xx):
        uu = float(sp.u(xx))
        src = float(f.f(uu)) + (float(forcing(xx)) if forcing is not None else 0.0)
        return float(V(xx)) - src / uu

    hv = np.asarray(V(x[k0:-1])) - (np.asarray(f.f(vals[k0:-1]))
                                     + (np.asarray(forcing(x[k0:-1])) if forcing is not None else 0.0)
                                     ) / vals[k0:-1]
    pos = np.nonzero(hv > 0)[0]
    if pos.size == 0:
        raise NotFoundError("V - f(u)/u never becomes positive right of the maximum")
    j = int(pos[0])
    if j == 0:
        z = float(x[k0])
    else:
        z = optimize.brentq(hfun, x[k0 + j - 1], x[k0 + j], xtol=1e-14)
    uz = float(sp.u(z))
    left = np.nonzero(vals[:k0 + 1] < uz)[0]
    if left.size == 0:
        raise NotFoundError("profile never drops below u(z) left of the maximum")
    i = int(left[-1])
    y = optimize.brentq(lambda xx: float(sp.u(xx)) - uz, x[i], x[i + 1], xtol=1e-14) if vals[i + 1] >= uz \
        else float(x[i])
    return float(y), float(z), sp


def inflection_points(u: Profile, V: Potential, f: Nonlinearity, forcing=None) -> tuple[float, float]:
    """``(y, z)``: ``z`` is the zero of ``V - f(u)/u`` right of the maximum, ``u(y) = u(z)`` left of it."""
    y, z, _ = _locate(u, V, f, forcing)
    return y, z


# ---------------------------------------------------------------------------
# certificates


@dataclass
class ChainEntry:
    label: str
    value: float
    tol: float
    relation: str = ">=0"

    @property
    def violated(self) -> bool:
        if self.relation == "==0":
            return abs(self.value) > self.tol
        return self.value < -self.tol

    def to_dict(self) -> dict:
        return {"label": self.label, "value": float(self.value), "tol": float(self.tol),
                "relation": self.relation}


class Verdict(str, enum.Enum):
    CONSISTENT = "consistent"
    STRICT_VIOLATION = "strict_violation"


@dataclass
class Certificate:
    chain: list
    meta: dict = field(default_factory=dict)

    @property
    def broken(self) -> list:
        return [e for e in self.chain if e.violated]

    @property
    def verdict(self) -> Verdict:
        return Verdict.STRICT_VIOLATION if self.broken else Verdict.CONSISTENT

    @property
    def broken_link(self) -> str | None:
        b = self.broken
        if not b:
            return None
        return max(b, key=lambda e: (abs(e.value) - e.tol) / max(e.tol, 1e-300)).label

    @property
    def narrative(self) -> str:
        if not self.broken:
            return "every link holds within tolerance"
        return "; ".join(f"{e.label} fails: value {e.value:.3e} vs tol {e.tol:.3e}" for e in self.broken)

    def to_dict(self) -> dict:
        return {"chain": [e.to_dict() for e in self.chain], "verdict": self.verdict.value,
                "broken_link": self.broken_link}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _monotone_direction(V: Potential, u: Profile) -> int:
    x = u.x
    dv = np.diff(np.asarray(V(x), dtype=float))
    tol = 1e-12 * max(1.0, abs(V.Vinf))
    if np.all(dv >= -tol):
        return 1
    if np.all(dv <= tol):
        return -1
    return 0


def _trapz_to(x, vals, y):
    """Trapezoid integral of nodal ``vals`` from ``x[0]`` to ``y``."""
    k = int(np.searchsorted(x, y, side="right")) - 1
    part = integrate.trapezoid(vals[:k + 1], x[:k + 1]) if k >= 1 else 0.0
    if k + 1 < len(x) and y > x[k]:
        w = (y - x[k]) / (x[k + 1] - x[k])
        vy = vals[k] + w * (vals[k + 1] - vals[k])
        part += 0.5 * (vals[k] + vy) * (y - x[k])
    return float(part)


def nonexistence_certificate(u: Profile, V: Potential, params: PucciParams, landscape,
                             tol_scale: float = 10.0) -> Certificate:
    """Evaluate the chain ``0 <= H(z) <= H(y) = int_{-inf}^y H' <= 0`` on a candidate.

    ``H = mu_b u'^2/2 + F(u) - V(z) u^2/2`` with ``V(z)`` frozen at the
    inflection point. ``H(z)``, ``H(y)`` come from the profile directly; the
    integral uses the piecewise expressions for ``H'`` selected by the sign
    of the discrete second derivative. The four links sum to zero
    identically, so a monotone nonconstant ``V`` forces a positive slack in
    one link and a negative one elsewhere on any numerically converged
    candidate.

    A nonincreasing ``V`` is handled by reflecting both ``V`` and ``u``.
    """
    direction = _monotone_direction(V, u)
    if direction == 0:
        raise NotApplicableError("potential is not monotone on the grid")
    if direction < 0 and not np.all(np.diff(np.asarray(V(u.x))) == 0):
        cert = nonexistence_certificate(u.reflected(), reflect(V), params, landscape, tol_scale)
        cert.meta["reflected"] = True
        return cert
    ok, xmax = single_max_check(u)
    if not ok:
        raise NotApplicableError("candidate does not have a single maximum")
    f = landscape.f
    y, z, sp = _locate(u, V, f)
    x, vals, h = u.x, u.values, u.h
    up = central_diff(vals, h)
    mu_b = params.tail_mu
    Vz = float(V(z))

    def H(xx):
        uu, dd = float(sp.u(xx)), float(sp.up(xx))
        return 0.5 * mu_b * dd * dd + float(f.F(uu)) - 0.5 * Vz * uu * uu

    Hz, Hy = H(z), H(y)
    Vx = np.asarray(V(x))
    fu = np.asarray(f.f(vals))
    convex = second_diff(vals, h) >= 0
    ratio = params.Lam / params.lam if params.branch is Sign.PLUS else params.lam / params.Lam
    with np.errstate(divide="ignore", invalid="ignore"):
        hx = np.where(vals > 0, Vx - fu / np.where(vals > 0, vals, 1.0), 0.0)
    dH = np.where(convex, up * (Vx - Vz) * vals, up * (ratio * hx * vals + fu - Vz * vals))
    integral = _trapz_to(x, dH, y)

    scale = float(np.max(0.5 * mu_b * up**2 + np.asarray(f.F(vals)) + 0.5 * Vz * vals**2))
    try:
        c1, c2 = decay_fit(u, side="left")
    except FitError:
        c1, c2 = 0.0, 1.0
    c2 = max(c2, 1e-3)
    tail = 0.5 * abs(V.Vinf - V.V0) * c1 * c1 * math.exp(-2.0 * c2 * u.L)
    tol = tol_scale * (h * h + math.exp(-2.0 * c2 * u.L)) * scale
    chain = [
        ChainEntry("H(z) >= 0", Hz, tol),
        ChainEntry("H(y) - H(z) >= 0", Hy - Hz, tol),
        ChainEntry("int_{-inf}^{y} H' - H(y) == 0", integral - Hy, tol + tail, "==0"),
        ChainEntry("-int_{-inf}^{y} H' >= 0", -integral, tol + tail),
    ]
    meta = {"y": y, "z": z, "x_max": xmax, "V(z)": Vz, "H(-L)": H(float(x[0])), "tol": tol,
            "tail_bound": tail, "reflected": False}
    return Certificate(chain, meta)


# ---------------------------------------------------------------------------
# branch diagnostics


def prop29_diagnostics(branch, V: Potential, params: PucciParams, landscape, bump=None,
                       tol_scale: float = 10.0, xi0: float | None = None,
                       window=(0.5, 0.8)) -> dict:
    """Sign, ordering and monotonicity of ``E_Vinf`` along a continuation branch.

    For each converged entry, with ``z`` the inflection point right of the
    maximum and ``y`` its level partner on the left:

    ``step2``: ``-E(z) >= 0``.
    ``step3``: ``E(y) - E(z) >= 0``.
    ``step4``: ``E`` nonincreasing on ``(-L, y)``; the margin is minus the
    largest increment.
    ``step6``: the fitted tail exponents on both sides stay below
    ``sqrt(Vinf/mu + xi0 / (2 (Lambda + 1)))``, a qualitative stand-in for the
    lower exponential envelope whose constant is not computable. ``xi0``
    defaults to the largest admissible value for a ``well`` potential; for
    other kinds without ``xi0`` the check is skipped and reported as ``None``.
    """
    if xi0 is None and V.kind == "well":
        xi0 = V.params["b"] ** 2 / 4.0 - V.Vinf / params.tail_mu
    rate = None if xi0 is None else math.sqrt(V.Vinf / params.tail_mu
                                              + xi0 / (2.0 * (params.Lam + 1.0)))
    kind = EnergyKind.E_Vinf()
    rows = []
    for entry in branch.entries:
        if not entry.converged or entry.profile.sup() == 0.0:
            continue
        u = entry.profile
        forcing = (lambda xx, t=entry.t: t * bump(xx)) if (bump is not None and entry.t > 0) else None
        y, z, sp = _locate(u, V, landscape.f, forcing)
        E = energy_series(u, kind, params, V, landscape).values
        Es = CubicSpline(u.x, E)
        Ez, Ey = float(Es(z)), float(Es(y))
        left = u.x < y
        inc = float(np.max(np.diff(E[left]))) if np.count_nonzero(left) > 1 else 0.0
        scale = float(np.max(np.abs(E))) + float(np.max(u.values)) ** 2
        tol = tol_scale * u.h**2 * scale
        row = {"t": entry.t, "y": y, "z": z, "step2": -Ez, "step3": Ey - Ez,
               "step4": -inc, "tol": tol, "step6": None}
        if rate is not None:
            try:
                expo = max(decay_fit(u, window, side)[1] for side in ("left", "right"))
                row["step6"] = rate - expo
            except FitError as exc:
                row["step6_error"] = str(exc)
        rows.append(row)
    report = {"entries": rows}
    for key in ("step2", "step3", "step4"):
        vals = [r[key] for r in rows]
        report[f"worst_{key}"] = min(vals) if vals else None
        report[f"{key}_ok"] = all(r[key] >= -r["tol"] for r in rows)
    six = [r["step6"] for r in rows if r["step6"] is not None]
    report["step6_rate"] = rate
    report["worst_step6"] = min(six) if six else None
    report["step6_ok"] = all(v >= 0.0 for v in six) if six else None
    report["ok"] = all(report[f"{k}_ok"] for k in ("step2", "step3", "step4")) \
        and report["step6_ok"] is not False
    return report
