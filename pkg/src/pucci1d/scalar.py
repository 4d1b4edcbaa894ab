"""Scalar quantities: Pucci evaluation and the ``g_inf`` / ``G_inf`` landscape."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .model import Nonlinearity, PucciParams, Sign


class LandscapeError(RuntimeError):
    pass


def pucci_eval(params: PucciParams, m):
    """``M+(m) = max(lam m, Lam m)``, ``M-(m) = min(lam m, Lam m)``."""
    m = np.asarray(m, dtype=float)
    big, small = params.Lam * m, params.lam * m
    if params.branch is Sign.PLUS:
        out = np.where(m >= 0, big, small)
    else:
        out = np.where(m >= 0, small, big)
    return out if out.ndim else float(out)


def pucci_inverse(params: PucciParams, m):
    m = np.asarray(m, dtype=float)
    if params.branch is Sign.PLUS:
        out = np.where(m >= 0, m / params.Lam, m / params.lam)
    else:
        out = np.where(m >= 0, m / params.lam, m / params.Lam)
    return out if out.ndim else float(out)


def pucci_coeff(params: PucciParams, m):
    """Slope of the active linear piece at ``m``; ties at 0 take the ``m >= 0`` piece."""
    m = np.asarray(m, dtype=float)
    if params.branch is Sign.PLUS:
        return np.where(m >= 0, params.Lam, params.lam)
    return np.where(m >= 0, params.lam, params.Lam)


def _expand_bracket(phi, start: float = 1.0, factor: float = 2.0, max_steps: int = 60):
    """Return ``(lo, hi)`` with ``phi(lo) < 0 < phi(hi)`` found by geometric search."""
    lo = hi = start
    if phi(start) > 0:
        for _ in range(max_steps):
            lo /= factor
            if phi(lo) < 0:
                return lo, lo * factor
        raise LandscapeError("no sign change found below start")
    for _ in range(max_steps):
        hi *= factor
        if phi(hi) > 0:
            return hi / factor, hi
    raise LandscapeError("no sign change found above start")


def _root(phi, lo, hi) -> float:
    return optimize.brentq(phi, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def find_s_inf(f: Nonlinearity, Vinf: float) -> float:
    """Unique positive root of ``f(s)/s = Vinf``."""
    if not Vinf > 0:
        raise LandscapeError("Vinf must be positive")
    phi = lambda s: f.f(s) / s - Vinf
    lo, hi = _expand_bracket(phi)
    if phi(hi) == 0:
        return hi
    return _root(phi, lo, hi)


def small_solution_floor(f: Nonlinearity, V0: float) -> float:
    """Root of ``f(s)/s = V0``: no positive solution can have a smaller maximum."""
    return find_s_inf(f, V0)


@dataclass(frozen=True)
class ScalarLandscape:
    """``g_inf(s) = f(s) - Vinf s`` and its primitive, with their distinguished roots."""

    f: Nonlinearity
    Vinf: float
    s_inf: float
    alpha0: float

    @classmethod
    def build(cls, f: Nonlinearity, Vinf: float) -> "ScalarLandscape":
        s_inf = find_s_inf(f, Vinf)
        partial = cls(f, Vinf, s_inf, np.nan)
        return cls(f, Vinf, s_inf, find_alpha0(partial))

    def g_inf(self, s):
        s = np.asarray(s, dtype=float)
        out = np.asarray(self.f.f(s)) - self.Vinf * s
        return out if out.ndim else float(out)

    def G_inf(self, s):
        s = np.asarray(s, dtype=float)
        out = np.asarray(self.f.F(s)) - 0.5 * self.Vinf * s * s
        return out if out.ndim else float(out)

    @property
    def G_min(self) -> float:
        return float(self.G_inf(self.s_inf))

    def to_dict(self) -> dict:
        return {"Vinf": self.Vinf, "s_inf": self.s_inf, "alpha0": self.alpha0, "G_min": self.G_min}


def find_alpha0(landscape: ScalarLandscape) -> float:
    """Unique root of ``G_inf`` on ``(s_inf, inf)``."""
    s = landscape.s_inf
    G = landscape.G_inf
    if not G(s) < 0:
        raise LandscapeError("G_inf(s_inf) must be negative")
    lo, hi = _expand_bracket(G, start=2.0 * s)
    lo = max(lo, s)
    return _root(G, lo, hi)


def matching_levels(params: PucciParams, landscape: ScalarLandscape) -> tuple[float, float, float]:
    """Amplitudes at which a core orbit meets the opposite homoclinic tail at ``s_inf``.

    Returns ``(s1, s2, s1_minus)`` where ``s1 < s_inf < s2 < alpha0`` solve
    ``G(s) = (1 - lam/Lam) G(s_inf)`` and ``s1_minus >= alpha0`` solves
    ``G(s) = (1 - Lam/lam) G(s_inf)``. When ``lam == Lam`` both levels sit at
    ``G = 0`` and ``(s_inf, s_inf, alpha0)`` is returned; the core then
    starts at ``alpha0`` (see :func:`pucci1d.homoclinic.build_omega`).
    """
    G = landscape.G_inf
    s_inf, a0, Gmin = landscape.s_inf, landscape.alpha0, landscape.G_min
    if params.lam == params.Lam:
        return s_inf, s_inf, a0
    lev_plus = (1.0 - params.lam / params.Lam) * Gmin
    lev_minus = (1.0 - params.Lam / params.lam) * Gmin
    s1 = _root(lambda s: G(s) - lev_plus, 0.0, s_inf)
    s2 = _root(lambda s: G(s) - lev_plus, s_inf, a0)
    lo, hi = _expand_bracket(lambda s: G(s) - lev_minus, start=a0)
    s1m = _root(lambda s: G(s) - lev_minus, max(lo, a0), hi)
    return s1, s2, s1m


def forcing_threshold(f: Nonlinearity, Vinf: float) -> tuple[float, float]:
    """``c = -min_{s>=0} g_inf(s)`` and the forcing level ``t_tilde = 2c``."""
    if Vinf <= 0:
        return 0.0, 0.0
    s_inf = find_s_inf(f, Vinf)
    g = lambda s: float(f.f(s)) - Vinf * s
    res = optimize.minimize_scalar(g, bounds=(0.0, s_inf), method="bounded",
                                   options={"xatol": 1e-12 * s_inf})
    gmin = min(res.fun, g(0.0), g(s_inf))
    c = max(0.0, -gmin)
    return c, 2.0 * c
