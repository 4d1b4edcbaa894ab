"""Phase-plane construction of the constant-potential ground states.

Each operator branch is a pair of semilinear ODEs ``-mu u'' = g_inf(u)`` with
``mu`` equal to ``lam`` or ``Lam``. The ground state is glued from a concave
core orbit and a convex homoclinic tail that meet at ``u = s_inf`` with equal
slopes; ``u''`` vanishes there on both sides, so the glued function is C^2.

The core is integrated forward from its maximum. The tail is integrated
*backward* from a far-field seed placed exactly on the zero-energy curve,
which is the stable direction for a decaying orbit; integrating the tail
forward would amplify rounding errors like ``exp(c2 x)``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, optimize

from .certify import decay_fit
from .model import Profile, PucciParams, Sign
from .scalar import ScalarLandscape, matching_levels, pucci_inverse


class IntegrationError(RuntimeError):
    pass


class EquilibriumError(ValueError):
    pass


class DomainTooSmallError(ValueError):
    pass


class AlphaClass(str, enum.Enum):
    CROSSING = "Crossing"
    HOMOCLINIC = "Homoclinic"
    PERIODIC = "Periodic"


def _rk4(acc, u, v, dx):
    k1u, k1v = v, acc(u)
    k2u, k2v = v + 0.5 * dx * k1v, acc(u + 0.5 * dx * k1u)
    k3u, k3v = v + 0.5 * dx * k2v, acc(u + 0.5 * dx * k2u)
    k4u, k4v = v + dx * k3v, acc(u + dx * k3u)
    return (u + dx / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            v + dx / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))


def _refine(acc, u, v, dx, event, tol=1e-12):
    """Fraction ``s`` of the step ``dx`` at which ``event(u, v)`` changes sign."""
    e0 = event(u, v)
    lo, hi = 0.0, abs(dx)
    sgn = math.copysign(1.0, dx)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        um, vm = _rk4(acc, u, v, sgn * mid)
        if event(um, vm) * e0 > 0:
            lo = mid
        else:
            hi = mid
    return sgn * 0.5 * (lo + hi)


def _accel(landscape: ScalarLandscape, mu: float):
    f = landscape.f.scalar()
    Vinf, inv = landscape.Vinf, 1.0 / mu
    return lambda u: -(f(u) - Vinf * u) * inv


def _pucci_accel(landscape: ScalarLandscape, params: PucciParams):
    """``u'' = M^{-1}(-g_inf(u))`` for the selected operator."""
    f = landscape.f.scalar()
    Vinf = landscape.Vinf
    if params.branch is Sign.PLUS:
        pos, neg = 1.0 / params.Lam, 1.0 / params.lam
    else:
        pos, neg = 1.0 / params.lam, 1.0 / params.Lam

    def acc(u):
        m = -(f(u) - Vinf * u)
        return m * pos if m >= 0.0 else m * neg
    return acc


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    """Samples of ``-mu u'' = g_inf(u)`` started at rest from height ``alpha``."""

    mu: float
    alpha: float
    x: np.ndarray
    u: np.ndarray
    up: np.ndarray
    events: list = field(default_factory=list)

    def energy(self, landscape: ScalarLandscape) -> np.ndarray:
        return 0.5 * self.up**2 + np.asarray(landscape.G_inf(self.u)) / self.mu

    def first_event(self, kind: str):
        for k, loc in self.events:
            if k == kind:
                return loc
        return None


def integrate_ivp(landscape: ScalarLandscape, mu: float, alpha: float, x_max: float,
                  h: float = 1e-3) -> Trajectory:
    """Fixed-step RK4 for ``-mu u'' = g_inf(u)``, ``(u, u')(0) = (alpha, 0)``.

    Records crossings of ``s_inf``, zeros of ``u'`` and the first zero of
    ``u`` (which ends the integration), each located to 1e-12.
    """
    if not (alpha > 0 and h > 0 and mu > 0):
        raise ValueError("need alpha, h, mu > 0")
    acc = _accel(landscape, mu)
    s_inf = landscape.s_inf
    n = int(math.ceil(x_max / h - 1e-9))
    xs, us, vs = [0.0], [float(alpha)], [0.0]
    events = []
    u, v = float(alpha), 0.0
    ev_s = lambda a, b: a - s_inf
    ev_z = lambda a, b: a
    ev_d = lambda a, b: b
    for k in range(n):
        x0 = k * h
        dx = min(h, x_max - x0)
        un, vn = _rk4(acc, u, v, dx)
        if not (math.isfinite(un) and math.isfinite(vn)):
            raise IntegrationError(f"non-finite state at x={x0 + dx}")
        if (u - s_inf) * (un - s_inf) < 0:
            events.append(("hits_s_inf", x0 + _refine(acc, u, v, dx, ev_s)))
        if v * vn < 0:
            events.append(("derivative_zero", x0 + _refine(acc, u, v, dx, ev_d)))
        if u * un <= 0 and u != 0:
            s = _refine(acc, u, v, dx, ev_z) if un != 0 else dx
            uz, vz = _rk4(acc, u, v, s)
            events.append(("hits_zero", x0 + s))
            xs.append(x0 + s)
            us.append(uz)
            vs.append(vz)
            break
        u, v = un, vn
        xs.append(x0 + dx)
        us.append(u)
        vs.append(v)
    return Trajectory(mu, float(alpha), np.array(xs), np.array(us), np.array(vs), events)


def classify_alpha(landscape: ScalarLandscape, mu: float, alpha: float, tol: float = 1e-9) -> AlphaClass:
    """Fate of the orbit released at rest from ``alpha``.

    Above ``alpha0`` the orbit reaches zero in finite time, at ``alpha0`` it is
    the homoclinic, below it the orbit is periodic. The answer does not depend
    on ``mu``, which only rescales ``x``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    a0, s_inf = landscape.alpha0, landscape.s_inf
    if abs(alpha - s_inf) <= tol * s_inf:
        raise EquilibriumError(f"alpha={alpha} is the equilibrium s_inf")
    G = landscape.G_inf(alpha)
    if abs(alpha - a0) <= tol * a0:
        return AlphaClass.HOMOCLINIC
    cls = AlphaClass.CROSSING if alpha > a0 else AlphaClass.PERIODIC
    if (G > 0) != (cls is AlphaClass.CROSSING):
        raise RuntimeError(f"sign of G_inf({alpha})={G} disagrees with alpha0={a0}")
    return cls


# ---------------------------------------------------------------------------
# glued ground states


def _travel_time(landscape: ScalarLandscape, mu: float, delta: float) -> float:
    """Time for the zero-energy orbit to climb from ``delta`` to ``s_inf``."""
    G = landscape.G_inf

    def integrand(r):
        s = math.exp(r)
        return s / math.sqrt(-2.0 * G(s) / mu)
    val, _ = integrate.quad(integrand, math.log(delta), math.log(landscape.s_inf),
                            epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def _seed_height(landscape: ScalarLandscape, mu: float, distance: float) -> float:
    """Height ``delta`` whose travel time to ``s_inf`` equals ``distance``."""
    kappa = math.sqrt(landscape.Vinf / mu)
    s = landscape.s_inf
    phi = lambda r: _travel_time(landscape, mu, math.exp(r)) - distance
    hi = math.log(s) - 1e-6
    lo = math.log(s) - kappa * distance - 5.0
    while phi(lo) < 0:
        lo -= 5.0
    if phi(hi) > 0:
        raise DomainTooSmallError("glue point too close to the domain edge")
    if lo < -690:
        raise ValueError(f"seed height underflows for distance {distance}")
    r = optimize.brentq(phi, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)
    return math.exp(r)


@dataclass
class OmegaProfile:
    """Even ground state of the constant-potential problem on ``[-L, L]``."""

    branch: Sign
    profile: Profile
    up: np.ndarray
    upp: np.ndarray
    y1: float
    z: float
    max_value: float
    c1: float
    c2: float
    levels: tuple
    glue: dict
    params: PucciParams
    landscape: ScalarLandscape

    @property
    def x(self):
        return self.profile.x

    @property
    def values(self):
        return self.profile.values

    def sidecar(self) -> dict:
        return {
            "branch": self.branch.value,
            "y1": self.y1,
            "z": self.z,
            "max": self.max_value,
            "c1": self.c1,
            "c2": self.c2,
            "matching_levels": {"s1": self.levels[0], "s2": self.levels[1], "s1_minus": self.levels[2]},
            "glue": dict(self.glue),
            "landscape": self.landscape.to_dict(),
            "params": self.params.to_dict(),
            "grid": {"L": self.profile.L, "h": self.profile.h},
        }

    def export(self, stem) -> None:
        """Write ``<stem>.csv`` (``x,u,up,upp``) and ``<stem>.json``."""
        stem = Path(stem)
        self.profile.to_csv(stem.with_suffix(".csv"), {"up": self.up, "upp": self.upp})
        stem.with_suffix(".json").write_text(json.dumps(self.sidecar(), indent=2, sort_keys=True) + "\n")


def build_omega(params: PucciParams, landscape: ScalarLandscape, L: float = 30.0, h: float = 1e-3,
                tail_tol: float = 1e-4, fit_window=(0.7, 0.95)) -> OmegaProfile:
    """Glue the core orbit and the homoclinic tail into the ground state.

    Plus branch: the ``lam``-core from amplitude ``s2`` meets the
    ``Lam``-tail. Minus branch: the ``Lam``-core from ``s1_minus`` meets the
    ``lam``-tail. Raises :class:`DomainTooSmallError` when ``u(L)`` exceeds
    ``tail_tol`` times the maximum.
    """
    s1, s2, s1m = matching_levels(params, landscape)
    if params.lam == params.Lam:
        # single operator: the ground state is the homoclinic itself
        amp = landscape.alpha0
    elif params.branch is Sign.PLUS:
        amp = s2
    else:
        amp = s1m
    mu_core, mu_tail = params.core_mu, params.tail_mu
    s_inf = landscape.s_inf
    n = int(round(L / h))

    # core: forward from the maximum until u first reaches s_inf
    acc_c = _accel(landscape, mu_core)
    u_half = np.empty(n + 1)
    up_half = np.empty(n + 1)
    u, v = amp, 0.0
    u_half[0], up_half[0] = u, v
    k = 0
    while True:
        un, vn = _rk4(acc_c, u, v, h)
        if un <= s_inf:
            s = _refine(acc_c, u, v, h, lambda a, b: a - s_inf) if un < s_inf else h
            y1 = k * h + s
            core_glue = _rk4(acc_c, u, v, s)
            break
        k += 1
        if k > n:
            raise DomainTooSmallError("core never reaches s_inf inside the domain")
        u, v = un, vn
        u_half[k], up_half[k] = u, v
    k_core = k

    # tail: backward from a zero-energy seed at x = L down to the glue point
    if k_core + 1 > n:
        raise DomainTooSmallError("glue point at the domain edge")
    delta = _seed_height(landscape, mu_tail, L - y1)
    if delta > tail_tol * amp:
        raise DomainTooSmallError(f"tail height {delta:.3g} at L exceeds {tail_tol:g} x max")
    acc_t = _accel(landscape, mu_tail)
    u = delta
    v = -math.sqrt(-2.0 * float(landscape.G_inf(delta)) / mu_tail)
    u_half[n], up_half[n] = u, v
    for j in range(n - 1, k_core, -1):
        u, v = _rk4(acc_t, u, v, -h)
        if not (math.isfinite(u) and math.isfinite(v)):
            raise IntegrationError("non-finite tail state")
        u_half[j], up_half[j] = u, v
    tail_glue = _rk4(acc_t, u, v, y1 - (k_core + 1) * h)

    upp_half = np.asarray(pucci_inverse(params, -np.asarray(landscape.g_inf(u_half))))
    values = np.concatenate([u_half[:0:-1], u_half])
    up = np.concatenate([-up_half[:0:-1], up_half])
    upp = np.concatenate([upp_half[:0:-1], upp_half])
    prof = Profile(L, h, values, "constructed")
    glue = {
        "u_core": core_glue[0],
        "u_tail": tail_glue[0],
        "up_core": core_glue[1],
        "up_tail": tail_glue[1],
        "upp_core": -float(landscape.g_inf(core_glue[0])) / mu_core,
        "upp_tail": -float(landscape.g_inf(tail_glue[0])) / mu_tail,
        "seed_height": delta,
    }
    glue["du"] = abs(glue["u_core"] - glue["u_tail"])
    glue["dup"] = abs(glue["up_core"] - glue["up_tail"])
    glue["dupp"] = abs(glue["upp_core"] - glue["upp_tail"])
    c1, c2 = decay_fit(prof, fit_window)
    return OmegaProfile(Sign(params.branch), prof, up, upp, y1, y1, float(amp), c1, c2,
                        (s1, s2, s1m), glue, params, landscape)


@dataclass
class ProbeResult:
    error: float
    low_signal: bool
    x_range: tuple

    def __float__(self):
        return self.error


def uniqueness_probe(omega: OmegaProfile, z: float, floor: float = 1e-4) -> ProbeResult:
    """Re-integrate the switched ODE from the profile's data at ``z``.

    Integration runs from the grid node nearest ``z`` in both directions
    while ``u`` stays above ``floor * max u``; beyond that the decaying
    solution is dominated by the growing mode and carries no information.
    Returns the sup distance to the stored profile.
    """
    prof = omega.profile
    x, vals, h = prof.x, prof.values, prof.h
    k0 = int(np.argmin(np.abs(x - z)))
    if k0 == 0 or k0 == len(x) - 1:
        raise ValueError("z must be interior")
    acc = _pucci_accel(omega.landscape, omega.params)
    thresh = floor * omega.max_value
    s_inf = omega.landscape.s_inf
    low = bool(vals[k0] < thresh)
    err = 0.0
    lo_k = hi_k = k0
    for step in (1, -1):
        u, v = float(vals[k0]), float(omega.up[k0])
        k = k0
        seen_high = not low
        while 0 < k < len(x) - 1:
            un, vn = _rk4(acc, u, v, step * h)
            if (u - s_inf) * (un - s_inf) < 0:
                # the right-hand side has a kink at s_inf: land on it, then finish the step
                s = _refine(acc, u, v, step * h, lambda a, b: a - s_inf)
                um, vm = _rk4(acc, u, v, s)
                un, vn = _rk4(acc, um, vm, step * h - s)
            u, v = un, vn
            if not (math.isfinite(u) and math.isfinite(v)):
                raise IntegrationError("non-finite probe state")
            k += step
            err = max(err, abs(u - vals[k]))
            if u >= thresh:
                seen_high = True
            elif seen_high:
                break
        if step > 0:
            hi_k = k
        else:
            lo_k = k
    return ProbeResult(err, low, (float(x[lo_k]), float(x[hi_k])))
