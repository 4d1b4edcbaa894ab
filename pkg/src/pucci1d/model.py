"""Domain types for the 1D Pucci problem.

Everything downstream consumes the objects defined here: operator parameters,
the nonlinearity ``f`` with its primitive, potentials ``V(x)``, the smooth bump
used as a forcing profile, and the uniform-grid :class:`Profile` carrier.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy import integrate


class InvalidNonlinearityError(ValueError):
    pass


class InvalidPotentialError(ValueError):
    pass


class Sign(str, enum.Enum):
    """Selects the maximal (``plus``) or minimal (``minus``) Pucci operator."""

    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class PucciParams:
    lam: float
    Lam: float
    branch: Sign = Sign.PLUS

    def __post_init__(self):
        if not (np.isfinite(self.lam) and np.isfinite(self.Lam)):
            raise ValueError("ellipticity constants must be finite")
        if not 0 < self.lam <= self.Lam:
            raise ValueError(f"need 0 < lambda <= Lambda, got {self.lam}, {self.Lam}")
        object.__setattr__(self, "branch", Sign(self.branch))

    @property
    def tail_mu(self) -> float:
        """Coefficient acting on ``u''`` where the solution is convex."""
        return self.Lam if self.branch is Sign.PLUS else self.lam

    @property
    def core_mu(self) -> float:
        """Coefficient acting on ``u''`` where the solution is concave."""
        return self.lam if self.branch is Sign.PLUS else self.Lam

    def with_branch(self, branch) -> "PucciParams":
        return PucciParams(self.lam, self.Lam, Sign(branch))

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "Lambda": self.Lam, "branch": self.branch.value}

    @classmethod
    def from_dict(cls, d: dict) -> "PucciParams":
        return cls(float(d["lambda"]), float(d["Lambda"]), Sign(d.get("branch", "plus")))


# ---------------------------------------------------------------------------
# smooth step shared by the bump and the log-hybrid cutoff


def _smoothstep(t):
    """Quintic 0 -> 1 on [0, 1] with vanishing first and second derivatives."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def _smoothstep_deriv(t):
    inside = (t > 0.0) & (t < 1.0)
    tc = np.clip(t, 0.0, 1.0)
    return np.where(inside, 30.0 * tc**2 * (1.0 - tc) ** 2, 0.0)


# ---------------------------------------------------------------------------
# nonlinearity


class Nonlinearity:
    """Superlinear source term ``f``, extended by zero to ``s <= 0``.

    Two families are supported. ``power_sum`` is ``f(s) = sum a_i s**p_i``
    with ``a_i > 0`` and ``p_i > 1``. ``log_hybrid`` glues ``s**p`` on
    ``[0, 2]`` to ``C s log s`` on ``[3, inf)`` through a nonincreasing
    smooth cutoff; it has linear-like growth of ``f(s)/s`` at infinity.

    Parameters
    ----------
    kind : {"power_sum", "log_hybrid"}
    terms : sequence of (a, p)
        Coefficients and exponents for ``power_sum``.
    eta0 : float
        Exponent with ``s**(-1-eta0) f(s) -> 0`` as ``s -> 0``.
    p, C : float
        Parameters of ``log_hybrid``. ``C`` defaults to the smallest value
        with ``C log s >= s**(p-1)`` on ``[2, 3]``, enlarged by 1 percent.
    """

    def __init__(self, kind: str = "power_sum", terms: Sequence = (), eta0: float = 0.5,
                 p: float | None = None, C: float | None = None):
        self.kind = kind
        self.eta0 = float(eta0)
        if kind == "power_sum":
            terms = tuple((float(a), float(q)) for a, q in terms)
            if not terms:
                raise InvalidNonlinearityError("power_sum needs at least one term")
            for a, q in terms:
                if not (np.isfinite(a) and np.isfinite(q)) or a <= 0 or q <= 1:
                    raise InvalidNonlinearityError(f"need a > 0 and p > 1, got ({a}, {q})")
            self.terms = terms
            self._pmin = min(q for _, q in terms)
        elif kind == "log_hybrid":
            if p is None or not p > 1:
                raise InvalidNonlinearityError("log_hybrid needs p > 1")
            self.p = float(p)
            s = np.linspace(2.0, 3.0, 2001)
            cmin = float(np.max(s ** (self.p - 1) / np.log(s)))
            self.C = 1.01 * cmin if C is None else float(C)
            if self.C < cmin:
                raise InvalidNonlinearityError(
                    f"C={self.C} too small; need C log s >= s^(p-1) on [2,3] (C >= {cmin:.6g})")
            self.terms = ()
            self._pmin = self.p
            self._F3 = integrate.quad(lambda r: float(self.f(r)), 2.0, 3.0,
                                      epsabs=1e-13, epsrel=1e-12)[0] + 2.0 ** (self.p + 1) / (self.p + 1)
        else:
            raise InvalidNonlinearityError(f"unknown nonlinearity kind {kind!r}")
        if not self.eta0 > 0:
            raise InvalidNonlinearityError("eta0 must be positive")
        if not self.eta0 < self._pmin - 1:
            raise InvalidNonlinearityError(
                f"eta0={self.eta0} must be below min(p_i) - 1 = {self._pmin - 1}")

    @classmethod
    def power(cls, p: float, a: float = 1.0, eta0: float | None = None) -> "Nonlinearity":
        return cls("power_sum", [(a, p)], eta0=0.5 * (p - 1) if eta0 is None else eta0)

    # the cutoff for log_hybrid: 1 on [0,2], 0 on [3,inf)
    @staticmethod
    def _eta(s):
        return 1.0 - _smoothstep(s - 2.0)

    def f(self, s):
        s = np.asarray(s, dtype=float)
        sp = np.where(s > 0, s, 0.0)
        if self.kind == "power_sum":
            out = np.zeros_like(sp)
            for a, q in self.terms:
                out = out + a * sp**q
        else:
            eta = self._eta(sp)
            with np.errstate(divide="ignore", invalid="ignore"):
                logpart = np.where(sp > 0, self.C * sp * np.log(np.where(sp > 0, sp, 1.0)), 0.0)
            out = eta * sp**self.p + (1.0 - eta) * logpart
        out = np.where(s > 0, out, 0.0)
        return out if out.ndim else float(out)

    def df(self, s):
        s = np.asarray(s, dtype=float)
        sp = np.where(s > 0, s, 0.0)
        if self.kind == "power_sum":
            out = np.zeros_like(sp)
            for a, q in self.terms:
                out = out + a * q * sp ** (q - 1)
        else:
            eta = self._eta(sp)
            deta = -_smoothstep_deriv(sp - 2.0)
            safe = np.where(sp > 0, sp, 1.0)
            logpart = self.C * sp * np.log(safe)
            dlog = self.C * (np.log(safe) + 1.0)
            out = (deta * (sp**self.p - logpart) + eta * self.p * sp ** (self.p - 1)
                   + (1.0 - eta) * dlog)
        out = np.where(s > 0, out, 0.0)
        return out if out.ndim else float(out)

    def F(self, s):
        """Primitive ``F(s) = int_0^s f``."""
        s = np.asarray(s, dtype=float)
        sp = np.where(s > 0, s, 0.0)
        if self.kind == "power_sum":
            out = np.zeros_like(sp)
            for a, q in self.terms:
                out = out + a * sp ** (q + 1) / (q + 1)
        else:
            p = self.p
            out = np.empty_like(sp)
            flat = sp.reshape(-1)
            res = out.reshape(-1)
            for i, v in enumerate(flat):
                if v <= 2.0:
                    res[i] = v ** (p + 1) / (p + 1)
                elif v < 3.0:
                    res[i] = 2.0 ** (p + 1) / (p + 1) + integrate.quad(
                        lambda r: float(self.f(r)), 2.0, v, epsabs=1e-13, epsrel=1e-12)[0]
                else:
                    prim = lambda r: self.C * (0.5 * r * r * math.log(r) - 0.25 * r * r)
                    res[i] = self._F3 + prim(v) - prim(3.0)
        return out if out.ndim else float(out)

    def scalar(self):
        """Plain-float ``f`` for tight integration loops."""
        if self.kind == "power_sum":
            terms = self.terms
            if len(terms) == 1:
                a, q = terms[0]
                if q == 2.0:
                    return lambda s: a * s * s if s > 0.0 else 0.0
                if q == 3.0:
                    return lambda s: a * s * s * s if s > 0.0 else 0.0
                return lambda s: a * s**q if s > 0.0 else 0.0
            return lambda s: sum(a * s**q for a, q in terms) if s > 0.0 else 0.0
        p, C = self.p, self.C

        def f(s):
            if s <= 0.0:
                return 0.0
            if s <= 2.0:
                return s**p
            if s >= 3.0:
                return C * s * math.log(s)
            t = s - 2.0
            eta = 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
            return eta * s**p + (1.0 - eta) * C * s * math.log(s)
        return f

    def ratio_samples(self, s: float, thetas) -> np.ndarray:
        """Sampled ``f(theta s) / f(s)``, the finite-``s`` stand-in for the limit profile."""
        return np.asarray(self.f(np.asarray(thetas) * s)) / self.f(s)

    def to_dict(self) -> dict:
        if self.kind == "power_sum":
            return {"kind": "power_sum", "terms": [list(t) for t in self.terms], "eta0": self.eta0}
        return {"kind": "log_hybrid", "p": self.p, "C": self.C, "eta0": self.eta0}

    @classmethod
    def from_dict(cls, d: dict) -> "Nonlinearity":
        kind = d.get("kind")
        if kind == "power_sum":
            return cls("power_sum", d["terms"], eta0=d["eta0"])
        if kind == "log_hybrid":
            return cls("log_hybrid", eta0=d["eta0"], p=d["p"], C=d.get("C"))
        raise InvalidNonlinearityError(f"unknown nonlinearity kind {kind!r}")

    def __repr__(self):
        return f"Nonlinearity({self.to_dict()})"


# ---------------------------------------------------------------------------
# potentials


class Potential:
    """Bounded potential ``V(x)`` described by a small set of parameters.

    Kinds and their parameters:

    ``constant``   ``value``
    ``well``       ``Vinf - C0 * exp(-b |x|)``; keys ``Vinf``, ``C0``, ``b``
    ``monotone``   ``lo + (hi - lo) (1 + tanh(x / scale)) / 2``; keys ``lo``, ``hi``, ``scale``
    ``reflected``  ``base(-x)``; key ``base`` (another descriptor)
    ``tabulated``  piecewise linear through ``x``, ``values``, constant outside
    """

    KINDS = ("constant", "well", "monotone", "reflected", "tabulated")

    def __init__(self, kind: str, **params):
        if kind not in self.KINDS:
            raise InvalidPotentialError(f"unknown potential kind {kind!r}")
        self.kind = kind
        self.params = params
        if kind == "reflected":
            base = params["base"]
            self.base = base if isinstance(base, Potential) else Potential.from_dict(base)
        elif kind == "tabulated":
            self._x = np.asarray(params["x"], dtype=float)
            self._v = np.asarray(params["values"], dtype=float)
            if self._x.ndim != 1 or self._x.shape != self._v.shape or len(self._x) < 2:
                raise InvalidPotentialError("tabulated potential needs matching 1D x/values")
            if np.any(np.diff(self._x) <= 0):
                raise InvalidPotentialError("tabulated x must be strictly increasing")
        if not (np.isfinite(self.V0) and self.V0 > 0):
            raise InvalidPotentialError(f"inf V must be positive, got {self.V0}")

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, value: float) -> "Potential":
        return cls("constant", value=float(value))

    @classmethod
    def well(cls, Vinf: float, C0: float, b: float) -> "Potential":
        return cls("well", Vinf=float(Vinf), C0=float(C0), b=float(b))

    @classmethod
    def monotone(cls, lo: float, hi: float, scale: float = 1.0) -> "Potential":
        return cls("monotone", lo=float(lo), hi=float(hi), scale=float(scale))

    @classmethod
    def tabulated(cls, x, values, Vinf: float | None = None) -> "Potential":
        kw = {"x": np.asarray(x, dtype=float), "values": np.asarray(values, dtype=float)}
        if Vinf is not None:
            kw["Vinf"] = float(Vinf)
        return cls("tabulated", **kw)

    # evaluation -----------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "constant":
            out = np.full_like(x, p["value"])
        elif k == "well":
            out = p["Vinf"] - p["C0"] * np.exp(-p["b"] * np.abs(x))
        elif k == "monotone":
            out = p["lo"] + 0.5 * (p["hi"] - p["lo"]) * (1.0 + np.tanh(x / p["scale"]))
        elif k == "reflected":
            out = np.asarray(self.base(-x), dtype=float)
        else:
            out = np.interp(x, self._x, self._v)
        return out if out.ndim else float(out)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "constant":
            out = np.zeros_like(x)
        elif k == "well":
            out = p["C0"] * p["b"] * np.sign(x) * np.exp(-p["b"] * np.abs(x))
        elif k == "monotone":
            out = 0.5 * (p["hi"] - p["lo"]) / p["scale"] / np.cosh(x / p["scale"]) ** 2
        elif k == "reflected":
            out = -np.asarray(self.base.derivative(-x), dtype=float)
        else:
            slopes = np.diff(self._v) / np.diff(self._x)
            idx = np.searchsorted(self._x, x, side="right") - 1
            inside = (idx >= 0) & (idx < len(slopes))
            out = np.where(inside, slopes[np.clip(idx, 0, len(slopes) - 1)], 0.0)
        return out if out.ndim else float(out)

    @property
    def V0(self) -> float:
        """Infimum of ``V`` over the real line."""
        k, p = self.kind, self.params
        if k == "constant":
            return p["value"]
        if k == "well":
            return p["Vinf"] - p["C0"] if p["C0"] > 0 else p["Vinf"]
        if k == "monotone":
            return min(p["lo"], p["hi"])
        if k == "reflected":
            return self.base.V0
        return float(np.min(self._v))

    @property
    def Vinf(self) -> float:
        """Limit at infinity for wells; the upper limit for monotone potentials."""
        k, p = self.kind, self.params
        if k == "constant":
            return p["value"]
        if k == "well":
            return p["Vinf"]
        if k == "monotone":
            return max(p["lo"], p["hi"])
        if k == "reflected":
            return self.base.Vinf
        return float(p.get("Vinf", max(self._v[0], self._v[-1])))

    @property
    def limits(self) -> tuple[float, float]:
        """``(V(-inf), V(+inf))``."""
        k, p = self.kind, self.params
        if k == "monotone":
            return p["lo"], p["hi"]
        if k == "reflected":
            a, b = self.base.limits
            return b, a
        if k == "tabulated":
            return float(self._v[0]), float(self._v[-1])
        return self.Vinf, self.Vinf

    # serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "reflected":
            return {"kind": "reflected", "base": self.base.to_dict()}
        if self.kind == "tabulated":
            d = {"kind": "tabulated", "x": self._x.tolist(), "values": self._v.tolist()}
            if "Vinf" in self.params:
                d["Vinf"] = self.params["Vinf"]
            return d
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "Potential":
        d = dict(d)
        kind = d.pop("kind", None)
        if kind not in cls.KINDS:
            raise InvalidPotentialError(f"unknown potential kind {kind!r}")
        return cls(kind, **d)

    def __eq__(self, other):
        return isinstance(other, Potential) and json.dumps(self.to_dict(), sort_keys=True) == \
            json.dumps(other.to_dict(), sort_keys=True)

    def __repr__(self):
        return f"Potential({self.to_dict()})"


def reflect(V: Potential) -> Potential:
    """Return ``x -> V(-x)``.

    Constants and wells are even and come back unchanged; a reflected
    potential unwraps to its base, and tabulated data is mirrored so that the
    result stays tabulated.
    """
    if V.kind in ("constant", "well"):
        return V
    if V.kind == "reflected":
        return V.base
    if V.kind == "tabulated":
        kw = {"x": -V._x[::-1], "values": V._v[::-1]}
        if "Vinf" in V.params:
            kw["Vinf"] = V.params["Vinf"]
        return Potential("tabulated", **kw)
    return Potential("reflected", base=V)


# ---------------------------------------------------------------------------
# bump


@dataclass(frozen=True)
class Bump:
    """Even cutoff equal to 1 on ``[0, kappa0]`` and 0 beyond ``2 kappa0``."""

    kappa0: float = 1.0

    def __post_init__(self):
        if not self.kappa0 > 0:
            raise ValueError("kappa0 must be positive")

    def __call__(self, x):
        t = (np.abs(np.asarray(x, dtype=float)) - self.kappa0) / self.kappa0
        out = 1.0 - _smoothstep(t)
        return out if np.ndim(out) else float(out)

    def sample(self, L: float, h: float) -> np.ndarray:
        return self(grid(L, h))


def select_kappa0(V: Potential, L: float = 50.0, h: float = 1e-2, cap: float = 1.0) -> float:
    """Largest ``kappa0 <= cap`` with ``V < Vinf`` on ``[-3 kappa0, 3 kappa0]``."""
    x = grid(L, h)
    gap = V.Vinf - np.asarray(V(x))
    bad = np.abs(x[gap <= 0])
    if bad.size == 0:
        return cap
    k = float(bad.min()) / 3.0
    if k <= 0:
        raise InvalidPotentialError("V(0) >= Vinf: no admissible bump width")
    return min(cap, 0.99 * k)


# ---------------------------------------------------------------------------
# grid profiles


def grid(L: float, h: float) -> np.ndarray:
    """Uniform nodes ``k h`` for ``k = -n..n``; exactly symmetric."""
    n = int(round(L / h))
    if n < 2 or abs(n * h - L) > 1e-9 * max(1.0, L):
        raise ValueError(f"L={L} is not a multiple of h={h}")
    return h * np.arange(-n, n + 1, dtype=float)


def central_diff(values: np.ndarray, h: float) -> np.ndarray:
    """First derivative: 4th-order centered stencil inside, 2nd-order near the ends."""
    u = np.asarray(values, dtype=float)
    d = np.gradient(u, h, edge_order=2)
    if u.size >= 5:
        d[2:-2] = (u[:-4] - 8.0 * u[1:-3] + 8.0 * u[3:-1] - u[4:]) / (12.0 * h)
    return d


def second_diff(values: np.ndarray, h: float) -> np.ndarray:
    """Centered second difference at interior nodes; ends copy their neighbour."""
    u = np.asarray(values, dtype=float)
    d = np.empty_like(u)
    d[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / (h * h)
    d[0], d[-1] = d[1], d[-2]
    return d


@dataclass(frozen=True)
class Profile:
    """Function sampled on the symmetric grid over ``[-L, L]``."""

    L: float
    h: float
    values: np.ndarray
    provenance: str = "constructed"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = int(round(self.L / self.h))
        if v.shape != (2 * n + 1,):
            raise ValueError(f"expected {2 * n + 1} values for L={self.L}, h={self.h}, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return grid(self.L, self.h)

    @property
    def n(self) -> int:
        return int(round(self.L / self.h))

    def derivative(self) -> np.ndarray:
        return central_diff(self.values, self.h)

    def second_derivative(self) -> np.ndarray:
        return second_diff(self.values, self.h)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def argmax(self) -> float:
        return float(self.x[int(np.argmax(self.values))])

    def inflection_points(self) -> np.ndarray:
        """Interior grid locations where the second difference changes sign."""
        d2 = self.second_derivative()[1:-1]
        s = np.sign(d2)
        idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
        return self.x[1:-1][idx] + 0.5 * self.h

    def reflected(self) -> "Profile":
        return Profile(self.L, self.h, self.values[::-1].copy(), self.provenance, dict(self.meta))

    def with_values(self, values, provenance: str | None = None, **meta) -> "Profile":
        return Profile(self.L, self.h, np.asarray(values, dtype=float),
                       provenance or self.provenance, meta)

    @classmethod
    def from_function(cls, func, L: float, h: float, provenance: str = "constructed") -> "Profile":
        return cls(L, h, np.asarray(func(grid(L, h)), dtype=float), provenance)

    def to_csv(self, path=None, columns: dict | None = None) -> str:
        """Write ``x,u`` (plus optional extra columns) with round-trip precision."""
        cols = {"x": self.x, "u": self.values}
        cols.update(columns or {})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(cols))
        for row in zip(*cols.values()):
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text, provenance: str = "loaded") -> "Profile":
        p = Path(str(path_or_text)) if "\n" not in str(path_or_text) else None
        text = p.read_text() if p is not None else str(path_or_text)
        rows = list(csv.reader(io.StringIO(text)))
        header = rows[0]
        if header[:2] != ["x", "u"]:
            raise ValueError(f"profile CSV must start with columns x,u; got {header}")
        data = np.array([[float(v) for v in r[:2]] for r in rows[1:] if r], dtype=float)
        x, u = data[:, 0], data[:, 1]
        n = (len(x) - 1) // 2
        h = (x[-1] - x[0]) / (2 * n)
        L = n * h
        # snap to the canonical grid
        L = float(np.round(L / h) * h)
        return cls(L, h, u, provenance)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    checks: dict
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def __bool__(self):
        return self.ok

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": dict(self.checks), "details": _jsonable(self.details)}


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def validate_nonlinearity(f: Nonlinearity, samples: int = 200, rtol: float = 1e-10) -> ValidationReport:
    """Sampled checks of the four structural conditions on ``f``.

    ``sign``: vanishes on ``s <= 0`` and is nonnegative.
    ``small_s``: ``s**(-1-eta0) f(s)`` decreases to 0 on a log grid down to 1e-12.
    ``superlinear``: ``f(s)/s`` grows at least tenfold from ``s = 1`` to ``s = 1e12``.
    ``ratio_monotone``: ``f(s)/s`` strictly increases on a log grid over ``[1e-6, 1e6]``.
    """
    if samples < 10:
        raise ValueError("samples must be >= 10")
    neg = -np.logspace(-8, 4, samples)
    small = np.logspace(-12, -2, samples)
    big = np.logspace(0, 12, samples)
    mid = np.logspace(-6, 6, samples)
    with np.errstate(all="ignore"):
        vals = [np.asarray(f.f(s)) for s in (neg, small, big, mid)]
    if not all(np.all(np.isfinite(v)) for v in vals):
        raise InvalidNonlinearityError("non-finite evaluation of f")
    fneg, fsmall, fbig, fmid = vals

    sign_ok = bool(np.all(fneg == 0.0) and np.all(fmid >= 0.0))
    decay = fsmall * small ** (-1.0 - f.eta0)
    small_ok = bool(np.all(np.diff(decay) >= -rtol * np.abs(decay[1:]))
                    and decay[0] <= 1e-2 * max(decay[-1], np.finfo(float).tiny))
    growth = fbig / big
    super_ok = bool(np.all(np.diff(growth) > 0) and growth[-1] >= 10.0 * growth[0])
    ratio = fmid / mid
    mono_ok = bool(np.all(np.diff(ratio) > 0))

    thetas = np.array([0.25, 0.5, 0.75, 1.0])
    details = {
        "small_s_ratio_range": [float(decay[0]), float(decay[-1])],
        "growth_ratio": float(growth[-1] / growth[0]),
        "fbar_thetas": thetas,
        "fbar_samples": f.ratio_samples(1e12, thetas),
    }
    return ValidationReport(
        {"sign": sign_ok, "small_s": small_ok, "superlinear": super_ok, "ratio_monotone": mono_ok},
        details)


def validate_potential(V: Potential, hypothesis: str = "well", params: PucciParams | None = None,
                       xi0: float | None = None, C0: float | None = None,
                       L: float = 40.0, h: float = 1e-2, rtol: float = 1e-10) -> ValidationReport:
    """Grid checks of the potential hypotheses.

    For ``hypothesis="well"`` the exponential gap bound
    ``0 <= Vinf - V(x) <= C0 exp(-2 sqrt(Vinf/mu + xi0) |x|)`` is checked with
    ``mu = Lambda`` (plus) or ``lambda`` (minus). For a ``well`` descriptor,
    ``C0`` defaults to its amplitude and ``xi0`` to the largest admissible
    value ``b**2/4 - Vinf/mu``. For ``hypothesis="monotone"`` the potential
    must be nondecreasing with strictly ordered limits.
    """
    if not V.V0 > 0:
        raise InvalidPotentialError("inf V must be positive")
    x = grid(L, h)
    v = np.asarray(V(x), dtype=float)
    dv = np.asarray(V.derivative(x), dtype=float)
    checks: dict = {}
    details: dict = {"V0": V.V0, "Vinf": V.Vinf}
    checks["bounded"] = bool(np.all(np.isfinite(v)) and np.all(np.isfinite(dv)))
    checks["positive_inf"] = bool(V.V0 > 0 and np.min(v) >= V.V0 * (1 - rtol))
    tol = rtol * max(1.0, abs(V.Vinf))

    if hypothesis == "well":
        params = params or PucciParams(1.0, 1.0)
        mu = params.Lam if params.branch is Sign.PLUS else params.lam
        Vinf = V.Vinf
        checks["symmetric_monotone"] = bool(np.all(dv[x < 0] <= tol) and np.all(dv[x > 0] >= -tol))
        checks["V0_below_Vinf"] = bool(V(0.0) <= Vinf + tol)
        if C0 is None:
            C0 = V.params.get("C0", float(np.max(Vinf - v))) if V.kind == "well" else float(np.max(Vinf - v))
        if xi0 is None:
            if V.kind == "well":
                xi0 = V.params["b"] ** 2 / 4.0 - Vinf / mu
            elif V.kind == "constant":
                xi0 = 1.0
            else:
                raise ValueError("xi0 is required for this potential kind")
        details.update(C0=C0, xi0=xi0, mu=mu)
        gap = Vinf - v
        if xi0 <= 0:
            checks["exp_gap"] = False
        else:
            bound = C0 * np.exp(-2.0 * np.sqrt(Vinf / mu + xi0) * np.abs(x))
            checks["exp_gap"] = bool(np.all(gap >= -tol) and np.all(gap <= bound + tol))
            details["max_gap_excess"] = float(np.max(gap - bound))
    elif hypothesis == "monotone":
        lo, hi = V.limits
        details.update(lower=lo, upper=hi)
        checks["nondecreasing"] = bool(np.all(dv >= -tol) and np.all(np.diff(v) >= -tol))
        checks["ordered_limits"] = bool(lo < hi)
    else:
        raise ValueError(f"unknown hypothesis {hypothesis!r}")
    return ValidationReport(checks, details)
