"""Dirichlet solver on ``[-L, L]`` for ``-M(u'') + V u = f(u) + t phi``."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .certify import eta1_select, xnorm
from .model import Bump, Nonlinearity, Potential, Profile, PucciParams, grid
from .scalar import pucci_coeff, pucci_eval


class SolverStallError(RuntimeError):
    """Sign-pattern iteration did not settle; ``history`` holds the pattern flip counts."""

    def __init__(self, msg, history):
        super().__init__(msg)
        self.history = history


def default_L(params: PucciParams, V: Potential, h: float = 1e-2) -> float:
    """``30 / c2`` with ``c2`` the slowest linearized tail rate, rounded up to a multiple of ``h``."""
    c2 = math.sqrt(V.Vinf / params.Lam)
    n = math.ceil(30.0 / c2 / h)
    return n * h


def resample(u: Profile, L: float, h: float, shift: float = 0.0) -> Profile:
    """Cubic interpolation of ``u(x - shift)`` onto another grid, zero outside the support."""
    sp = CubicSpline(u.x, u.values)
    x = grid(L, h) - shift
    vals = np.where(np.abs(x) <= u.L, sp(np.clip(x, -u.L, u.L)), 0.0)
    vals[0] = vals[-1] = 0.0
    return Profile(L, h, vals, provenance="resampled")


@dataclass(frozen=True)
class DiscreteOperator:
    """``u -> -M(D2 u) + V u`` at interior nodes with zero boundary values.

    ``D2`` is the centered second difference. Samples of ``V`` and of the
    bump are taken once at construction.
    """

    params: PucciParams
    potential: Potential
    nonlinearity: Nonlinearity
    L: float
    h: float
    bump: Bump = field(default_factory=Bump)
    eta1: float | None = None

    def __post_init__(self):
        x = grid(self.L, self.h)
        Vx = np.asarray(self.potential(x), dtype=float)
        if np.any(Vx[1:-1] <= 0):
            raise ValueError("potential must be positive on the grid")
        for name, val in (("x", x), ("V", Vx), ("phi", np.asarray(self.bump(x), dtype=float))):
            val.setflags(write=False)
            object.__setattr__(self, "_" + name, val)
        if self.eta1 is None:
            c2 = math.sqrt(self.potential.Vinf / self.params.Lam)
            eta = eta1_select(self.params, self.potential.V0, c2, self.nonlinearity.eta0)
            object.__setattr__(self, "eta1", eta)

    @property
    def x(self) -> np.ndarray:
        return self._x

    @property
    def V(self) -> np.ndarray:
        return self._V

    @property
    def phi(self) -> np.ndarray:
        return self._phi

    def profile(self, values, provenance="bvp", **meta) -> Profile:
        return Profile(self.L, self.h, np.asarray(values, dtype=float), provenance, meta)

    def d2(self, u: np.ndarray) -> np.ndarray:
        """Centered second difference at interior nodes."""
        return (u[:-2] - 2.0 * u[1:-1] + u[2:]) / (self.h * self.h)

    def action(self, u) -> np.ndarray:
        """``-M(D2 u) + V u`` at interior nodes."""
        u = np.asarray(getattr(u, "values", u), dtype=float)
        return -np.asarray(pucci_eval(self.params, self.d2(u))) + self.V[1:-1] * u[1:-1]

    def residual(self, u, t: float = 0.0) -> np.ndarray:
        u = np.asarray(getattr(u, "values", u), dtype=float)
        src = np.asarray(self.nonlinearity.f(u[1:-1])) + t * self.phi[1:-1]
        return self.action(u) - src

    def _banded(self, c: np.ndarray, diag_extra: np.ndarray) -> np.ndarray:
        h2 = self.h * self.h
        ab = np.zeros((3, c.size))
        ab[0, 1:] = -c[:-1] / h2
        ab[1] = 2.0 * c / h2 + diag_extra
        ab[2, :-1] = -c[1:] / h2
        return ab

    def solve_pattern(self, c: np.ndarray, rhs: np.ndarray, diag_extra=None) -> np.ndarray:
        """Solve ``-c D2 u + d u = rhs`` for fixed slopes ``c``; returns full nodal vector."""
        d = self.V[1:-1] if diag_extra is None else diag_extra
        out = np.zeros(self.x.size)
        out[1:-1] = solve_banded((1, 1), self._banded(c, d), rhs)
        return out


def _as_values(op: DiscreteOperator, rhs) -> np.ndarray:
    vals = np.asarray(getattr(rhs, "values", rhs), dtype=float)
    if vals.shape != op.x.shape:
        raise ValueError("right-hand side lives on a different grid")
    return vals


def solve_frozen(op: DiscreteOperator, rhs) -> Profile:
    """Solve ``-M(D2 u) + V u = rhs`` by policy iteration on the sign pattern of ``D2 u``.

    Each sweep fixes the active Pucci slope per node and solves the
    tridiagonal system. The pattern sequence is monotone, so it settles in
    finitely many sweeps; once the iterate stops moving at round-off level
    the loop also ends, which avoids flip-flops at nodes with ``D2 u = 0``.
    """
    r = _as_values(op, rhs)[1:-1]
    N = r.size
    c = np.asarray(pucci_coeff(op.params, np.zeros(N)), dtype=float)
    u = op.solve_pattern(c, r)
    history = []
    for it in range(10 * N):
        c_new = np.asarray(pucci_coeff(op.params, op.d2(u)), dtype=float)
        flips = int(np.count_nonzero(c_new != c))
        history.append(flips)
        if flips == 0:
            break
        u_new = op.solve_pattern(c_new, r)
        moved = float(np.max(np.abs(u_new - u)))
        u, c = u_new, c_new
        if moved <= 1e-14 * (1.0 + float(np.max(np.abs(u)))):
            break
    else:
        raise SolverStallError(f"sign pattern still changing after {10 * N} sweeps", history)
    return op.profile(u, "solve_frozen", sweeps=len(history))


def apply_L(op: DiscreteOperator, v, t: float = 0.0, bump: Bump | None = None) -> Profile:
    """Frozen map: solve with right-hand side ``f(v) + t phi``."""
    vals = _as_values(op, v)
    phi = op.phi if bump is None else np.asarray(bump(op.x), dtype=float)
    rhs = np.asarray(op.nonlinearity.f(vals)) + t * phi
    return solve_frozen(op, rhs)


@dataclass
class SolveResult:
    profile: Profile
    converged: bool
    residual: float
    iterations: int
    history: list

    @property
    def values(self):
        return self.profile.values


def solve_full(op: DiscreteOperator, t: float, init, tol: float = 1e-10, max_iter: int = 100,
               max_reject: int = 30) -> SolveResult:
    """Damped semismooth Newton for the discrete residual.

    The Jacobian uses the Pucci slope pattern of the current iterate.
    Steps are halved until the residual sup-norm decreases (Armijo factor
    ``1e-4``); more than ``max_reject`` halvings end the solve and the last
    iterate is returned unconverged.
    """
    u = np.array(_as_values(op, init), dtype=float)
    u[0] = u[-1] = 0.0
    f = op.nonlinearity
    R = op.residual(u, t)
    res = float(np.max(np.abs(R)))
    history = [res]
    for it in range(max_iter):
        if res <= tol * (1.0 + float(np.max(np.abs(u)))):
            return SolveResult(op.profile(u, "solve_full", t=t), True, res, it, history)
        c = np.asarray(pucci_coeff(op.params, op.d2(u)), dtype=float)
        diag = op.V[1:-1] - np.asarray(f.df(u[1:-1]))
        try:
            step = op.solve_pattern(c, -R, diag)
        except (np.linalg.LinAlgError, ValueError):
            break
        alpha, accepted = 1.0, False
        for _ in range(max_reject):
            trial = u + alpha * step
            R_t = op.residual(trial, t)
            r_t = float(np.max(np.abs(R_t)))
            if np.isfinite(r_t) and r_t <= (1.0 - 1e-4 * alpha) * res:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        u, R, res = trial, R_t, r_t
        history.append(res)
    converged = res <= tol * (1.0 + float(np.max(np.abs(u))))
    return SolveResult(op.profile(u, "solve_full", t=t), converged, res, len(history) - 1, history)


@dataclass
class BranchEntry:
    t: float
    profile: Profile
    residual: float
    sup_norm: float
    x_norm: float
    converged: bool


@dataclass
class Branch:
    entries: list
    eta1: float

    @property
    def final(self) -> BranchEntry:
        return self.entries[-1]

    @property
    def M0(self) -> float:
        """Largest sup-norm over converged entries."""
        return max((e.sup_norm for e in self.entries if e.converged), default=0.0)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "sup_norm", "x_norm", "residual", "converged"])
        for e in self.entries:
            w.writerow([repr(float(e.t)), repr(float(e.sup_norm)), repr(float(e.x_norm)),
                        repr(float(e.residual)), str(bool(e.converged)).lower()])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def continuation(op: DiscreteOperator, t_values, init) -> Branch:
    """Track solutions as ``t`` decreases to 0, warm-starting each level.

    A level that fails to converge is recorded and the next level restarts
    from the last converged profile.
    """
    ts = [float(t) for t in t_values]
    if any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_values must be strictly decreasing")
    if ts[-1] != 0.0:
        raise ValueError("t_values must end at 0")
    guess = _as_values(op, init)
    entries = []
    for t in ts:
        sol = solve_full(op, t, guess)
        p = sol.profile
        entries.append(BranchEntry(t, p, sol.residual, p.sup(), xnorm(p, op.eta1), sol.converged))
        if sol.converged:
            guess = p.values
    return Branch(entries, op.eta1)


def comparison_test(op: DiscreteOperator, rhs1, rhs2, rtol: float = 1e-12) -> bool:
    """Whether ordered data give ordered frozen solutions."""
    u1 = solve_frozen(op, rhs1).values
    u2 = solve_frozen(op, rhs2).values
    scale = 1.0 + max(float(np.max(np.abs(u1))), float(np.max(np.abs(u2))))
    return bool(np.all(u1 <= u2 + rtol * scale))
