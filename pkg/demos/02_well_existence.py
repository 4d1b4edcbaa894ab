"""
A ground state trapped by a potential well
==========================================

Continue the forced problem from t = 2 down to t = 0 on an exponential
well, starting from the constant-potential ground state. The last level
is a genuine solution with a single maximum at the bottom of the well.
"""

import numpy as np

from pucci1d.bvp import DiscreteOperator, continuation, default_L, resample
from pucci1d.certify import decay_fit, eta1_select, prop29_diagnostics, single_max_check, xnorm
from pucci1d.homoclinic import build_omega
from pucci1d.model import Bump, Nonlinearity, Potential, PucciParams, validate_potential
from pucci1d.scalar import ScalarLandscape, forcing_threshold

f = Nonlinearity.power(2)
V = Potential.well(1.0, 0.3, 3.0)
p = PucciParams(1.0, 2.0)
print(validate_potential(V, "well", p).checks)

land = ScalarLandscape.build(f, V.Vinf)
L = default_L(p, V)
op = DiscreteOperator(p, V, f, L, 1e-2, Bump(0.1))
init = resample(build_omega(p, land, L=30, h=1e-2).profile, L, 1e-2)

br = continuation(op, np.linspace(2.0, 0.0, 9), init)
print(br.to_csv())

u = br.final.profile
print("single maximum:", single_max_check(u))
c1, c2 = decay_fit(u)
eta1 = eta1_select(p, V.V0, c2, f.eta0)
print(f"decay rate {c2:.4f}, eta1 {eta1:.4f}, weighted norm {xnorm(u, eta1):.4f}")

# energy ordering along the branch
rep = prop29_diagnostics(br, V, p, land, op.bump)
print("worst margins:", rep["worst_step2"], rep["worst_step3"], rep["worst_step4"])

# above the forcing threshold every solution is bounded below
c, tt = forcing_threshold(f, V.Vinf)
print("t_tilde =", tt)
