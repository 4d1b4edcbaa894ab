"""
Ground states of the constant-potential problem
================================================

Build the even ground states for f(s) = s^2, V = 1 and compare the
equal-ellipticity case with the closed-form soliton. Then switch on
lam < Lam and look at the glued profiles and their decay rates.
"""

import numpy as np

from pucci1d.homoclinic import build_omega, integrate_ivp
from pucci1d.model import Nonlinearity, PucciParams, Sign
from pucci1d.scalar import ScalarLandscape, matching_levels

f = Nonlinearity.power(2)
land = ScalarLandscape.build(f, 1.0)
print("s_inf =", land.s_inf, " alpha0 =", land.alpha0)

# with lam = Lam the ground state is 1.5 sech^2(x/2)
om = build_omega(PucciParams(1.0, 1.0), land, L=20, h=1e-3)
print("soliton error:", np.max(np.abs(om.values - 1.5 / np.cosh(om.x / 2) ** 2)))

# lam < Lam: the core orbit starts at a matching level and meets the opposite tail at s_inf
p = PucciParams(1.0, 2.0)
s1, s2, s1m = matching_levels(p, land)
print("matching levels:", s1, s2, s1m)
for b in Sign:
    om = build_omega(p.with_branch(b), land)
    print(f"{b.value:5s} max {om.max_value:.10f}  glue at y1={om.y1:.6f}  "
          f"fitted decay {om.c2:.6f}  u'' jump {om.glue['dupp']:.1e}")

# energy is conserved along each phase-plane orbit
tr = integrate_ivp(land, 1.0, s2, 8.0, h=1e-3)
print("energy drift on the plus core:", np.ptp(tr.energy(land)))

# write x,u,up,upp for plotting
build_omega(p, land).export("omega_plus")
print("wrote omega_plus.csv / omega_plus.json")
