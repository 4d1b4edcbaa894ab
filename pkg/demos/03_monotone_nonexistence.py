"""
No ground state on a monotone potential
=======================================

On a sigmoid potential the Newton solver still converges on a truncated
domain, but only to profiles pushed against the wall. The energy chain
certificate exposes each of them.
"""

from pucci1d.bvp import DiscreteOperator, resample, solve_full
from pucci1d.certify import nonexistence_certificate
from pucci1d.homoclinic import build_omega
from pucci1d.model import Nonlinearity, Potential, PucciParams, reflect
from pucci1d.scalar import ScalarLandscape

f = Nonlinearity.power(2)
V = Potential.monotone(1.0, 1.5, 1.0)
p = PucciParams(1.0, 2.0)
land = ScalarLandscape.build(f, V.Vinf)

op = DiscreteOperator(p, V, f, 10.0, 1e-2)
om = build_omega(p, ScalarLandscape.build(f, 1.0), L=30, h=1e-2)

for shift in (-6.0, -5.0, -4.0):
    sol = solve_full(op, 0.0, resample(om.profile, 10.0, 1e-2, shift=shift))
    if not sol.converged:
        print(shift, "no convergence")
        continue
    cert = nonexistence_certificate(sol.profile, V, p, land)
    print(f"shift {shift}: max at {sol.profile.argmax():.2f}, verdict {cert.verdict.value}")
    print("   ", cert.narrative)
    # the mirrored problem gives the same chain
    mirrored = nonexistence_certificate(sol.profile.reflected(), reflect(V), p, land)
    assert mirrored.to_dict() == cert.to_dict()

# the exact ground state with constant V sits on the equality case
base = nonexistence_certificate(build_omega(p, ScalarLandscape.build(f, 1.0)).profile,
                                Potential.constant(1.0), p, ScalarLandscape.build(f, 1.0))
print(base.to_json())
