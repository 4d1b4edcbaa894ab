import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pucci1d.bvp import Branch, BranchEntry, DiscreteOperator, continuation, resample, solve_full
from pucci1d.certify import (Certificate, ChainEntry, DegenerateInputError, EnergyKind, FitError,
                             NotApplicableError, NotFoundError, Verdict, decay_fit, energy_series,
                             eta1_select, inflection_points, nonexistence_certificate,
                             prop29_diagnostics, single_max_check, xnorm)
from pucci1d.homoclinic import build_omega, integrate_ivp
from pucci1d.model import Bump, Potential, Profile, reflect
from pucci1d.scalar import ScalarLandscape

from conftest import params

Y1_SECH2 = 1.3169578969248164


@pytest.fixture(scope="module")
def omegas(ls2):
    return {b: build_omega(params(1, 2, b), ls2) for b in ("plus", "minus")}


@pytest.fixture(scope="module")
def impostor(ls2, sigmoid, omegas):
    p = params(1, 2)
    op = DiscreteOperator(p, sigmoid, ls2.f, 10.0, 1e-2)
    init = resample(build_omega(p, ls2, L=30, h=1e-2).profile, 10.0, 1e-2, shift=-5.0)
    sol = solve_full(op, 0.0, init)
    assert sol.converged
    return sol.profile


def test_eta1_examples():
    assert eta1_select(params(1, 2), 1.0, 0.707, 0.5) == pytest.approx(0.36, abs=1e-12)
    assert eta1_select(params(1, 1), 1.0, 1.0, 0.5) == pytest.approx(0.5091168824543142, abs=1e-12)
    assert eta1_select(params(1, 1), 1e6, 0.8, 0.5) == pytest.approx(0.72)


@given(st.floats(0.1, 5), st.floats(1, 5), st.floats(0.05, 5), st.floats(0.01, 3), st.floats(0.01, 2))
def test_eta1_constraints_strict(lam, r, V0, c2, eta0):
    p = params(lam, lam * r)
    e = eta1_select(p, V0, c2, eta0)
    assert 0 < e < c2
    assert p.Lam * e ** 2 * (1 + eta0 / 2) ** 2 < V0 / 2


def test_xnorm_examples(omegas):
    z = Profile(5.0, 0.5, np.zeros(21))
    assert xnorm(z, 0.3) == 0
    e = Profile.from_function(lambda x: np.exp(-np.abs(x)), 10.0, 0.01)
    assert xnorm(e, 0.5) == 1.0
    om = omegas["plus"].profile
    w = np.exp(0.36 * np.abs(om.x)) * om.values
    assert np.isfinite(xnorm(om, 0.36)) and abs(om.x[np.argmax(w)]) < om.L / 2


def test_single_max(omegas):
    assert single_max_check(omegas["plus"].profile) == (True, 0.0)
    two = Profile.from_function(lambda x: np.exp(-(x - 3) ** 2) + np.exp(-(x + 3) ** 2), 10.0, 0.01)
    assert not single_max_check(two)[0]
    with pytest.raises(DegenerateInputError):
        single_max_check(Profile(1.0, 0.5, np.zeros(5)))


def test_single_max_plateau():
    v = np.array([0, 1, 2, 3, 3, 3, 2, 1, 0.0])
    assert single_max_check(Profile(4.0, 1.0, v))[0]
    v = np.array([0, 1, 3, 3, 3, 3, 2, 1, 0.0])
    assert not single_max_check(Profile(4.0, 1.0, v))[0]


def test_decay_fit_examples(ls2, omegas):
    e = Profile.from_function(lambda x: np.exp(-np.abs(x)), 20.0, 0.01)
    c1, c2 = decay_fit(e, (0.7, 0.95))
    assert c2 == pytest.approx(1.0, abs=1e-6) and c1 == pytest.approx(1.0, abs=1e-6)
    sech = build_omega(params(1, 1), ls2)
    assert decay_fit(sech.profile, (0.7, 0.95))[1] == pytest.approx(1.0, rel=0.02)
    assert decay_fit(omegas["plus"].profile, (0.7, 0.95))[1] == pytest.approx(np.sqrt(0.5), rel=0.02)
    with pytest.raises(FitError):
        decay_fit(Profile.from_function(lambda x: -np.exp(-np.abs(x)), 10.0, 0.1))


def test_energy_constant_on_trajectory(ls2):
    tr = integrate_ivp(ls2, 2.0, 1.3, 10.0, h=1e-3)
    E = energy_series(tr, EnergyKind.E_mu(2.0), landscape=ls2)
    assert np.ptp(E) <= 1e-12


def test_energy_vinf_zero_on_omega(ls2, omegas):
    V = Potential.constant(1.0)
    sech = build_omega(params(1, 1), ls2)
    E = energy_series(sech.profile, EnergyKind.E_Vinf(), params(1, 1), V, ls2)
    assert np.max(np.abs(E.values)) <= 1e-10
    # with lam < Lam the zero-energy identity holds on the tail, where the tail slope is active
    for b, om in omegas.items():
        E = energy_series(om.profile, EnergyKind.E_Vinf(), params(1, 2, b), V, ls2)
        tail = np.abs(om.x) > om.y1 + 0.01
        assert np.max(np.abs(E.values[tail])) <= 1e-9


def test_energy_V_matches_Vinf_for_constant(ls2, omegas):
    V = Potential.constant(1.0)
    om = omegas["plus"].profile
    a = energy_series(om, EnergyKind.E_V(), params(1, 2), V, ls2).values
    b = energy_series(om, EnergyKind.E_Vinf(), params(1, 2), V, ls2).values
    np.testing.assert_array_equal(a, b)


def test_hpm_equal_at_y_and_z(ls2, omegas):
    V = Potential.constant(1.0)
    for b, om in omegas.items():
        y, z = inflection_points(om.profile, V, ls2.f)
        H = energy_series(om.profile, EnergyKind.H_pm(), params(1, 2, b), V, ls2, z=z)
        k = int(np.argmin(np.abs(om.x - z)))
        j = int(np.argmin(np.abs(om.x - y)))
        assert H.values[k] == pytest.approx(H.values[j], abs=1e-9)


def test_inflection_points_on_omega(ls2, omegas):
    V = Potential.constant(1.0)
    for om in omegas.values():
        y, z = inflection_points(om.profile, V, ls2.f)
        assert z == pytest.approx(om.y1, abs=1e-9) and y == pytest.approx(-om.y1, abs=1e-9)
    sech = build_omega(params(1, 1), ls2)
    y, z = inflection_points(sech.profile, V, ls2.f)
    assert z == pytest.approx(Y1_SECH2, abs=1e-9)


def test_inflection_points_asymmetric_for_impostor(ls2, sigmoid, impostor):
    y, z = inflection_points(impostor, sigmoid, ls2.f)
    xm = impostor.argmax()
    assert abs((y - xm) + (z - xm)) > 1e-3


def test_inflection_not_found(ls2):
    v = np.full(21, 3.0)
    v[0] = v[-1] = 0.0
    v[10] = 3.5
    with pytest.raises(NotFoundError):
        inflection_points(Profile(10.0, 1.0, v), Potential.constant(1.0), ls2.f)


def test_certificate_equality_baseline(ls2, omegas):
    V = Potential.constant(1.0)
    for b, om in omegas.items():
        cert = nonexistence_certificate(om.profile, V, params(1, 2, b), ls2)
        assert cert.verdict is Verdict.CONSISTENT and cert.broken_link is None
        assert all(abs(e.value) <= 1e-6 for e in cert.chain)
        assert abs(sum(e.value for e in cert.chain)) <= 1e-12


def test_certificate_fires_on_impostor(ls2, sigmoid, impostor):
    land = ScalarLandscape.build(ls2.f, sigmoid.Vinf)
    cert = nonexistence_certificate(impostor, sigmoid, params(1, 2), land)
    assert cert.verdict is Verdict.STRICT_VIOLATION
    assert cert.broken_link in [e.label for e in cert.chain]
    assert "fails" in cert.narrative


def test_certificate_reflection_exact(ls2, sigmoid, impostor):
    land = ScalarLandscape.build(ls2.f, sigmoid.Vinf)
    a = nonexistence_certificate(impostor, sigmoid, params(1, 2), land)
    b = nonexistence_certificate(impostor.reflected(), reflect(sigmoid), params(1, 2), land)
    assert b.meta["reflected"] and a.to_dict() == b.to_dict()


def test_certificate_refuses_non_monotone(ls2, omegas, well):
    with pytest.raises(NotApplicableError):
        nonexistence_certificate(omegas["plus"].profile, well, params(1, 2), ls2)
    two = Profile.from_function(lambda x: np.exp(-(x - 3) ** 2) + np.exp(-(x + 3) ** 2), 10.0, 0.01)
    with pytest.raises(NotApplicableError):
        nonexistence_certificate(two, Potential.constant(1.0), params(1, 2), ls2)


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(1e-6, 1e-2), st.booleans()), min_size=1, max_size=5))
def test_verdict_iff_some_link_violated(rows):
    chain = [ChainEntry(f"l{i}", v, t, "==0" if eq else ">=0") for i, (v, t, eq) in enumerate(rows)]
    cert = Certificate(chain)
    bad = any((abs(v) > t) if eq else (v < -t) for v, t, eq in rows)
    assert (cert.verdict is Verdict.STRICT_VIOLATION) == bad


def test_certificate_json_shape(ls2, omegas):
    cert = nonexistence_certificate(omegas["plus"].profile, Potential.constant(1.0), params(1, 2), ls2)
    d = json.loads(cert.to_json())
    assert set(d) == {"chain", "verdict", "broken_link"}
    assert all({"label", "value", "tol"} <= set(e) for e in d["chain"])


def _single(profile):
    return Branch([BranchEntry(0.0, profile, 0.0, profile.sup(), 0.0, True)], 0.3)


def test_prop_checks_constant_equality(ls2, omegas):
    V = Potential.constant(1.0)
    rep = prop29_diagnostics(_single(omegas["plus"].profile), V, params(1, 2), ls2)
    assert rep["ok"]
    r = rep["entries"][0]
    assert max(abs(r["step2"]), abs(r["step3"]), abs(r["step4"])) <= 1e-6


def test_prop_checks_well_branch(ls2, well):
    p = params(1, 2)
    L = 20.0
    op = DiscreteOperator(p, well, ls2.f, L, 1e-2, Bump(0.1))
    init = resample(build_omega(p, ls2, L=30, h=1e-2).profile, L, 1e-2)
    br = continuation(op, [1.0, 0.5, 0.0], init)
    rep = prop29_diagnostics(br, well, p, ls2, op.bump)
    assert rep["step3_ok"] and len(rep["entries"]) == 3
    # tails decay at sqrt(Vinf/Lambda), below the envelope rate
    assert rep["step6_ok"]
    assert rep["step6_rate"] == pytest.approx(math.sqrt(0.5 + 1.75 / 6.0))
    assert rep["worst_step6"] == pytest.approx(rep["step6_rate"] - math.sqrt(0.5), abs=1e-3)


def test_prop_checks_envelope_flags_fast_tail(ls2, well):
    p = params(1, 2)
    u = resample(build_omega(p, ls2, L=30, h=1e-2).profile, 20.0, 1e-2)
    steep = u.with_values(u.values ** 1.5)
    rep = prop29_diagnostics(_single(steep), well, p, ls2)
    assert rep["step6_ok"] is False and not rep["ok"]


def test_prop_checks_envelope_skipped_without_xi0(ls2, omegas):
    rep = prop29_diagnostics(_single(omegas["plus"].profile), Potential.constant(1.0),
                             params(1, 2), ls2)
    assert rep["step6_ok"] is None and rep["entries"][0]["step6"] is None


def test_prop_checks_negative_control(ls2, omegas):
    # warp the ground state so its maximum sits at +5 with fixed endpoints
    om = omegas["plus"].profile
    x, L = om.x, om.L
    src = np.where(x <= 5.0, (x + L) * L / (L + 5.0) - L, (x - 5.0) * L / (L - 5.0))
    warped = om.with_values(np.interp(src, x, om.values))
    assert warped.argmax() == pytest.approx(5.0, abs=om.h)
    rep = prop29_diagnostics(_single(warped), Potential.constant(1.0), params(1, 2), ls2)
    assert not rep["ok"]
    assert not (rep["step2_ok"] and rep["step3_ok"])


def test_well_solution_structure(ls2, well):
    p = params(1, 2)
    L = 20.0
    op = DiscreteOperator(p, well, ls2.f, L, 1e-2)
    init = resample(build_omega(p, ls2, L=30, h=1e-2).profile, L, 1e-2)
    sol = solve_full(op, 0.0, init)
    u = sol.profile
    assert single_max_check(u)[0]
    c1, c2 = decay_fit(u)
    eta1 = eta1_select(p, well.V0, c2, ls2.f.eta0)
    assert np.isfinite(xnorm(u, eta1)) and c2 >= eta1
