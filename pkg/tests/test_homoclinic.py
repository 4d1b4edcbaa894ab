import json

import numpy as np
import pytest

from pucci1d.homoclinic import (AlphaClass, DomainTooSmallError, EquilibriumError, build_omega,
                                classify_alpha, integrate_ivp, uniqueness_probe)
from pucci1d.model import Profile
from pucci1d.scalar import matching_levels, pucci_eval

from conftest import params

Y1_SECH2 = 1.3169578969248164  # 2 arccosh(sqrt(3/2)): sech^2(y/2) = 2/3
S2 = 1.3660254037844386
S1_MINUS = 1.6776506988040616


def soliton(x):
    return 1.5 / np.cosh(x / 2) ** 2


def test_ivp_reproduces_soliton(ls2):
    # forward integration of a homoclinic amplifies any error like exp(x), so
    # the 1e-8 match holds up to x = 17 at this step
    tr = integrate_ivp(ls2, 1.0, 1.5, 17.0, h=1e-3)
    assert np.max(np.abs(tr.u - soliton(tr.x))) <= 1e-8
    assert tr.x[0] == 0 and tr.u[0] == 1.5 and tr.up[0] == 0


def test_equilibrium_stays_put(ls2):
    tr = integrate_ivp(ls2, 1.0, 1.0, 5.0, h=1e-2)
    np.testing.assert_allclose(tr.u, 1.0, atol=1e-14)
    assert tr.events == []


def test_crossing_hits_zero(ls2):
    tr = integrate_ivp(ls2, 1.0, 2.0, 50.0)
    loc = tr.first_event("hits_zero")
    assert loc is not None and loc < 50
    assert tr.x[-1] == pytest.approx(loc)
    assert abs(tr.u[-1]) < 1e-10


def test_events_located_precisely(ls2):
    tr = integrate_ivp(ls2, 1.0, 1.5, 5.0, h=1e-3)
    assert tr.first_event("hits_s_inf") == pytest.approx(Y1_SECH2, abs=1e-10)


@pytest.mark.parametrize("alpha,expected", [(1.6, AlphaClass.CROSSING), (1.2, AlphaClass.PERIODIC),
                                            (1.5, AlphaClass.HOMOCLINIC)])
def test_classify(ls2, alpha, expected):
    assert classify_alpha(ls2, 1.0, alpha) is expected


def test_classify_equilibrium(ls2):
    with pytest.raises(EquilibriumError):
        classify_alpha(ls2, 1.0, 1.0)


def test_energy_conserved_fourth_order(ls2):
    drift = []
    for h in (0.1, 0.05):
        E = integrate_ivp(ls2, 2.0, S2, 8.0, h=h).energy(ls2)
        drift.append(np.ptp(E))
    assert drift[0] / drift[1] >= 14


@pytest.mark.parametrize("mu", [1.0, 2.0])
def test_zero_energy_homoclinic(ls2, mu):
    tr = integrate_ivp(ls2, mu, ls2.alpha0, 15.0)
    assert np.max(np.abs(tr.energy(ls2))) <= 1e-12


def test_soliton_omega(ls2):
    om = build_omega(params(1, 1), ls2, L=20, h=1e-3)
    assert om.max_value == pytest.approx(1.5, abs=1e-15)
    assert om.y1 == pytest.approx(Y1_SECH2, abs=1e-10)
    assert np.max(np.abs(om.values - soliton(om.x))) <= 1e-6


def test_pucci_omegas(ls2):
    plus = build_omega(params(1, 2, "plus"), ls2)
    minus = build_omega(params(1, 2, "minus"), ls2)
    assert plus.values[plus.profile.n] == pytest.approx(S2, abs=1e-12)
    assert minus.values[minus.profile.n] == pytest.approx(S1_MINUS, abs=1e-12)
    assert plus.c2 == pytest.approx(np.sqrt(0.5), rel=0.02)
    assert minus.c2 == pytest.approx(1.0, rel=0.02)
    assert minus.max_value >= ls2.alpha0 >= plus.max_value


@pytest.mark.parametrize("branch", ["plus", "minus"])
def test_omega_invariants(ls2, branch):
    p = params(1, 2, branch)
    om = build_omega(p, ls2, L=30, h=1e-3)
    v, x = om.values, om.x
    np.testing.assert_array_equal(v, v[::-1])
    assert int(np.argmax(v)) == om.profile.n
    inner = np.abs(x) < om.y1 - 1e-9
    assert np.all(om.upp[inner] < 0) and np.all(om.upp[~inner & (np.abs(x) > om.y1)] > 0)
    assert om.z == om.y1
    g = om.glue
    assert g["u_core"] == pytest.approx(ls2.s_inf, abs=1e-12) and g["u_tail"] == pytest.approx(ls2.s_inf, abs=1e-12)
    assert max(g["dup"], g["dupp"]) <= 1e-6
    # residual of the grid equation, away from the two kink nodes
    d2 = om.profile.second_derivative()
    res = -np.asarray(pucci_eval(p, d2)) + v - np.asarray(ls2.f.f(v))
    mask = (np.abs(np.abs(x) - om.y1) > 2 * om.profile.h)
    assert np.max(np.abs(res[1:-1][mask[1:-1]])) <= 10 * om.profile.h ** 2


def test_degenerate_glue_reproduces_single_operator(ls2):
    a = build_omega(params(1, 1, "plus"), ls2, L=20, h=1e-2)
    b = build_omega(params(1, 1, "minus"), ls2, L=20, h=1e-2)
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)


def test_domain_too_small(ls2):
    with pytest.raises(DomainTooSmallError):
        build_omega(params(1, 2), ls2, L=5, h=1e-2)


def test_omega_export(tmp_path, ls2):
    om = build_omega(params(1, 2), ls2, L=20, h=1e-2)
    om.export(tmp_path / "omega_plus")
    side = json.loads((tmp_path / "omega_plus.json").read_text())
    assert side["max"] == pytest.approx(S2) and side["y1"] == side["z"]
    assert set(side["matching_levels"]) == {"s1", "s2", "s1_minus"}
    header = (tmp_path / "omega_plus.csv").read_text().splitlines()[0]
    assert header == "x,u,up,upp"
    p = Profile.from_csv(tmp_path / "omega_plus.csv")
    np.testing.assert_array_equal(p.values, om.values)


def test_matching_levels_agree_with_brute_force_energy(ls2):
    # a core released at the matching level reaches s_inf with the slope of the
    # opposite zero-energy homoclinic there: mu_tail u'^2 = -2 G_inf(s_inf)
    p = params(1, 2)
    _, s2, s1m = matching_levels(p, ls2)
    for mu_core, mu_tail, amp in ((p.lam, p.Lam, s2), (p.Lam, p.lam, s1m)):
        core = integrate_ivp(ls2, mu_core, amp, 5.0, h=1e-4)
        k = int(np.argmin(np.abs(core.u - ls2.s_inf)))
        assert core.up[k] ** 2 == pytest.approx(-2 * ls2.G_min / mu_tail, rel=1e-3)


@pytest.mark.parametrize("lam,Lam,branch", [(1, 1, "plus"), (1, 2, "plus"), (1, 2, "minus")])
def test_uniqueness_probe(ls2, lam, Lam, branch):
    om = build_omega(params(lam, Lam, branch), ls2)
    for z in (0.0, om.y1):
        r = uniqueness_probe(om, z)
        assert r.error <= 1e-7 and not r.low_signal
    far = uniqueness_probe(om, 25.0)
    assert far.error <= 1e-7 and far.low_signal
