import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paralayer import geometry, potentials
from paralayer.potentials import PotentialError

from conftest import invert_x2

A = 0.3


def test_jacobian_trivial(ref_curv, flat_curv):
    m = potentials.jacobian(np.array([0.5, 3.0]), 0.0, ref_curv)
    assert np.all(m.J == 1) and np.all(m.g == 1)
    m = potentials.jacobian(np.linspace(0.1, 50, 20), 0.25, flat_curv)
    assert np.all(m.J == 1)


def test_jacobian_bisection_oracle(ref_curv):
    x = invert_x2(1.0)
    gamma1 = 2 / (1 + 4 * x * x) ** 1.5
    J = potentials.jacobian(1.0, 0.1, ref_curv).J
    assert float(J) == pytest.approx(1 - 0.1 * gamma1, rel=1e-12)


def test_jacobian_rejects_fold(ref_curv):
    with pytest.raises(PotentialError):
        potentials.jacobian(0.0, 0.6, ref_curv)


def test_flat_profile_potentials(flat_curv):
    s = np.linspace(0.5, 100, 50)
    assert np.allclose(potentials.potential_full(s, 0.1, 0, flat_curv), -0.25 / s**2)
    assert np.allclose(potentials.potential_full(s, -0.2, 1, flat_curv), 0.75 / s**2)
    assert np.allclose(potentials.potential_full(s, 0.0, -1, flat_curv), 0.75 / s**2)
    xi0, _ = geometry.xi_zeta(flat_curv, A, 0.0)
    assert np.allclose(potentials.potential_U_m(s, 1, A, flat_curv), 0.75 / ((1 + xi0) ** 2 * s**2))


def test_full_potential_axis_and_tail(ref_curv):
    assert potentials.potential_full(0.0, 0.1, 0, ref_curv) == -math.inf
    assert potentials.potential_full(0.0, 0.1, 2, ref_curv) == math.inf
    s = 1e4
    assert s * float(potentials.potential_full(s, 0.0, 0, ref_curv)) == pytest.approx(-0.25, rel=0.03)


def test_full_potential_direct_formula(ref_curv, ref_profile):
    s, u, m = 2.0, 0.15, 0
    loc = ref_curv.local(np.array([s]))
    phi, dphi = loc.phi[0], loc.dphi[0]
    f1, f2, f3 = (float(ref_profile.deriv(phi, j)) for j in (1, 2, 3))
    ddphi = -f1 * f2 / (1 + f1**2) ** 2
    gam = f2 * dphi**3
    dgam = 3 * dphi**2 * ddphi * f2 + dphi**4 * f3
    g = (1 - u * gam) ** 2
    expected = (u * loc.ddgamma[0] / (2 * g**1.5) - gam**2 / (4 * g) - 1.25 * u * u * dgam**2 / g**2
                - 0.25 / (phi - u * f1 * dphi) ** 2)
    assert float(potentials.potential_full(s, u, m, ref_curv)) == pytest.approx(expected, rel=1e-10)


def test_half_width_too_large(ref_curv):
    with pytest.raises(PotentialError):
        potentials.potential_W(1.0, 0.0, 2.0, ref_curv)
    with pytest.raises(PotentialError):
        potentials.potential_q("Bound5", 1.0, 0.0, 2.0, ref_curv)
    with pytest.raises(PotentialError):
        potentials.potential_q("Lower6", -1.0, 0.0, A, ref_curv)


@pytest.mark.parametrize("p", [0.0, 1.0, 5.0, 20.0])
def test_sandwich_random(ref_curv, p):
    rng = np.random.default_rng(12)
    s = p + 1e-3 + rng.exponential(15.0, 1000)
    u = rng.uniform(-A, A, 1000)
    V = potentials.potential_full(s, u, 0, ref_curv)
    assert np.all(potentials.potential_U_upper(s, p, A, ref_curv) <= V)
    assert np.all(V <= potentials.potential_W(s, p, A, ref_curv))
    xi, _ = geometry.xi_zeta(ref_curv, A, p)
    g = potentials.jacobian(s, u, ref_curv).g
    assert np.all(((1 - xi) ** 2 <= g) & (g <= (1 + xi) ** 2))


@settings(max_examples=60, deadline=None)
@given(s=st.floats(0.01, 500.0), frac=st.floats(-0.999, 0.999), p=st.sampled_from([0.0, 2.0, 10.0]))
def test_sandwich_property(ref_curv, s, frac, p):
    s = s + p
    u = frac * A
    V = float(potentials.potential_full(s, u, 0, ref_curv))
    assert float(potentials.potential_U_upper(s, p, A, ref_curv)) <= V <= float(potentials.potential_W(s, p, A, ref_curv))


def test_small_a_limits(ref_curv):
    s = np.linspace(0.5, 40, 30)
    loc = ref_curv.local(s)
    a = 1e-10
    assert np.allclose(potentials.potential_W(s, 0.0, a, ref_curv), -0.25 / loc.phi**2, rtol=1e-8)
    assert np.allclose(potentials.potential_U_upper(s, 0.0, a, ref_curv), -loc.gamma**2 / 4 - 0.25 / loc.phi**2, rtol=1e-8)


@pytest.mark.parametrize("variant,sign", [("Lower6", -1), ("Upper6", 1)])
def test_q_tail_constants(ref_curv, variant, sign):
    p = 20.0
    _, zeta = geometry.xi_zeta(ref_curv, A, p)
    c = 0.25 * zeta if variant == "Lower6" else 0.25 / zeta
    t = 1.5e4
    assert t * float(potentials.potential_q(variant, t, p, A, ref_curv)) == pytest.approx(-c, rel=0.01)
    assert potentials.tail_constant(variant, p, A, ref_curv) == (1.0, pytest.approx(c))
    tt = np.geomspace(1.9e3, 1.9e4, 40)
    slope = np.polyfit(np.log(tt), np.log(np.abs(potentials.potential_q(variant, tt, p, A, ref_curv))), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.02)


def test_q_bounded_and_bound5_decay(ref_curv):
    t = np.concatenate([[0.0], np.geomspace(1e-4, 1.9e4, 4000)])
    for v in ("Bound5", "Lower6", "Upper6"):
        assert np.all(np.isfinite(potentials.potential_q(v, t, 20.0, A, ref_curv)))
    q = potentials.potential_q("Bound5", t, 0.0, A, ref_curv)
    C = np.max(np.abs(q) * (1 + t) ** 2)
    assert np.isfinite(C)
    assert abs(t[-1] ** 2 * q[-1]) < 1e-2 * C


def test_q_variant_parse():
    assert potentials.Variant.parse("lower6") is potentials.Variant.LOWER6
    with pytest.raises(PotentialError):
        potentials.Variant.parse("nope")


def test_U_m_positive_mode(ref_curv):
    M = potentials.smallest_positive_mode(A, ref_curv, s=np.linspace(0, 200, 4001))
    assert M is not None and M <= 10
    s = np.linspace(0, 200, 401)
    assert np.all(potentials.potential_U_m_bracket(s, 50, A, ref_curv) > 0)
    assert np.any(potentials.potential_U_m_bracket(s, M - 1, A, ref_curv) <= 0)


def test_robin_coefficient(ref_curv, ref_profile, flat_curv):
    assert float(potentials.robin_coefficient(5.0, 0.0, ref_curv)) == 0.0
    assert np.all(potentials.robin_coefficient(5.0, np.array([-0.2, 0.2]), flat_curv) == 0)
    loc = ref_curv.local(np.array([5.0]))
    phi, dphi = loc.phi[0], loc.dphi[0]
    f1, f2, f3 = (float(ref_profile.deriv(phi, j)) for j in (1, 2, 3))
    ddphi = -f1 * f2 / (1 + f1**2) ** 2
    dgam = 3 * dphi**2 * ddphi * f2 + dphi**4 * f3
    J = 1 - 0.2 * f2 * dphi**3
    assert float(potentials.robin_coefficient(5.0, 0.2, ref_curv)) == pytest.approx(dgam * 0.1 / J**3, rel=1e-10)
    u = np.linspace(-A, A, 41)
    assert np.all(potentials.robin_coefficient(5.0, u, ref_curv) >= potentials.robin_bound(5.0, A, ref_curv))
    assert potentials.robin_sigma_1d(5.0, A, ref_curv) < 0


def test_trace_csv(tmp_path, ref_curv):
    path = tmp_path / "trace.csv"
    potentials.write_trace_csv(path, np.linspace(20, 40, 11), 0.1, 0, 20.0, A, ref_curv)
    rows = path.read_text().splitlines()
    assert rows[0] == "s,u,V_m,W_p,U_p,q_Lower6" and len(rows) == 12
