import numpy as np
import pytest
from hypothesis import given, strategies as st
from sympy import Rational
from sympy.physics.wigner import wigner_3j as sym3j, wigner_6j as sym6j

from dualrail_gem.atoms import EXCITED_SPLITTING_MHZ
from dualrail_gem.exceptions import ResonanceError, ZeroCouplingError
from dualrail_gem.polarisation import (H, L, R, V, PolarisationState, coherence_couplings, coupled_mode,
                                       effective_couplings, ellipse_axes, neglected_lambda_od_ratio, overlap,
                                       projection)

I = Rational(3, 2)
J = Rational(1, 2)


def sym_dipole(F, m, Fp, mp):
    """Independent D1 dipole amplitude from sympy symbols."""
    red = float((-1) ** (Fp + J + 1 + I)) * np.sqrt(float((2 * Fp + 1) * (2 * J + 1))) * float(sym6j(J, J, 1, Fp, F, I))
    return red * (-1) ** (Fp - 1 + m) * np.sqrt(2 * F + 1) * float(sym3j(Fp, 1, F, mp, m - mp, -m))


def oracle_couplings(m, control, delta):
    c = control.normalized()
    out = []
    for q, om in ((-1, c.a_L), (1, c.a_R)):
        tot = 0j
        for Fp, d in ((2, delta), (1, delta + EXCITED_SPLITTING_MHZ)):
            if abs(m + q) <= Fp:
                tot += om * sym_dipole(1, m, Fp, m + q) * sym_dipole(2, m, Fp, m + q) / d
        out.append(complex(tot))
    return out


complex_amp = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
states = st.tuples(complex_amp, complex_amp).filter(lambda t: abs(t[0]) + abs(t[1]) > 1e-3).map(
    lambda t: PolarisationState(*t))


@pytest.mark.parametrize("delta", [-500.0, 50.0, 200.0, 2000.0])
@pytest.mark.parametrize("m", [-1, 0, 1])
def test_couplings_match_symbol_oracle(m, delta):
    for ctrl in (H, V, L, R):
        got = coherence_couplings(m, ctrl, delta)
        np.testing.assert_allclose(got, oracle_couplings(m, ctrl, delta), rtol=1e-12, atol=1e-18)


def test_rail_modes_at_200_mhz():
    p1, p2 = effective_couplings(1, V, 200.0), effective_couplings(2, V, 200.0)
    np.testing.assert_allclose(p1.normalized(), (0.51, 0.86), atol=0.01)
    np.testing.assert_allclose(p2.normalized(), (0.86, 0.51), atol=0.01)
    m1, m2 = coupled_mode(p1)[0], coupled_mode(p2)[0]
    assert overlap(m1, m2) == pytest.approx(0.88, abs=0.01)
    assert projection(H, m1) == pytest.approx(0.94, abs=0.01)
    np.testing.assert_allclose(ellipse_axes(m1), (0.97, 0.24), atol=0.01)


@pytest.mark.parametrize("delta", [100.0, 200.0, 600.0, 10_000.0])
def test_coupling_ratio_closed_form(delta):
    # |g-|/|g+| = (1 + Delta/(Delta + 816.7)) / 2 for a linear control
    p = effective_couplings(1, V, delta)
    expect = (1 + delta / (delta + EXCITED_SPLITTING_MHZ)) / 2
    assert abs(p.g_minus) / abs(p.g_plus) == pytest.approx(expect, rel=1e-12)


def test_far_detuned_rails_become_balanced():
    near = effective_couplings(1, V, 200.0).normalized()
    far = effective_couplings(1, V, 10_000.0).normalized()
    assert abs(far[0] - far[1]) < abs(near[0] - near[1])
    assert overlap(coupled_mode(effective_couplings(1, V, 10_000.0))[0],
                   coupled_mode(effective_couplings(2, V, 10_000.0))[0]) > 0.99


def test_rails_are_mirror_images():
    for d in (150.0, 200.0, 900.0):
        m1 = coupled_mode(effective_couplings(1, V, d))[0]
        m2 = coupled_mode(effective_couplings(2, V, d))[0]
        assert overlap(m1.mirrored(), m2) == pytest.approx(1.0, abs=1e-12)


def test_pythagorean_case():
    p = PolarisationState(3.0, 4.0).normalized()
    assert (abs(p.a_L), abs(p.a_R)) == pytest.approx((0.6, 0.8))
    assert ellipse_axes(p) == pytest.approx((1.4 / np.sqrt(2), 0.2 / np.sqrt(2)))


def test_ellipse_of_basis_states():
    assert ellipse_axes(H) == pytest.approx((1.0, 0.0))
    assert ellipse_axes(L) == pytest.approx((1 / np.sqrt(2), 1 / np.sqrt(2)))


def test_linear_labels():
    assert H.to_linear() == pytest.approx((1.0, 0.0))
    assert V.to_linear() == pytest.approx((0.0, 1.0))
    assert overlap(H, V) == pytest.approx(0.0, abs=1e-15)
    assert overlap(PolarisationState.from_label("D"), PolarisationState.from_label("A")) == pytest.approx(0, abs=1e-15)
    with pytest.raises(ValueError):
        PolarisationState.from_label("X")


@given(states, states)
def test_overlap_properties(a, b):
    o = overlap(a, b)
    assert -1e-12 <= o <= 1 + 1e-12
    assert o == pytest.approx(overlap(b, a), abs=1e-12)
    assert overlap(a, a) == pytest.approx(1.0, abs=1e-12)


@given(states, states)
def test_projection_complement(p_in, mode):
    total = projection(p_in, mode) + projection(p_in, mode.orthogonal())
    assert total == pytest.approx(1.0, abs=1e-10)


def test_zero_state_rejected():
    with pytest.raises(ZeroCouplingError):
        PolarisationState(0, 0).normalized()


def test_resonance_guard():
    with pytest.raises(ResonanceError):
        effective_couplings(1, V, 0.2)
    with pytest.raises(ResonanceError):
        effective_couplings(1, V, -816.7)


@pytest.mark.parametrize("delta", [200.0, 2000.0])
def test_neglected_path_ratio_hand_sum(delta):
    # g_cp^2 = 1/2 [(1/48)(1/D + 1/D')^2 + (1/12)/D^2], |g_neg|^2 = 1/2 (1/4)(1/6)/D^2
    dp = delta + EXCITED_SPLITTING_MHZ
    retained = 0.5 * ((1 / 48) * (1 / delta + 1 / dp) ** 2 + (1 / 12) / delta ** 2)
    neglected = 0.5 * (1 / 24) / delta ** 2
    assert neglected_lambda_od_ratio(delta) == pytest.approx(retained / neglected, rel=1e-12)
    assert neglected_lambda_od_ratio(delta, rail=2) == pytest.approx(retained / neglected, rel=1e-12)
