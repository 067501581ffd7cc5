import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualrail_gem.atoms import MU_B_OVER_H
from dualrail_gem.exceptions import InstabilityError
from dualrail_gem.gem import (GemParams, GradientProgram, PulseEnvelope, RailState, absorption_spectrum,
                              coupling_strength, detuning_profile, energy_ledger, evolve, run_storage_recall)

DT = 0.05
FLIP = 40.0


def pulse(centre=15.0, fwhm=10.0, duration=90.0, dt=DT, amp=1.0):
    return PulseEnvelope.gaussian(fwhm, centre, duration, dt, amp)


def run(beta=0.2, gamma0=0.0, nz=256, dt=DT, slope=0.25, flip=FLIP, p=None):
    params = GemParams(beta=beta, gamma0=gamma0, nz=nz, dt=dt)
    return run_storage_recall(params, GradientProgram.flipped(slope, flip), p or pulse(dt=dt))


def test_detuning_profile_examples():
    z = np.linspace(0, 1, 11)
    np.testing.assert_array_equal(detuning_profile(GradientProgram(), z, 3.0), np.zeros(11))
    prog = GradientProgram.flipped(2.0, 10.0, bias=0.7)
    assert detuning_profile(prog, 0.5, 1.0) == pytest.approx(0.7)
    before, after = detuning_profile(prog, z, 5.0), detuning_profile(prog, z, 15.0)
    np.testing.assert_allclose(after, -(before - 0.7) + 0.7)
    np.testing.assert_allclose(np.diff(before), 0.2)


def test_beta_zero_passes_input_unchanged():
    p = pulse()
    prog = GradientProgram.flipped(0.25, FLIP)
    out = evolve(RailState.empty(64), GemParams(beta=0.0, nz=64), prog, p)
    np.testing.assert_allclose(out, p.samples, atol=1e-14)
    r = run(beta=0.0, nz=64, p=pulse(centre=10.0, fwhm=4.0))
    led = energy_ledger(r)
    assert led["echo"] == pytest.approx(0.0, abs=1e-15)
    assert led["transmitted"] == pytest.approx(1.0, abs=1e-12)


def test_zero_input_gives_zero():
    state = RailState.empty(64)
    z = PulseEnvelope(np.zeros(400, complex), DT)
    out = evolve(state, GemParams(beta=0.3, nz=64), GradientProgram.flipped(0.25, 10.0), z)
    assert not out.any() and not state.sigma.any()


def test_narrowband_transmission_against_fine_grid_oracle():
    beta = 0.3
    wide = PulseEnvelope.gaussian(20, 60, 120, 0.025)
    fine = PulseEnvelope.gaussian(20, 60, 120, 0.025 / 4)
    coarse = run(beta, nz=512, dt=0.025, slope=1.0, flip=None, p=wide).energies["transmitted"]
    oracle = run(beta, nz=2048, dt=0.025 / 4, slope=1.0, flip=None, p=fine).energies["transmitted"]
    assert coarse == pytest.approx(oracle, rel=0.02)
    assert coarse == pytest.approx(np.exp(-2 * np.pi * beta), rel=0.02)


def test_echo_centroid_at_rephasing_time():
    r = run(0.2)
    expect = 2 * FLIP - r.input_centroid()
    assert abs(r.echo_centroid() - expect) <= 10 * DT / 2
    peak = r.times[np.argmax(np.abs(r.echo))]
    assert abs(peak - (2 * FLIP - 15.0)) <= 0.05 * 10.0


def test_efficiency_strictly_increases_with_beta():
    eff = [run(b).efficiency for b in (0.05, 0.1, 0.2, 0.4, 0.8)]
    assert np.all(np.diff(eff) > 0)


@pytest.mark.parametrize("beta", [0.05, 0.3, 1.0])
def test_ledger_closes_without_decay(beta):
    led = energy_ledger(run(beta), strict=True)
    assert abs(led["closure"]) < 1e-3


def test_decay_accounts_for_missing_energy():
    r0, r1 = run(0.3), run(0.3, gamma0=0.02)
    led = energy_ledger(r1)
    assert led["decayed"] > 0
    assert led["input"] - (led["transmitted"] + led["echo"] + led["residual"]) == pytest.approx(led["decayed"], abs=1e-3)
    assert r1.efficiency < r0.efficiency


@settings(max_examples=5)
@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_linearity(c):
    p = pulse(duration=60.0)
    base = run(0.2, nz=64, p=p)
    scaled = run(0.2, nz=64, p=p.scaled(c))
    np.testing.assert_allclose(scaled.output, c * base.output, rtol=1e-10, atol=1e-12)


def test_grid_convergence_at_operating_point():
    coarse = run(0.164, nz=256, dt=0.05).efficiency
    fine = run(0.164, nz=512, dt=0.025, p=pulse(dt=0.025)).efficiency
    assert abs(fine - coarse) / fine < 0.005


def test_echo_is_time_reversed_input():
    t = np.arange(0, 90, DT)
    x = np.exp(-2 * np.log(2) * ((t - 12) / 6) ** 2) + 0.5 * np.exp(-2 * np.log(2) * ((t - 20) / 6) ** 2)
    r = run(0.4, p=PulseEnvelope(x, DT))
    e = np.abs(r.echo)
    rev = np.interp(2 * FLIP - t, t, x, left=0, right=0)
    corr = np.sum(e * rev) / np.sqrt(np.sum(e ** 2) * np.sum(rev ** 2))
    assert corr > 0.99


def test_stability_bound_enforced():
    with pytest.raises(InstabilityError):
        run(0.2, nz=32, dt=0.5, slope=5.0, p=pulse(dt=0.5))


def test_parameter_validation():
    for kw in (dict(beta=-1), dict(gamma0=-0.1), dict(nz=4), dict(dt=0)):
        with pytest.raises(ValueError):
            GemParams(**kw)
    with pytest.raises(ValueError):
        coupling_strength(GemParams(beta=0.2), GradientProgram())


# -- spectrum --------------------------------------------------------------

def slice_sum_od(B0, span, params, f, linewidth, n=4000):
    """Brute-force sum of Lorentzian slices along z for each line."""
    gamma = params.gamma0 + 2 * np.pi * linewidth
    G = 2 * np.pi * params.beta * (span if span else 1.0)
    z = (np.arange(n) + 0.5) / n
    od = np.zeros_like(f)
    for centre, sensitive in ((-MU_B_OVER_H * B0, True), (0.0, False), (MU_B_OVER_H * B0, True)):
        det = 2 * np.pi * (centre + (span if sensitive else 0.0) * (z - 0.5))
        y = det[None, :] - 2 * np.pi * f[:, None]
        od += np.sum(2 * G * gamma / (gamma ** 2 + y ** 2), axis=1) / n
    return od


def dips(f, trans):
    i = np.where((trans[1:-1] < trans[:-2]) & (trans[1:-1] <= trans[2:]))[0] + 1
    return f[i]


def fwhm_of_od(f, od):
    above = f[od >= od.max() / 2]
    return above.max() - above.min()


def test_spectrum_degenerate_field_single_dip():
    f = np.linspace(-2, 2, 801)
    tr = absorption_spectrum(0.0, 0.0, GemParams(beta=0.2), f)
    np.testing.assert_allclose(dips(f, tr), [0.0], atol=1e-9)


def test_spectrum_three_lines_and_slice_oracle():
    B0 = 4.0 / MU_B_OVER_H
    f = np.linspace(-6, 6, 2401)
    params = GemParams(beta=0.2)
    narrow = absorption_spectrum(B0, 0.0, params, f)
    np.testing.assert_allclose(dips(f, narrow), [-4, 0, 4], atol=0.01)
    wide = absorption_spectrum(B0, 1.0, params, f)
    np.testing.assert_allclose(-np.log(wide), slice_sum_od(B0, 1.0, params, f, 0.05), rtol=1e-3, atol=1e-6)
    np.testing.assert_allclose(-np.log(narrow), slice_sum_od(B0, 0.0, params, f, 0.05), rtol=1e-3, atol=1e-6)
    side = f > 2
    centre = np.abs(f) < 2
    grow = fwhm_of_od(f[side], -np.log(wide[side])) - fwhm_of_od(f[side], -np.log(narrow[side]))
    assert grow == pytest.approx(1.0, abs=0.1)
    assert fwhm_of_od(f[centre], -np.log(wide[centre])) == pytest.approx(
        fwhm_of_od(f[centre], -np.log(narrow[centre])), abs=0.01)
