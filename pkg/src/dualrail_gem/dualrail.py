"""Simultaneous two-rail storage, beat analysis and phase-noise statistics.

Rail 1 is the m_F=+1 coherence at carrier ``+delta0`` and rail 2 the m_F=-1
coherence at ``-delta0``.  Each rail runs independently through
:mod:`dualrail_gem.gem` in its own carrier frame; the lab-frame output is the
vector field ``E1(t) P1 exp(-i 2 pi delta0 t) + E2(t) P2 exp(+i 2 pi delta0 t)``.

Relative phases are reported as rail 2 minus rail 1, in degrees wrapped to
(-180, 180].
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .atoms import MU_B_OVER_H, raman_line_positions
from .exceptions import ConfigError, DegenerateBeatError, GemError
from .gem import GemParams, GradientProgram, PulseEnvelope, RailState, iter_evolve, run_storage_recall
from .polarisation import H, R, V, coupled_mode, effective_couplings, overlap

__all__ = [
    "DualRailConfig",
    "NoiseModel",
    "BeatTrace",
    "EchoRecord",
    "rail_setup",
    "rail_program",
    "run_dual_rail",
    "simulate_rails",
    "efficiency",
    "predicted_visibility",
    "measured_visibility",
    "visibility",
    "relative_phase",
    "noise_phase",
    "closed_form_phase_std",
    "phase_noise_mc",
    "calibrate_beta",
    "calibrate_trim",
    "rail_efficiency",
    "circular_mode_asymmetry",
    "temporal_match",
    "offset_for_match",
    "gaussian_pair",
    "beat_from_fields",
    "wrap_degrees",
]


def wrap_degrees(x):
    """Wrap to (-180, 180]."""
    x = np.asarray(x, dtype=float)
    w = 180.0 - np.mod(180.0 - x, 360.0)
    return float(w) if w.ndim == 0 else w


def temporal_match(a, b, dt=1.0):
    """|<a|b>| / (|a| |b|) of two envelopes on a common clock."""
    a, b = np.asarray(a, complex), np.asarray(b, complex)
    na, nb = np.trapezoid(np.abs(a) ** 2, dx=dt), np.trapezoid(np.abs(b) ** 2, dx=dt)
    if na == 0 or nb == 0:
        return 0.0
    return float(abs(np.trapezoid(np.conj(a) * b, dx=dt)) / np.sqrt(na * nb))


def offset_for_match(match, fwhm):
    """Time offset giving overlap ``match`` between two equal Gaussians of intensity FWHM ``fwhm``."""
    if not 0 < match <= 1:
        raise ValueError("match must lie in (0, 1]")
    return float(fwhm * np.sqrt(-np.log(match) / np.log(2.0)))


@dataclass(frozen=True)
class NoiseModel:
    """Shot-to-shot magnetic noise acting on the stored coherences.

    sigma_B
        quasi-static Gaussian bias deviation per shot (G)
    mains_amp, mains_freq
        mains harmonic amplitude (G) and frequency (Hz)
    mains_triggered
        lock the harmonic phase to ``mains_phase`` instead of drawing it uniformly
    """

    sigma_B: float = 0.0
    mains_amp: float = 0.0
    mains_freq: float = 50.0
    mains_triggered: bool = False
    mains_phase: float = 0.0

    def __post_init__(self):
        if self.sigma_B < 0 or self.mains_amp < 0:
            raise ValueError("noise amplitudes must be >= 0")
        if self.mains_freq <= 0:
            raise ValueError("mains_freq must be > 0")


@dataclass(frozen=True)
class DualRailConfig:
    """Everything needed for one dual-rail storage and recall shot.

    ``beta`` is the mean rail strength; rail ``i`` runs with
    ``beta * trim[i] * g_i^2 / mean(g^2)`` (``g_i`` its coupled-mode strength),
    the trim standing in for the control-polarisation tuning used to balance
    rails.  ``balance_populations`` forces equal rail strengths.
    """

    B0: float = 0.25
    delta: float = 200.0
    beta: float = 0.16
    trim: tuple = (1.0, 1.0)
    gamma0: float = 0.0
    gradient: float = 0.25
    flip_time: float = 25.0
    pulses: tuple = None
    input_pol: object = H
    control_pol: object = V
    mode: str = "linear"
    balance_populations: bool = False
    nz: int = 256
    dt: float = 0.05

    def __post_init__(self):
        if self.mode not in ("linear", "circular"):
            raise ConfigError(f"mode must be 'linear' or 'circular', got {self.mode!r}")
        if self.B0 < 0:
            raise ConfigError("B0_gauss must be >= 0")
        if self.pulses is None:
            object.__setattr__(self, "pulses", gaussian_pair(self.B0, dt=self.dt))
        if len(self.pulses) != 2:
            raise ConfigError("exactly two rail pulses are required")
        d0 = self.delta0
        for i, (p, want) in enumerate(zip(self.pulses, (d0, -d0)), start=1):
            if not np.isclose(p.carrier, want, rtol=0, atol=1e-9):
                raise ConfigError(f"rail {i} carrier {p.carrier} MHz is not {want:+.6f} MHz (= +-delta0)")
            if not np.isclose(p.dt, self.dt):
                raise ConfigError(f"rail {i} pulse dt {p.dt} differs from grid dt {self.dt}")
        if self.pulses[0].samples.size != self.pulses[1].samples.size:
            raise ConfigError("rail pulses must share one clock")
        if self.mode == "circular":
            for name, pol in (("control", self.control_pol), ("input", self.input_pol)):
                p = pol.normalized()
                if abs(p.a_L) > 1e-12 and abs(p.a_R) > 1e-12:
                    raise ConfigError(f"circular mode needs a circular {name} polarisation")

    @property
    def delta0(self):
        return float(raman_line_positions(self.B0)[2])

    @property
    def times(self):
        return self.pulses[0].times

    @property
    def temporal_match(self):
        return temporal_match(self.pulses[0].samples, self.pulses[1].samples, self.dt)

    @property
    def storage_time(self):
        """Mean input-to-echo delay 2 (t_s - t_in) over the two rails (us)."""
        cents = []
        for p in self.pulses:
            w = np.abs(p.samples) ** 2
            if w.sum() > 0:
                cents.append(np.sum(p.times * w) / w.sum())
        t_in = float(np.mean(cents)) if cents else 0.0
        return 2.0 * (self.flip_time - t_in), t_in

    def gem_params(self, beta):
        return GemParams(beta=beta, gamma0=self.gamma0, nz=self.nz, dt=self.dt)


def gaussian_pair(B0, fwhm=10.0, centre=15.0, offset=0.0, amplitudes=(1.0, 1.0), duration=60.0, dt=0.05):
    """Two Gaussian rail pulses at carriers +-delta0, centres ``centre -+ offset/2``."""
    d0 = float(raman_line_positions(B0)[2])
    return (
        PulseEnvelope.gaussian(fwhm, centre - offset / 2, duration, dt, amplitudes[0], carrier=d0),
        PulseEnvelope.gaussian(fwhm, centre + offset / 2, duration, dt, amplitudes[1], carrier=-d0),
    )


def rail_setup(config):
    """Per-rail ``(coupled mode, g_cp, beta_i)`` for the configuration."""
    pairs = [effective_couplings(i, config.control_pol, config.delta) for i in (1, 2)]
    modes = [coupled_mode(p) for p in pairs]
    g2 = np.array([g ** 2 for _, g in modes])
    weights = np.ones(2) if config.balance_populations else g2 / g2.mean()
    return [(m[0], m[1], config.beta * config.trim[i] * weights[i]) for i, m in enumerate(modes)]


def rail_program(config, rail):
    """Gradient program of a rail: bias and gradient both flip sign with m_F."""
    s = 1.0 if rail == 1 else -1.0
    return GradientProgram.flipped(s * config.gradient, config.flip_time, bias=s * config.delta0)


def _rail_inputs(config):
    setup = rail_setup(config)
    out = []
    for i, (mode, _, beta) in enumerate(setup):
        amp = mode.inner(config.input_pol.normalized())  # <P_i|p_in>
        out.append((mode, beta, config.pulses[i].scaled(amp), amp))
    return out


def simulate_rails(config, interleaved=False):
    """Run both rails; return their z=L coupled-mode traces and run results.

    ``interleaved=True`` advances the two rails step by step in lock-step; the
    model has no cross-rail term so the traces agree with separate runs.
    """
    inputs = _rail_inputs(config)
    if not interleaved:
        return [run_storage_recall(config.gem_params(beta), rail_program(config, i + 1), pulse)
                for i, (_, beta, pulse, _) in enumerate(inputs)]
    states = [RailState.empty(config.nz) for _ in inputs]
    gens = [iter_evolve(states[i], config.gem_params(beta), rail_program(config, i + 1), pulse)
            for i, (_, beta, pulse, _) in enumerate(inputs)]
    n = config.times.size
    traces = np.empty((2, n), complex)
    for k in range(n):
        for r in range(2):
            traces[r, k] = next(gens[r])
    return traces


@dataclass
class BeatTrace:
    """Detected intensity and the window used for demodulation at 2 delta0."""

    times: np.ndarray
    intensity: np.ndarray
    beat_freq: float
    window: np.ndarray

    def demodulate(self):
        """Complex fringe amplitude and background over the window."""
        if self.beat_freq == 0:
            raise DegenerateBeatError("rails are degenerate (delta0 = 0): no beat to analyse")
        t = self.times[self.window]
        i = self.intensity[self.window]
        dt = self.times[1] - self.times[0]
        c = np.trapezoid(i * np.exp(-2j * np.pi * self.beat_freq * t), dx=dt)
        bg = np.trapezoid(i, dx=dt)
        return c, bg


def beat_from_fields(times, e1, e2, p1, p2, delta0, extra=None, window=None):
    """Intensity of ``e1 P1 e^{-i w t} + e2 P2 e^{+i w t}`` (+ optional extra vector field)."""
    rot = np.exp(-2j * np.pi * delta0 * times)
    vec = np.outer(e1 * rot, p1.vector) + np.outer(e2 * np.conj(rot), p2.vector)
    if extra is not None:
        vec = vec + extra
    intensity = np.sum(np.abs(vec) ** 2, axis=1)
    window = np.ones(times.size, bool) if window is None else window
    return BeatTrace(times, intensity, 2.0 * delta0, window)


def efficiency(input_trace, echo_trace, dt=1.0):
    """Echo energy over input energy."""
    e_in = np.trapezoid(np.abs(np.asarray(input_trace)) ** 2, dx=dt)
    if e_in == 0:
        raise ValueError("input trace carries no energy")
    return float(np.trapezoid(np.abs(np.asarray(echo_trace)) ** 2, dx=dt) / e_in)


def predicted_visibility(eta1, eta2, mode_overlap=1.0, match=1.0):
    """Fringe visibility limit 2 sqrt(eta1 eta2)/(eta1 + eta2) * overlap * match."""
    if eta1 + eta2 == 0:
        return 0.0
    return float(2.0 * np.sqrt(eta1 * eta2) / (eta1 + eta2) * mode_overlap * match)


def measured_visibility(beat):
    """(I_max - I_min)/(I_max + I_min) of the window-integrated fringe.

    Equivalent to ``2 |c| / background`` where ``c`` is the 2 delta0 Fourier
    component of the beat over the echo window.
    """
    c, bg = beat.demodulate()
    return 0.0 if bg == 0 else float(min(1.0, 2.0 * abs(c) / bg))


def visibility(beat=None, eta1=None, eta2=None, mode_overlap=1.0, match=1.0):
    """``{V_measured, V_predicted}`` for whichever inputs are supplied."""
    out = {}
    if beat is not None:
        out["V_measured"] = measured_visibility(beat)
    if eta1 is not None and eta2 is not None:
        out["V_predicted"] = predicted_visibility(eta1, eta2, mode_overlap, match)
    return out


def relative_phase(echo_beat, reference_beat, min_visibility=1e-3):
    """Echo beat phase minus reference beat phase, degrees in (-180, 180]."""
    out = []
    for name, beat in (("echo", echo_beat), ("reference", reference_beat)):
        c, bg = beat.demodulate()
        if bg == 0 or 2 * abs(c) / bg < min_visibility:
            raise DegenerateBeatError(f"{name} beat has no resolvable fringe")
        out.append(np.degrees(np.angle(c)))
    return wrap_degrees(out[0] - out[1])


def noise_phase(delta_B, mains_theta, noise, t_in, storage_time):
    """Differential rail phase (deg) from a field deviation during storage.

    Both coherences shift by ``+-(mu_B/h) dB``, so the rail-2 minus rail-1
    phase advances by ``360 * 2 (mu_B/h) int dB dt``.
    """
    integral = np.asarray(delta_B, float) * storage_time
    if noise.mains_amp:
        w = 2 * np.pi * noise.mains_freq * 1e-6  # rad/us
        t_out = t_in + storage_time
        theta = np.asarray(mains_theta, float)
        integral = integral + noise.mains_amp * (np.cos(w * t_in + theta) - np.cos(w * t_out + theta)) / w
    return 360.0 * 2.0 * MU_B_OVER_H * integral


def closed_form_phase_std(sigma_B, storage_time):
    """Std (deg) of the differential phase under quasi-static Gaussian field noise."""
    return 360.0 * 2.0 * MU_B_OVER_H * sigma_B * storage_time


def _draw_noise(noise, rng, size):
    dB = rng.normal(0.0, noise.sigma_B, size) if noise.sigma_B > 0 else np.zeros(size)
    theta = rng.uniform(0.0, 2 * np.pi, size)
    if noise.mains_triggered:
        theta = np.full(size, noise.mains_phase)
    return dB, theta


@dataclass
class EchoRecord:
    """Output of :func:`run_dual_rail`."""

    times: np.ndarray
    echoes: tuple
    modes: tuple
    beat: BeatTrace
    reference: BeatTrace
    metrics: dict
    rails: list = field(default_factory=list)

    def beat_rows(self):
        return np.column_stack([self.times, self.beat.intensity, self.reference.intensity])


def _assemble(config, results, inputs, phase_deg):
    times = config.times
    d0 = config.delta0
    echo_mask = times >= config.flip_time
    outs = []
    for r, res in enumerate(results):
        out = res.output.copy()
        half = np.exp(1j * np.radians(phase_deg) * (0.5 if r == 1 else -0.5))
        out[echo_mask] *= half
        outs.append(out)
    (m1, _, p1, a1), (m2, _, p2, a2) = inputs
    # unstored polarisation leaks straight through at input time
    p_in = config.input_pol.normalized()
    rot = np.exp(-2j * np.pi * d0 * times)
    leak = (np.outer(config.pulses[0].samples * rot, p_in.vector - a1 * m1.vector)
            + np.outer(config.pulses[1].samples * np.conj(rot), p_in.vector - a2 * m2.vector))
    beat = beat_from_fields(times, outs[0], outs[1], m1, m2, d0, extra=leak, window=echo_mask)
    ref = beat_from_fields(times, config.pulses[0].samples, config.pulses[1].samples, p_in, p_in, d0)
    return outs, beat, ref


def run_dual_rail(config, noise=None, seed=None, results=None):
    """Store both rails simultaneously and analyse the recalled beat.

    A single noise realisation (drawn from ``noise`` with ``seed``) is applied
    to the echo window as a differential rail phase.  ``results`` may carry
    precomputed noiseless rail runs to skip the integration.
    """
    noise = noise or NoiseModel()
    inputs = _rail_inputs(config)
    if results is None:
        results = simulate_rails(config)
    T, t_in = config.storage_time
    rng = np.random.default_rng(seed)
    dB, theta = _draw_noise(noise, rng, 1)
    phi = float(noise_phase(dB, theta, noise, t_in, T)[0])

    outs, beat, ref = _assemble(config, results, inputs, phi)
    e_in = [p.energy() for p in config.pulses]
    etas = [abs(a) ** 2 * res.efficiency if e else 0.0
            for (_, _, _, a), res, e in zip(inputs, results, e_in)]
    mode_overlap = overlap(inputs[0][0], inputs[1][0])
    match = config.temporal_match
    dt = config.dt
    echo_energy = float(np.trapezoid(beat.intensity[beat.window], dx=dt))
    metrics = dict(
        eta1=float(etas[0]),
        eta2=float(etas[1]),
        eta_combined=echo_energy / sum(e_in) if sum(e_in) else 0.0,
        mode_overlap=float(mode_overlap),
        temporal_match=float(match),
        V_measured=measured_visibility(beat),
        V_predicted=predicted_visibility(etas[0], etas[1], mode_overlap, match),
        noise_phase=phi,
        storage_time=T,
        delta0=config.delta0,
        beta=[float(b) for _, _, b in rail_setup(config)],
    )
    try:
        raw = relative_phase(beat, ref)
        _, beat0, _ = _assemble(config, results, inputs, 0.0)
        storage = relative_phase(beat0, ref)
        metrics.update(relative_phase_raw=raw, storage_phase=storage,
                       relative_phase=wrap_degrees(raw - storage))
    except DegenerateBeatError:
        metrics.update(relative_phase_raw=None, storage_phase=None, relative_phase=None)
    metrics["equatorial_fidelity_estimate"] = (1.0 + metrics["V_measured"]) / 2.0
    return EchoRecord(config.times, tuple(outs), (inputs[0][0], inputs[1][0]), beat, ref, metrics, list(results))


def phase_noise_mc(config, noise, trials=1000, seed=0, results=None):
    """Monte-Carlo distribution of the echo relative phase.

    The rail dynamics are noiseless and integrated once; each trial draws a
    noise realisation, applies it as a differential phase, and re-runs the
    beat phase estimator.  Samples are the relative phase minus the
    deterministic noiseless storage phase.  Draws happen in trial order from
    one seeded generator, so results depend only on ``seed``.
    """
    if trials < 100:
        raise ValueError("phase_noise_mc needs at least 100 trials")
    inputs = _rail_inputs(config)
    if results is None:
        results = simulate_rails(config)
    T, t_in = config.storage_time
    rng = np.random.default_rng(seed)
    dB, theta = _draw_noise(noise, rng, trials)
    phis = noise_phase(dB, theta, noise, t_in, T)
    _, beat0, ref = _assemble(config, results, inputs, 0.0)
    base = relative_phase(beat0, ref)
    raw = np.empty(trials)
    for k, phi in enumerate(phis):
        _, beat, _ = _assemble(config, results, inputs, phi)
        raw[k] = relative_phase(beat, ref)
    samples = wrap_degrees(raw - base)
    return dict(
        mean=float(np.mean(samples)),
        std=float(np.std(samples, ddof=1)),
        samples=samples,
        injected=np.asarray(phis, float),
        storage_phase=float(base),
        storage_time=T,
        closed_form_std=closed_form_phase_std(noise.sigma_B, T),
    )


def rail_efficiency(config, rail):
    """Noiseless recall efficiency of one rail, including projection loss."""
    mode, beta, pulse, amp = _rail_inputs(config)[rail - 1]
    if abs(amp) == 0 or pulse.energy() == 0:
        return 0.0
    res = run_storage_recall(config.gem_params(beta), rail_program(config, rail), pulse)
    return abs(amp) ** 2 * res.efficiency


def calibrate_beta(config, target, rail=1, bracket=(1e-4, 3.0), xtol=1e-6):
    """Return a copy of ``config`` whose ``beta`` gives ``target`` efficiency on ``rail``."""
    def f(beta):
        return rail_efficiency(replace(config, beta=beta), rail) - target

    lo, hi = bracket
    if f(lo) * f(hi) > 0:
        raise GemError(f"efficiency target {target} not reachable for beta in {bracket}")
    return replace(config, beta=brentq(f, lo, hi, xtol=xtol))


def calibrate_trim(config, target, rail=2, bracket=(1e-3, 5.0), xtol=1e-6):
    """Return a copy of ``config`` whose ``trim[rail]`` gives ``target`` efficiency."""
    def with_trim(x):
        trim = list(config.trim)
        trim[rail - 1] = x
        return replace(config, trim=tuple(trim))

    def f(x):
        return rail_efficiency(with_trim(x), rail) - target

    lo, hi = bracket
    if f(lo) * f(hi) > 0:
        raise GemError(f"efficiency target {target} not reachable for trim in {bracket}")
    return with_trim(brentq(f, lo, hi, xtol=xtol))


def circular_mode_asymmetry(betas, config=None, balance_populations=False):
    """Per-beta rail efficiencies and asymmetry |eta1-eta2|/(eta1+eta2) in circular mode.

    Signal and control are both R (sigma+), so each rail couples through one
    circular path only and the rails differ through their dipole products.
    """
    base = config or DualRailConfig()
    base = replace(base, mode="circular", input_pol=R, control_pol=R,
                   balance_populations=balance_populations)
    rows = []
    for beta in betas:
        cfg = replace(base, beta=float(beta))
        e1, e2 = rail_efficiency(cfg, 1), rail_efficiency(cfg, 2)
        rows.append(dict(beta=float(beta), eta1=e1, eta2=e2,
                         asymmetry=abs(e1 - e2) / (e1 + e2) if e1 + e2 else 0.0))
    return rows
