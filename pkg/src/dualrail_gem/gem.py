"""Coupled-mode Maxwell-Bloch integration for one gradient-echo rail.

Model (dimensionless length ``z`` in [0, 1], time in microseconds)::

    d_t sigma = -(gamma0 + i 2 pi delta'(z, t)) sigma + i E
    d_z E     =  i G sigma,        G = 2 pi beta |eta_ref|

``delta'`` is the two-photon detuning seen in the frame of the pulse carrier
(MHz), ``eta_ref`` is the write gradient span (MHz per unit length) and
``beta`` is the coupling strength per unit gradient, so a narrowband pulse
inside the broadened line is transmitted with intensity ``exp(-2 pi beta)``.
The field equation drops ``d_t`` (slowly-varying envelope, L/c much shorter
than the pulse) and is integrated along ``z`` with the trapezoid rule at every
time; ``sigma`` is advanced with classic RK4.

With these scalings the flux identity reads
``d/dt [G int |sigma|^2 dz] = |E(0)|^2 - |E(1)|^2 - 2 gamma0 G int |sigma|^2 dz``,
which is what :func:`energy_ledger` checks.
"""
from dataclasses import dataclass, field

import numpy as np

from .atoms import raman_line_positions
from .exceptions import InstabilityError, NumericalError

__all__ = [
    "GemParams",
    "GradientProgram",
    "PulseEnvelope",
    "RailState",
    "StorageResult",
    "detuning_profile",
    "evolve",
    "iter_evolve",
    "coupling_strength",
    "run_storage_recall",
    "energy_ledger",
    "absorption_spectrum",
    "STABILITY_BOUND",
]

TWO_PI = 2.0 * np.pi
# max phase advance per step, rad
STABILITY_BOUND = 0.1


@dataclass(frozen=True)
class GemParams:
    """Per-rail medium parameters and grid.

    beta
        coupling strength per unit gradient (optical-depth-like, >= 0)
    gamma0
        ground-state coherence decay rate, 1/us
    nz, dt
        spatial grid points and time step (us)
    """

    beta: float = 0.2
    gamma0: float = 0.0
    nz: int = 256
    dt: float = 0.05

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError("beta must be >= 0")
        if not self.gamma0 >= 0:
            raise ValueError("gamma0 must be >= 0")
        if self.nz < 16:
            raise ValueError("nz must be >= 16")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")


@dataclass(frozen=True)
class GradientProgram:
    """Piecewise-constant gradient schedule plus rail bias.

    ``segments`` is a sequence of ``(start_time_us, slope_MHz_per_length)``
    sorted by start time; the first segment extends back to -inf.
    """

    segments: tuple = ((0.0, 0.0),)
    bias: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple((float(t), float(s)) for t, s in self.segments))
        starts = [t for t, _ in self.segments]
        if starts != sorted(starts):
            raise ValueError("gradient segments must be sorted by start time")
        if not np.all(np.isfinite([s for _, s in self.segments] + [self.bias, self.offset])):
            raise ValueError("gradient program must be finite")

    @classmethod
    def flipped(cls, slope, flip_time=None, bias=0.0, offset=0.0):
        """Linear gradient ``slope`` reversed at ``flip_time`` (None: never)."""
        segs = [(0.0, slope)]
        if flip_time is not None:
            segs.append((flip_time, -slope))
        return cls(tuple(segs), bias, offset)

    @property
    def flip_time(self):
        return self.segments[1][0] if len(self.segments) > 1 else None

    @property
    def reference_slope(self):
        return max(abs(s) for _, s in self.segments)

    def slope_at(self, t):
        slope = self.segments[0][1]
        for start, s in self.segments:
            if t >= start:
                slope = s
        return slope

    def max_abs_detuning(self, carrier=0.0):
        base = self.bias + self.offset - carrier
        return max(abs(base) + abs(s) / 2.0 for _, s in self.segments)


def detuning_profile(program, z, t, length=1.0):
    """Two-photon detuning delta'(z, t) in MHz (gradient centred at L/2)."""
    z = np.asarray(z, dtype=float)
    return program.bias + program.slope_at(t) * (z - length / 2.0) + program.offset


@dataclass
class PulseEnvelope:
    """Input-face field samples on the simulation clock."""

    samples: np.ndarray
    dt: float
    carrier: float = 0.0
    t_start: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1:
            raise ValueError("pulse samples must be one-dimensional")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("pulse samples must be finite")

    @classmethod
    def gaussian(cls, fwhm, centre, duration, dt, amplitude=1.0, carrier=0.0):
        """Gaussian pulse whose *intensity* has full width ``fwhm`` (us)."""
        t = np.arange(int(round(duration / dt)) + 1) * dt
        env = amplitude * np.exp(-2.0 * np.log(2.0) * ((t - centre) / fwhm) ** 2)
        return cls(env, dt, carrier)

    @property
    def times(self):
        return self.t_start + np.arange(self.samples.size) * self.dt

    def energy(self):
        return float(np.trapezoid(np.abs(self.samples) ** 2, dx=self.dt))

    def scaled(self, c):
        return PulseEnvelope(self.samples * c, self.dt, self.carrier, self.t_start)


@dataclass
class RailState:
    """Spin-wave coherence and field on the spatial grid at the current time."""

    sigma: np.ndarray
    field: np.ndarray
    decayed: float = 0.0

    @classmethod
    def empty(cls, nz):
        return cls(np.zeros(nz, complex), np.zeros(nz, complex))

    def spin_energy(self, strength):
        dz = 1.0 / (self.sigma.size - 1)
        return float(strength * np.trapezoid(np.abs(self.sigma) ** 2, dx=dz))


def coupling_strength(params, program):
    """G = 2 pi beta |eta_ref| in rad/us per unit length."""
    if params.beta == 0:
        return 0.0
    ref = program.reference_slope
    if ref == 0:
        raise ValueError("beta is defined per unit gradient; the program has no gradient")
    return TWO_PI * params.beta * ref


def _field(sigma, e_in, strength, dz):
    # trapezoid-rule integral of d_z E = i G sigma from the input face
    acc = np.empty_like(sigma)
    acc[0] = 0.0
    np.cumsum(0.5 * (sigma[1:] + sigma[:-1]), out=acc[1:])
    return e_in + 1j * strength * dz * acc


def iter_evolve(state, params, program, pulse):
    """Generator form of :func:`evolve`: yields one output sample per clock tick.

    ``state`` is updated after every step, so several rails can be advanced in
    lock-step by interleaving their generators.
    """
    if not np.isclose(pulse.dt, params.dt, rtol=1e-9, atol=0):
        raise ValueError(f"pulse dt {pulse.dt} differs from simulation dt {params.dt}")
    if state.sigma.size != params.nz:
        raise ValueError("state grid does not match params.nz")
    dt = params.dt
    phase_step = TWO_PI * program.max_abs_detuning(pulse.carrier) * dt
    if phase_step > STABILITY_BOUND * (1 + 1e-12):
        raise InstabilityError(
            f"max|2 pi delta'| dt = {phase_step:.3g} rad exceeds {STABILITY_BOUND}; reduce dt")

    nz = params.nz
    z = np.linspace(0.0, 1.0, nz)
    dz = z[1] - z[0]
    G = coupling_strength(params, program)
    gamma = params.gamma0
    base = program.bias + program.offset - pulse.carrier
    e_in = pulse.samples
    n = e_in.size
    t0 = pulse.t_start

    def rhs(s, ein, det):
        return -(gamma + 1j * det) * s + 1j * _field(s, ein, G, dz)

    def sw(s):
        return G * np.trapezoid(np.abs(s) ** 2, dx=dz)

    sigma = state.sigma.astype(complex, copy=True)
    for k in range(n):
        fld = _field(sigma, e_in[k], G, dz)
        state.field = fld
        if not np.isfinite(fld[-1]):
            raise NumericalError(f"non-finite output field at step {k} (t = {t0 + k * dt:.3f} us)")
        yield fld[-1]
        if k == n - 1:
            break
        det = TWO_PI * (base + program.slope_at(t0 + (k + 0.5) * dt) * (z - 0.5))
        e_mid = 0.5 * (e_in[k] + e_in[k + 1])
        k1 = rhs(sigma, e_in[k], det)
        k2 = rhs(sigma + 0.5 * dt * k1, e_mid, det)
        k3 = rhs(sigma + 0.5 * dt * k2, e_mid, det)
        k4 = rhs(sigma + dt * k3, e_in[k + 1], det)
        new = sigma + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if gamma:
            state.decayed += gamma * dt * (sw(sigma) + sw(new))
        sigma = new
        if k % 64 == 0 and not np.all(np.isfinite(sigma)):
            raise NumericalError(f"non-finite coherence at step {k} (t = {t0 + k * dt:.3f} us)")
        state.sigma = sigma


def evolve(state, params, program, pulse):
    """Integrate one rail over the whole input clock; return the z=L trace.

    ``state`` is updated in place and holds the residual spin wave at the end.
    The gradient is held fixed across each step and switches on step
    boundaries, so flip times are effectively rounded to the clock.
    Raises :class:`InstabilityError` if ``max|2 pi delta'| dt`` exceeds
    ``STABILITY_BOUND`` and :class:`NumericalError` on NaN/inf.
    """
    out = np.fromiter(iter_evolve(state, params, program, pulse), complex, count=pulse.samples.size)
    if not np.all(np.isfinite(state.sigma)):
        raise NumericalError("non-finite coherence at the end of the run")
    return out


@dataclass
class StorageResult:
    """Traces and normalised energies of one storage/recall run."""

    times: np.ndarray
    input: np.ndarray
    output: np.ndarray
    flip_time: float
    strength: float
    state: RailState
    dt: float
    energies: dict = field(default_factory=dict)

    @property
    def echo_mask(self):
        if self.flip_time is None:
            return np.zeros(self.times.size, bool)
        return self.times >= self.flip_time

    @property
    def transmitted(self):
        return np.where(self.echo_mask, 0, self.output)

    @property
    def echo(self):
        return np.where(self.echo_mask, self.output, 0)

    @property
    def efficiency(self):
        return self.energies["echo"]

    def echo_centroid(self):
        w = np.abs(self.echo) ** 2
        return float(np.sum(self.times * w) / np.sum(w))

    def input_centroid(self):
        w = np.abs(self.input) ** 2
        return float(np.sum(self.times * w) / np.sum(w))


def _energy(trace, dt):
    return float(np.trapezoid(np.abs(trace) ** 2, dx=dt))


def run_storage_recall(params, program, pulse, state=None):
    """Store ``pulse`` and recall it by the gradient flip in ``program``.

    The output trace is split at the flip time into transmitted leak and echo;
    energies in ``result.energies`` are normalised to the input energy.
    """
    state = state or RailState.empty(params.nz)
    out = evolve(state, params, program, pulse)
    G = coupling_strength(params, program)
    res = StorageResult(pulse.times, pulse.samples.copy(), out, program.flip_time, G, state, params.dt)
    e_in = pulse.energy()
    if e_in == 0:
        res.energies = dict(input=0.0, transmitted=0.0, echo=0.0, residual=0.0, decayed=0.0)
        return res
    # split the trapezoid at the flip so that the windows add up exactly
    w = np.abs(out) ** 2
    total = _energy(out, params.dt)
    mask = res.echo_mask
    if mask.any() and not mask.all():
        i = int(np.argmax(mask))
        echo = float(np.trapezoid(w[i - 1:], dx=params.dt)) - 0.5 * params.dt * w[i - 1]
    else:
        echo = total if mask.all() else 0.0
    res.energies = dict(
        input=1.0,
        transmitted=float((total - echo) / e_in),
        echo=float(echo / e_in),
        residual=state.spin_energy(G) / e_in,
        decayed=state.decayed / e_in,
    )
    return res


def energy_ledger(result, tol=1e-3, strict=False):
    """Energy bookkeeping ``{input, transmitted, echo, residual, decayed}``.

    ``decayed`` is the energy removed by gamma0, accumulated during the run.
    ``closure`` is the relative mismatch of ``input`` against the sum of the
    other four; ``closed`` reports whether it is within ``tol``.  With
    ``strict=True`` a violation raises :class:`NumericalError`.
    """
    e = dict(result.energies)
    if not e:
        raise ValueError("result carries no energies")
    parts = e["transmitted"] + e["echo"] + e["residual"] + e["decayed"]
    closure = e["input"] - parts if e["input"] else 0.0
    ledger = dict(e, closure=closure, closed=bool(abs(closure) <= tol))
    if any(e[k] < -1e-12 for k in ("transmitted", "echo", "residual", "decayed")):
        ledger["closed"] = False
    if strict and not ledger["closed"]:
        raise NumericalError(f"energy ledger does not close: mismatch {closure:.3e} > {tol:g}")
    return ledger


def _line_od(freqs, centre, span, strength, gamma):
    # 2 Re int_0^1 G / (gamma + i(centre + span (z - 1/2) - w)) dz, angular units
    y = centre - freqs
    if span == 0:
        return 2.0 * strength * gamma / (gamma ** 2 + y ** 2)
    hi = (y + span / 2.0) / gamma
    lo = (y - span / 2.0) / gamma
    return 2.0 * strength / abs(span) * np.abs(np.arctan(hi) - np.arctan(lo))


def absorption_spectrum(B0, gradient, params, detunings, *, linewidth=0.05,
                        reference_span=None, line_weights=(1.0, 1.0, 1.0)):
    """Steady-state weak-probe intensity transmission across the three lines.

    B0
        bias field (G); lines sit at ``raman_line_positions(B0)``
    gradient
        detuning span ``eta L`` (MHz) applied to the two field-sensitive lines;
        the m_F = 0 line is not broadened
    detunings
        probe detunings (MHz) relative to the unsplit Raman line
    linewidth
        homogeneous half-width (MHz) added to ``params.gamma0``
    reference_span
        gradient span that defines ``beta`` (defaults to ``gradient``, or
        1 MHz if the gradient is zero)
    """
    w = TWO_PI * np.asarray(detunings, dtype=float)
    gamma = params.gamma0 + TWO_PI * linewidth
    ref = reference_span if reference_span is not None else (gradient if gradient else 1.0)
    G = TWO_PI * params.beta * abs(ref)
    od = np.zeros_like(w)
    for centre, sensitive, weight in zip(raman_line_positions(B0), (True, False, True), line_weights):
        span = TWO_PI * gradient if sensitive else 0.0
        od += _line_od(w, TWO_PI * centre, span, weight * G, gamma)
    return np.exp(-od)
