"""Effective Raman couplings, coupled-mode polarisations and overlaps.

States are stored in the circular basis ``(a_L, a_R)``.  The linear basis is
fixed as ``H = (L + R)/sqrt(2)`` and ``V = i (L - R)/sqrt(2)``.  The sigma+
(helicity +1) component of a field is its R amplitude and sigma- is L.

Couplings are in relative units: control Rabi frequency magnitude 1 split into
sigma+/sigma- weights by the control polarisation, dipole products from
:mod:`dualrail_gem.atoms`, and one-photon detunings in MHz.
"""
from dataclasses import dataclass

import numpy as np

from .atoms import EXCITED_SPLITTING_MHZ, LevelRef, relative_dipole, zeeman_shift
from .exceptions import ResonanceError, ZeroCouplingError

__all__ = [
    "PolarisationState",
    "CouplingPair",
    "H", "V", "L", "R",
    "coherence_couplings",
    "effective_couplings",
    "coupled_mode",
    "overlap",
    "projection",
    "ellipse_axes",
    "neglected_lambda_od_ratio",
]

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class PolarisationState:
    """Two-component complex amplitude in the circular {L, R} basis."""

    a_L: complex
    a_R: complex

    @classmethod
    def from_linear(cls, h, v):
        return cls((h + 1j * v) / _SQRT2, (h - 1j * v) / _SQRT2)

    @classmethod
    def from_label(cls, label):
        """``'H'``, ``'V'``, ``'L'``, ``'R'``, ``'D'`` or ``'A'``."""
        label = label.upper()
        table = {"H": H, "V": V, "L": L, "R": R,
                 "D": cls.from_linear(1 / _SQRT2, 1 / _SQRT2),
                 "A": cls.from_linear(1 / _SQRT2, -1 / _SQRT2)}
        if label not in table:
            raise ValueError(f"unknown polarisation label {label!r}; expected one of {sorted(table)}")
        return table[label]

    @property
    def vector(self):
        return np.array([self.a_L, self.a_R], dtype=complex)

    def to_linear(self):
        """Return ``(h, v)`` amplitudes."""
        return (self.a_L + self.a_R) / _SQRT2, -1j * (self.a_L - self.a_R) / _SQRT2

    def norm(self):
        return float(np.sqrt(abs(self.a_L) ** 2 + abs(self.a_R) ** 2))

    def normalized(self):
        n = self.norm()
        if n == 0.0:
            raise ZeroCouplingError("cannot normalise the zero polarisation vector")
        return PolarisationState(self.a_L / n, self.a_R / n)

    def inner(self, other):
        """<self|other>."""
        return complex(np.vdot(self.vector, other.vector))

    def orthogonal(self):
        """Unit state orthogonal to this one."""
        p = self.normalized()
        return PolarisationState(-np.conj(p.a_R), np.conj(p.a_L))

    def mirrored(self):
        """Swap L and R (the m_F -> -m_F mirror)."""
        return PolarisationState(self.a_R, self.a_L)


H = PolarisationState(1 / _SQRT2, 1 / _SQRT2)
V = PolarisationState(1j / _SQRT2, -1j / _SQRT2)
L = PolarisationState(1.0, 0.0)
R = PolarisationState(0.0, 1.0)


@dataclass(frozen=True)
class CouplingPair:
    """sigma-/sigma+ effective couplings of one ground coherence."""

    g_minus: complex
    g_plus: complex
    rail: int
    delta22: float
    delta21: float
    control: PolarisationState

    @property
    def g_cp(self):
        return float(np.sqrt(abs(self.g_minus) ** 2 + abs(self.g_plus) ** 2))

    @property
    def omega_plus(self):
        return self.control.a_R

    @property
    def omega_minus(self):
        return self.control.a_L

    def normalized(self):
        """``(|g-|, |g+|) / g_cp``."""
        g = self.g_cp
        return abs(self.g_minus) / g, abs(self.g_plus) / g


def _check_detuning(value, guard, what):
    if abs(value) < guard:
        raise ResonanceError(f"{what} = {value:.3f} MHz is inside the {guard} MHz resonance guard band")


def _path_detuning(delta, Fp, g_level, e_level, zeeman):
    base = delta if Fp == 2 else delta + EXCITED_SPLITTING_MHZ
    if zeeman is None:
        return base
    # control detuning from the Zeeman-shifted |2,m> -> |F',m'> transition
    return base - (zeeman_shift(e_level, zeeman.B0, zeeman) - zeeman_shift(g_level, zeeman.B0, zeeman))


def coherence_couplings(m, control, delta, *, guard=1.0, zeeman=None):
    """(g-, g+) for the ``|F=1,m> <-> |F=2,m>`` coherence.

    Every excited sublevel ``|F', m+q>`` reachable by both the signal (from
    F=1) and a control component of the same helicity ``q`` contributes
    ``Omega_q mu_signal mu_control / Delta_2F'``.  Pass ``zeeman`` to include
    ground and excited Zeeman shifts in the one-photon detunings (off by
    default; the shifts are tiny against detunings of hundreds of MHz).
    """
    control = control.normalized()
    _check_detuning(delta, guard, "Delta22")
    _check_detuning(delta + EXCITED_SPLITTING_MHZ, guard, "Delta21")
    out = {}
    for q, omega in ((-1, control.a_L), (+1, control.a_R)):
        total = 0j
        for Fp in (2, 1):
            mp = m + q
            if abs(mp) > Fp:
                continue
            e = LevelRef.upper(Fp, mp)
            g2 = LevelRef.ground(2, m)
            d = _path_detuning(delta, Fp, g2, e, zeeman)
            _check_detuning(d, guard, f"path detuning via F'={Fp}")
            total += omega * relative_dipole(LevelRef.ground(1, m), e) * relative_dipole(g2, e) / d
        out[q] = total
    return out[-1], out[+1]


def effective_couplings(rail, control_pol, delta, *, guard=1.0, zeeman=None):
    """Coupling pair of frequency rail 1 (m_F=+1 coherence) or rail 2 (m_F=-1)."""
    if rail not in (1, 2):
        raise ValueError("rail must be 1 or 2")
    m = 1 if rail == 1 else -1
    g_minus, g_plus = coherence_couplings(m, control_pol, delta, guard=guard, zeeman=zeeman)
    return CouplingPair(g_minus, g_plus, rail, delta, delta + EXCITED_SPLITTING_MHZ, control_pol.normalized())


def coupled_mode(pair):
    """Unit polarisation ``(g-, g+)/g_cp`` of the coupled mode and ``g_cp``.

    This is the polarisation emitted by the stored coherence; an input ``p``
    is absorbed with amplitude ``<P|p>``.
    """
    g = pair.g_cp
    if g == 0.0:
        raise ZeroCouplingError("both circular couplings vanish")
    return PolarisationState(pair.g_minus / g, pair.g_plus / g), g


def overlap(p1, p2):
    """Mode overlap |<p1|p2>| of the normalised states."""
    return abs(p1.normalized().inner(p2.normalized()))


def projection(p_in, mode):
    """Fraction |<mode|p_in>|^2 of an input that couples to ``mode``."""
    return overlap(mode, p_in) ** 2


def ellipse_axes(p):
    """Major and minor field amplitudes of the polarisation ellipse of a unit state."""
    p = p.normalized()
    aL, aR = abs(p.a_L), abs(p.a_R)
    return (aL + aR) / _SQRT2, abs(aR - aL) / _SQRT2


def neglected_lambda_od_ratio(delta, control=V, rail=1, *, guard=1.0):
    """Coupled-mode strength of the retained coherence over the neglected path.

    Retained: ``g_cp^2`` of the ``|1,+-1> <-> |2,+-1>`` coherence (all three
    Lambda paths, with the two sigma- paths added coherently).  Neglected:
    ``|g|^2`` of the single path ``|1,0> -> |2',+-1> <- |2,+-2>``.
    """
    pair = effective_couplings(rail, control, delta, guard=guard)
    s = 1 if rail == 1 else -1
    ctrl = control.normalized()
    # control drives |2,2s> -> |2',s>, helicity -s
    omega = ctrl.a_L if s == 1 else ctrl.a_R
    e = LevelRef.upper(2, s)
    g_neg = omega * relative_dipole(LevelRef.ground(1, 0), e) * relative_dipole(LevelRef.ground(2, 2 * s), e) / delta
    if g_neg == 0:
        raise ZeroCouplingError("neglected path has zero coupling for this control polarisation")
    return pair.g_cp ** 2 / abs(g_neg) ** 2
