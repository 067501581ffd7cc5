"""Zeeman structure and relative dipole amplitudes of the 87Rb D1 line.

Dipole normalisation
--------------------
:func:`relative_dipole` returns ``<F m_F | e r_q | F' m_F'>`` in units of the
reduced element ``<J=1/2 || e r || J'=1/2>``, with the hyperfine reduction

    <F||er||F'> = (-1)^(F'+J+1+I) sqrt((2F'+1)(2J+1)) {J J' 1; F' F I}

and the Wigner-Eckart phase ``(-1)^(F'-1+m_F) sqrt(2F+1) (F' 1 F; m_F' q' -m_F)``
with ``q' = m_F - m_F'``.  This is the convention of the standard alkali D-line
tables, so squared amplitudes equal the tabulated relative transition strength
factors (e.g. 1/2 for F=1, m=1 -> F'=2, m'=2).  The helicity label used in this
package is the absorbed-photon value ``q = m_F' - m_F`` (+1 = sigma+).

With this normalisation the D1 sum rule gives a total strength of exactly 1 for
every ground sublevel.
"""
from dataclasses import dataclass, field

import numpy as np

from .wigner import wigner_3j, wigner_6j

__all__ = [
    "LevelRef",
    "ZeemanParams",
    "MU_B_OVER_H",
    "EXCITED_SPLITTING_MHZ",
    "relative_dipole",
    "transition_table",
    "line_strength",
    "zeeman_shift",
    "raman_line_positions",
]

# Bohr magneton / Planck constant, MHz per gauss
MU_B_OVER_H = 1.399624
# 87Rb 5P1/2 F'=2 - F'=1 splitting, MHz
EXCITED_SPLITTING_MHZ = 816.7

NUCLEAR_SPIN = 1.5
J_GROUND = 0.5
J_EXCITED = 0.5

GROUND_F = (1, 2)
EXCITED_F = (1, 2)


@dataclass(frozen=True)
class LevelRef:
    """A hyperfine Zeeman sublevel of the D1 manifold."""

    excited: bool
    F: int
    m_F: int

    def __post_init__(self):
        allowed = EXCITED_F if self.excited else GROUND_F
        if self.F not in allowed:
            raise ValueError(f"F={self.F} not in {allowed} for {'excited' if self.excited else 'ground'} state")
        if abs(self.m_F) > self.F:
            raise ValueError(f"|m_F|={abs(self.m_F)} exceeds F={self.F}")

    @classmethod
    def ground(cls, F, m_F):
        return cls(False, F, m_F)

    @classmethod
    def upper(cls, F, m_F):
        return cls(True, F, m_F)

    def mirrored(self):
        return LevelRef(self.excited, self.F, -self.m_F)


@dataclass(frozen=True)
class ZeemanParams:
    """Bias field and Lande factors used for linear Zeeman shifts."""

    B0: float = 0.0
    mu_B_over_h: float = MU_B_OVER_H
    g_ground: dict = field(default_factory=lambda: {1: -0.5, 2: 0.5})
    g_excited: dict = field(default_factory=lambda: {1: -1.0 / 6.0, 2: 1.0 / 6.0})

    def g_F(self, level):
        table = self.g_excited if level.excited else self.g_ground
        return table[level.F]


def _reduced_hyperfine(F, Fp):
    phase = -1.0 if int(round(Fp + J_GROUND + 1 + NUCLEAR_SPIN)) % 2 else 1.0
    return (phase * np.sqrt((2 * Fp + 1) * (2 * J_GROUND + 1))
            * wigner_6j(J_GROUND, J_EXCITED, 1, Fp, F, NUCLEAR_SPIN))


def relative_dipole(ground, excited, q=None):
    """Relative dipole amplitude for |F m_F> -> |F' m_F'> absorbing helicity q.

    Forbidden transitions (wrong helicity, |Delta m| > 1) give 0.  ``q`` may be
    omitted, in which case it is inferred from the magnetic numbers.
    """
    if ground.excited or not excited.excited:
        raise ValueError("relative_dipole expects (ground, excited) levels")
    dm = excited.m_F - ground.m_F
    if q is None:
        q = dm
    if q != dm or abs(q) > 1 or abs(ground.F - excited.F) > 1:
        return 0.0
    F, m, Fp, mp = ground.F, ground.m_F, excited.F, excited.m_F
    phase = -1.0 if (Fp - 1 + m) % 2 else 1.0
    return (_reduced_hyperfine(F, Fp) * phase * np.sqrt(2 * F + 1)
            * wigner_3j(Fp, 1, F, mp, m - mp, -m))


_TABLE = None


def transition_table():
    """All nonzero D1 amplitudes keyed by ``(ground, excited, q)``.

    Built once and cached; the returned dict must be treated as read-only.
    """
    global _TABLE
    if _TABLE is None:
        table = {}
        for F in GROUND_F:
            for m in range(-F, F + 1):
                g = LevelRef.ground(F, m)
                for Fp in EXCITED_F:
                    for mp in range(-Fp, Fp + 1):
                        e = LevelRef.upper(Fp, mp)
                        amp = relative_dipole(g, e)
                        if amp != 0.0:
                            table[(g, e, mp - m)] = amp
        _TABLE = table
    return _TABLE


def line_strength(ground):
    """Total squared amplitude out of one ground sublevel (sum rule: equals 1)."""
    return sum(a * a for (g, _, _), a in transition_table().items() if g == ground)


def zeeman_shift(level, B, params=None):
    """Linear Zeeman shift m_F g_F (mu_B/h) B in MHz."""
    params = params or ZeemanParams()
    return level.m_F * params.g_F(level) * params.mu_B_over_h * B


def raman_line_positions(B0, params=None):
    """Two-photon line centres (MHz) of the m_F = -1, 0, +1 ground coherences.

    Each line sits at the differential shift of ``|F=2,m> - |F=1,m>``, which
    for g_2 = -g_1 = 1/2 gives ``{-delta0, 0, +delta0}`` with
    ``delta0 = (mu_B/h) B0``.
    """
    if B0 < 0:
        raise ValueError("B0 must be non-negative")
    params = params or ZeemanParams()
    return np.array([
        zeeman_shift(LevelRef.ground(2, m), B0, params) - zeeman_shift(LevelRef.ground(1, m), B0, params)
        for m in (-1, 0, 1)
    ])
