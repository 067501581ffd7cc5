"""scikit-learn style wrappers around the memory simulations.

``fit`` calibrates the coupling strength against a target efficiency (or
just freezes the given one), ``transform`` maps input envelopes to output
traces and ``score`` reports mean recall efficiency.  Hyper-parameters are
plain constructor arguments, so ``get_params``/``set_params`` and
``sklearn.model_selection.ParameterGrid`` work for sweeps.
"""
from dataclasses import replace

import numpy as np
from scipy.optimize import brentq
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dualrail import DualRailConfig, NoiseModel, calibrate_beta, calibrate_trim, gaussian_pair, run_dual_rail
from .exceptions import GemError
from .gem import GemParams, GradientProgram, PulseEnvelope, coupling_strength, run_storage_recall
from .validation import check_polarisation, check_pulses, check_scalar


class GradientEchoMemory(TransformerMixin, BaseEstimator):
    """Single-rail gradient echo memory.

    Parameters
    ----------
    beta : float
        Coupling strength per unit gradient; used as-is when
        ``target_efficiency`` is None, otherwise the starting bracket scale.
    gamma0 : float
        Coherence decay rate (1/us).
    gradient : float
        Write gradient span across the medium (MHz).
    flip_time : float or None
        Gradient reversal time (us); None stores without recall.
    nz, dt : int, float
        Grid points and time step (us).
    target_efficiency : float or None
        If set, ``fit`` root-finds ``beta_`` so that the mean recall
        efficiency of the fitted pulses equals this value.
    """

    def __init__(self, beta=0.2, gamma0=0.0, gradient=0.25, flip_time=25.0, nz=256, dt=0.05,
                 target_efficiency=None):
        self.beta = beta
        self.gamma0 = gamma0
        self.gradient = gradient
        self.flip_time = flip_time
        self.nz = nz
        self.dt = dt
        self.target_efficiency = target_efficiency

    def _program(self):
        return GradientProgram.flipped(self.gradient, self.flip_time)

    def _run(self, beta, X):
        params = GemParams(beta=beta, gamma0=self.gamma0, nz=self.nz, dt=self.dt)
        return [run_storage_recall(params, self._program(), PulseEnvelope(row, self.dt)) for row in X]

    def fit(self, X, y=None):
        X = check_pulses(X)
        check_scalar(self.beta, "beta", min_val=0.0)
        check_scalar(self.gamma0, "gamma0", min_val=0.0)
        if self.target_efficiency is None:
            self.beta_ = float(self.beta)
        else:
            target = check_scalar(self.target_efficiency, "target_efficiency", min_val=0.0,
                                  include_min=False, max_val=1.0)

            def f(b):
                return np.mean([r.efficiency for r in self._run(b, X)]) - target

            hi = 3.0
            if f(hi) < 0:
                raise GemError(f"target efficiency {target} is not reachable")
            self.beta_ = float(brentq(f, 1e-5, hi, xtol=1e-7))
        self.strength_ = coupling_strength(GemParams(beta=self.beta_, nz=self.nz, dt=self.dt), self._program())
        self.n_features_in_ = X.shape[1]
        return self

    def run(self, X):
        """Full :class:`StorageResult` objects for each input row."""
        check_is_fitted(self, "beta_")
        return self._run(self.beta_, check_pulses(X))

    def transform(self, X):
        """Output-face traces, one row per input envelope."""
        return np.vstack([r.output for r in self.run(X)])

    def score(self, X, y=None):
        """Mean recall efficiency."""
        return float(np.mean([r.efficiency for r in self.run(X)]))


class DualRailMemory(BaseEstimator):
    """Two frequency rails at +-delta0 stored in parallel.

    ``fit`` takes the two rail envelopes (a ``(2, n)`` array) and calibrates
    ``beta_`` so rail 1 reaches ``targets[0]`` and a rail-2 trim so rail 2
    reaches ``targets[1]``; pass ``targets=None`` to keep ``beta``/``trim``.
    ``predict`` returns the metrics dict of a noiseless (or noisy) shot.
    """

    def __init__(self, B0=0.25, delta=200.0, beta=0.16, trim=(1.0, 1.0), gamma0=0.0, gradient=0.25,
                 flip_time=40.0, input_pol="H", control_pol="V", mode="linear", targets=(0.39, 0.32),
                 nz=256, dt=0.05):
        self.B0 = B0
        self.delta = delta
        self.beta = beta
        self.trim = trim
        self.gamma0 = gamma0
        self.gradient = gradient
        self.flip_time = flip_time
        self.input_pol = input_pol
        self.control_pol = control_pol
        self.mode = mode
        self.targets = targets
        self.nz = nz
        self.dt = dt

    def _config(self, X, beta, trim):
        X = check_pulses(X)
        if X.shape[0] != 2:
            raise ValueError("DualRailMemory expects exactly two rail envelopes")
        d0 = gaussian_pair(self.B0, dt=self.dt)[0].carrier
        pulses = (PulseEnvelope(X[0], self.dt, d0), PulseEnvelope(X[1], self.dt, -d0))
        return DualRailConfig(B0=self.B0, delta=self.delta, beta=beta, trim=tuple(trim), gamma0=self.gamma0,
                              gradient=self.gradient, flip_time=self.flip_time, pulses=pulses,
                              input_pol=check_polarisation(self.input_pol),
                              control_pol=check_polarisation(self.control_pol), mode=self.mode,
                              nz=self.nz, dt=self.dt)

    def fit(self, X, y=None):
        cfg = self._config(X, self.beta, self.trim)
        if self.targets is not None:
            cfg = calibrate_beta(replace(cfg, trim=(1.0, 1.0)), self.targets[0])
            cfg = calibrate_trim(cfg, self.targets[1])
        self.beta_ = cfg.beta
        self.trim_ = cfg.trim
        return self

    def predict(self, X, noise=None, seed=None):
        check_is_fitted(self, "beta_")
        return run_dual_rail(self._config(X, self.beta_, self.trim_), noise or NoiseModel(), seed).metrics
