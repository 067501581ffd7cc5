import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import ParameterGrid

from dualrail_gem.dualrail import gaussian_pair, offset_for_match
from dualrail_gem.estimators import DualRailMemory, GradientEchoMemory
from dualrail_gem.gem import PulseEnvelope
from dualrail_gem.io import jsonable, table_text, trace_text
from dualrail_gem.validation import check_polarisation, check_pulses, check_scalar


def envelope(fwhm=10.0, centre=15.0, duration=60.0, dt=0.05):
    return PulseEnvelope.gaussian(fwhm, centre, duration, dt).samples


def test_gem_estimator_params_roundtrip():
    est = GradientEchoMemory(beta=0.3, nz=64)
    assert est.get_params()["beta"] == 0.3
    assert clone(est).get_params() == est.get_params()
    est.set_params(flip_time=30.0)
    assert est.flip_time == 30.0
    assert len(list(ParameterGrid({"beta": [0.1, 0.2], "nz": [64]}))) == 2


def test_gem_estimator_fit_transform_score():
    X = envelope()[None, :]
    est = GradientEchoMemory(beta=0.2, nz=64).fit(X)
    Y = est.transform(X)
    assert Y.shape == X.shape
    assert 0 < est.score(X) < 1
    with pytest.raises(NotFittedError):
        GradientEchoMemory().transform(X)


def test_gem_estimator_calibrates_to_target():
    X = envelope()[None, :]
    est = GradientEchoMemory(nz=64, target_efficiency=0.4).fit(X)
    assert est.score(X) == pytest.approx(0.4, abs=1e-4)
    assert est.strength_ == pytest.approx(2 * np.pi * est.beta_ * 0.25)


def test_dual_estimator_fit_predict():
    pulses = gaussian_pair(0.25, offset=offset_for_match(0.97, 10.0), duration=90.0)
    X = np.vstack([p.samples for p in pulses])
    est = DualRailMemory(flip_time=40.0).fit(X)
    m = est.predict(X)
    assert m["eta1"] == pytest.approx(0.39, abs=1e-4)
    assert m["eta2"] == pytest.approx(0.32, abs=1e-4)
    assert m["V_predicted"] == pytest.approx(0.85, abs=0.01)
    with pytest.raises(ValueError):
        est.predict(X[:1])


def test_validation_helpers():
    assert check_pulses([1, 2, 3]).shape == (1, 3)
    with pytest.raises(ValueError):
        check_pulses([[np.nan, 1.0]])
    with pytest.raises(ValueError):
        check_pulses(np.zeros((2, 2, 2)))
    with pytest.raises(TypeError):
        check_scalar(True, "x")
    with pytest.raises(ValueError):
        check_scalar(-1.0, "x", min_val=0.0)
    assert check_polarisation("H").norm() == pytest.approx(1.0)
    assert check_polarisation((3, 4)).a_L == pytest.approx(0.6)


def test_emitters():
    t = np.array([0.0, 0.5])
    text = trace_text(t, np.array([1 + 1j, 2.0]))
    assert text.splitlines() == ["t_us,re,im,intensity", "0,1,1,2", "0.5,2,0,4"]
    assert '"a": [' in table_text(("a", "b"), [[1, 2]], fmt="json")
    assert jsonable({"z": 1j, "a": np.arange(2), "b": np.bool_(True)}) == {
        "z": {"re": 0.0, "im": 1.0}, "a": [0, 1], "b": True}
