import numpy as np
import pytest

mapfilt = pytest.importorskip("mapfilt")


def test_simulate_shapes_and_determinism():
    a = mapfilt.simulate("var1", 300, seed=4)
    b = mapfilt.simulate("var1", 300, seed=4)
    assert a.shape == (300, 4)
    assert np.array_equal(a, b)
    assert mapfilt.simulate("var_arch", 50, seed=1).shape == (50, 3)


def test_privatize_keeps_second_order_structure():
    x = mapfilt.simulate("var1", 600, seed=2)
    out = mapfilt.privatize(x, {"nx": 2, "r": 1, "restarts": 2, "seed": 3})
    y = out["y"]
    assert y.shape == (600, 2)
    assert 0.0 <= out["privacy"] <= 1.0
    assert out["smap_error"] < 1e-8
    assert out["report"]["r"] == 1
    assert mapfilt.rum(x[:, :2], y, 10) > 0.5


def test_identity_without_restarts():
    x = mapfilt.simulate("var1", 200, seed=9)
    out = mapfilt.privatize(x, {"nx": 2, "restarts": 0})
    assert np.max(np.abs(out["y"] - x[:, :2])) < 1e-9


def test_errors_map_to_exception():
    x = mapfilt.simulate("var1", 100, seed=1)
    with pytest.raises(mapfilt.MapfiltError):
        mapfilt.privatize(x, {"nx": 4})
    with pytest.raises(mapfilt.MapfiltError):
        mapfilt.privatize(x, '{"unknown": 1}')


def test_sample_acvf_lag_zero_is_covariance():
    x = mapfilt.simulate("varma11", 500, seed=5)
    g = mapfilt.sample_acvf(x, 2)
    assert len(g) == 3
    assert np.allclose(g[0], np.cov(x.T, bias=True))
