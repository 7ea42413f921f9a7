import math

import numpy as np
import pytest

import mflab


def test_mass_algebra():
    assert mflab.admissible_eta_interval(0.4) == pytest.approx((6.0, 10.0))
    assert mflab.classify_local_mass(2.0, 16.513, 0.4)["kind"] == "FullLimit"
    assert mflab.classify_local_mass(4.0, 0.0, 0.3, 1e-9)["kind"] == "Pure1"
    roots = mflab.solve_gamma_m(1, 0.25)
    assert roots[-1] == pytest.approx(32.0)
    assert mflab.solve_gamma_m(2, 0.25) == []
    assert mflab.sharp_threshold([(1.0, 0.5), (0.25, 0.5)]) == pytest.approx(16 * math.pi)
    assert mflab.coercive_region(4 * math.pi, 2 * math.pi, 0.25)
    with pytest.raises(mflab.ValidationError):
        mflab.classify_local_mass(1.0, 1.0, 1.5)


def test_liouville_shoot():
    prof = mflab.shoot(1.0)
    assert len(prof) == prof.r.size
    assert mflab.limit_mass(prof) == pytest.approx(4.0, abs=1e-3)
    assert mflab.verify_pohozaev(prof) < 1e-3
    assert np.all(np.diff(prof.eta) >= 0)


def test_solve_and_functional():
    n = 64
    x = np.arange(n) / n
    h1 = np.tile(1.0 + 0.5 * np.cos(2 * np.pi * x), (n, 1))
    out = mflab.solve(n, 4 * math.pi, 2 * math.pi, 0.25, h1=h1)
    assert out["status"] == "converged"
    assert out["residual_norm"] < 1e-10
    assert out["u"].shape == (n, n)
    assert abs(out["u"].mean()) < 1e-12
    J0 = mflab.evaluate_J(np.zeros((n, n)), 4 * math.pi, 2 * math.pi, 0.25, h1=h1)
    assert out["J"] <= J0
    r = mflab.el_residual(out["u"], 4 * math.pi, 2 * math.pi, 0.25, h1=h1)
    assert np.abs(r).max() < 1e-10


def test_bubble_and_transport():
    u = mflab.build_bubble([(0.5, 0.5, 1.0)], 10.0, 64)
    assert u.shape == (64, 64)
    assert np.unravel_index(u.argmax(), u.shape) == (32, 32)
    with pytest.raises(mflab.ValidationError):
        mflab.build_bubble([(0.5, 0.5, 1.0)], 40.0, 64)
    d = mflab.wasserstein1([(0.1, 0.3, 1.0)], [(0.35, 0.3, 1.0)])
    assert d == pytest.approx(0.25)
