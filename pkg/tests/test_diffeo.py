from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flatreeb.circle_map import CircleMap
from flatreeb.diffeo import (PointR3, phi_inverse, std_map, std_map_jacobian,
                             std_pullback_residual, straightening_residual)
from flatreeb.errors import ZeroFrequency
from flatreeb.solver import synthesize_certificate


def test_std_map_frozen_value():
    out = std_map(2, PointR3(0.3, 1.1, -0.4))
    assert np.allclose(out, [-0.23512339393953421, 0.35667490747507685, 1.1], atol=1e-15)


def test_std_map_vectorized():
    pts = np.random.default_rng(1).normal(size=(4, 5, 3))
    out = std_map(1.5, pts)
    assert out.shape == pts.shape
    assert np.allclose(out[2, 3], std_map(1.5, pts[2, 3]))


def test_jacobian_matches_finite_differences():
    p = np.array([0.4, -0.7, 1.3])
    J = std_map_jacobian(2.0, p)
    h = 1e-6
    fd = np.stack([(std_map(2.0, p + h * e) - std_map(2.0, p - h * e)) / (2 * h)
                   for e in np.eye(3)], axis=-1)
    assert np.allclose(J, fd, atol=1e-8)
    # x is scaled by 1/n, the rest is a rotation and a swap
    assert abs(np.linalg.det(J)) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, -1, 2 * np.pi])
def test_pullback_is_standard(n):
    assert std_pullback_residual(n) < 1e-12


def test_zero_frequency():
    with pytest.raises(ZeroFrequency):
        std_map(0, (1.0, 2.0, 3.0))
    with pytest.raises(ZeroFrequency):
        std_pullback_residual(0)


@given(st.floats(-40, 40))
def test_phi_inverse_round_trip(y):
    m = CircleMap.from_function(lambda z: -2 * z + 0.5 * np.sin(z), 256)
    t = phi_inverse(m, y)
    assert m.evaluate(t) == pytest.approx(y, abs=1e-10)


def test_phi_inverse_array_shape_and_degree_zero():
    m = CircleMap.from_function(lambda z: z + 0.3 * np.sin(z), 256)
    ys = np.linspace(-3, 9, 12).reshape(3, 4)
    assert phi_inverse(m, ys).shape == (3, 4)
    with pytest.raises(ValueError):
        phi_inverse(CircleMap.from_function(lambda z: np.sin(z), 64), 0.1)


def test_straightening_on_certificate():
    th = CircleMap.from_function(lambda z: 2 * z + 1.1 * np.sin(2 * z + 0.2), 2048)
    cert = synthesize_certificate(th)
    assert straightening_residual(cert) < 1e-6
