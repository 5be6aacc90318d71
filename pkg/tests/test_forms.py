from __future__ import annotations

import numpy as np
import pytest

from flatreeb.circle_map import CircleMap
from flatreeb.errors import NotEquivariant, PreconditionFailed
from flatreeb.forms import (FIBER_AREA, TrigOneForm, ZOneForm, angle_field, angle_form,
                            check_connection_volume_independence, check_gray_segment,
                            check_identity_31, contact_density, covering_volume,
                            exterior_derivative_z, reeb_residual, volume_z)
from flatreeb.spectral import grid
from flatreeb.synthesis import ScrewData

VOL_Z = 248.05021344239853  # (2 pi)^3


def lift(f, n=512):
    return CircleMap.from_function(f, n)


def test_volume_of_identity_lift():
    assert volume_z(angle_form(lift(lambda z: z))) == pytest.approx(VOL_Z, abs=1e-10)


@pytest.mark.parametrize("d", [-2, 1, 3])
def test_volume_depends_only_on_degree(d):
    th = lift(lambda z: d * z + 2.5 * np.sin(2 * z + 1) - np.cos(5 * z))
    assert volume_z(angle_form(th)) == pytest.approx(2 * np.pi * d * FIBER_AREA, abs=1e-8)


def test_angle_form_is_connection_form():
    th = lift(lambda z: z + 3.0 * np.sin(z))
    assert max(reeb_residual(angle_form(th), angle_field(th))) < 1e-12


def test_exterior_derivative_matches_hand_computation():
    z = grid(256)[:-1]
    a = ZOneForm.periodic(np.cos(z), np.sin(2 * z), 0.7)
    A, B, C = exterior_derivative_z(a).stack()
    assert np.allclose(A, -2 * np.cos(2 * z), atol=1e-12)
    assert np.allclose(B, -np.sin(z), atol=1e-12)
    assert np.allclose(C, 0.0)
    dens = contact_density(a)
    assert np.allclose(dens, -np.sin(2 * z) * np.sin(z) - 2 * np.cos(z) * np.cos(2 * z), atol=1e-12)


def test_connection_independence():
    th = lift(lambda z: 2 * z + 0.9 * np.sin(3 * z))
    assert check_connection_volume_independence(th, c=0.3) < 1e-10
    c = 0.2 + 0.1 * np.cos(grid(512)[:-1])
    assert check_connection_volume_independence(th, c=c) < 1e-10


def test_connection_independence_rejects_non_connection():
    th = lift(lambda z: z + 0.9 * np.sin(z))
    with pytest.raises(PreconditionFailed):
        check_connection_volume_independence(th, mu=0.2)


def test_covering_volume():
    vol_t, vol_q = covering_volume(lift(lambda z: z), ScrewData.standard(2, np.pi))
    assert vol_t == pytest.approx(VOL_Z, abs=1e-10)
    assert vol_q == pytest.approx(VOL_Z / 2, abs=1e-10)
    th = lift(lambda z: 3 * z + np.sin(6 * z), 3072)
    vol_t, vol_q = covering_volume(th, ScrewData.standard(3, 0.0))
    assert abs(3 * vol_q - vol_t) < 1e-10
    with pytest.raises(NotEquivariant):
        covering_volume(lift(lambda z: z + np.sin(z), 3072), ScrewData.standard(3, 0.0))


def test_gray_segment_positive_and_preconditions():
    th = lift(lambda z: z)
    a0 = angle_form(th)
    assert check_gray_segment(a0, a0.scale(2.0)) > 0
    flipped = angle_form(lift(lambda z: -z))
    with pytest.raises(PreconditionFailed):
        check_gray_segment(a0, flipped)


def test_trig_form_values_and_curl():
    # alpha = cos(y) dx has curl (0, 0, sin y)
    a = TrigOneForm.from_terms([(0, (0, 1, 0), 0.5)], K=1)
    g = 8
    y = np.arange(g) * 2 * np.pi / g
    vals = a.values(g)
    assert np.allclose(vals[0], np.cos(y)[None, :, None] * np.ones((g, g, g)), atol=1e-14)
    from flatreeb.forms import _table_to_grid
    curl = _table_to_grid(a.d(), g)
    assert np.allclose(curl[2], np.sin(y)[None, :, None] * np.ones((g, g, g)), atol=1e-14)
    assert np.allclose(curl[:2], 0.0)


def test_trig_form_rejects_non_real():
    c = np.zeros((3, 3, 3, 3), dtype=complex)
    c[0, 2, 1, 1] = 1.0
    with pytest.raises(ValueError):
        TrigOneForm(c)


def test_identity31():
    rng = np.random.default_rng(7)
    for _ in range(5):
        res = check_identity_31(TrigOneForm.random(rng), TrigOneForm.random(rng))
        assert max(res) < 1e-10
    with pytest.raises(ValueError):
        check_identity_31(TrigOneForm.random(rng, K=8), TrigOneForm.random(rng, K=8))


