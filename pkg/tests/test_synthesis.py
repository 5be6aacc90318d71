from __future__ import annotations

import numpy as np
import pytest

from flatreeb.circle_map import CircleMap, find_extrema
from flatreeb.errors import InfeasibleIntervals, NotEquivariant, TubeViolation
from flatreeb.synthesis import (MINUS, NEUTRAL, PLAN, PLUS, ScrewData, build_equivariant_phi,
                                build_phi, centered_target, check_equivariant, in_tube,
                                min_slope, plateau_levels, seam_residuals, tube_distance)
from flatreeb.solver import functional_I


def lift(f, n=2048):
    return CircleMap.from_function(f, n)


def test_centered_target_is_identity_without_dips():
    u = lift(lambda z: z + 0.5 * np.sin(z)).samples
    assert np.array_equal(centered_target(u, 1), u)


def test_centered_target_is_monotone_and_close():
    th = lift(lambda z: z + 1.5 * np.sin(z))
    u = th.samples
    c = centered_target(u, 1)
    assert np.all(np.diff(c) >= 0)
    assert np.max(np.abs(c - u)) <= 0.5 * 0.5539306363639298 + 1e-12


def test_plateau_levels_wobble():
    th = lift(lambda z: z + 1.5 * np.sin(z))
    plan = plateau_levels(th, find_extrema(th))
    lo, hi = plan.intervals[0]
    assert lo == pytest.approx(3.418557971771758 - np.pi / 2, abs=1e-9)
    assert hi == pytest.approx(2.8646273354078287 + np.pi / 2, abs=1e-9)
    assert plan.levels == (hi,)
    assert plan.wrap_consistent


def test_plateau_levels_infeasible():
    th = lift(lambda z: z + 3.5 * np.sin(z))
    with pytest.raises(InfeasibleIntervals):
        plateau_levels(th, find_extrema(th))


@pytest.mark.parametrize("bias", [NEUTRAL, PLAN, MINUS, PLUS])
def test_build_phi_in_tube(bias):
    th = lift(lambda z: z + 1.5 * np.sin(z))
    plan = plateau_levels(th, find_extrema(th))
    phi = build_phi(th, plan, bias=bias)
    assert in_tube(th, phi)
    assert tube_distance(th, phi) <= np.pi / 2 - phi.delta / 2
    assert min_slope(phi) >= phi.eta * (1 - 1e-6)
    if bias == MINUS:
        assert functional_I(th, phi) < 0
    if bias == PLUS:
        assert functional_I(th, phi) > 0


def test_build_phi_negative_degree():
    th = lift(lambda z: -2 * z + 0.7 * np.cos(3 * z))
    phi = build_phi(th)
    assert phi.degree == -2 and in_tube(th, phi)


def test_build_phi_rejects_bad_inputs():
    th = lift(lambda z: z + 3.5 * np.sin(z))
    with pytest.raises(TubeViolation):
        build_phi(th)
    with pytest.raises(ValueError):
        build_phi(lift(lambda z: z), delta=1.0)


def test_combine_is_convex():
    th = lift(lambda z: z + 1.5 * np.sin(z))
    a, b = build_phi(th, bias=MINUS), build_phi(th, bias=PLUS)
    mid = a.combine(b, 0.25)
    assert np.allclose(mid.samples, 0.75 * a.samples + 0.25 * b.samples)
    assert in_tube(th, mid)


def test_screw_data_validation():
    s = ScrewData.standard(4, np.pi / 2)
    assert s.order == 4 and s.translation == pytest.approx(np.pi / 2)
    with pytest.raises(ValueError):
        ScrewData.standard(4, 1.0)
    with pytest.raises(ValueError):
        ScrewData(0.0, 0.0, 2)


def test_equivariant_phi_has_seamless_symmetry():
    th = lift(lambda z: 2 * z + 0.8 * np.sin(4 * z + 0.3), 3072)
    screw = ScrewData.standard(2, 0.0)
    rot = check_equivariant(th, screw)
    phi = build_equivariant_phi(th, screw)
    res, c1 = seam_residuals(phi, screw, rot)
    assert res < 1e-9 and c1 < 1e-6
    assert in_tube(th, phi)


def test_not_equivariant():
    th = lift(lambda z: z + 0.8 * np.sin(z), 3072)
    with pytest.raises(NotEquivariant):
        check_equivariant(th, ScrewData.standard(2, 0.0))
