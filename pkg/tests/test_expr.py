from __future__ import annotations

import numpy as np
import pytest

from flatreeb.circle_map import degree
from flatreeb.errors import NonIntegerDegree, NonPeriodic, ParseError
from flatreeb.expr import Harmonic, parse_theta
from flatreeb.spectral import grid

from corpus import corpus


@pytest.mark.parametrize("src, m", [
    ("z", 1),
    ("-z", -1),
    ("2*z - 0.3*cos(3*z + 0.5)", 2),
    ("z + 1.5 sin(z)", 1),
    ("3z+sin(2z-1)+cos(z)", 3),
    ("0.5*z + 0.5*z + 2", 1),
    ("+z - 2*z", -1),
    ("1e-1*sin(z) + z", 1),
])
def test_degrees(src, m):
    assert parse_theta(src).m == m


def test_values_match_closed_form():
    th = parse_theta("2*z - 0.3*cos(3*z + 0.5) + 1.25")
    z = np.linspace(0, 7, 50)
    assert np.allclose(th(z), 2 * z - 0.3 * np.cos(3 * z + 0.5) + 1.25, atol=1e-15)
    assert th.harmonics == (Harmonic(-0.3, 3, 0.5, "cos"),)


@pytest.mark.parametrize("src, exc, pos", [
    ("1.5*z", NonIntegerDegree, 0),
    ("z^2", NonPeriodic, 1),
    ("z + exp(z)", NonPeriodic, 4),
    ("z + sin(0.5*z)", NonPeriodic, 8),
    ("z + sin(x)", NonPeriodic, 8),
    ("z + ", ParseError, 4),
    ("z + sin(z", ParseError, 9),
    ("z $ 1", ParseError, 2),
    ("z z", ParseError, 2),
])
def test_errors_carry_positions(src, exc, pos):
    with pytest.raises(exc) as info:
        parse_theta(src)
    assert info.value.position == pos


def test_error_hierarchy():
    assert issubclass(NonIntegerDegree, ParseError)
    assert issubclass(NonPeriodic, ParseError)


def test_corpus_sources_round_trip():
    for th in corpus(50):
        again = parse_theta(th.source)
        assert again == th
        assert degree(again.sample(256)) == th.m
        assert again.sample_wrapped(512).degree == th.m


def test_sample_wrapped_matches_sample_up_to_shift():
    th = parse_theta("-2*z + 1.1*sin(z + 0.4)")
    a, b = th.sample(512).samples, th.sample_wrapped(512).samples
    shift = b[0] - a[0]
    assert abs(shift / (2 * np.pi) - round(shift / (2 * np.pi))) < 1e-12
    assert np.allclose(b - shift, a, atol=1e-12)
    assert len(a) == len(grid(512))
