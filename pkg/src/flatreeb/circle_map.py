"""Circle maps represented by their real lifts on a uniform grid."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from . import spectral
from .errors import AmbiguousLift, DegenerateCritical, DegreeMismatch

TWO_PI = spectral.TWO_PI
MIN_GRID = 64
DEFAULT_GRID = 2048
DEFAULT_FLAT_TOL = 1e-9
GAP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CircleMap:
    """Lift of a map S^1 -> S^1 sampled at z_j = 2*pi*j/N, j = 0..N.

    The endpoint gap ``samples[N] - samples[0]`` is snapped to ``2*pi*degree``.
    """

    samples: np.ndarray
    degree: int = field(init=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or len(s) < MIN_GRID + 1:
            raise ValueError(f"need at least {MIN_GRID + 1} samples, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        gap = s[-1] - s[0]
        d = int(round(gap / TWO_PI))
        scale = max(1.0, float(np.max(np.abs(s))))
        if abs(gap - TWO_PI * d) > GAP_TOL * scale:
            raise ValueError(f"endpoint gap {gap!r} is not a multiple of 2*pi")
        s[-1] = s[0] + TWO_PI * d
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "degree", d)

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], n: int = DEFAULT_GRID,
                      tol: float = 1e-9) -> "CircleMap":
        """Sample a closed-form lift on the grid."""
        z = spectral.grid(n)
        s = np.asarray(func(z), dtype=float) * np.ones_like(z)
        gap = s[-1] - s[0]
        d = round(gap / TWO_PI)
        if abs(gap - TWO_PI * d) > tol:
            raise ValueError(f"function is not a circle map lift: gap {gap!r}")
        s[-1] = s[0] + TWO_PI * d
        return cls(s)

    @property
    def n(self) -> int:
        return len(self.samples) - 1

    @property
    def z(self) -> np.ndarray:
        return spectral.grid(self.n)

    @property
    def periodic_part(self) -> np.ndarray:
        """theta(z) - degree*z at the N periodic nodes."""
        return self.samples[:-1] - self.degree * self.z[:-1]

    @cached_property
    def derivative(self) -> np.ndarray:
        d = spectral.diff(self.periodic_part) + self.degree
        d.setflags(write=False)
        return d

    @cached_property
    def _hermite(self) -> CubicHermiteSpline:
        z = self.z
        y = self.samples
        dy = np.append(self.derivative, self.derivative[0])
        return CubicHermiteSpline(z, y, _limit_slopes(y, dy, z[1] - z[0]))

    def evaluate(self, t) -> np.ndarray | float:
        """Monotone-cubic evaluation with periodic extension of the lift."""
        t = np.asarray(t, dtype=float)
        k = np.floor(t / TWO_PI)
        r = t - TWO_PI * k
        out = self._hermite(r) + TWO_PI * self.degree * k
        return float(out) if out.ndim == 0 else out

    def evaluate_spectral(self, t) -> np.ndarray | float:
        """Evaluation through the trigonometric interpolant of the periodic part."""
        t = np.asarray(t, dtype=float)
        out = spectral.interpolate(self.periodic_part, t) + self.degree * t
        return float(out[0]) if t.ndim == 0 else out

    def derivative_at(self, t) -> np.ndarray | float:
        t = np.asarray(t, dtype=float)
        out = spectral.interpolate(self.derivative, t)
        return float(out[0]) if t.ndim == 0 else out

    def refined(self, factor: int = 2) -> "CircleMap":
        """Same lift on a grid ``factor`` times finer, via the trigonometric interpolant."""
        m = self.n * factor
        per = spectral.resample(self.periodic_part, m)
        z = spectral.grid(m)
        return CircleMap(np.append(per, per[0]) + self.degree * z)

    def shifted(self, c: float) -> "CircleMap":
        return CircleMap(self.samples + c)

    def __neg__(self) -> "CircleMap":
        return CircleMap(-self.samples)


def _limit_slopes(y: np.ndarray, dy: np.ndarray, h: float) -> np.ndarray:
    """Fritsch-Carlson limiting on intervals where data and slopes agree in sign."""
    delta = np.diff(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = dy[:-1] * h / delta
        b = dy[1:] * h / delta
        r = np.hypot(a, b)
        tau = np.where((delta != 0) & (a > 0) & (b > 0) & (r > 3.0), 3.0 / r, 1.0)
    scale = np.ones_like(dy)
    scale[:-1] = tau
    scale[1:] = np.minimum(scale[1:], tau)
    scale[0] = scale[-1] = min(scale[0], scale[-1])
    return dy * scale


def lift_samples(raw, degree_hint: int | None = None) -> CircleMap:
    """Unwrap circle-valued samples (radians) at z_j, j = 0..N, into a lift."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1 or len(raw) < MIN_GRID + 1:
        raise ValueError(f"need at least {MIN_GRID + 1} samples")
    steps = np.diff(raw)
    wrapped = steps - TWO_PI * np.round(steps / TWO_PI)
    bad = np.flatnonzero(np.abs(wrapped) >= np.pi / 2)
    if bad.size:
        j = int(bad[0])
        raise AmbiguousLift(f"jump {steps[j]!r} between samples {j} and {j + 1} has no clear branch")
    lift = raw[0] + np.concatenate([[0.0], np.cumsum(wrapped)])
    d = int(round((lift[-1] - lift[0]) / TWO_PI))
    if degree_hint is not None and d != degree_hint:
        raise DegreeMismatch(f"unwrapped degree {d} but hint says {degree_hint}")
    lift[-1] = lift[0] + TWO_PI * d
    return CircleMap(lift)


def degree(m: CircleMap) -> int:
    return m.degree


def evaluate_lift(m: CircleMap, t):
    return m.evaluate(t)


def derivative(m: CircleMap) -> np.ndarray:
    return np.array(m.derivative)


@dataclass(frozen=True)
class ExtremaList:
    """Local maxima a_k and minima b_k of a lift, a_1 < b_1 < ... < a_n < b_n.

    ``a_1`` lies in [0, 2*pi); the last minimum may be carried past 2*pi so the
    list always starts with a maximum.
    """

    maxima: tuple[float, ...] = ()
    minima: tuple[float, ...] = ()
    max_values: tuple[float, ...] = ()
    min_values: tuple[float, ...] = ()

    @property
    def n(self) -> int:
        return len(self.maxima)

    def points(self) -> list[float]:
        return [p for pair in zip(self.maxima, self.minima) for p in pair]


def find_extrema(m: CircleMap, flat_tol: float = DEFAULT_FLAT_TOL) -> ExtremaList:
    d = m.derivative
    n = len(d)
    z = m.z
    sign = np.where(d > flat_tol, 1, np.where(d < -flat_tol, -1, 0))
    if not np.any(sign):
        raise DegenerateCritical("derivative vanishes on the whole grid")
    _check_flat_runs(sign)
    if not (np.any(sign > 0) and np.any(sign < 0)):
        return ExtremaList()

    nz = np.flatnonzero(sign)
    crit = []
    for idx, i in enumerate(nz):
        j = nz[(idx + 1) % len(nz)]
        if sign[i] == sign[j]:
            continue
        lo = z[i]
        hi = z[j] if j > i else z[j] + TWO_PI
        root = brentq(lambda t: m.derivative_at(t), lo, hi, xtol=1e-14, rtol=1e-14)
        crit.append((root % TWO_PI, "max" if sign[i] > 0 else "min"))
    crit.sort()
    if crit[0][1] == "min":
        t, kind = crit.pop(0)
        crit.append((t + TWO_PI, kind))
    kinds = [c[1] for c in crit]
    if kinds[0::2] != ["max"] * (len(crit) // 2) or kinds[1::2] != ["min"] * (len(crit) // 2):
        raise DegenerateCritical("critical points do not alternate")
    maxima = tuple(c[0] for c in crit[0::2])
    minima = tuple(c[0] for c in crit[1::2])
    return ExtremaList(
        maxima=maxima,
        minima=minima,
        max_values=tuple(float(v) for v in m.evaluate_spectral(np.array(maxima))),
        min_values=tuple(float(v) for v in m.evaluate_spectral(np.array(minima))),
    )


def _check_flat_runs(sign: np.ndarray, max_cells: int = 4) -> None:
    flat = sign == 0
    if not flat.any():
        return
    # rotate so the array starts on a non-flat node; runs then never wrap
    start = int(np.argmin(flat))
    f = np.roll(flat, -start).astype(int)
    edges = np.diff(np.concatenate([[0], f, [0]]))
    runs = np.flatnonzero(edges == -1) - np.flatnonzero(edges == 1)
    if runs.size and runs.max() > max_cells:
        raise DegenerateCritical(
            f"derivative is flat within tolerance over {int(runs.max())} grid cells")


def perturb(m: CircleMap, flat_tol: float = DEFAULT_FLAT_TOL, phase: float = 1.0) -> CircleMap:
    """Add the small bump 10*flat_tol*sin(z + phase) used for degenerate inputs."""
    z = m.z
    return CircleMap(m.samples + 10.0 * flat_tol * np.sin(z + phase))
