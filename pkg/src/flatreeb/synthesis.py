"""Construction of monotone lifts phi with |phi - theta| < pi/2.

The set B of such lifts is convex.  Its elements are built from the monotone
envelopes of the tube theta +- w: ``low`` is the smallest nondecreasing
function above theta - w and ``high`` the largest one below theta + w.  Any
nondecreasing target clamped between them stays in the tube, and the result is
smoothed by convolving its derivative density with a positive kernel, which
keeps monotonicity and makes the lift spectrally resolved on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import spectral
from .circle_map import TWO_PI, CircleMap, ExtremaList
from .errors import InfeasibleIntervals, MaxBias, NotEquivariant, TubeViolation

DEFAULT_DELTA = np.pi / 64
DEFAULT_ETA = 1e-3
BIAS_START = 0.05
MAX_ESCALATIONS = 20
SMOOTHING_WIDTH = 0.05
SLOPE_RTOL = 1e-6
NEUTRAL, MINUS, PLUS, PLAN = "neutral", "minus", "plus", "plan"


@dataclass(frozen=True)
class PlateauPlan:
    extrema: ExtremaList
    intervals: tuple[tuple[float, float], ...]
    levels: tuple[float, ...]
    # the recursion starts from the last plateau and ignores the wrap to the
    # next period; this records whether c_1 + 2*pi*deg >= c_n nonetheless
    wrap_consistent: bool = True


@dataclass(frozen=True, eq=False)
class ScrewData:
    """Generator of a cyclic group acting on T^3 by a screw motion along z."""

    translation: float
    rotation: float
    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("group order must be positive")
        if not 0 < self.translation <= TWO_PI:
            raise ValueError("translation must lie in (0, 2*pi]")
        for name, v in (("translation", self.translation), ("rotation", self.rotation)):
            r = (self.order * v) % TWO_PI
            if min(r, TWO_PI - r) > 1e-9:
                raise ValueError(f"order * {name} must be a multiple of 2*pi")

    @classmethod
    def standard(cls, order: int, rotation: float) -> "ScrewData":
        return cls(TWO_PI / order, rotation, order)


@dataclass(frozen=True, eq=False)
class PhiFunction:
    map: CircleMap
    delta: float
    eta: float
    bias: str = NEUTRAL
    meta: dict = field(default_factory=dict)

    @property
    def samples(self) -> np.ndarray:
        return self.map.samples

    @property
    def derivative(self) -> np.ndarray:
        return self.map.derivative

    @property
    def degree(self) -> int:
        return self.map.degree

    def combine(self, other: "PhiFunction", s: float) -> "PhiFunction":
        """The convex combination (1 - s)*self + s*other."""
        samples = (1.0 - s) * self.samples + s * other.samples
        meta = {"combination": float(s)}
        return PhiFunction(CircleMap(samples), min(self.delta, other.delta),
                           min(self.eta, other.eta), NEUTRAL, meta)


def tube_distance(theta: CircleMap, phi: PhiFunction | CircleMap) -> float:
    m = phi.map if isinstance(phi, PhiFunction) else phi
    return float(np.max(np.abs(m.samples - theta.samples)))


def min_slope(phi: PhiFunction | CircleMap) -> float:
    """Minimum of sign(deg)*phi' over the grid."""
    m = phi.map if isinstance(phi, PhiFunction) else phi
    sgn = 1 if m.degree >= 0 else -1
    return float(np.min(sgn * m.derivative))


def in_tube(theta: CircleMap, phi: PhiFunction, delta: float | None = None,
            eta: float | None = None) -> bool:
    delta = phi.delta if delta is None else delta
    eta = phi.eta if eta is None else eta
    return (phi.degree == theta.degree
            and tube_distance(theta, phi) <= np.pi / 2 - delta / 2
            # spectral differentiation of the smoothed lift costs a few ulps
            and min_slope(phi) >= eta * (1.0 - SLOPE_RTOL))


def plateau_levels(theta: CircleMap, ext: ExtremaList, tol: float = 1e-12) -> PlateauPlan:
    """Interval plan for a lift of positive degree.

    I_k = [theta(a_k) - pi/2, theta(b_k) + pi/2]; levels are filled backwards
    with c_n = max I_n and c_k = min(c_{k+1}, max I_k).
    """
    if theta.degree <= 0:
        raise ValueError("plateau_levels expects a lift of positive degree")
    intervals = []
    for va, vb in zip(ext.max_values, ext.min_values):
        lo, hi = va - np.pi / 2, vb + np.pi / 2
        if lo > hi + tol:
            raise InfeasibleIntervals(f"empty interval [{lo!r}, {hi!r}]")
        intervals.append((float(lo), float(hi)))
    levels = [0.0] * len(intervals)
    for k in reversed(range(len(intervals))):
        top = intervals[k][1]
        levels[k] = top if k == len(intervals) - 1 else min(levels[k + 1], top)
        if levels[k] < intervals[k][0] - tol:
            raise InfeasibleIntervals(f"level {levels[k]!r} below interval {k + 1}")
    wrap = not levels or levels[0] + TWO_PI * theta.degree >= levels[-1] - tol
    return PlateauPlan(ext, tuple(intervals), tuple(levels), wrap)


# monotone envelopes on the grid; v has N+1 samples and v(t + 2pi) = v(t) + 2pi*d

def _running_max(v: np.ndarray, d: int) -> np.ndarray:
    n = len(v) - 1
    ext = np.concatenate([v[:-1] - TWO_PI * d, v])
    return np.maximum.accumulate(ext)[n:]


def _running_min_forward(v: np.ndarray, d: int) -> np.ndarray:
    n = len(v) - 1
    ext = np.concatenate([v, v[1:] + TWO_PI * d])
    return np.minimum.accumulate(ext[::-1])[::-1][:n + 1]


def envelopes(u: np.ndarray, d: int, half_width: float) -> tuple[np.ndarray, np.ndarray]:
    return _running_max(u - half_width, d), _running_min_forward(u + half_width, d)


def _plan_target(z: np.ndarray, u: np.ndarray, d: int, plan: PlateauPlan | None) -> np.ndarray:
    if plan is None or not plan.levels:
        return u.copy()
    ext = plan.extrema
    knots_t, knots_v = [], []
    for a, b, c in zip(ext.maxima, ext.minima, plan.levels):
        knots_t += [a, b]
        knots_v += [c, c]
    kt = np.array(knots_t)
    kv = np.array(knots_v)
    kt = np.concatenate([kt - TWO_PI, kt, kt + TWO_PI])
    kv = np.concatenate([kv - TWO_PI * d, kv, kv + TWO_PI * d])
    return np.interp(z, kt, kv)


def mollify(phi0: np.ndarray, d: int, sigma: float, eta: float) -> np.ndarray:
    """Smooth a nondecreasing lift of degree d > 0 keeping slope >= eta.

    The increments are turned into a node density, convolved with a sampled
    Gaussian (positive weights) and integrated spectrally, so the spectral
    derivative of the result equals the smoothed density exactly.
    """
    n = len(phi0) - 1
    h = TWO_PI / n
    inc = np.clip(np.diff(phi0), 0.0, None)
    rho = 0.5 * (inc + np.roll(inc, 1)) / h
    rho = rho * (d / rho.mean())
    rho = spectral.gaussian_smooth(rho, sigma)
    rho = eta + (1.0 - eta / d) * rho
    p, _ = spectral.antiderivative(rho - d)
    z = spectral.grid(n)
    per0 = phi0[:-1] - d * z[:-1]
    p = p + (per0.mean() - p.mean())
    out = np.empty(n + 1)
    out[:-1] = d * z[:-1] + p
    out[-1] = out[0] + TWO_PI * d
    return out


def _sigma_schedule(n: int, sigma: float | None) -> list[float]:
    floor = 20.0 / n
    s = max(SMOOTHING_WIDTH if sigma is None else sigma, floor)
    out = [s]
    while out[-1] / 2 >= floor:
        out.append(out[-1] / 2)
    return out


def _smoothed_in_tube(u: np.ndarray, d: int, phi0: np.ndarray, delta: float, eta: float,
                      sigma: float | None) -> tuple[np.ndarray, float]:
    n = len(u) - 1
    worst = np.inf
    for s in _sigma_schedule(n, sigma):
        phi = mollify(phi0, d, s, eta)
        dist = float(np.max(np.abs(phi - u)))
        if dist <= np.pi / 2 - delta / 2:
            return phi, s
        worst = min(worst, dist)
    raise TubeViolation(
        f"smoothed lift leaves the tube: sup|phi - theta| = {worst:.6g} > pi/2 - delta/2")


def _oriented(theta: CircleMap) -> tuple[CircleMap, int]:
    if theta.degree == 0:
        raise ValueError("degree-zero maps admit no monotone lift in the tube")
    return (theta, 1) if theta.degree > 0 else (-theta, -1)


def centered_target(u: np.ndarray, d: int) -> np.ndarray:
    """Midpoint of the lowest nondecreasing lift above u and the highest below it.

    It equals u wherever u has no dip, and on a dip of depth D it is a
    plateau with |target - u| <= D/2.
    """
    return 0.5 * (_running_max(u, d) + _running_min_forward(u, d))


def _targets(u_map: CircleMap, plan: PlateauPlan | None, bias: str, shift: float,
             low: np.ndarray, high: np.ndarray) -> np.ndarray:
    u = np.asarray(u_map.samples)
    d = u_map.degree
    if bias == PLAN:
        target = _running_max(_plan_target(u_map.z, u, d, plan), d)
    elif bias in (NEUTRAL, MINUS, PLUS):
        sgn = {NEUTRAL: 0.0, MINUS: -1.0, PLUS: 1.0}[bias]
        target = centered_target(u, d) + sgn * shift
    else:
        raise ValueError(f"unknown bias {bias!r}")
    return np.clip(target, low, high)


def build_phi(theta: CircleMap, plan: PlateauPlan | None = None, delta: float = DEFAULT_DELTA,
              eta: float = DEFAULT_ETA, bias: str = NEUTRAL,
              sigma: float | None = None) -> PhiFunction:
    """Build a PhiFunction in B for an accepted lift.

    The neutral variant smooths ``centered_target``.  The ``plan`` variant
    follows the piecewise-linear plateau path of ``plan`` instead, which
    refers to the positive-degree orientation (the plan of -theta when
    deg < 0).  The biased variants shift the centered target by ``shift``,
    doubled until the functional I has sign -1 for ``minus`` and +1 for
    ``plus``.
    """
    from .solver import functional_I

    if not 0 < delta < np.pi / 4:
        raise ValueError("delta must lie in (0, pi/4)")
    u_map, sgn = _oriented(theta)
    u = np.asarray(u_map.samples)
    d = u_map.degree
    w = np.pi / 2 - delta
    low, high = envelopes(u, d, w)
    if np.any(low > high + 1e-12):
        raise TubeViolation("no monotone lift fits in the tube; delta too large for this map")

    shifts = [None] if bias in (NEUTRAL, PLAN) else [min(BIAS_START * 2.0 ** i, w)
                                              for i in range(MAX_ESCALATIONS)]
    want = {MINUS: -1.0, PLUS: 1.0}.get(bias)
    for i, shift in enumerate(shifts):
        phi0 = _targets(u_map, plan, bias, shift or 0.0, low, high)
        samples, used_sigma = _smoothed_in_tube(u, d, phi0, delta, eta, sigma)
        meta = {"sigma": used_sigma, "shift": shift, "escalations": i}
        phi = PhiFunction(CircleMap(sgn * samples), delta, eta, bias, meta)
        if want is None or np.sign(functional_I(theta, phi, check=False)) == want:
            return phi
    raise MaxBias(f"could not force sign of I for bias {bias!r} after {MAX_ESCALATIONS} escalations")


# equivariance under the screw motion t -> t + lambda, theta -> theta + rotation

def _grid_shift(m: CircleMap, screw: ScrewData) -> int:
    steps = screw.translation * m.n / TWO_PI
    k = int(round(steps))
    if abs(steps - k) > 1e-9:
        raise ValueError(f"grid size {m.n} is not compatible with translation {screw.translation!r}")
    return k


def _extended(m: CircleMap, periods: int = 2) -> np.ndarray:
    s = np.asarray(m.samples)
    parts = [s] + [s[1:] + TWO_PI * m.degree * p for p in range(1, periods)]
    return np.concatenate(parts)


def lifted_rotation(theta: CircleMap, screw: ScrewData) -> float:
    """Real lift of the rotation angle realized by theta over one translation."""
    k = _grid_shift(theta, screw)
    ext = _extended(theta)
    return float(np.mean(ext[k:k + theta.n + 1] - ext[:theta.n + 1]))


def equivariance_residual(m: CircleMap, screw: ScrewData, rotation: float | None = None) -> float:
    """sup_t |m(t + lambda) - m(t) - rotation| on the grid."""
    k = _grid_shift(m, screw)
    ext = _extended(m)
    jump = ext[k:k + m.n + 1] - ext[:m.n + 1]
    rot = lifted_rotation(m, screw) if rotation is None else rotation
    return float(np.max(np.abs(jump - rot)))


def check_equivariant(theta: CircleMap, screw: ScrewData, tol: float = 1e-9) -> float:
    rot = lifted_rotation(theta, screw)
    off = (rot - screw.rotation) % TWO_PI
    if min(off, TWO_PI - off) > tol or equivariance_residual(theta, screw, rot) > tol:
        raise NotEquivariant("theta(t + lambda) - theta(t) is not the screw rotation")
    return rot


def symmetrize(phi: PhiFunction, screw: ScrewData, rotation: float) -> PhiFunction:
    """Average phi over the cyclic group: (1/m) sum_j phi(t + j*lambda) - j*rotation."""
    k = _grid_shift(phi.map, screw)
    n = phi.map.n
    ext = _extended(phi.map, screw.order + 1)
    acc = np.zeros(n + 1)
    for j in range(screw.order):
        acc += ext[j * k:j * k + n + 1] - j * rotation
    meta = dict(phi.meta, symmetrized=screw.order)
    return replace(phi, map=CircleMap(acc / screw.order), meta=meta)


def seam_residuals(phi: PhiFunction | CircleMap, screw: ScrewData,
                   rotation: float) -> tuple[float, float]:
    """Equivariance residual and C^1 mismatch |phi'(lambda^-) - phi'(0^+)| at the seam."""
    m = phi.map if isinstance(phi, PhiFunction) else phi
    k = _grid_shift(m, screw)
    res = equivariance_residual(m, screw, rotation)
    dphi = np.append(m.derivative, m.derivative[0])
    return res, float(abs(dphi[k] - dphi[0]))


def build_equivariant_phi(theta: CircleMap, screw: ScrewData, delta: float = DEFAULT_DELTA,
                          eta: float = DEFAULT_ETA, bias: str = NEUTRAL,
                          plan: PlateauPlan | None = None) -> PhiFunction:
    from .solver import functional_I

    rot = check_equivariant(theta, screw)
    phi = symmetrize(build_phi(theta, plan, delta, eta, bias), screw, rot)
    res, c1 = seam_residuals(phi, screw, rot)
    if res > 1e-9 or c1 > 1e-6:
        raise NotEquivariant(f"seam residual {res:.3g}, derivative mismatch {c1:.3g}")
    if not in_tube(theta, phi):
        raise TubeViolation("group average left the tube")
    want = {MINUS: -1.0, PLUS: 1.0}.get(bias)
    if want is not None and np.sign(functional_I(theta, phi, check=False)) != want:
        raise MaxBias("group average lost the sign of I")
    return replace(phi, meta=dict(phi.meta, rotation=rot, seam_residual=res, seam_c1=c1))
