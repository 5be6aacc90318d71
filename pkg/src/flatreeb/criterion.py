"""Drawdown criterion deciding whether a geodesic field X_T is conformally Reeb.

For positive degree the field is conformally Reeb exactly when the lift never
drops by pi or more: theta(b) - theta(a) > -pi for all a < b.  Negative degree
is the mirror image, and degree zero is always rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.optimize import minimize_scalar

from .circle_map import TWO_PI, CircleMap
from .errors import Borderline, ZeroDegree

DECISION_TOL = 1e-7
CONFORMALLY_REEB = "ConformallyReeb"
NOT_REEB = "NotReeb"
BORDERLINE = "Borderline"


@dataclass(frozen=True)
class DrawdownWitness:
    a: float
    b: float
    drop: float


@dataclass(frozen=True)
class ReebDecision:
    verdict: str
    degree: int
    max_drawdown: float
    witness: DrawdownWitness | None
    margin: float
    reason: str = ""

    @property
    def accepted(self) -> bool:
        return self.verdict == CONFORMALLY_REEB


def _oriented(m: CircleMap) -> tuple[np.ndarray, int]:
    """Samples flipped so that the degree is positive, and the flip sign."""
    sgn = 1 if m.degree >= 0 else -1
    return sgn * np.asarray(m.samples), sgn


def _extend(u: np.ndarray, d: int, periods: int) -> np.ndarray:
    n = len(u) - 1
    parts = [u] + [u[1:] + TWO_PI * d * p for p in range(1, periods)]
    return np.concatenate(parts) if periods > 1 else u.copy()


def drawdown_streaming(m: CircleMap) -> tuple[float, int, int]:
    """O(N) drawdown on grid pairs via a running maximum.

    Returns ``(value, i, j)`` with ``a = z_i`` and ``b = z_j``; j may exceed N
    (b beyond 2*pi).  Pairs wider than one period never win for |deg| >= 1, so
    the running maximum need not be windowed.
    """
    u, _ = _oriented(m)
    d = abs(m.degree)
    n = m.n
    ext = _extend(u, d, 2)
    cand = ext.copy()
    cand[n + 1:] = -np.inf
    run = np.maximum.accumulate(cand)
    idx = np.arange(len(ext))
    arg = np.maximum.accumulate(np.where(cand >= run, idx, 0))
    gain = run - ext
    j = int(np.argmax(gain))
    return float(gain[j]), int(arg[j]), j


def drawdown_window_oracle(m: CircleMap, periods: int = 1, chunk: int = 512) -> tuple[float, int, int]:
    """Brute force over all grid pairs a in [0, 2*pi], b in [a, a + 2*pi*periods]."""
    u, _ = _oriented(m)
    d = abs(m.degree)
    n = m.n
    ext = _extend(u, d, periods + 1)
    width = periods * n + 1
    windows = sliding_window_view(ext, width)
    best, bi, bj = -np.inf, 0, 0
    for s in range(0, n + 1, chunk):
        rows = windows[s:min(s + chunk, n + 1)]
        gains = ext[s:s + len(rows), None] - rows
        k = np.unravel_index(int(np.argmax(gains)), gains.shape)
        if gains[k] > best:
            best, bi, bj = float(gains[k]), s + int(k[0]), s + int(k[0]) + int(k[1])
    return best, bi, bj


def _refine_pair(m: CircleMap, sgn: int, i: int, j: int) -> tuple[float, float, float]:
    """Polish grid extrema (i, j) to the continuous local max/min of the lift."""
    h = TWO_PI / m.n
    za, zb = i * h, j * h

    def theta(t):
        return sgn * m.evaluate_spectral(t)

    ra = minimize_scalar(lambda t: -theta(t), bounds=(za - h, za + h), method="bounded",
                         options={"xatol": 1e-13})
    rb = minimize_scalar(theta, bounds=(zb - h, zb + h), method="bounded",
                         options={"xatol": 1e-13})
    a, b = (float(ra.x), float(rb.x))
    va = max(-ra.fun, theta(za))
    vb = min(rb.fun, theta(zb))
    if va == theta(za):
        a = za
    if vb == theta(zb):
        b = zb
    return float(va - vb), a, b


def max_drawdown(m: CircleMap, refine: bool = True) -> tuple[float, DrawdownWitness]:
    """Largest decrease of the lift against its degree orientation.

    For deg > 0 this is sup theta(a) - theta(b) over a < b; for deg < 0 it is
    sup theta(b) - theta(a).  The value is >= 0.
    """
    if m.degree == 0:
        raise ZeroDegree("drawdown criterion needs nonzero degree")
    value, i, j = drawdown_streaming(m)
    h = TWO_PI / m.n
    a, b = i * h, j * h
    if refine and value > 0.0:
        sgn = 1 if m.degree > 0 else -1
        value, a, b = _refine_pair(m, sgn, i, j)
    return value, DrawdownWitness(a=a, b=b, drop=value)


def _degree_zero_decision(m: CircleMap) -> ReebDecision:
    s = np.asarray(m.samples[:-1])
    i = int(np.argmax(s))
    rolled = np.roll(s, -i)
    j = i + int(np.argmin(rolled))
    value, a, b = _refine_pair(m, 1, i, j)
    witness = DrawdownWitness(a=a, b=b, drop=value) if value >= np.pi else None
    return ReebDecision(verdict=NOT_REEB, degree=0, max_drawdown=value, witness=witness,
                        margin=np.pi - value, reason="degree zero")


def decide(m: CircleMap, decision_tol: float = DECISION_TOL) -> ReebDecision:
    if m.degree == 0:
        return _degree_zero_decision(m)
    value, witness = max_drawdown(m)
    margin = np.pi - value
    if abs(margin) < decision_tol:
        dec = ReebDecision(verdict=BORDERLINE, degree=m.degree, max_drawdown=value,
                           witness=witness, margin=margin,
                           reason="drawdown within tolerance of pi")
        raise Borderline(f"drawdown {value!r} is within {decision_tol:g} of pi", decision=dec)
    if margin > 0:
        return ReebDecision(verdict=CONFORMALLY_REEB, degree=m.degree, max_drawdown=value,
                            witness=None, margin=margin, reason="drawdown below pi")
    return ReebDecision(verdict=NOT_REEB, degree=m.degree, max_drawdown=value, witness=witness,
                        margin=margin, reason="drawdown at least pi")
