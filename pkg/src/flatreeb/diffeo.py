"""Explicit diffeomorphisms and their pullback checks.

``std_map`` carries the standard form dz + x dy on R^3 to
sin(nz) dx + cos(nz) dy.  ``straightening_residual`` checks the z-only
reparametrization z -> phi^{-1}(w z) taking alpha_phi to alpha_w.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .circle_map import TWO_PI, CircleMap
from .errors import ZeroFrequency
from .synthesis import PhiFunction

INVERSE_TOL = 1e-10
BOX = 3.0


class PointR3(NamedTuple):
    x: float
    y: float
    z: float


def std_map(n: float, p) -> np.ndarray:
    """(x, y, z) -> (z sin(ny) - x cos(ny)/n, z cos(ny) + x sin(ny)/n, y).

    ``p`` may be a single point or an array of shape (..., 3).
    """
    if n == 0:
        raise ZeroFrequency("frequency n must be nonzero")
    p = np.asarray(p, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    s, c = np.sin(n * y), np.cos(n * y)
    return np.stack([z * s - x * c / n, z * c + x * s / n, y], axis=-1)


def std_map_jacobian(n: float, p) -> np.ndarray:
    """Analytic Jacobian of ``std_map``, shape (..., 3, 3), rows = output components."""
    if n == 0:
        raise ZeroFrequency("frequency n must be nonzero")
    p = np.asarray(p, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    s, c = np.sin(n * y), np.cos(n * y)
    zero, one = np.zeros_like(x), np.ones_like(x)
    rows = [
        [-c / n, n * z * c + x * s, s],
        [s / n, -n * z * s + x * c, c],
        [zero, one, zero],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def std_pullback_residual(n: float, sample_count: int = 1000, seed: int = 0) -> float:
    """max |(D Psi)^T alpha_n(Psi(p)) - (0, x, 1)| over random p in a box."""
    if n == 0:
        raise ZeroFrequency("frequency n must be nonzero")
    rng = np.random.default_rng(seed)
    p = rng.uniform(-BOX, BOX, size=(sample_count, 3))
    image = std_map(n, p)
    w = image[:, 2]
    target_form = np.stack([np.sin(n * w), np.cos(n * w), np.zeros_like(w)], axis=-1)
    pulled = np.einsum("kij,ki->kj", std_map_jacobian(n, p), target_form)
    standard = np.stack([np.zeros(sample_count), p[:, 0], np.ones(sample_count)], axis=-1)
    return float(np.max(np.abs(pulled - standard)))


def _as_map(phi) -> CircleMap:
    return phi.map if isinstance(phi, PhiFunction) else phi


def phi_inverse(phi, y, tol: float = INVERSE_TOL):
    """t with phi(t) = y for the monotone cubic lift, by vectorized bisection.

    The lift is extended by phi(t + 2 pi) = phi(t) + 2 pi deg, so any real y
    is attained.
    """
    m = _as_map(phi)
    d = m.degree
    if d == 0:
        raise ValueError("a degree-zero lift is not invertible")
    y_arr = np.asarray(y, dtype=float)
    yv = np.atleast_1d(y_arr).ravel()
    phi0 = float(m.samples[0])
    k = np.floor((yv - phi0) / (TWO_PI * d))
    lo, hi = TWO_PI * k, TWO_PI * (k + 1)
    sgn = 1.0 if d > 0 else -1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = sgn * (m.evaluate(mid) - yv) < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) <= 4 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(hi)))):
            break
    t = 0.5 * (lo + hi)
    resid = np.abs(m.evaluate(t) - yv)
    if np.max(resid) >= tol:
        raise ArithmeticError(f"inverse residual {np.max(resid):.3g} above {tol:g}")
    return float(t[0]) if y_arr.ndim == 0 else t.reshape(y_arr.shape)


def straightening_residual(cert, sample_count: int = 1000, seed: int = 0) -> float:
    """max |Psi^* alpha_phi - alpha_w| for Psi(x, y, z) = (x, y, phi^{-1}(w z)).

    The inverse comes from the monotone cubic and phi is re-evaluated through
    its trigonometric interpolant, so the residual measures how well the
    two representations of phi agree.
    """
    m = _as_map(cert.phi)
    w = m.degree
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.0, TWO_PI, size=sample_count)
    h = phi_inverse(m, w * z)
    ph = m.evaluate_spectral(h)
    # chain rule for the z-slot: alpha_phi has no dz part, so it stays zero
    dh = w / m.derivative_at(h)
    pulled = np.stack([np.sin(ph), np.cos(ph), 0.0 * dh], axis=-1)
    target = np.stack([np.sin(w * z), np.cos(w * z), np.zeros_like(z)], axis=-1)
    return float(np.max(np.abs(pulled - target)))
