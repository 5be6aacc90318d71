"""Fourier tools for 2*pi-periodic samples on the uniform grid z_j = 2*pi*j/N.

All functions take the N periodic samples (endpoint excluded).  The Nyquist
mode is dropped when differentiating or integrating so that the two
operations are exact inverses on the remaining band.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def grid(n: int, endpoint: bool = True) -> np.ndarray:
    """Uniform grid on [0, 2*pi] with n cells."""
    return TWO_PI * np.arange(n + 1 if endpoint else n) / n


def _wavenumbers(n: int) -> np.ndarray:
    k = np.fft.rfftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k = k.copy()
        k[-1] = 0.0  # Nyquist mode carries no derivative information
    return k


def diff(u: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral derivative of periodic samples."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    k = _wavenumbers(n)
    return np.fft.irfft(np.fft.rfft(u, axis=-1) * (1j * k) ** order, n=n, axis=-1)


def antiderivative(u: np.ndarray) -> tuple[np.ndarray, float]:
    """Split ``u`` into mean and periodic antiderivative.

    Returns ``(P, mean)`` where ``P`` is the zero-at-origin periodic primitive of
    ``u - mean``, so the cumulative integral at node j is ``mean*z_j + P_j``.
    The total over one period, ``2*pi*mean``, coincides with the trapezoid rule.
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    uh = np.fft.rfft(u)
    mean = uh[0].real / n
    k = _wavenumbers(n)
    ph = np.zeros_like(uh)
    nz = k != 0
    ph[nz] = uh[nz] / (1j * k[nz])
    p = np.fft.irfft(ph, n=n)
    return p - p[0], float(mean)


def cumulative_integral(u: np.ndarray) -> np.ndarray:
    """Cumulative integral from 0 at the N+1 grid nodes (endpoint included)."""
    n = len(u)
    p, mean = antiderivative(u)
    z = grid(n)
    out = np.empty(n + 1)
    out[:n] = mean * z[:n] + p
    out[n] = mean * TWO_PI
    return out


def trapezoid(u: np.ndarray) -> float:
    """Periodic trapezoid rule over [0, 2*pi]; spectrally accurate."""
    u = np.asarray(u, dtype=float)
    return float(np.sum(u, axis=-1) * TWO_PI / u.shape[-1])


def interpolate(u: np.ndarray, t, block: int = 64) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic samples at points t.

    exp(i k t) is formed as exp(i b t) * exp(i j t) with k = b + j and b a
    multiple of ``block``, which needs far fewer complex exponentials than a
    direct evaluation and adds one rounding per entry.
    """
    u = np.asarray(u, dtype=float)
    n = len(u)
    uh = np.fft.rfft(u) / n
    nk = len(uh)
    w = np.full(nk, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    nb = -(-nk // block)
    coef = np.zeros(nb * block, dtype=complex)
    coef[:nk] = w * uh
    coef = coef.reshape(nb, block)
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t).ravel()
    res = np.empty(flat.shape)
    # chunk to bound memory at large N
    step = max(1, 4_000_000 // (nb * block))
    for s in range(0, len(flat), step):
        x = flat[s:s + step, None]
        base = np.exp(1j * x * (block * np.arange(nb)))
        inner = np.exp(1j * x * np.arange(block))
        res[s:s + step] = np.einsum("mb,mj,bj->m", base, inner, coef, optimize=True).real
    return res.reshape(np.atleast_1d(t).shape)


def resample(u: np.ndarray, m: int) -> np.ndarray:
    """Trigonometric interpolant of n periodic samples evaluated on m >= n nodes."""
    u = np.asarray(u, dtype=float)
    n = len(u)
    if m < n:
        raise ValueError("resample only refines")
    uh = np.fft.rfft(u)
    out = np.zeros(m // 2 + 1, dtype=complex)
    out[:len(uh)] = uh
    if n % 2 == 0 and m > n:
        out[n // 2] *= 0.5  # split the Nyquist mode between +-n/2
    return np.fft.irfft(out, n=m) * (m / n)


def gaussian_smooth(u: np.ndarray, sigma: float) -> np.ndarray:
    """Circular convolution with a sampled, normalized Gaussian of width sigma.

    The weights are positive, so positivity and ordering of the input are kept.
    """
    u = np.asarray(u, dtype=float)
    n = len(u)
    h = TWO_PI / n
    m = np.arange(n)
    m = np.minimum(m, n - m) * h
    w = np.exp(-0.5 * (m / sigma) ** 2)
    w /= w.sum()
    out = np.fft.irfft(np.fft.rfft(u) * np.fft.rfft(w), n=n)
    return out
