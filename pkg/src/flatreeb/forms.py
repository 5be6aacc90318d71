"""Differential forms on the flat torus T^3 = R^3 / (2*pi*Z)^3.

Two representations are used.  Forms whose coefficients depend only on z are
sampled on the z-grid and differentiated spectrally; this class contains
every contact form built by the solver.  Fully three-dimensional 1-forms are
real trigonometric polynomials stored as coefficient tables, on which d is
exact.

Basis conventions: 1-forms p dx + q dy + r dz are triples (p, q, r); 2-forms
A dy^dz + B dz^dx + C dx^dy are triples (A, B, C).  With these, d of a 1-form
is its curl, d of a 2-form its divergence, and 1-form ^ 2-form is the dot
product times dx^dy^dz.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import spectral
from .circle_map import TWO_PI, CircleMap
from .errors import FlatReebError, PreconditionFailed
from .synthesis import ScrewData, check_equivariant

FIBER_AREA = TWO_PI ** 2
PERIODIC_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class _ZTriple:
    """Three coefficient arrays of N+1 samples in z, periodic."""

    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray

    def __post_init__(self):
        arrs = [np.array(np.broadcast_to(c, np.shape(self.c1)), dtype=float)
                for c in (self.c1, self.c2, self.c3)]
        n1 = arrs[0].shape
        if any(a.shape != n1 or a.ndim != 1 for a in arrs):
            raise ValueError("coefficient arrays must be 1-d of equal length")
        for a in arrs:
            if abs(a[-1] - a[0]) > PERIODIC_TOL * max(1.0, abs(a[0])):
                raise ValueError("coefficients must be periodic (first and last samples equal)")
            a.setflags(write=False)
        for name, a in zip(("c1", "c2", "c3"), arrs):
            object.__setattr__(self, name, a)

    @classmethod
    def periodic(cls, c1, c2, c3):
        """Build from the N periodic samples (endpoint appended)."""
        n = max(np.size(c) for c in (c1, c2, c3))
        cols = [np.broadcast_to(np.asarray(c, dtype=float), (n,)) for c in (c1, c2, c3)]
        return cls(*[np.append(c, c[0]) for c in cols])

    @property
    def n(self) -> int:
        return len(self.c1) - 1

    def stack(self) -> np.ndarray:
        """Periodic samples as a (3, N) array."""
        return np.stack([self.c1[:-1], self.c2[:-1], self.c3[:-1]])

    def __add__(self, other):
        return type(self)(self.c1 + other.c1, self.c2 + other.c2, self.c3 + other.c3)

    def scale(self, s):
        s = np.append(s, np.asarray(s).ravel()[0]) if np.ndim(s) else s
        return type(self)(self.c1 * s, self.c2 * s, self.c3 * s)


class ZOneForm(_ZTriple):
    """p(z) dx + q(z) dy + r(z) dz."""

    @property
    def p(self):
        return self.c1

    @property
    def q(self):
        return self.c2

    @property
    def r(self):
        return self.c3


class ZTwoForm(_ZTriple):
    """A(z) dy^dz + B(z) dz^dx + C(z) dx^dy."""

    @property
    def A(self):
        return self.c1

    @property
    def B(self):
        return self.c2

    @property
    def C(self):
        return self.c3


class ZVectorField(_ZTriple):
    """u E_1 + v E_2 + w E_3 with components depending on z."""

    @property
    def u(self):
        return self.c1

    @property
    def v(self):
        return self.c2

    @property
    def w(self):
        return self.c3


def angle_form(angle: CircleMap | np.ndarray) -> ZOneForm:
    """sin(angle) dx + cos(angle) dy."""
    a = angle.samples[:-1] if isinstance(angle, CircleMap) else np.asarray(angle)
    return ZOneForm.periodic(np.sin(a), np.cos(a), 0.0)


def angle_field(angle: CircleMap | np.ndarray, speed=1.0) -> ZVectorField:
    """speed * (sin(angle) E_1 + cos(angle) E_2)."""
    a = angle.samples[:-1] if isinstance(angle, CircleMap) else np.asarray(angle)
    return ZVectorField.periodic(speed * np.sin(a), speed * np.cos(a), 0.0)


def exterior_derivative_z(alpha: ZOneForm) -> ZTwoForm:
    """d(p dx + q dy + r dz) = -q' dy^dz + p' dz^dx."""
    p, q, _ = alpha.stack()
    return ZTwoForm.periodic(-spectral.diff(q), spectral.diff(p), 0.0)


def wedge_density(alpha: ZOneForm, omega: ZTwoForm) -> np.ndarray:
    """Coefficient of dx^dy^dz in alpha ^ omega at the N periodic nodes."""
    return np.sum(alpha.stack() * omega.stack(), axis=0)


def contact_density(alpha: ZOneForm) -> np.ndarray:
    """alpha ^ d(alpha) = (q p' - p q') dx^dy^dz, sampled at the N nodes."""
    return wedge_density(alpha, exterior_derivative_z(alpha))


def contract(V: ZVectorField, omega: ZTwoForm) -> ZOneForm:
    """Interior product i_V omega."""
    u, v, w = V.stack()
    A, B, C = omega.stack()
    return ZOneForm.periodic(B * w - C * v, C * u - A * w, A * v - B * u)


def pairing(alpha: ZOneForm, V: ZVectorField) -> np.ndarray:
    return np.sum(alpha.stack() * V.stack(), axis=0)


def reeb_residual(alpha: ZOneForm, V: ZVectorField) -> tuple[float, float]:
    """(sup |alpha(V) - 1|, sup-norm of i_V d(alpha))."""
    pair = float(np.max(np.abs(pairing(alpha, V) - 1.0)))
    contr = float(np.max(np.abs(contract(V, exterior_derivative_z(alpha)).stack())))
    return pair, contr


def volume_z(alpha: ZOneForm) -> float:
    """Integral of alpha ^ d(alpha) over T^3."""
    return FIBER_AREA * spectral.trapezoid(contact_density(alpha))


def check_connection_volume_independence(theta: CircleMap, c=0.3, mu=0.0,
                                         tol: float = 1e-12) -> float:
    """Volume difference between two connection forms of X_T = (sin theta, cos theta, 0).

    The second form is alpha_1 + c dz + mu (cos theta dx - sin theta dy); ``c``
    may be a constant or an array of N samples.  Both forms must satisfy
    alpha(X) = 1 and i_X d(alpha) = 0 up to ``tol`` before volumes are compared.
    """
    th = theta.samples[:-1]
    a1 = angle_form(theta)
    extra = ZOneForm.periodic(mu * np.cos(th), -mu * np.sin(th), c)
    a2 = a1 + extra
    X = angle_field(theta)
    for name, a in (("alpha_1", a1), ("alpha_2", a2)):
        pair, contr = reeb_residual(a, X)
        if pair > tol or contr > tol:
            raise PreconditionFailed(
                f"{name} is not a connection form: |alpha(X) - 1| = {pair:.3g}, "
                f"|i_X d alpha| = {contr:.3g}")
    return abs(volume_z(a1) - volume_z(a2))


def _kernel_lines(alpha: ZOneForm) -> np.ndarray:
    k = exterior_derivative_z(alpha).stack()
    norm = np.linalg.norm(k, axis=0)
    if np.any(norm == 0):
        raise PreconditionFailed("d(alpha) vanishes somewhere")
    return k / norm


def _positively_proportional(alpha0: ZOneForm, alpha1: ZOneForm, tol: float) -> bool:
    """alpha1 = h alpha0 with h > 0: same oriented contact structure."""
    a0, a1 = alpha0.stack(), alpha1.stack()
    n0, n1 = np.linalg.norm(a0, axis=0), np.linalg.norm(a1, axis=0)
    sine = np.linalg.norm(np.cross(a0, a1, axis=0), axis=0) / (n0 * n1)
    return bool(np.max(sine) <= tol and np.all(np.sum(a0 * a1, axis=0) > 0))


def check_gray_segment(alpha0: ZOneForm, alpha1: ZOneForm, tol: float = 1e-9,
                       steps: int = 11) -> float:
    """Minimum oriented contact density along (1 - t) alpha0 + t alpha1.

    The endpoints must have parallel Reeb lines or be positive multiples of
    each other; in the latter case every alpha_t is a positive multiple too.
    """
    d0, d1 = contact_density(alpha0), contact_density(alpha1)
    s0, s1 = np.sign(d0), np.sign(d1)
    if np.any(s0 == 0) or np.any(s0 != s0[0]) or np.any(s1 != s0[0]):
        raise PreconditionFailed("contact densities must share one sign")
    cross = np.linalg.norm(np.cross(_kernel_lines(alpha0), _kernel_lines(alpha1), axis=0), axis=0)
    if np.max(cross) > tol and not _positively_proportional(alpha0, alpha1, tol):
        raise PreconditionFailed(f"Reeb lines disagree by {np.max(cross):.3g}")
    orient = s0[0]
    best = np.inf
    for t in np.linspace(0.0, 1.0, steps):
        mix = alpha0.scale(1.0 - t) + alpha1.scale(t)
        best = min(best, float(np.min(orient * contact_density(mix))))
    return best


def covering_volume(theta: CircleMap, screw: ScrewData) -> tuple[float, float]:
    """Volume of X_T on T^3 and of the descended field on T^3 / Gamma."""
    check_equivariant(theta, screw)
    vol_torus = volume_z(angle_form(theta))
    vol_quotient = vol_torus / screw.order
    w = vol_quotient * screw.order / FIBER_AREA / TWO_PI
    if abs(w - theta.degree) > 1e-9:
        raise FlatReebError(f"volume relation gives winding {w!r}, expected {theta.degree}")
    return vol_torus, vol_quotient


# band-limited forms in three variables

class TrigOneForm:
    """Real 1-form with trigonometric-polynomial coefficients of degree <= K.

    ``coeffs`` has shape (3, 2K+1, 2K+1, 2K+1); entry [c, i, j, l] multiplies
    exp(i((i-K)x + (j-K)y + (l-K)z)) in component c.
    """

    def __init__(self, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 4 or coeffs.shape[0] != 3 or len(set(coeffs.shape[1:])) != 1:
            raise ValueError("coefficient table must have shape (3, 2K+1, 2K+1, 2K+1)")
        if coeffs.shape[1] % 2 == 0:
            raise ValueError("table side must be odd")
        conj = np.conj(coeffs[:, ::-1, ::-1, ::-1])
        if not np.allclose(coeffs, conj, atol=1e-14):
            raise ValueError("coefficients are not conjugate-symmetric; form is not real")
        self.coeffs = 0.5 * (coeffs + conj)
        self.K = (coeffs.shape[1] - 1) // 2

    @classmethod
    def random(cls, rng: np.random.Generator, K: int = 3, scale: float = 1.0) -> "TrigOneForm":
        side = 2 * K + 1
        c = rng.normal(size=(3, side, side, side)) + 1j * rng.normal(size=(3, side, side, side))
        c = 0.5 * (c + np.conj(c[:, ::-1, ::-1, ::-1]))
        return cls(scale * c / side ** 1.5)

    @classmethod
    def from_terms(cls, terms, K: int = 3) -> "TrigOneForm":
        """Build from (component, (kx, ky, kz), complex amplitude) terms; the
        conjugate partner of each term is added automatically."""
        side = 2 * K + 1
        c = np.zeros((3, side, side, side), dtype=complex)
        for comp, (kx, ky, kz), amp in terms:
            c[comp, kx + K, ky + K, kz + K] += amp
            c[comp, K - kx, K - ky, K - kz] += np.conj(amp)
        return cls(c)

    def __sub__(self, other: "TrigOneForm") -> "TrigOneForm":
        return TrigOneForm(self.coeffs - other.coeffs)

    def values(self, g: int = 32) -> np.ndarray:
        return _table_to_grid(self.coeffs, g)

    def d(self) -> np.ndarray:
        """Coefficient table of the curl (the 2-form d alpha)."""
        K = self.K
        k = np.arange(-K, K + 1)
        ikx, iky, ikz = (1j * k[:, None, None], 1j * k[None, :, None], 1j * k[None, None, :])
        a1, a2, a3 = self.coeffs
        return np.stack([iky * a3 - ikz * a2, ikz * a1 - ikx * a3, ikx * a2 - iky * a1])


def _table_to_grid(table: np.ndarray, g: int) -> np.ndarray:
    K = (table.shape[1] - 1) // 2
    if 2 * K >= g:
        raise ValueError("grid too coarse for the band limit")
    full = np.zeros((3, g, g, g), dtype=complex)
    idx = np.arange(-K, K + 1) % g
    full[np.ix_(range(3), idx, idx, idx)] = table
    return np.real(np.fft.ifftn(full, axes=(1, 2, 3)) * g ** 3)


def _grid_divergence(field: np.ndarray) -> np.ndarray:
    """Divergence of a band-limited 2-form sampled on a g^3 grid (exact below g/2)."""
    g = field.shape[1]
    k = np.fft.fftfreq(g, d=1.0 / g)
    kx, ky, kz = np.meshgrid(k, k, k, indexing="ij")
    hat = np.fft.fftn(field, axes=(1, 2, 3))
    div = 1j * (kx * hat[0] + ky * hat[1] + kz * hat[2])
    return np.real(np.fft.ifftn(div))


class Identity31Residuals(NamedTuple):
    pointwise: float
    integral: float
    exact_term_integral: float


def check_identity_31(alpha: TrigOneForm, beta: TrigOneForm, g: int = 32) -> Identity31Residuals:
    """Residuals of a^da - b^db = (a - b)^(da + db) + d(a^b) on T^3.

    The last term is differentiated spectrally from the sampled product, which
    is exact when 4K < g.
    """
    if 4 * max(alpha.K, beta.K) >= g:
        raise ValueError("grid too coarse for the product of the two forms")
    a, b = alpha.values(g), beta.values(g)
    da, db = _table_to_grid(alpha.d(), g), _table_to_grid(beta.d(), g)
    lhs = np.sum(a * da, axis=0) - np.sum(b * db, axis=0)
    exact = _grid_divergence(np.cross(a, b, axis=0))
    rhs = np.sum((a - b) * (da + db), axis=0) + exact
    vol = TWO_PI ** 3
    return Identity31Residuals(
        pointwise=float(np.max(np.abs(lhs - rhs))),
        integral=float(abs(lhs.mean() - rhs.mean()) * vol),
        exact_term_integral=float(abs(exact.mean()) * vol),
    )
