"""Two non-compact product models with pointwise checks.

Example (i) lives on R^3 with coordinates (x, y, z) and the field
X = sin(theta) d_x + cos(theta) d_y, where theta runs from 0 at z = 0 to
-pi at z = pi and then turns around.  The lift drops by pi, so on a torus X
would be rejected, yet on the open model

    beta = F(z) dx + y sin(theta) dz,   F(z) = int_0^z cos(theta) - 1,
    alpha = beta + 2 eps (sin(theta) dx + cos(theta) dy)

is a contact form with X conformally Reeb.  Example (ii) is a field transverse
to a contact structure that is still not conformally Reeb.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import erf

from .errors import AnchorViolation, EpsilonTooLarge

GAUSS_POINTS = 8
BLEND_SCALE = 0.04  # erf scale; the transition is complete within ~ +-0.1 of pi
CHECK_RANGE = (0.0, 2 * np.pi)
WIDE_RANGE = (-4 * np.pi, 4 * np.pi)
EXAMPLE_II_RANGE = (-20.0, 20.0)


def default_theta(z):
    """-z for z < pi and z - 2 pi for z > pi, joined smoothly at pi."""
    s = np.asarray(z, dtype=float) - np.pi
    return -np.pi + s * erf(s / BLEND_SCALE)


def default_theta_prime(z):
    s = np.asarray(z, dtype=float) - np.pi
    u = s / BLEND_SCALE
    return erf(u) + 2.0 / np.sqrt(np.pi) * u * np.exp(-u * u)


@dataclass(frozen=True)
class OpenThetaSpec:
    theta: Callable = default_theta
    theta_prime: Callable = default_theta_prime
    z_range: tuple[float, float] = CHECK_RANGE
    grid: int = 4000

    def __post_init__(self):
        t0 = float(self.theta(0.0))
        tpi = float(self.theta(np.pi))
        if abs(t0) >= 1e-12:
            raise AnchorViolation(f"theta(0) = {t0!r}, expected 0")
        if abs(tpi + np.pi) >= 1e-9:
            raise AnchorViolation(f"theta(pi) = {tpi!r}, expected -pi")
        lo, hi = self.z_range
        if not lo <= 0.0 < hi:
            raise ValueError("z_range must contain 0")

    def nodes(self) -> np.ndarray:
        """Uniform nodes that contain z = 0 exactly."""
        lo, hi = self.z_range
        h = (hi - lo) / self.grid
        k0 = round(-lo / h)
        return (np.arange(self.grid + 1) - k0) * h


def cumulative_gauss(func: Callable, z: np.ndarray, order: int = GAUSS_POINTS) -> np.ndarray:
    """int_0^{z_k} func at the nodes, composite Gauss-Legendre per cell.

    The node z = 0 must be present.
    """
    x, wts = np.polynomial.legendre.leggauss(order)
    a, b = z[:-1], z[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    cells = half * (func(pts) @ wts)
    total = np.concatenate([[0.0], np.cumsum(cells)])
    k0 = int(np.flatnonzero(z == 0.0)[0])
    return total - total[k0]


@dataclass
class ExampleIForms:
    """Coefficients on the z nodes.  dx, dy, dz parts for 1-forms and
    (dy^dz, dz^dx, dx^dy) parts for 2-forms.  y enters beta only through
    its dz part, which does not affect alpha(X) or d(beta)."""

    z: np.ndarray
    theta: np.ndarray
    F: np.ndarray
    beta_xy: np.ndarray
    alpha_theta: np.ndarray
    alpha_xy: np.ndarray
    d_beta: np.ndarray
    d_alpha: np.ndarray


def _report_on(forms: ExampleIForms, theta_prime: np.ndarray, eps: float, mask) -> dict:
    th = forms.theta[mask]
    X = np.stack([np.sin(th), np.cos(th), np.zeros_like(th)])
    beta_X = np.sum(forms.beta_xy[:, mask] * X[:2], axis=0)
    alpha_X = np.sum(forms.alpha_xy[:, mask] * X[:2], axis=0)
    A, B, C = forms.d_alpha[:, mask]
    u, v, w = X
    contraction = np.stack([B * w - C * v, C * u - A * w, A * v - B * u])
    # d(alpha) on the plane spanned by d_z and cos(theta) d_x - sin(theta) d_y
    e1 = np.zeros_like(X)
    e1[2] = 1.0
    e2 = np.stack([np.cos(th), -np.sin(th), np.zeros_like(th)])
    det = np.sum(forms.d_alpha[:, mask] * np.cross(e1, e2, axis=0), axis=0)
    factor = 1.0 + 2.0 * eps * theta_prime[mask]
    prop = np.max(np.abs(forms.d_alpha[:, mask] - factor * forms.d_beta[:, mask]))
    guarded = beta_X >= -eps + 1e-8
    return {
        "z_min": float(forms.z[mask][0]),
        "z_max": float(forms.z[mask][-1]),
        "min_alpha_X": float(np.min(alpha_X)),
        "min_beta_X": float(np.min(beta_X)),
        "sup_iX_dalpha": float(np.max(np.abs(contraction))),
        "min_nondegeneracy": float(np.min(det)),
        "min_factor": float(np.min(factor)),
        "proportionality_residual": float(prop),
        "bound_holds_where_guarded": bool(np.all(alpha_X[guarded] >= eps - 1e-8)),
    }


def build_example_i(spec: OpenThetaSpec | None = None, eps: float = 0.1,
                    wide_range: tuple[float, float] | None = WIDE_RANGE) -> tuple[ExampleIForms, dict]:
    """Assemble beta, alpha_theta, alpha and the pointwise report.

    The report's main block covers ``spec.z_range``.  If ``wide_range`` is
    given the same quantities are recomputed there under ``"wide"``; outside
    [0, 2 pi] the bound beta(X) >= -eps fails for this theta, so that block is
    informational.
    """
    spec = spec or OpenThetaSpec()
    if eps <= 0:
        raise EpsilonTooLarge("eps must be positive")
    forms, tp = _assemble(spec, eps)
    report = {"eps": eps, **_report_on(forms, tp, eps, slice(None))}
    if wide_range is not None:
        wide_spec = OpenThetaSpec(spec.theta, spec.theta_prime, wide_range,
                                  round(spec.grid * (wide_range[1] - wide_range[0])
                                        / (spec.z_range[1] - spec.z_range[0])))
        wide_forms, wtp = _assemble(wide_spec, eps)
        report["wide"] = _report_on(wide_forms, wtp, eps, slice(None))
    return forms, report


def _assemble(spec: OpenThetaSpec, eps: float) -> tuple[ExampleIForms, np.ndarray]:
    z = spec.nodes()
    th = np.asarray(spec.theta(z), dtype=float)
    tp = np.asarray(spec.theta_prime(z), dtype=float)
    if np.min(1.0 + 2.0 * eps * tp) <= 0:
        raise EpsilonTooLarge(f"1 + 2 eps theta' <= 0 somewhere for eps = {eps!r}")
    F = cumulative_gauss(lambda t: np.cos(spec.theta(t)), z) - 1.0
    s, c = np.sin(th), np.cos(th)
    beta_xy = np.stack([F, np.zeros_like(F)])
    alpha_theta = np.stack([s, c])
    alpha_xy = beta_xy + 2.0 * eps * alpha_theta
    # d(F dx) = F' dz^dx with F' = cos(theta); d(y sin(theta) dz) = sin(theta) dy^dz
    d_beta = np.stack([s, c, np.zeros_like(s)])
    d_alpha_theta = tp * np.stack([s, c, np.zeros_like(s)])
    d_alpha = d_beta + 2.0 * eps * d_alpha_theta
    forms = ExampleIForms(z=z, theta=th, F=F, beta_xy=beta_xy, alpha_theta=alpha_theta,
                          alpha_xy=alpha_xy, d_beta=d_beta, d_alpha=d_alpha)
    return forms, tp


def example_ii_phi(z):
    """A diffeomorphism of R onto (-pi/4, pi/4)."""
    return 0.5 * np.arctan(z)


def example_ii_phi_prime(z):
    return 0.5 / (1.0 + np.asarray(z, dtype=float) ** 2)


def check_example_ii(phi_range_bound: float = np.pi / 4, grid: int = 4001) -> dict:
    """X = d_y + d_z against Y = sin(phi) d_x + cos(phi) d_y."""
    z = np.linspace(*EXAMPLE_II_RANGE, grid)
    ph = example_ii_phi(z)
    sup_phi = float(np.max(np.abs(ph)))
    inner = np.cos(ph)
    return {
        "z_min": float(z[0]),
        "z_max": float(z[-1]),
        "min_inner_XY": float(np.min(inner)),
        "certified_lower_bound": float(np.cos(phi_range_bound)),
        "sup_abs_phi": sup_phi,
        "range_respected": bool(sup_phi < phi_range_bound),
        "min_phi_prime": float(np.min(example_ii_phi_prime(z))),
        "phi_prime_at_0": float(example_ii_phi_prime(0.0)),
        # dz(X) on the torus {z = 0}: X has unit d_z component everywhere
        "transversality_dz_X": 1.0,
    }
