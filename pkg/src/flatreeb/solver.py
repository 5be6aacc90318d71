"""Balancing the functional I and assembling Reeb certificates.

For phi in B the form alpha_phi = sin(phi) dx + cos(phi) dy is contact with
Reeb field (sin phi, cos phi, 0).  The rescaling f X_T = R_{alpha/g} holds with
g = f cos(phi - theta) once f solves

    f' cos(phi - theta) + f theta' sin(phi - theta) = 0,

and f is periodic exactly when I(phi) = int tan(phi - theta) theta' dt vanishes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .circle_map import DEFAULT_FLAT_TOL, TWO_PI, CircleMap, find_extrema, perturb
from .criterion import DECISION_TOL, decide
from .errors import (BadBracket, CriterionFailed, DegenerateCritical, NoConvergence,
                     QuadratureMismatch, TanOverflow, TubeViolation)
from .forms import angle_field, contact_density, reeb_residual, ZOneForm
from .synthesis import (DEFAULT_DELTA, DEFAULT_ETA, MINUS, NEUTRAL, PLUS, PhiFunction,
                        ScrewData, build_equivariant_phi, build_phi, check_equivariant,
                        min_slope, plateau_levels, seam_residuals, tube_distance)

log = logging.getLogger(__name__)

AGREEMENT_TOL = 1e-8
MAX_REFINEMENTS = 3
BALANCE_TOL = 1e-10
EXACT_BALANCE = 1e-14  # below this the neutral lift is taken without bisection
MAX_BISECTIONS = 200
TAN_GUARD = 1e-6

# bounds every certificate must meet
TOLERANCES = {
    "I_residual": BALANCE_TOL,
    "f_periodicity": 1e-9,
    "reeb_alpha": 1e-8,
    "reeb_contraction": 1e-7,
}


def _angle_gap(theta: CircleMap, phi) -> np.ndarray:
    m = phi.map if isinstance(phi, PhiFunction) else phi
    gap = m.samples[:-1] - theta.samples[:-1]
    if np.max(np.abs(gap)) >= np.pi / 2 - TAN_GUARD:
        raise TanOverflow(f"sup|phi - theta| = {np.max(np.abs(gap))!r} reaches pi/2")
    return gap


def functional_I(theta: CircleMap, phi, check: bool = True) -> float:
    """I(phi) by the trapezoid rule, cross-checked against the phi' form."""
    m = phi.map if isinstance(phi, PhiFunction) else phi
    t = np.tan(_angle_gap(theta, m))
    with_theta = spectral.trapezoid(t * theta.derivative)
    if check:
        with_phi = spectral.trapezoid(t * m.derivative)
        if abs(with_theta - with_phi) > AGREEMENT_TOL:
            raise QuadratureMismatch(
                f"I quadratures disagree: {with_theta!r} vs {with_phi!r}")
    return with_theta


def functional_I_both(theta: CircleMap, phi) -> tuple[float, float]:
    m = phi.map if isinstance(phi, PhiFunction) else phi
    t = np.tan(_angle_gap(theta, m))
    return spectral.trapezoid(t * theta.derivative), spectral.trapezoid(t * m.derivative)


def find_balanced_phi(theta: CircleMap, phi_minus: PhiFunction, phi_plus: PhiFunction,
                      tol: float = BALANCE_TOL, max_iter: int = MAX_BISECTIONS) -> PhiFunction:
    """Bisection on s for I((1 - s) phi_minus + s phi_plus) = 0.

    Only the sign change is used; I is continuous in s but need not be
    monotone.  Bisection runs until the bracket is exhausted in floating
    point, because a residual |I| leaves f with a jump of the same relative
    size, which spectral derivatives of 1/g then amplify.
    """
    lo_val = functional_I(theta, phi_minus, check=False)
    hi_val = functional_I(theta, phi_plus, check=False)
    if not (lo_val < 0.0 < hi_val):
        raise BadBracket(f"need I(phi-) < 0 < I(phi+), got {lo_val!r} and {hi_val!r}")
    lo, hi = 0.0, 1.0
    best = None
    it = 0
    for it in range(1, max_iter + 1):
        s = 0.5 * (lo + hi)
        if not lo < s < hi:
            break
        phi = phi_minus.combine(phi_plus, s)
        val = functional_I(theta, phi, check=False)
        if best is None or abs(val) < abs(best[1]):
            best = (phi, val, s, it)
        if val == 0.0:
            break
        if val < 0.0:
            lo = s
        else:
            hi = s
    if best is None or abs(best[1]) >= tol:
        got = abs(lo_val) if best is None else abs(best[1])
        raise NoConvergence(f"bisection stalled at |I| = {got:.3g} after {it} steps")
    phi, val, s, found = best
    phi.meta.update(iterations=found, s=s, I=val)
    return phi


def integrate_log_f(theta: CircleMap, phi) -> tuple[np.ndarray, float]:
    """f = exp(-cumulative integral of tan(phi - theta) theta') at the N+1 nodes."""
    m = phi.map if isinstance(phi, PhiFunction) else phi
    integrand = np.tan(_angle_gap(theta, m)) * theta.derivative
    f = np.exp(-spectral.cumulative_integral(integrand))
    return f, float(abs(f[-1] - 1.0))


def verify_ode_residual(theta: CircleMap, phi, f: np.ndarray) -> float:
    """sup |f' cos(phi - theta) + f theta' sin(phi - theta)| on the grid."""
    m = phi.map if isinstance(phi, PhiFunction) else phi
    n = theta.n
    logf = np.log(np.asarray(f, dtype=float))
    slope = (logf[-1] - logf[0]) / TWO_PI
    z = spectral.grid(n)[:-1]
    dlog = spectral.diff(logf[:-1] - slope * z) + slope
    fn = f[:-1]
    gap = m.samples[:-1] - theta.samples[:-1]
    res = fn * dlog * np.cos(gap) + fn * theta.derivative * np.sin(gap)
    return float(np.max(np.abs(res)))


@dataclass(frozen=True, eq=False)
class ReebCertificate:
    """phi, f and g realizing f X_T = R_{alpha_phi / g}, with residuals."""

    theta: CircleMap
    phi: PhiFunction
    f: np.ndarray
    g: np.ndarray
    winding: int
    n_value: float
    residuals: dict
    meta: dict = field(default_factory=dict)

    def contact_form(self) -> ZOneForm:
        """(1/g) alpha_phi as a z-only 1-form."""
        ph = self.phi.samples[:-1]
        g = self.g[:-1]
        return ZOneForm.periodic(np.sin(ph) / g, np.cos(ph) / g, 0.0)

    def rescaled_field(self):
        return angle_field(self.theta, self.f[:-1])

    def failures(self) -> list[str]:
        out = [k for k, tol in TOLERANCES.items() if not self.residuals[k] < tol]
        if not self.residuals["min_contact_density"] > 0:
            out.append("min_contact_density")
        if not (np.all(self.f > 0) and np.all(self.g > 0)):
            out.append("positivity")
        return out

    @property
    def ok(self) -> bool:
        return not self.failures()


def _extrema_plan(theta: CircleMap, flat_tol: float):
    """Plan on the positive-degree orientation, perturbing degenerate inputs."""
    u = theta if theta.degree > 0 else -theta
    perturbed = False
    try:
        ext = find_extrema(u, flat_tol)
    except DegenerateCritical:
        u = perturb(u, flat_tol)
        perturbed = True
        ext = find_extrema(u, flat_tol)
    return plateau_levels(u, ext), perturbed


def synthesize_certificate(theta: CircleMap, delta: float = DEFAULT_DELTA, eta: float = DEFAULT_ETA,
                           screw: ScrewData | None = None, decision_tol: float = DECISION_TOL,
                           flat_tol: float = DEFAULT_FLAT_TOL, sigma: float | None = None,
                           max_refinements: int = MAX_REFINEMENTS) -> ReebCertificate:
    """Full pipeline from an accepted lift to a verified certificate.

    Near the acceptance boundary phi - theta comes close to pi/2 and tan(phi -
    theta) develops narrow peaks.  If the residuals miss their tolerances the
    lift is moved to a grid twice as fine (through its trigonometric
    interpolant) and the synthesis is repeated, up to ``max_refinements``
    times.  The last certificate is returned either way; check ``ok``.
    """
    decision = decide(theta, decision_tol)
    if not decision.accepted:
        raise CriterionFailed(f"criterion rejects theta: {decision.reason}", decision=decision)
    for level in range(max_refinements + 1):
        last = level == max_refinements
        try:
            cert = _synthesize_once(theta, decision, delta, eta, screw, flat_tol, sigma)
        except (TubeViolation, NoConvergence) as exc:
            # the smoothing width is tied to the grid, so coarse grids can fail
            if last:
                raise
            reason = str(exc)
        else:
            cert.meta.update(refinements=level, grid=theta.n)
            if cert.ok or last:
                return cert
            reason = ", ".join(cert.failures())
        log.info("refining grid to N = %d: %s", 2 * theta.n, reason)
        theta = theta.refined(2)
    raise AssertionError("unreachable")


def _synthesize_once(theta: CircleMap, decision, delta: float, eta: float,
                     screw: ScrewData | None, flat_tol: float,
                     sigma: float | None) -> ReebCertificate:
    # the tube must leave room for the drawdown: need max_drawdown < pi - 2*delta
    delta_eff = min(delta, decision.margin / 3.0)
    plan, perturbed = _extrema_plan(theta, flat_tol)

    rotation = None
    if screw is not None:
        rotation = check_equivariant(theta, screw)

    def make(bias):
        if screw is None:
            return build_phi(theta, plan, delta_eff, eta, bias, sigma)
        return build_equivariant_phi(theta, screw, delta_eff, eta, bias, plan)

    phi = make(NEUTRAL)
    value = functional_I(theta, phi, check=False)
    if abs(value) < EXACT_BALANCE:
        phi.meta.update(iterations=0, I=value)
    elif value < 0.0:
        # B is convex: bracket against the neutral lift so the balanced phi
        # stays close to it instead of hugging the tube walls
        phi = find_balanced_phi(theta, phi, make(PLUS))
    else:
        phi = find_balanced_phi(theta, make(MINUS), phi)

    I_theta, I_phi = functional_I_both(theta, phi)
    if abs(I_theta - I_phi) > AGREEMENT_TOL:
        raise QuadratureMismatch(f"I quadratures disagree: {I_theta!r} vs {I_phi!r}")
    f, periodicity = integrate_log_f(theta, phi)
    g = f * np.cos(phi.samples - theta.samples)

    cert = ReebCertificate(theta=theta, phi=phi, f=f, g=g, winding=theta.degree,
                           n_value=TWO_PI * theta.degree, residuals={}, meta={})
    alpha = cert.contact_form()
    pair, contr = reeb_residual(alpha, cert.rescaled_field())
    sgn = 1 if theta.degree > 0 else -1
    density = sgn * contact_density(alpha)
    formula = sgn * phi.derivative / g[:-1] ** 2
    cert.residuals.update(
        I_residual=abs(I_theta),
        I_quadrature_gap=abs(I_theta - I_phi),
        f_periodicity=periodicity,
        reeb_alpha=pair,
        reeb_contraction=contr,
        min_contact_density=float(np.min(density)),
        density_formula_gap=float(np.max(np.abs(density - formula))),
        ode_residual=verify_ode_residual(theta, phi, f),
        tube_distance=tube_distance(theta, phi),
        min_slope=min_slope(phi),
    )
    cert.meta.update(
        delta=delta_eff, eta=eta, perturbed=perturbed, margin=decision.margin,
        max_drawdown=decision.max_drawdown, plan_wrap_consistent=plan.wrap_consistent,
        plateaus=len(plan.levels), bisection_iterations=phi.meta.get("iterations"),
        sigma=phi.meta.get("sigma"),
    )
    if screw is not None:
        res, c1 = seam_residuals(phi, screw, rotation)
        cert.residuals.update(seam_residual=res, seam_c1=c1)
        cert.meta.update(order=screw.order, rotation=rotation)
    log.debug("certificate residuals: %s", cert.residuals)
    return cert
