"""Acceptance criteria 1-12; each test records one pass/fail line."""

from __future__ import annotations

import json
import time

import numpy as np
import pytest
from scipy.optimize import bisect

from acceptance_log import record
from corpus import CORPUS_SEED, random_expr
from flatreeb.circle_map import CircleMap
from flatreeb.cli import EXIT_BORDERLINE, run
from flatreeb.criterion import (NOT_REEB, decide, drawdown_streaming, drawdown_window_oracle,
                                max_drawdown)
from flatreeb.diffeo import std_pullback_residual, straightening_residual
from flatreeb.errors import Borderline
from flatreeb.forms import (FIBER_AREA, TrigOneForm, ZOneForm, angle_form,
                            check_connection_volume_independence, check_gray_segment,
                            check_identity_31, covering_volume, volume_z)
from flatreeb.open_models import build_example_i, check_example_ii
from flatreeb.solver import synthesize_certificate
from flatreeb.synthesis import DEFAULT_ETA, ScrewData

N = 2048
TWO_PI = 2 * np.pi


@pytest.fixture(scope="module")
def decisions(theta_corpus):
    out = []
    for th in theta_corpus:
        m = th.sample(N)
        try:
            out.append((m, decide(m)))
        except Borderline as exc:
            out.append((m, exc.decision))
    return out


@pytest.fixture(scope="module")
def certificates(decisions):
    return {k: synthesize_certificate(m) for k, (m, dec) in enumerate(decisions) if dec.accepted}


def test_01_oracle_equivalence(theta_corpus):
    start = time.perf_counter()
    worst_window = worst_wide = 0.0
    for th in theta_corpus:
        m = th.sample(N)
        fast = drawdown_streaming(m)[0]
        window = drawdown_window_oracle(m)[0]
        wide = drawdown_window_oracle(m, periods=3)[0]
        worst_window = max(worst_window, abs(fast - window))
        worst_wide = max(worst_wide, abs(window - wide))
    elapsed = time.perf_counter() - start
    ok = worst_window < 1e-9 and worst_wide < 1e-9 and elapsed < 30
    record(1, ok, f"{len(theta_corpus)} lifts, |stream-window| {worst_window:.1e}, "
                  f"|window-wide| {worst_wide:.1e}, {elapsed:.1f} s")
    assert ok


def test_02_synthesis_soundness(decisions, certificates):
    bad = []
    for k, cert in certificates.items():
        r = cert.residuals
        checks = (
            r["I_residual"] < 1e-10,
            r["f_periodicity"] < 1e-9,
            r["min_slope"] >= DEFAULT_ETA / 2,
            r["tube_distance"] <= np.pi / 2 - cert.meta["delta"] / 2,
            r["min_contact_density"] > 0,
            r["reeb_alpha"] < 1e-8,
            r["reeb_contraction"] < 1e-7,
            bool(np.all(cert.f > 0) and np.all(cert.g > 0)),
        )
        if not all(checks):
            bad.append(k)
    worst = max(c.residuals["reeb_contraction"] for c in certificates.values())
    ok = not bad and len(certificates) > 0
    record(2, ok, f"{len(certificates)} accepted, {len(bad)} failing, "
                  f"worst i_fX d(alpha) {worst:.1e}")
    assert ok, bad


def test_03_rejection_soundness(decisions):
    drops = [dec.witness.drop for _, dec in decisions
             if dec.verdict == NOT_REEB and dec.degree != 0]
    bad = [d for d in drops if not d >= np.pi - 1e-6]
    ok = not bad and len(drops) > 0
    record(3, ok, f"{len(drops)} rejected, min witness drop {min(drops):.6f}")
    assert ok


def test_04_volume_identity(theta_corpus):
    worst = 0.0
    for th in theta_corpus:
        m = th.sample(N)
        worst = max(worst, abs(volume_z(angle_form(m)) - TWO_PI * m.degree * FIBER_AREA))
    ident = volume_z(angle_form(CircleMap.from_function(lambda z: z, 256)))
    ok = worst < 1e-8 and abs(ident - 248.05021344239853) < 1e-10
    record(4, ok, f"worst |vol - n A| {worst:.1e}, vol(z) = {ident:.10f}")
    assert ok


def test_05_identity31():
    rng = np.random.default_rng(CORPUS_SEED)
    worst = np.zeros(3)
    for _ in range(50):
        worst = np.maximum(worst, check_identity_31(TrigOneForm.random(rng),
                                                    TrigOneForm.random(rng)))
    ok = bool(np.all(worst < 1e-10))
    record(5, ok, "50 pairs, pointwise {:.1e}, integral {:.1e}, exact term {:.1e}".format(*worst))
    assert ok


def test_06_connection_independence(theta_corpus):
    worst = 0.0
    for th in theta_corpus[:20]:
        m = th.sample(N)
        c = 0.3 + 0.2 * np.sin(m.z[:-1] + 1.0)
        worst = max(worst, check_connection_volume_independence(m, c=0.3),
                    check_connection_volume_independence(m, c=c))
    ok = worst < 1e-10
    record(6, ok, f"20 lifts, worst volume difference {worst:.1e}")
    assert ok


def equivariant_cases(orders, count, seed):
    """Accepted lifts commuting with the screw of each order, cycling through orders."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        m_order = orders[len(out) % len(orders)]
        th = random_expr(rng, step=m_order)
        rot = (th.m * TWO_PI / m_order) % TWO_PI
        lift = th.sample(3072)
        try:
            if decide(lift).accepted:
                out.append((lift, ScrewData.standard(m_order, rot)))
        except Borderline:
            pass
    return out


def test_07_covering():
    worst = 0.0
    cases = equivariant_cases((2, 3), 10, CORPUS_SEED + 7)
    for lift, screw in cases:
        vol_t, vol_q = covering_volume(lift, screw)
        worst = max(worst, abs(vol_q * screw.order - vol_t),
                    abs(vol_q * screw.order - TWO_PI * lift.degree * FIBER_AREA))
    ok = worst < 1e-10
    record(7, ok, f"{len(cases)} cases m in {{2,3}}, worst |m vol_q - vol| {worst:.1e}")
    assert ok


def test_08_straightening(theta_corpus, certificates):
    std = max(std_pullback_residual(n) for n in (1, 2, -1, TWO_PI))
    at = {N: {k: straightening_residual(c) for k, c in certificates.items()}}
    for n in (512, 8192):
        at[n] = {k: straightening_residual(synthesize_certificate(theta_corpus[k].sample(n)))
                 for k in certificates}
    worst = max(at[N].values())
    monotone = all(at[N][k] <= 2 * at[512][k] and at[8192][k] <= 2 * at[N][k]
                   for k in certificates)
    ok = std < 1e-12 and worst < 1e-6 and monotone
    record(8, ok, f"std pullback {std:.1e}, worst straightening {worst:.1e} at N=2048, "
                  f"{max(at[8192].values()):.1e} at N=8192, non-increasing: {monotone}")
    assert ok


def test_09_gray(certificates):
    worst = np.inf
    for cert in certificates.values():
        ph = cert.phi.samples[:-1]
        a0 = ZOneForm.periodic(np.sin(ph), np.cos(ph), 0.0)
        worst = min(worst, check_gray_segment(a0, cert.contact_form()))
    ok = worst > 0
    record(9, ok, f"{len(certificates)} pairs, min interpolated density {worst:.3e}")
    assert ok


def test_10_equivariance():
    cases = equivariant_cases((2, 3, 4, 6), 20, CORPUS_SEED + 10)
    seam = c1 = 0.0
    for lift, screw in cases:
        cert = synthesize_certificate(lift, screw=screw)
        assert cert.ok, cert.failures()
        seam = max(seam, cert.residuals["seam_residual"])
        c1 = max(c1, cert.residuals["seam_c1"])
    ok = seam < 1e-9 and c1 < 1e-6
    record(10, ok, f"20 cases m in {{2,3,4,6}}, seam {seam:.1e}, C1 seam {c1:.1e}")
    assert ok


def test_11_gallery():
    _, rep = build_example_i(eps=0.1)
    ii = check_example_ii()
    ok = (rep["min_alpha_X"] >= 0.1 - 1e-8 and rep["sup_iX_dalpha"] < 1e-10
          and rep["min_factor"] > 0 and ii["min_inner_XY"] > 0.70711 and ii["min_phi_prime"] > 0)
    record(11, ok, f"(i) min alpha(X) {rep['min_alpha_X']:.4f}, |i_X d alpha| "
                   f"{rep['sup_iX_dalpha']:.1e}, min factor {rep['min_factor']:.4f}; "
                   f"(ii) min <X,Y> {ii['min_inner_XY']:.5f}")
    assert ok


def test_12_borderline(tmp_path):
    def excess(a):
        return 2 * np.arccos(-1 / a) - 2 * np.pi + 2 * np.sqrt(a * a - 1) - np.pi

    a = bisect(excess, 1.5, 3.5, xtol=1e-15, maxiter=200)
    measured = max_drawdown(CircleMap.from_function(lambda z: z + a * np.sin(z), N))[0]
    code = run(["check", f"--theta=z + {a!r}*sin(z)", "--out", str(tmp_path)])
    report = json.loads((tmp_path / "report.json").read_text())
    ok = (abs(measured - np.pi) < 1e-8 and code == EXIT_BORDERLINE
          and report["status"] == "BORDERLINE")
    record(12, ok, f"a = {a!r}, drawdown - pi = {measured - np.pi:.1e}, exit code {code}")
    assert ok
