"""Acceptance criteria 1-9, each at its stated tolerance and runtime budget.

Every test records one verdict line (shown in the terminal summary) before
asserting, so a failing criterion is reported with its measured numbers.
"""
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp

from conftest import record_criterion
from frobpade import cli
from frobpade.approximant import FrobeniusIndex, build_frobenius_matrix, solve_frobenius
from frobpade.equilibrium import (Region, classify_point, densities_from_curve, equilibrium,
                                  equilibrium_oracle, log_phi_modulus, regular_part_distance)
from frobpade.harness import (RaySpec, convergence_rate_experiment, region_dichotomy, solve_ray,
                              szego_stabilization_experiment, zero_distribution_experiment)
from frobpade.orthoexp import MeasureSpec
from frobpade.spectral_curve import CurveCase, solve_curve, trace_divergence_boundary

MU_DIAG, SIGMA_DIAG = MeasureSpec(-1, 1), MeasureSpec(2, 3)
DIAG_PREC = 1024
# touching supports make the Frobenius integrals diverge, so a small gap is used
MU_GAP, SIGMA_GAP = MeasureSpec(-1, 0), MeasureSpec(Fraction(1, 1000), 3)
GAP_PREC = 512


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


# ---------------------------------------------------------------- shared ray solves

@pytest.fixture(scope="module")
def diagonal_ray():
    """Diagonal ray n = 30..60 plus n = 41 for the Cauchy difference at 40, one system."""
    t = time.perf_counter()
    ray = RaySpec.from_ns(Fraction(1, 2), [30, 40, 50, 60], test_points=[0])
    apprs = solve_ray(ray, MU_DIAG, SIGMA_DIAG, DIAG_PREC, extra_indices=[FrobeniusIndex(41, 41)])
    eq = equilibrium((-1, 1), (2, 3), Fraction(1, 2))
    return ray, apprs, eq, time.perf_counter() - t


@pytest.fixture(scope="module")
def gap_ray():
    t = time.perf_counter()
    ray = RaySpec.from_ns(Fraction(1, 3), [10, 20, 30, 40], test_points=[2.8, 2 + 0.5j])
    apprs = solve_ray(ray, MU_GAP, SIGMA_GAP, GAP_PREC)
    eq = equilibrium((-1, 0), (Fraction(1, 1000), 3), Fraction(1, 3))
    return ray, apprs, eq, time.perf_counter() - t


# ---------------------------------------------------------------- 1

def test_criterion_1_closed_form_endpoint(tmp_path):
    cfg = tmp_path / "fig3.yaml"
    cfg.write_text('mu: {interval: ["-1", "0"]}\nsigma: {interval: ["0", "3"]}\nc: 1/3\n'
                   "precision_bits: 256\n")
    with Timer() as tm:
        code = cli.run(["curve", "--config", str(cfg), "--out", str(tmp_path / "out")])
    out = next((tmp_path / "out").glob("curve-*")) / "curve.json"
    b = mp.mpf(json.loads(out.read_text())["b_sigma_c"])
    err = abs(b - mp.mpf(19683) / 8100)
    ok = code == 0 and err < 1e-10 and tm.seconds < 1
    record_criterion(1, ok, f"b_sigma_c = {mp.nstr(b, 15)}, |err| = {mp.nstr(err, 3)}", tm.seconds)
    assert ok


# ---------------------------------------------------------------- 2

CRITERION_2_CONFIGS = [
    ((-1, 0), (1, 3), Fraction(1, 5)),
    ((1, 3), (-1, 0), Fraction(7, 20)),
    ((-2, -1), (1, 2), Fraction(1, 2)),
    ((2, 3), (-1, 1), Fraction(7, 20)),
    ((-1, 1), (2, 3), Fraction(1, 5)),
]


def test_criterion_2_perfect_square_certificate():
    worst, cases = mp.zero, []
    with Timer() as tm:
        for dm, ds, c in CRITERION_2_CONFIGS:
            curve = solve_curve(dm, ds, c, 256)
            cert = curve.certificate()
            cases.append(curve.case == CurveCase.GENERIC and cert["kind"] == "perfect_square")
            worst = max(worst, cert["residual"])
    orderings = {dm[0] < ds[0] for dm, ds, _ in CRITERION_2_CONFIGS}
    cs = {c for _, _, c in CRITERION_2_CONFIGS}
    ok = (all(cases) and worst < 1e-20 and tm.seconds < 30 and orderings == {True, False}
          and cs == {Fraction(1, 5), Fraction(7, 20), Fraction(1, 2)})
    record_criterion(2, ok, f"5 generic curves, max coefficient residual {mp.nstr(worst, 3)}", tm.seconds)
    assert ok


# ---------------------------------------------------------------- 3

CRITERION_3_CONFIGS = [
    ((-1, 1), (2, 3), Fraction(1, 2)),
    ((-1, 0), (1, 3), Fraction(1, 5)),
    ((-1, 0), (1, 3), Fraction(1, 10)),
    ((1, 3), (-1, 0), Fraction(7, 20)),
]


def test_criterion_3_curve_against_oracle():
    sup = mass = res = 0.0
    with Timer() as tm:
        for dm, ds, c in CRITERION_3_CONFIGS:
            a = equilibrium(dm, ds, c)
            b = equilibrium_oracle(dm, ds, c)
            sup = max(sup, *regular_part_distance(a, b, 64))
            for eq in (a, b):
                mass = max(mass, abs(eq.tau_mu.mass - 1), abs(eq.tau_sigma.mass - float(c)))
                res = max(res, *eq.residuals(64))
    ok = sup < 1e-3 and mass < 1e-8 and res < 1e-6 and tm.seconds < 120
    record_criterion(3, ok, f"density sup {sup:.2e}, mass {mass:.2e}, residual {res:.2e}", tm.seconds)
    assert ok


# ---------------------------------------------------------------- 4

@pytest.mark.slow
def test_criterion_4_defining_orthogonality():
    prec, nodes = 512, 256
    with Timer() as tm, mp.workprec(prec):
        # independent rule for the arcsine measure: x_k = cos(theta_k), equal weights
        th = [(2 * k - 1) * mp.pi / (2 * nodes) for k in range(1, nodes + 1)]
        xs = [mp.cos(t) for t in th]
        # orthonormal Chebyshev basis p_0 = 1, p_j = sqrt(2) T_j
        basis = [[mp.one] * nodes] + [[mp.sqrt(2) * mp.cos(j * t) for t in th] for j in range(1, 41)]
        powers = [[x ** i for x in xs] for i in range(41)]
        sig = [1 / mp.sqrt((2 - x) * (3 - x)) for x in xs]
        gram = build_frobenius_matrix(MU_DIAG, SIGMA_DIAG, FrobeniusIndex(20, 20), prec)
        worst, count = mp.zero, 0
        for total in range(1, 41):
            for n in range(1, (total + 1) // 2 + 1):
                m = total - n
                appr = solve_frobenius(MU_DIAG, SIGMA_DIAG, FrobeniusIndex(m, n), prec, gram=gram)
                q = [mp.fsum(a * basis[j][k] for j, a in enumerate(appr.q_coeffs)) for k in range(nodes)]
                p = [mp.fsum(a * basis[j][k] for j, a in enumerate(appr.p_coeffs)) for k in range(nodes)]
                r = [qk * sk - pk for qk, sk, pk in zip(q, sig, p)]
                norm = max(abs(v) for v in r)
                for i in range(total + 1):
                    mom = abs(mp.fsum(w * v for w, v in zip(powers[i], r))) / nodes
                    worst = max(worst, mom / norm)
                count += 1
    ok = worst < mp.mpf(10) ** -40 and tm.seconds < 300
    record_criterion(4, ok, f"{count} indices, max relative moment {mp.nstr(worst, 3)}", tm.seconds)
    assert ok


# ---------------------------------------------------------------- 5

@pytest.mark.slow
def test_criterion_5_rate_reproduction(diagonal_ray):
    ray, apprs, eq, solve_time = diagonal_ray
    with Timer() as tm:
        tab = convergence_rate_experiment(ray, MU_DIAG, SIGMA_DIAG, DIAG_PREC, eq=eq, approximants=apprs)
    rows = [r for r in tab.for_point(0) if math.isfinite(r.local_slope)]
    devs = [abs(r.deviation) for r in rows]
    seconds = tm.seconds + solve_time
    ok = (len(rows) == 3 and all(r.certified for r in rows) and max(devs) < 0.02
          and seconds < 600)
    slopes = ", ".join(f"{r.local_slope:.4f}" for r in rows)
    record_criterion(5, ok, f"slopes [{slopes}] vs {rows[0].predicted:.5f}, max deviation "
                            f"{max(devs):.2%}", seconds)
    assert ok


# ---------------------------------------------------------------- 6

@pytest.mark.slow
def test_criterion_6_divergence_dichotomy(gap_ray):
    ray, apprs, eq, solve_time = gap_ray
    with Timer() as tm:
        tab = convergence_rate_experiment(ray, MU_GAP, SIGMA_GAP, GAP_PREC, eq=eq, approximants=apprs)
        inside = classify_point(eq, 2.8).region
        outside = classify_point(eq, 2 + 0.5j).region
        dual = region_dichotomy(tab, eq)
    div = tab.for_point(2.8)
    conv = tab.for_point(2 + 0.5j)
    grows = all(b.error > a.error for a, b in zip(div, div[1:]))
    div_slopes = [r.local_slope for r in div if math.isfinite(r.local_slope)]
    shrinks = all(b.error < a.error for a, b in zip(conv, conv[1:]))
    conv_slopes = [r.local_slope for r in conv if math.isfinite(r.local_slope)]
    seconds = tm.seconds + solve_time
    ok = (grows and all(s < 0 for s in div_slopes) and inside == Region.DIVERGENCE_MINUS
          and shrinks and all(s > 0 for s in conv_slopes) and outside == Region.CONVERGENCE_PLUS
          and not dual and seconds < 300)
    record_criterion(6, ok, f"2.8: errors {div[0].error:.3g} -> {div[-1].error:.3g} ({inside.value}); "
                            f"2+0.5i: {conv[0].error:.3g} -> {conv[-1].error:.3g} ({outside.value})",
                     seconds)
    assert ok


# ---------------------------------------------------------------- 7

@pytest.mark.slow
def test_criterion_7_zero_localization(gap_ray):
    ray, apprs, eq, solve_time = gap_ray
    with Timer() as tm:
        tab = zero_distribution_experiment(ray, MU_GAP, SIGMA_GAP, GAP_PREC, eq=eq, approximants=apprs)
    last = tab.rows_[-1]
    seconds = tm.seconds + solve_time
    ok = last.n == 40 and last.kolmogorov < 0.06 and last.outside <= 1 and seconds < 180
    record_criterion(7, ok, f"n = 40: Kolmogorov {last.kolmogorov:.4f}, {last.outside} zeros outside",
                     seconds)
    assert ok


# ---------------------------------------------------------------- 8

@pytest.mark.slow
def test_criterion_8_normalization_shadows(diagonal_ray):
    _, apprs, eq, solve_time = diagonal_ray
    rng = np.random.default_rng(20240611)
    pts = rng.uniform(-4, 5, 50) + 1j * rng.uniform(0.01, 3, 50)
    with Timer() as tm:
        sheet_sum = max(abs(sum(log_phi_modulus(eq, z, k, 40, 40) for k in range(3))) for z in pts)
        ray = RaySpec.from_ns(Fraction(1, 2), [40, 41])
        test_points = [-2 + 1j, 1.5j, 4, -3, 2.5 + 1j]
        tab = szego_stabilization_experiment(ray, MU_DIAG, SIGMA_DIAG, test_points, DIAG_PREC,
                                             eq=eq, approximants=apprs)
        variation = tab.product_variation(40)
        diffs = {p: d[-1][1] for p, d in tab.ratio_cauchy_differences().items()}
    seconds = tm.seconds + solve_time
    ok = (sheet_sum < 1e-10 and variation < 0.10 and all(v < 0.05 for v in diffs.values())
          and seconds < 600)
    record_criterion(8, ok, f"sheet sum {sheet_sum:.1e}, product variation {variation:.1e}, "
                            f"max ratio difference {max(diffs.values()):.1e}",
                     seconds)
    assert ok


# ---------------------------------------------------------------- 9

def test_criterion_9_trajectory_validity():
    with Timer() as tm:
        curve = solve_curve((-1, 0), (0, 3), Fraction(1, 3), 128)
        pair = trace_divergence_boundary(curve, step=0.01)
        eq = densities_from_curve(curve)
        pts = np.concatenate((pair.upper.points[::10], pair.lower.points[::10]))
        worst = max(abs(eq.classifier(z)) for z in pts)
        k = min(len(pair.upper.points), len(pair.lower.points))
        asym = float(np.max(np.abs(pair.upper.points[:k] - np.conj(pair.lower.points[:k]))))
    ok = worst < 1e-3 and asym < 1e-8 and tm.seconds < 60
    record_criterion(9, ok, f"{len(pts)} sampled points, max |E| {worst:.2e}, conjugation mismatch "
                            f"{asym:.1e}", tm.seconds)
    assert ok
