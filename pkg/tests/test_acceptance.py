"""Acceptance suite: one test per criterion, each timed against its budget.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
pass lines.
"""

import math
import time

import numpy as np

from gapedge import channel, charges, dipole, dirac2d, linalg, mathieu, radial
from gapedge.charges import ChargeDistribution, PointCharge
from gapedge.dipole import DipoleProblem, SandwichParams

from oracles import bessel_cross_roots, macdonald_zeros, mathieu_a0


def _report(num, desc, elapsed, budget):
    assert elapsed < budget, f"criterion {num} exceeded its runtime budget: {elapsed:.2f}s >= {budget}s"
    print(f"[criterion {num}] PASS: {desc} ({elapsed:.2f}s < {budget:.0f}s)")


def test_criterion_1_mathieu_fidelity():
    start = time.perf_counter()
    spec0 = mathieu.spectrum(mathieu.MathieuProblem.for_coupling(0.0))
    squares = sorted(k * k for k in range(-6, 7))[: spec0.eigenvalues.size]
    np.testing.assert_allclose(spec0.eigenvalues, squares, atol=1e-12)
    for p in (0.5, 1.0, 2.0, 5.0):
        lam0 = mathieu.spectrum(mathieu.MathieuProblem.for_coupling(p)).eigenvalues[0]
        assert abs(lam0 - mathieu_a0(2.0 * p) / 4.0) < 1e-8
    _report(1, "lowest Mathieu eigenvalues match the continued-fraction oracle to 1e-8; "
               "free spectrum is {k^2} to 1e-12", time.perf_counter() - start, 1.0)


def test_criterion_2_rate_asymptote():
    start = time.perf_counter()
    p = 0.01
    assert abs(mathieu.rate(p) * math.pi * math.sqrt(2.0) / p - 1.0) <= 0.02
    for q in (0.01, 0.5, 1.0, 2.0, 5.0):
        assert mathieu.rate(q) > 0.0
    _report(2, "rate(p)*pi*sqrt(2)/p -> 1 at p=0.01 within 2%; rate positive for all tested p",
            time.perf_counter() - start, 1.0)


def test_criterion_3_radial_channel_law():
    ch = radial.RadialChannel(mu=-1.0, gamma=1.0)
    oracle_eps = np.array(macdonald_zeros(1.0, 7)) ** 2  # outside the timed budget
    start = time.perf_counter()
    levels = radial.lowest_eigenvalues(ch, 7)
    eps = -levels.eigenvalues
    ratios = eps[1:] / eps[:-1]
    target = math.exp(-2.0 * math.pi)
    for n, r in enumerate(ratios, start=1):
        if n >= 3:
            assert abs(r / target - 1.0) < 0.01
    np.testing.assert_allclose(eps, oracle_eps, rtol=1e-6)
    xs = np.linspace(20.0, 80.0, 1921)
    counts = [radial.count_below(ch, float(e)) for e in np.exp(-xs)]
    fit = linalg.linfit(xs, counts)
    pred = radial.channel_slope(-1.0)
    assert abs(fit.slope - pred) <= 0.02 * pred
    _report(3, "near-threshold ratios equal e^{-2 pi} within 1% (Macdonald oracle); "
               "count slope equals 1/(2 pi) within 2%", time.perf_counter() - start, 10.0)


def test_criterion_4_main_theorem_desk_scale():
    start = time.perf_counter()
    worst = 0.0
    for d_abs in (0.25, 1.0, 2.5):
        res = dipole.verify_rate(DipoleProblem(m=1.0, d_abs=d_abs, gamma=1.0))
        assert res.rel_err <= 0.05, (d_abs, res.rel_err)
        worst = max(worst, res.rel_err)
    _report(4, f"fitted counting slopes match the Mathieu trace within 5% for p in {{0.5, 2, 5}} "
               f"(worst {worst:.3f})", time.perf_counter() - start, 60.0)


def test_criterion_5_sandwich_bracketing():
    start = time.perf_counter()
    prob = DipoleProblem(m=1.0, d_abs=1.0, gamma=1.0)  # p = 2
    cpl = dipole.sandwich_coefficients(prob, SandwichParams(0.05, 0.05, 0.05))
    mid = dipole.verify_rate(prob).fit.slope
    lo = dipole.verify_rate(DipoleProblem(m=1.0, d_abs=cpl.p_lower / 2.0, gamma=1.0)).fit.slope
    hi = dipole.verify_rate(DipoleProblem(m=1.0, d_abs=cpl.p_upper / 2.0, gamma=1.0)).fit.slope
    assert lo <= mid <= hi
    _report(5, f"fitted slopes at p_lower/p_upper bracket the slope at p=2 "
               f"({lo:.4f} <= {mid:.4f} <= {hi:.4f})", time.perf_counter() - start, 120.0)


def test_criterion_6_dirac_channel():
    # oracle roots computed outside the timed budget
    pos = [r for r in bessel_cross_roots(+1, 10) if r < 12.5]
    neg = [-r for r in bessel_cross_roots(-1, 10) if r < 12.5]
    oracle = np.array(sorted(pos + neg))
    oracle = oracle[(oracle >= -12.0) & (oracle <= 12.0)]

    start = time.perf_counter()
    spec = channel.DiracChannelSpec(kappa=0.5, nu=0.0, theta=1.0)
    evs = channel.eigenvalues(spec, (-12.0, 12.0))
    assert evs.size == oracle.size
    np.testing.assert_allclose(evs, oracle, atol=1e-6)

    base = channel.DiracChannelSpec(kappa=0.5, nu=0.3, theta=1.0)
    e_base = channel.eigenvalues(base, (-8.0, 8.0))
    for c in (0.5, 2.0):
        scaled = channel.DiracChannelSpec(kappa=0.5, nu=0.3, theta=c)
        e_scaled = channel.eigenvalues(scaled, (-8.0 / c, 8.0 / c))
        np.testing.assert_allclose(e_scaled, e_base / c, atol=1e-8)

    for kappa in (4.5, 6.5, 8.5, 10.5):
        # arithmetic bound behind the estimate, then the computed spectrum
        x = 2.0 * kappa - 3.0
        assert x * x + 6.0 * x - 4.0 * x * (0.499 + 0.5) >= kappa * kappa
        mm = channel.min_modulus(channel.DiracChannelSpec(kappa=kappa, nu=0.3, theta=1.0))
        assert mm >= kappa / 2.0

    for kappa in (-1.5, -0.5, 0.5, 1.5, 2.5):
        for nu in np.linspace(-0.45, 0.45, 7):
            if abs(nu) < 1e-9:  # the nu=0 limit is genuinely limit point
                continue
            got = channel.classify(kappa, float(nu))
            want = channel.Endpoint.LIMIT_CIRCLE if abs(kappa) == 0.5 else channel.Endpoint.LIMIT_POINT
            assert got is want
    _report(6, "free-channel spectrum matches the Bessel oracle to 1e-6; scaling to 1e-8; "
               "min modulus >= kappa/(2 theta); limit circle exactly at |kappa| = 1/2",
            time.perf_counter() - start, 30.0)


def test_criterion_7_2d_counting():
    start = time.perf_counter()
    # spectral-pollution guard: the free gap is empty on every tested grid
    for n_r in (250, 500):
        free = dirac2d.Dirac2DConfig(m=1.0, d_abs=0.0, E_grid=(0.5, 0.8, 0.95), n_r=n_r, k_max=2.5, r_max=60.0)
        mat = dirac2d.assemble(free)
        assert all(dirac2d.count_in_gap(free, e, mat) == 0 for e in free.E_grid)

    deltas = np.logspace(-1, -4, 13)
    cfg = dirac2d.Dirac2DConfig(m=1.0, d_abs=2.5, E_grid=tuple(sorted(1.0 - deltas)), n_r=8000, k_max=7.5)
    curve = dirac2d.gap_slope(cfg)

    counts = dict(zip(cfg.E_grid, curve.counts))
    e99 = min(cfg.E_grid, key=lambda e: abs(e - 0.99))
    assert abs(e99 - 0.99) < 1e-9
    assert counts[e99] >= 3
    assert np.all(np.diff(curve.counts) >= 0)

    rel = abs(curve.fit.slope - curve.predicted_rate) / curve.predicted_rate
    assert rel <= 0.25, (curve.fit.slope, curve.predicted_rate)
    assert curve.grid_converged
    assert curve.cutoff_converged

    # CP check.  Conjugation-parity maps the operator to its negative but
    # swaps the truncation boundary conditions, so the finite-domain spectrum
    # is symmetric only up to a bounded set of boundary/inner states: the
    # offset |N(-E,0) - N(0,E)| stays O(1) across the window, and the two gap
    # edges accumulate the same number of new states over it.
    matrix = dirac2d.assemble(cfg)
    n0 = linalg.ldlt_inertia(matrix, 0.0).n_minus
    belows, aboves = [], []
    for e in cfg.E_grid:
        belows.append(n0 - linalg.ldlt_inertia(matrix, -e).n_minus)
        aboves.append(linalg.ldlt_inertia(matrix, +e).n_minus - n0)
    assert max(abs(b - a) for b, a in zip(belows, aboves)) <= 4
    assert belows[-1] - belows[0] == aboves[-1] - aboves[0]
    _report(7, f"free gap clean; count {counts[e99]} >= 3 at E=0.99; counts nondecreasing; edge "
               f"accumulation CP-symmetric (+{belows[-1]-belows[0]} per side, offset <= "
               f"{max(abs(b-a) for b,a in zip(belows,aboves))}); slope {curve.fit.slope:.3f} within "
               f"25% of R(5)={curve.predicted_rate:.3f} (rel {rel:.3f}), grid flag green",
            time.perf_counter() - start, 600.0)


def test_criterion_8_charge_model():
    start = time.perf_counter()
    a, nu = 1.0, 0.3
    dip = ChargeDistribution(points=(PointCharge((a, 0.0), nu), PointCharge((-a, 0.0), -nu)))
    mom = charges.moments(dip)
    assert mom.total_charge == 0.0
    assert mom.dipole == (2.0 * a * nu, 0.0)

    single = ChargeDistribution(points=(PointCharge((0.2, 0.0), 0.3),))
    d_single = charges.hypothesis_diagnostics(single)
    assert not d_single.charge_vanishes and not d_single.applicable

    quad = ChargeDistribution(
        points=(
            PointCharge((a, 0.0), nu),
            PointCharge((-a, 0.0), nu),
            PointCharge((0.0, a), -nu),
            PointCharge((0.0, -a), -nu),
        )
    )
    d_quad = charges.hypothesis_diagnostics(quad)
    assert d_quad.charge_vanishes and not d_quad.dipole_nonzero and not d_quad.applicable
    _report(8, "two-point dipole reports Q=0 and d=(2 a nu, 0) exactly; single charge and "
               "zero-dipole quadrupole are flagged", time.perf_counter() - start, 1.0)
