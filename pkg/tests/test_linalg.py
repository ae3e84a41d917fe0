import math

import numpy as np
import pytest

from gapedge import linalg
from gapedge.errors import BracketError, InvalidInputError
from gapedge.linalg import BlockTridiag, SymTridiag

from oracles import bisect_root, jacobi_eigenvalues


def random_tridiag(rng, n, scale=1.0):
    return SymTridiag(rng.normal(scale=scale, size=n), rng.normal(scale=scale, size=n - 1))


# ---------------------------------------------------------------------------
# sturm_count
# ---------------------------------------------------------------------------


def test_sturm_diagonal_example():
    t = SymTridiag([0.0, 1.0, 1.0], [0.0, 0.0])
    assert linalg.sturm_count(t, 0.5) == 1


def test_sturm_2x2_examples():
    t = SymTridiag([2.0, 2.0], [-1.0])  # eigenvalues 1 and 3
    assert linalg.sturm_count(t, 1.5) == 1
    assert linalg.sturm_count(t, 4.0) == 2


def test_sturm_tie_is_not_below():
    # eigenvalue exactly at the shift must not count (strict below)
    t = SymTridiag([0.0, 1.0, 1.0], [0.0, 0.0])
    assert linalg.sturm_count(t, 1.0) == 1
    assert linalg.sturm_count(t, 0.0) == 0


def test_sturm_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        SymTridiag([0.0, np.nan], [0.0])
    t = SymTridiag([0.0, 1.0], [0.0])
    with pytest.raises(InvalidInputError):
        linalg.sturm_count(t, np.inf)


# ---------------------------------------------------------------------------
# eigen_tridiag
# ---------------------------------------------------------------------------


def test_eigen_diagonal_example():
    t = SymTridiag([0.0, 1.0, 1.0, 4.0, 4.0], np.zeros(4))
    np.testing.assert_allclose(linalg.eigen_tridiag(t, 3), [0.0, 1.0, 1.0], atol=1e-12)


def test_eigen_2x2_example():
    t = SymTridiag([2.0, 2.0], [-1.0])
    np.testing.assert_allclose(linalg.eigen_tridiag(t, 2), [1.0, 3.0], atol=1e-12)


def test_eigen_k_validation():
    t = SymTridiag([1.0, 2.0], [0.5])
    with pytest.raises(InvalidInputError):
        linalg.eigen_tridiag(t, 3)
    with pytest.raises(InvalidInputError):
        linalg.eigen_tridiag(t, 0)


def test_eigen_vs_jacobi_oracle():
    rng = np.random.default_rng(42)
    t = random_tridiag(rng, 50, scale=2.0)
    got = linalg.eigen_tridiag(t, 50)
    want = jacobi_eigenvalues(t.dense())
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_interval_count_invariant():
    # sturm(b) - sturm(a) equals the number of eigenvalues in half-open [a, b)
    rng = np.random.default_rng(7)
    for n in (5, 40, 200):
        t = random_tridiag(rng, n)
        eigs = linalg.eigen_tridiag(t, n)
        for a, b in [(-3.0, 0.0), (-0.5, 0.5), (0.1, 2.7), (-10.0, 10.0)]:
            expected = int(np.sum((eigs >= a) & (eigs < b)))
            assert linalg.sturm_count(t, b) - linalg.sturm_count(t, a) == expected


def test_eigen_bracketing_property():
    rng = np.random.default_rng(11)
    t = random_tridiag(rng, 60)
    for lam in linalg.eigen_tridiag(t, 10):
        assert linalg.sturm_count(t, lam - 1e-9) < linalg.sturm_count(t, lam + 1e-9)


# ---------------------------------------------------------------------------
# ldlt_inertia
# ---------------------------------------------------------------------------


def blocks_from_diag(values, s):
    """Block-diagonal BlockTridiag with given diagonal entries, block size s."""
    values = np.asarray(values, dtype=float)
    n = values.size // s
    diag = np.zeros((n, s, s))
    for i in range(n):
        diag[i] = np.diag(values[i * s : (i + 1) * s])
    return BlockTridiag(diag, np.zeros((n - 1, s, s)))


def test_ldlt_identity():
    bt = blocks_from_diag(np.ones(12), 3)
    inr = linalg.ldlt_inertia(bt, 0.0)
    assert (inr.n_minus, inr.n_zero, inr.n_plus) == (0, 0, 12)


def test_ldlt_diag_example():
    bt = blocks_from_diag([-1.0, 2.0], 2)
    inr = linalg.ldlt_inertia(bt, 0.0)
    assert (inr.n_minus, inr.n_zero, inr.n_plus) == (1, 0, 1)


def test_ldlt_scalar_chain_matches_sturm():
    # cross-oracle between the two counting paths
    rng = np.random.default_rng(3)
    n = 30
    t = random_tridiag(rng, n)
    diag = t.diag.reshape(n, 1, 1)
    off = t.offdiag.reshape(n - 1, 1, 1)
    bt = BlockTridiag(diag, off)
    for shift in rng.normal(scale=2.0, size=100):
        assert linalg.ldlt_inertia(bt, shift).n_minus == linalg.sturm_count(t, shift)


def test_ldlt_vs_dense_oracle_nonsymmetric_offblocks():
    rng = np.random.default_rng(19)
    for _ in range(5):
        n, s = 7, 3
        diag = rng.normal(size=(n, s, s))
        diag = diag + np.swapaxes(diag, 1, 2)
        off = rng.normal(size=(n - 1, s, s))
        bt = BlockTridiag(diag, off)
        eigs = np.linalg.eigvalsh(bt.dense())
        for shift in rng.normal(scale=2.0, size=8):
            inr = linalg.ldlt_inertia(bt, shift)
            assert inr.n_zero == 0
            assert inr.n_minus == int(np.sum(eigs < shift))


def test_ldlt_nminus_monotone_in_shift():
    rng = np.random.default_rng(5)
    diag = rng.normal(size=(6, 4, 4))
    diag = diag + np.swapaxes(diag, 1, 2)
    off = rng.normal(size=(5, 4, 4))
    bt = BlockTridiag(diag, off)
    shifts = np.linspace(-4.0, 4.0, 21)
    counts = [linalg.ldlt_inertia(bt, s).n_minus for s in shifts]
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_ldlt_inertia_sums_to_dim():
    bt = blocks_from_diag([1.0, -2.0, 0.5, 3.0, -1.0, 4.0], 2)
    inr = linalg.ldlt_inertia(bt, 0.25)
    assert inr.dim == bt.dim


# ---------------------------------------------------------------------------
# integrate_ode
# ---------------------------------------------------------------------------


def test_integrate_exponential():
    y = linalg.integrate_ode(lambda t, y: y, 0.0, 1.0, [1.0], 1e-10)
    assert abs(y[0] - math.e) < 1e-9


def test_integrate_harmonic_energy():
    # 10 periods of the unit oscillator; energy drift below 1e-6
    def rhs(t, y):
        return np.array([y[1], -y[0]])

    y = linalg.integrate_ode(rhs, 0.0, 20.0 * math.pi, [1.0, 0.0], 1e-10)
    energy = y[0] ** 2 + y[1] ** 2
    assert abs(energy - 1.0) < 1e-6


def test_integrate_self_consistency():
    def rhs(t, y):
        return np.array([y[1], -math.sin(y[0]) - 0.1 * y[1]])

    loose = linalg.integrate_ode(rhs, 0.0, 12.0, [1.2, 0.0], 1e-8)
    tight = linalg.integrate_ode(rhs, 0.0, 12.0, [1.2, 0.0], 1e-11)
    assert np.max(np.abs(loose - tight)) < 1e-6


def test_integrate_tolerance_window():
    with pytest.raises(InvalidInputError):
        linalg.integrate_ode(lambda t, y: y, 0.0, 1.0, [1.0], 1e-2)
    with pytest.raises(InvalidInputError):
        linalg.integrate_ode(lambda t, y: y, 0.0, 1.0, [1.0], 1e-14)


# ---------------------------------------------------------------------------
# brent_root, linfit
# ---------------------------------------------------------------------------


def test_brent_cos():
    assert abs(linalg.brent_root(math.cos, 1.0, 2.0, 1e-12) - math.pi / 2) < 1e-12


def test_brent_sqrt2():
    assert abs(linalg.brent_root(lambda x: x * x - 2.0, 1.0, 2.0, 1e-12) - math.sqrt(2)) < 1e-12


def test_brent_matches_bisection_oracle():
    funcs = [
        (lambda x: x**3 - 0.7, 0.0, 2.0),
        (lambda x: math.tanh(x) - 0.3, -1.0, 3.0),
        (lambda x: math.expm1(x) - 1.5, 0.0, 2.0),
    ]
    for f, a, b in funcs:
        got = linalg.brent_root(f, a, b, 1e-10)
        want = bisect_root(f, a, b, tol=1e-12)
        assert abs(got - want) < 1e-9


def test_brent_bracket_error():
    with pytest.raises(BracketError):
        linalg.brent_root(lambda x: x * x + 1.0, -1.0, 1.0, 1e-10)


def test_linfit_exact_line():
    xs = np.arange(10.0)
    fit = linalg.linfit(xs, 2.0 * xs + 1.0)
    assert abs(fit.slope - 2.0) < 1e-12
    assert abs(fit.intercept - 1.0) < 1e-12
    assert fit.slope_stderr < 1e-12


def test_linfit_constant():
    fit = linalg.linfit([0.0, 1.0, 2.0, 3.0], [5.0, 5.0, 5.0, 5.0])
    assert fit.slope == 0.0


def test_linfit_noisy_within_3_stderr():
    rng = np.random.default_rng(2024)
    xs = np.linspace(0.0, 10.0, 40)
    hits = 0
    for _ in range(100):
        ys = 1.7 * xs - 0.4 + rng.normal(scale=0.3, size=xs.size)
        fit = linalg.linfit(xs, ys)
        if abs(fit.slope - 1.7) <= 3.0 * fit.slope_stderr:
            hits += 1
    # 3 sigma ~ 99.7%; the seeded draw keeps every trial inside
    assert hits == 100


def test_linfit_validation():
    with pytest.raises(InvalidInputError):
        linalg.linfit([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(InvalidInputError):
        linalg.linfit([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
