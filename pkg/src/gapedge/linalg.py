"""Self-contained numerical kernels.

Symmetric tridiagonal Sturm counting and bisection eigensolving,
block-tridiagonal inertia via symmetric factorization with 1x1/2x2 pivoting,
an embedded Runge-Kutta 5(4) integrator with PI step control, bracketed root
finding, and ordinary least-squares line fitting.

All tolerances are module constants, exposed read-only through
:func:`constants`.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs as _get_lapack_funcs
from scipy.linalg import ldl as _scipy_ldl
from scipy.linalg import solve_triangular as _solve_tri
from scipy.optimize import brentq as _brentq

from . import _backend
from .errors import (
    BracketError,
    InvalidInputError,
    NumericalBreakdownError,
    StiffnessError,
)

#: Replacement for an exactly zero Sturm pivot.  Positive sign: an exact tie
#: at the shift is treated as not-below, which makes
#: sturm_count(t, b) - sturm_count(t, a) count eigenvalues in half-open [a, b).
STURM_PIVOT_TINY = 1e-300

#: Absolute bisection tolerance for eigen_tridiag.
EIG_BISECT_TOL = 1e-12

#: A factored pivot with |eigenvalue| below this times the matrix max-norm
#: counts toward n_zero; counting callers must re-shift when n_zero > 0.
ZERO_PIVOT_RTOL = 1e-11

#: Admissible relative-tolerance range for integrate_ode.
ODE_REL_TOL_MIN = 1e-13
ODE_REL_TOL_MAX = 1e-3

#: Absolute tolerance used by integrate_ode is rel_tol times this factor.
ODE_ATOL_FACTOR = 1e-2


def constants():
    """Read-only copy of the module tolerances (for reproducible reports)."""
    return {
        "sturm_pivot_tiny": STURM_PIVOT_TINY,
        "eig_bisect_tol": EIG_BISECT_TOL,
        "zero_pivot_rtol": ZERO_PIVOT_RTOL,
        "ode_rel_tol_min": ODE_REL_TOL_MIN,
        "ode_rel_tol_max": ODE_REL_TOL_MAX,
        "ode_atol_factor": ODE_ATOL_FACTOR,
    }


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymTridiag:
    """Real symmetric tridiagonal matrix (main diagonal + one off-diagonal)."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or e.ndim != 1 or d.size == 0:
            raise InvalidInputError("diag must be 1-d and nonempty, offdiag 1-d")
        if e.size != d.size - 1:
            raise InvalidInputError("offdiag must have length len(diag) - 1")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise InvalidInputError("non-finite entries in tridiagonal matrix")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def dim(self):
        return self.diag.size

    def dense(self):
        m = np.diag(self.diag)
        n = self.dim
        idx = np.arange(n - 1)
        m[idx, idx + 1] = self.offdiag
        m[idx + 1, idx] = self.offdiag
        return m


@dataclass(frozen=True)
class BlockTridiag:
    """Symmetric block-tridiagonal matrix.

    ``diag_blocks[i]`` is the (symmetric) i-th diagonal block; ``off_blocks[i]``
    couples block-row i to block-row i+1, with the transpose implied below the
    diagonal.
    """

    diag_blocks: np.ndarray
    off_blocks: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.diag_blocks, dtype=float)
        c = np.asarray(self.off_blocks, dtype=float)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise InvalidInputError("diag_blocks must be (n, s, s)")
        s = a.shape[1]
        if a.shape[0] == 0 or s == 0:
            raise InvalidInputError("empty block matrix")
        if c.size == 0:
            c = c.reshape(0, s, s)
        if c.ndim != 3 or c.shape[1:] != (s, s) or c.shape[0] != a.shape[0] - 1:
            raise InvalidInputError("off_blocks must be (n-1, s, s)")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(c))):
            raise InvalidInputError("non-finite entries in block matrix")
        if not np.array_equal(a, np.swapaxes(a, 1, 2)):
            raise InvalidInputError("diagonal blocks must be symmetric")
        object.__setattr__(self, "diag_blocks", a)
        object.__setattr__(self, "off_blocks", c)

    @property
    def n_blocks(self):
        return self.diag_blocks.shape[0]

    @property
    def block_size(self):
        return self.diag_blocks.shape[1]

    @property
    def dim(self):
        return self.n_blocks * self.block_size

    def dense(self):
        n, s = self.n_blocks, self.block_size
        m = np.zeros((n * s, n * s))
        for i in range(n):
            m[i * s : (i + 1) * s, i * s : (i + 1) * s] = self.diag_blocks[i]
        for i in range(n - 1):
            m[i * s : (i + 1) * s, (i + 1) * s : (i + 2) * s] = self.off_blocks[i]
            m[(i + 1) * s : (i + 2) * s, i * s : (i + 1) * s] = self.off_blocks[i].T
        return m


@dataclass(frozen=True)
class Inertia:
    """Signature of a shifted symmetric matrix: counts below/at/above the shift."""

    n_minus: int
    n_zero: int
    n_plus: int

    def __post_init__(self):
        if min(self.n_minus, self.n_zero, self.n_plus) < 0:
            raise InvalidInputError("inertia counts must be nonnegative")

    @property
    def dim(self):
        return self.n_minus + self.n_zero + self.n_plus


@dataclass(frozen=True)
class LineFit:
    """Ordinary least-squares line with the slope's standard error."""

    slope: float
    intercept: float
    slope_stderr: float


# ---------------------------------------------------------------------------
# symmetric tridiagonal eigensolving
# ---------------------------------------------------------------------------


def sturm_count(t, shift):
    """Number of eigenvalues of `t` strictly below `shift`.

    Sturm sign-change sequence with the zero-pivot replacement rule
    (STURM_PIVOT_TINY); cost O(n).
    """
    if not isinstance(t, SymTridiag):
        t = SymTridiag(*t)
    shift = float(shift)
    if not math.isfinite(shift):
        raise InvalidInputError("shift must be finite")
    return int(_backend.sturm_counts(t.diag, t.offdiag, np.array([shift]))[0])


def sturm_counts(t, shifts):
    """Vectorized :func:`sturm_count` over an array of shifts."""
    shifts = np.asarray(shifts, dtype=float)
    if not np.all(np.isfinite(shifts)):
        raise InvalidInputError("shifts must be finite")
    return _backend.sturm_counts(t.diag, t.offdiag, shifts)


def eigen_tridiag(t, k):
    """The k smallest eigenvalues of `t`, ascending.

    Each eigenvalue is bracketed by Sturm bisection to absolute tolerance
    EIG_BISECT_TOL (or a few ulps of its magnitude, whichever is coarser).
    """
    if not isinstance(t, SymTridiag):
        t = SymTridiag(*t)
    k = int(k)
    n = t.dim
    if k < 1 or k > n:
        raise InvalidInputError(f"k must be in 1..{n}, got {k}")
    pad = np.zeros(n)
    pad[:-1] += np.abs(t.offdiag)
    pad[1:] += np.abs(t.offdiag)
    lo = float(np.min(t.diag - pad))
    hi = float(np.max(t.diag + pad))
    margin = max(1e-10, 1e-14 * (abs(lo) + abs(hi)))
    lo -= margin
    hi += margin
    los = np.full(k, lo)
    his = np.full(k, hi)
    targets = np.arange(1, k + 1)
    for _ in range(256):
        width = his - los
        tol = np.maximum(EIG_BISECT_TOL, 8.0 * np.finfo(float).eps * np.maximum(np.abs(los), np.abs(his)))
        if np.all(width <= tol):
            break
        mid = 0.5 * (los + his)
        counts = _backend.sturm_counts(t.diag, t.offdiag, mid)
        take = counts >= targets
        his = np.where(take, mid, his)
        los = np.where(take, los, mid)
    out = 0.5 * (los + his)
    return np.maximum.accumulate(out)


# ---------------------------------------------------------------------------
# block-tridiagonal inertia
# ---------------------------------------------------------------------------


def _pivot_eigenvalues(d):
    """Eigenvalues of the 1x1/2x2 pivot blocks of an LDL^T block-diagonal factor."""
    s = d.shape[0]
    evs = []
    j = 0
    while j < s:
        if j + 1 < s and (d[j + 1, j] != 0.0 or d[j, j + 1] != 0.0):
            a = d[j, j]
            b = d[j + 1, j] if d[j + 1, j] != 0.0 else d[j, j + 1]
            c = d[j + 1, j + 1]
            half_tr = 0.5 * (a + c)
            disc = math.hypot(0.5 * (a - c), b)
            evs.append(half_tr - disc)
            evs.append(half_tr + disc)
            j += 2
        else:
            evs.append(d[j, j])
            j += 1
    return np.array(evs)


def _block_diag_solve(d, v, clamp):
    """Solve d w = v for the block-diagonal pivot factor, clamping tiny pivots."""
    s = d.shape[0]
    w = np.empty_like(v)
    j = 0
    while j < s:
        if j + 1 < s and (d[j + 1, j] != 0.0 or d[j, j + 1] != 0.0):
            a = d[j, j]
            b = d[j + 1, j] if d[j + 1, j] != 0.0 else d[j, j + 1]
            c = d[j + 1, j + 1]
            det = a * c - b * b
            if abs(det) < clamp * clamp:
                det = math.copysign(clamp * clamp, det if det != 0.0 else 1.0)
            w[j] = (c * v[j] - b * v[j + 1]) / det
            w[j + 1] = (a * v[j + 1] - b * v[j]) / det
            j += 2
        else:
            den = d[j, j]
            if abs(den) < clamp:
                den = math.copysign(clamp, den if den != 0.0 else 1.0)
            w[j] = v[j] / den
            j += 1
    return w


def _ldl_solve(lu, d, perm, rhs, clamp):
    """Solve S x = rhs given scipy.linalg.ldl factors of S (lower variant)."""
    ltri = lu[perm]
    v = _solve_tri(ltri, rhs[perm], lower=True, unit_diagonal=True)
    w = _block_diag_solve(d, v, clamp)
    u = _solve_tri(ltri, w, trans="T", lower=True, unit_diagonal=True)
    x = np.empty_like(u)
    x[perm] = u
    return x


def _factor_eigenvalues_lapack(ldu, ipiv):
    """Pivot-block eigenvalues straight from a LAPACK sytrf (lower) factor."""
    d = np.diag(ldu)
    neg = ipiv < 0
    evs = list(d[~neg])
    starts = np.flatnonzero(neg)[0::2]
    if starts.size:
        sub = np.diag(ldu, -1)
        a = d[starts]
        c = d[starts + 1]
        b = sub[starts]
        half_tr = 0.5 * (a + c)
        disc = np.hypot(0.5 * (a - c), b)
        evs.extend(half_tr - disc)
        evs.extend(half_tr + disc)
    return np.array(evs)


def _inertia_chain_lapack(a_blocks, c_blocks, shift, tol_zero):
    """Fast Schur-complement walk: one sytrf + sytrs (Bunch-Kaufman) per block.

    Returns None on any non-finite intermediate or an exactly singular pivot
    block; the caller then retries along the clamped path.
    """
    n = a_blocks.shape[0]
    s = a_blocks.shape[1]
    eye = np.eye(s)
    sytrf, sytrs = _get_lapack_funcs(("sytrf", "sytrs"), (a_blocks[0],))
    n_minus = n_zero = n_plus = 0
    schur = a_blocks[0] - shift * eye
    for i in range(n):
        ldu, ipiv, info = sytrf(schur, lower=1)
        if info != 0:
            return None
        evs = _factor_eigenvalues_lapack(ldu, ipiv)
        if not np.all(np.isfinite(evs)):
            return None
        n_minus += int(np.sum(evs < -tol_zero))
        n_zero += int(np.sum(np.abs(evs) <= tol_zero))
        n_plus += int(np.sum(evs > tol_zero))
        if i < n - 1:
            c = c_blocks[i]
            x, info = sytrs(ldu, ipiv, c, lower=1)
            if info != 0:
                return None
            schur = a_blocks[i + 1] - shift * eye - c.T @ x
            if not np.all(np.isfinite(schur)):
                return None
    return Inertia(n_minus, n_zero, n_plus)


def _inertia_chain(a_blocks, c_blocks, shift, tol_zero, clamp):
    n = a_blocks.shape[0]
    s = a_blocks.shape[1]
    eye = np.eye(s)
    n_minus = n_zero = n_plus = 0
    schur = a_blocks[0] - shift * eye
    for i in range(n):
        lu, d, perm = _scipy_ldl(schur, lower=True)
        evs = _pivot_eigenvalues(d)
        if not np.all(np.isfinite(evs)):
            return None
        n_minus += int(np.sum(evs < -tol_zero))
        n_zero += int(np.sum(np.abs(evs) <= tol_zero))
        n_plus += int(np.sum(evs > tol_zero))
        if i < n - 1:
            x = _ldl_solve(lu, d, perm, c_blocks[i], clamp)
            schur = a_blocks[i + 1] - shift * eye - c_blocks[i].T @ x
            if not np.all(np.isfinite(schur)):
                return None
    return Inertia(n_minus, n_zero, n_plus)


def ldlt_inertia(b, shift):
    """Inertia of (b - shift*I) via block LDL^T with Bunch-Kaufman pivoting.

    By Sylvester's law of inertia the congruence through the Schur-complement
    chain preserves the signature, so ``n_minus`` equals the eigenvalue count
    strictly below the shift whenever ``n_zero`` is 0.  Pivots within
    ZERO_PIVOT_RTOL times the matrix max-norm of the shift count toward
    ``n_zero``; callers counting eigenvalues must re-run at a perturbed shift
    when that happens.
    """
    if not isinstance(b, BlockTridiag):
        raise InvalidInputError("ldlt_inertia expects a BlockTridiag")
    shift = float(shift)
    if not math.isfinite(shift):
        raise InvalidInputError("shift must be finite")
    a_blocks = b.diag_blocks
    c_blocks = b.off_blocks
    scale = max(
        float(np.max(np.abs(a_blocks))) + abs(shift),
        float(np.max(np.abs(c_blocks))) if c_blocks.size else 0.0,
    )
    tol_zero = ZERO_PIVOT_RTOL * scale
    result = _inertia_chain_lapack(a_blocks, c_blocks, shift, tol_zero)
    if result is not None:
        return result
    for clamp in (1e-300, 1e-100 * max(scale, 1.0)):
        result = _inertia_chain(a_blocks, c_blocks, shift, tol_zero, clamp)
        if result is not None:
            return result
    raise NumericalBreakdownError(shift)


# ---------------------------------------------------------------------------
# ODE integration (embedded Dormand-Prince 5(4), PI controller)
# ---------------------------------------------------------------------------

_DP_C = (0.2, 0.3, 0.8, 8.0 / 9.0, 1.0)
_DP_A = (
    (0.2,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
)
_DP_B = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0)
_DP_E = (
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_PI_BETA = 0.08
_PI_ALPHA = 0.2 - 0.75 * _PI_BETA


def integrate_ode(rhs, t0, t1, y0, rel_tol):
    """Integrate y' = rhs(t, y) from t0 to t1 and return y(t1).

    Embedded Dormand-Prince pair of orders 5(4) with PI (Gustafsson) step
    control; step acceptance is deterministic for fixed inputs.  The absolute
    tolerance is ``rel_tol * ODE_ATOL_FACTOR``.
    """
    t0 = float(t0)
    t1 = float(t1)
    rel_tol = float(rel_tol)
    if not (ODE_REL_TOL_MIN <= rel_tol <= ODE_REL_TOL_MAX):
        raise InvalidInputError(f"rel_tol must lie in [{ODE_REL_TOL_MIN}, {ODE_REL_TOL_MAX}]")
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 < t0:
        raise InvalidInputError("need finite t0 <= t1")
    y = np.asarray(y0, dtype=float).copy()
    if y.ndim != 1 or not np.all(np.isfinite(y)):
        raise InvalidInputError("y0 must be a finite 1-d vector")
    if t1 == t0:
        return y
    atol = rel_tol * ODE_ATOL_FACTOR
    span = t1 - t0

    t = t0
    k1 = np.asarray(rhs(t, y), dtype=float)
    scale = atol + rel_tol * np.abs(y)
    d0 = math.sqrt(float(np.mean((y / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((k1 / scale) ** 2)))
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6 * span
    else:
        h = min(0.01 * d0 / d1, 0.01 * span)
    h = max(h, 1e-12 * span)

    facold = 1e-4
    ks = [None] * 7
    for _ in range(1_000_000):
        if t >= t1:
            return y
        if t + h >= t1:
            h = t1 - t
        ks[0] = k1
        for stage in range(5):
            acc = ks[0] * _DP_A[stage][0]
            for m in range(1, stage + 1):
                acc = acc + ks[m] * _DP_A[stage][m]
            ks[stage + 1] = np.asarray(rhs(t + _DP_C[stage] * h, y + h * acc), dtype=float)
        y_new = y + h * (
            _DP_B[0] * ks[0]
            + _DP_B[2] * ks[2]
            + _DP_B[3] * ks[3]
            + _DP_B[4] * ks[4]
            + _DP_B[5] * ks[5]
        )
        ks[6] = np.asarray(rhs(t + h, y_new), dtype=float)
        err_vec = h * (
            _DP_E[0] * ks[0]
            + _DP_E[2] * ks[2]
            + _DP_E[3] * ks[3]
            + _DP_E[4] * ks[4]
            + _DP_E[5] * ks[5]
            + _DP_E[6] * ks[6]
        )
        scale = atol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
        if err <= 1.0:
            t += h
            y = y_new
            k1 = ks[6]
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err**-_PI_ALPHA * facold**_PI_BETA
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            facold = max(err, 1e-4)
            h *= factor
        else:
            h *= max(_MIN_FACTOR, min(1.0, _SAFETY * err**-0.2))
            if h < 1e-14 * max(abs(t), 1.0):
                raise StiffnessError(t)
    raise StiffnessError(t, "step budget exhausted")


# ---------------------------------------------------------------------------
# root bracketing, least squares
# ---------------------------------------------------------------------------


def brent_root(f, a, b, tol):
    """Root of f in [a, b] to absolute tolerance tol, bracketing maintained."""
    a = float(a)
    b = float(b)
    tol = float(tol)
    if tol <= 0.0:
        raise InvalidInputError("tol must be positive")
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise BracketError(f"no sign change on [{a}, {b}]")
    return float(_brentq(f, a, b, xtol=tol, rtol=4.0 * np.finfo(float).eps))


def linfit(xs, ys):
    """Ordinary least squares line fit with the slope's standard error.

    Needs at least 3 points and non-degenerate abscissae.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise InvalidInputError("xs and ys must be equal-length 1-d sequences")
    n = x.size
    if n < 3:
        raise InvalidInputError("need at least 3 samples")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInputError("non-finite samples")
    xbar = x.mean()
    ybar = y.mean()
    dx = x - xbar
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise InvalidInputError("xs are all equal")
    slope = float(dx @ (y - ybar)) / sxx
    intercept = ybar - slope * xbar
    resid = y - (slope * x + intercept)
    ssr = max(float(resid @ resid), 0.0)
    stderr = math.sqrt(ssr / (n - 2) / sxx)
    return LineFit(slope=slope, intercept=float(intercept), slope_stderr=stderr)
