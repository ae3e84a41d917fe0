"""Pure-Python fallback for the compiled kernels.

Mirrors ``_kernels.pyx`` operation for operation so that both backends count
the same zeros and eigenvalues; the compiled module is preferred at import
time (see ``_backend``).  All three kernels share one Dormand-Prince 5(4)
stepper with a PI controller, written out scalar-style on purpose: the hot
loops here are line-by-line transcriptions of the C versions.
"""

import math

import numpy as np

BACKEND_NAME = "python"

# Dormand-Prince 5(4) tableau and step-controller constants.  These are the
# single source of truth for every integrator in the package (the generic
# vector integrator in `linalg` uses the same numbers).
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
PI_BETA = 0.08
PI_ALPHA = 0.2 - 0.75 * PI_BETA

STURM_PIVOT_TINY = 1e-300

# Settling thresholds for the Pruefer phase in the classically forbidden
# region: the phase is declared trapped once the barrier is high and the
# phase sits at its attractor just above a multiple of pi.
_TRAP_Q_FACTOR = 1e4
_TRAP_TAN_FACTOR = 2.0
_MAX_SETTLE_CHUNKS = 64


def sturm_counts(diag, off, shifts):
    """Eigenvalues strictly below each shift, by the Sturm sign-change recurrence.

    Vectorized over shifts; the per-shift arithmetic (including the +1e-300
    zero-pivot replacement, which keeps exact ties out of the count) is the
    same sequence of IEEE operations as the compiled kernel.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    off2 = off * off
    counts = np.zeros(shifts.shape, dtype=np.int64)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        d = diag[0] - shifts
        d = np.where(d == 0.0, STURM_PIVOT_TINY, d)
        counts += d < 0.0
        for i in range(1, diag.shape[0]):
            d = (diag[i] - shifts) - off2[i - 1] / d
            d = np.where(d == 0.0, STURM_PIVOT_TINY, d)
            counts += d < 0.0
    return counts


def _pruefer_rhs(s, phi, mu, eps_sc):
    q = mu + eps_sc * math.exp(2.0 * s)
    c = math.cos(phi)
    sn = math.sin(phi)
    return c * c - q * sn * sn


def _pruefer_advance(mu, eps_sc, s, phi, s_stop, rtol, atol, k1):
    """One adaptive DOPRI5 leg of the phase ODE; returns (s, phi, k1, ok)."""
    h = 0.1
    if s + h > s_stop:
        h = s_stop - s
    facold = 1e-4
    while s < s_stop:
        if s + h >= s_stop:
            h = s_stop - s
        k2 = _pruefer_rhs(s + 0.2 * h, phi + h * 0.2 * k1, mu, eps_sc)
        k3 = _pruefer_rhs(s + 0.3 * h, phi + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2), mu, eps_sc)
        k4 = _pruefer_rhs(
            s + 0.8 * h,
            phi + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3),
            mu,
            eps_sc,
        )
        k5 = _pruefer_rhs(
            s + 8.0 / 9.0 * h,
            phi
            + h
            * (
                19372.0 / 6561.0 * k1
                - 25360.0 / 2187.0 * k2
                + 64448.0 / 6561.0 * k3
                - 212.0 / 729.0 * k4
            ),
            mu,
            eps_sc,
        )
        k6 = _pruefer_rhs(
            s + h,
            phi
            + h
            * (
                9017.0 / 3168.0 * k1
                - 355.0 / 33.0 * k2
                + 46732.0 / 5247.0 * k3
                + 49.0 / 176.0 * k4
                - 5103.0 / 18656.0 * k5
            ),
            mu,
            eps_sc,
        )
        phi_new = phi + h * (
            35.0 / 384.0 * k1
            + 500.0 / 1113.0 * k3
            + 125.0 / 192.0 * k4
            - 2187.0 / 6784.0 * k5
            + 11.0 / 84.0 * k6
        )
        k7 = _pruefer_rhs(s + h, phi_new, mu, eps_sc)
        err_raw = h * (
            71.0 / 57600.0 * k1
            - 71.0 / 16695.0 * k3
            + 71.0 / 1920.0 * k4
            - 17253.0 / 339200.0 * k5
            + 22.0 / 525.0 * k6
            - 1.0 / 40.0 * k7
        )
        scale = atol + rtol * max(abs(phi), abs(phi_new))
        err = abs(err_raw) / scale
        if err <= 1.0:
            s += h
            phi = phi_new
            k1 = k7
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * err ** (-PI_ALPHA) * facold**PI_BETA
                factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            facold = max(err, 1e-4)
            h *= factor
        else:
            factor = max(MIN_FACTOR, min(1.0, SAFETY * err**-0.2))
            h *= factor
            if h < 1e-14 * max(abs(s), 1.0):
                return s, phi, k1, False
    return s, phi, k1, True


def pruefer_count(mu, eps_sc, rtol, atol):
    """Zeros on (0, inf) of the Dirichlet solution of w'' = (mu + eps_sc*e^{2s}) w.

    Returns the zero count, or -1 if the phase failed to settle (stiffness).
    The phase phi obeys phi' = cos^2 - Q sin^2, starts at 0, and passes each
    multiple of pi monotonically; past the turning point it relaxes onto the
    attractor just above floor(phi/pi)*pi, which fixes the count exactly.
    """
    if mu >= 0.25:
        return 0
    if mu + eps_sc >= 0.0:
        # Q(s) > 0 on (0, inf): the solution is convex away from zero.
        return 0
    s_end = 0.5 * math.log(max(1.0, 0.25 - mu) / eps_sc) + 5.0
    if s_end <= 0.0:
        return 0
    s = 0.0
    phi = 0.0
    k1 = _pruefer_rhs(s, phi, mu, eps_sc)
    s, phi, k1, ok = _pruefer_advance(mu, eps_sc, s, phi, s_end, rtol, atol, k1)
    if not ok:
        return -1
    q_trap = _TRAP_Q_FACTOR * max(1.0, -mu)
    for _ in range(_MAX_SETTLE_CHUNKS):
        q = mu + eps_sc * math.exp(2.0 * s)
        if q >= q_trap:
            psi = math.fmod(phi, math.pi)
            if 0.0 <= psi < 0.5 * math.pi and math.tan(psi) <= _TRAP_TAN_FACTOR / math.sqrt(q):
                return int(math.floor(phi / math.pi))
        s, phi, k1, ok = _pruefer_advance(mu, eps_sc, s, phi, s + 1.0, rtol, atol, k1)
        if not ok:
            return -1
    return -1


def _dirac_rhs(r, f, g, kappa, nu, lam):
    fp = (kappa / r) * f + (lam - nu / r) * g
    gp = (nu / r - lam) * f - (kappa / r) * g
    return fp, gp


def dirac_shoot(kappa, nu, lam, r0, f0, g0, r_end, rtol, atol):
    """Integrate the radial Dirac-Coulomb channel system from r0 to r_end.

    Returns the solution (f, g) at r_end normalized to unit max-norm; the
    normalization factor is positive at every checkpoint so the signs (hence
    the zeros of any miss function) are untouched.  Returns (nan, nan) when
    the step size underflows.
    """
    r = r0
    f = f0
    g = g0
    h = 0.05 * r0
    if h <= 0.0 or r_end <= r0:
        return math.nan, math.nan
    kf1, kg1 = _dirac_rhs(r, f, g, kappa, nu, lam)
    facold = 1e-4
    while r < r_end:
        if r + h >= r_end:
            h = r_end - r
        kf2, kg2 = _dirac_rhs(r + 0.2 * h, f + h * 0.2 * kf1, g + h * 0.2 * kg1, kappa, nu, lam)
        kf3, kg3 = _dirac_rhs(
            r + 0.3 * h,
            f + h * (3.0 / 40.0 * kf1 + 9.0 / 40.0 * kf2),
            g + h * (3.0 / 40.0 * kg1 + 9.0 / 40.0 * kg2),
            kappa,
            nu,
            lam,
        )
        kf4, kg4 = _dirac_rhs(
            r + 0.8 * h,
            f + h * (44.0 / 45.0 * kf1 - 56.0 / 15.0 * kf2 + 32.0 / 9.0 * kf3),
            g + h * (44.0 / 45.0 * kg1 - 56.0 / 15.0 * kg2 + 32.0 / 9.0 * kg3),
            kappa,
            nu,
            lam,
        )
        kf5, kg5 = _dirac_rhs(
            r + 8.0 / 9.0 * h,
            f
            + h
            * (
                19372.0 / 6561.0 * kf1
                - 25360.0 / 2187.0 * kf2
                + 64448.0 / 6561.0 * kf3
                - 212.0 / 729.0 * kf4
            ),
            g
            + h
            * (
                19372.0 / 6561.0 * kg1
                - 25360.0 / 2187.0 * kg2
                + 64448.0 / 6561.0 * kg3
                - 212.0 / 729.0 * kg4
            ),
            kappa,
            nu,
            lam,
        )
        kf6, kg6 = _dirac_rhs(
            r + h,
            f
            + h
            * (
                9017.0 / 3168.0 * kf1
                - 355.0 / 33.0 * kf2
                + 46732.0 / 5247.0 * kf3
                + 49.0 / 176.0 * kf4
                - 5103.0 / 18656.0 * kf5
            ),
            g
            + h
            * (
                9017.0 / 3168.0 * kg1
                - 355.0 / 33.0 * kg2
                + 46732.0 / 5247.0 * kg3
                + 49.0 / 176.0 * kg4
                - 5103.0 / 18656.0 * kg5
            ),
            kappa,
            nu,
            lam,
        )
        f_new = f + h * (
            35.0 / 384.0 * kf1
            + 500.0 / 1113.0 * kf3
            + 125.0 / 192.0 * kf4
            - 2187.0 / 6784.0 * kf5
            + 11.0 / 84.0 * kf6
        )
        g_new = g + h * (
            35.0 / 384.0 * kg1
            + 500.0 / 1113.0 * kg3
            + 125.0 / 192.0 * kg4
            - 2187.0 / 6784.0 * kg5
            + 11.0 / 84.0 * kg6
        )
        kf7, kg7 = _dirac_rhs(r + h, f_new, g_new, kappa, nu, lam)
        ef = h * (
            71.0 / 57600.0 * kf1
            - 71.0 / 16695.0 * kf3
            + 71.0 / 1920.0 * kf4
            - 17253.0 / 339200.0 * kf5
            + 22.0 / 525.0 * kf6
            - 1.0 / 40.0 * kf7
        )
        eg = h * (
            71.0 / 57600.0 * kg1
            - 71.0 / 16695.0 * kg3
            + 71.0 / 1920.0 * kg4
            - 17253.0 / 339200.0 * kg5
            + 22.0 / 525.0 * kg6
            - 1.0 / 40.0 * kg7
        )
        sf = atol + rtol * max(abs(f), abs(f_new))
        sg = atol + rtol * max(abs(g), abs(g_new))
        err = math.sqrt(0.5 * ((ef / sf) ** 2 + (eg / sg) ** 2))
        if err <= 1.0:
            r += h
            f = f_new
            g = g_new
            kf1 = kf7
            kg1 = kg7
            a = max(abs(f), abs(g))
            if a > 1e100 or (0.0 < a < 1e-100):
                inv = 1.0 / a
                f *= inv
                g *= inv
                kf1 *= inv
                kg1 *= inv
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * err ** (-PI_ALPHA) * facold**PI_BETA
                factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            facold = max(err, 1e-4)
            h *= factor
        else:
            factor = max(MIN_FACTOR, min(1.0, SAFETY * err**-0.2))
            h *= factor
            if h < 1e-15 * max(r, 1e-3):
                return math.nan, math.nan
    a = max(abs(f), abs(g))
    if a == 0.0 or not math.isfinite(a):
        return math.nan, math.nan
    return f / a, g / a
