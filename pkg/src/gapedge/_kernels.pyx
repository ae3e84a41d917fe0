# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: Sturm counts, Pruefer phase counting, channel shooting.

Same algorithms and constants as ``_kernels_py``; that module is the readable
reference, this one is the fast path.
"""

import numpy as np

from libc.math cimport cos, exp, fabs, floor, fmod, isfinite, log, sin, sqrt, tan, NAN

BACKEND_NAME = "compiled"

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0
cdef double PI_BETA = 0.08
cdef double PI_ALPHA = 0.2 - 0.75 * 0.08
cdef double STURM_TINY = 1e-300
cdef double M_PI = 3.141592653589793238462643383279502884

cdef double TRAP_Q_FACTOR = 1e4
cdef double TRAP_TAN_FACTOR = 2.0
cdef int MAX_SETTLE_CHUNKS = 64


def sturm_counts(diag, off, shifts):
    """Eigenvalues strictly below each shift (Sturm recurrence, zero pivot -> +1e-300)."""
    cdef double[::1] a = np.ascontiguousarray(diag, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(off, dtype=np.float64)
    cdef double[::1] sig = np.ascontiguousarray(shifts, dtype=np.float64)
    out = np.zeros(sig.shape[0], dtype=np.int64)
    cdef long long[::1] cnt = out
    cdef Py_ssize_t n = a.shape[0], m = sig.shape[0], i, j
    cdef double d, s
    cdef long long c
    with nogil:
        for j in range(m):
            s = sig[j]
            c = 0
            d = a[0] - s
            if d == 0.0:
                d = STURM_TINY
            if d < 0.0:
                c += 1
            for i in range(1, n):
                d = (a[i] - s) - b[i - 1] * b[i - 1] / d
                if d == 0.0:
                    d = STURM_TINY
                if d < 0.0:
                    c += 1
            cnt[j] = c
    return out


cdef inline double _pruefer_rhs(double s, double phi, double mu, double eps_sc) nogil:
    cdef double q = mu + eps_sc * exp(2.0 * s)
    cdef double c = cos(phi)
    cdef double sn = sin(phi)
    return c * c - q * sn * sn


cdef int _pruefer_advance(double mu, double eps_sc, double* s_io, double* phi_io,
                          double s_stop, double rtol, double atol, double* k1_io) nogil:
    cdef double s = s_io[0], phi = phi_io[0], k1 = k1_io[0]
    cdef double h = 0.1
    cdef double facold = 1e-4
    cdef double k2, k3, k4, k5, k6, k7, phi_new, err_raw, scale, err, factor, m1, m2
    if s + h > s_stop:
        h = s_stop - s
    while s < s_stop:
        if s + h >= s_stop:
            h = s_stop - s
        k2 = _pruefer_rhs(s + 0.2 * h, phi + h * 0.2 * k1, mu, eps_sc)
        k3 = _pruefer_rhs(s + 0.3 * h, phi + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2), mu, eps_sc)
        k4 = _pruefer_rhs(s + 0.8 * h,
                          phi + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3),
                          mu, eps_sc)
        k5 = _pruefer_rhs(s + 8.0 / 9.0 * h,
                          phi + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2
                                     + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4),
                          mu, eps_sc)
        k6 = _pruefer_rhs(s + h,
                          phi + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2
                                     + 46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4
                                     - 5103.0 / 18656.0 * k5),
                          mu, eps_sc)
        phi_new = phi + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4
                             - 2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6)
        k7 = _pruefer_rhs(s + h, phi_new, mu, eps_sc)
        err_raw = h * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 + 71.0 / 1920.0 * k4
                       - 17253.0 / 339200.0 * k5 + 22.0 / 525.0 * k6 - 1.0 / 40.0 * k7)
        m1 = fabs(phi)
        m2 = fabs(phi_new)
        scale = atol + rtol * (m1 if m1 > m2 else m2)
        err = fabs(err_raw) / scale
        if err <= 1.0:
            s += h
            phi = phi_new
            k1 = k7
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * err ** (-PI_ALPHA) * facold ** PI_BETA
                if factor > MAX_FACTOR:
                    factor = MAX_FACTOR
                elif factor < MIN_FACTOR:
                    factor = MIN_FACTOR
            facold = err if err > 1e-4 else 1e-4
            h *= factor
        else:
            factor = SAFETY * err ** -0.2
            if factor > 1.0:
                factor = 1.0
            elif factor < MIN_FACTOR:
                factor = MIN_FACTOR
            h *= factor
            if h < 1e-14 * (fabs(s) if fabs(s) > 1.0 else 1.0):
                s_io[0] = s
                phi_io[0] = phi
                k1_io[0] = k1
                return 0
    s_io[0] = s
    phi_io[0] = phi
    k1_io[0] = k1
    return 1


def pruefer_count(double mu, double eps_sc, double rtol, double atol):
    """Zero count of the Dirichlet solution of w'' = (mu + eps_sc*e^{2s}) w on (0, inf)."""
    cdef double s_end, s, phi, k1, q, q_trap, psi
    cdef int chunk, ok
    if mu >= 0.25:
        return 0
    if mu + eps_sc >= 0.0:
        return 0
    s_end = 0.5 * log((1.0 if 0.25 - mu < 1.0 else 0.25 - mu) / eps_sc) + 5.0
    if s_end <= 0.0:
        return 0
    s = 0.0
    phi = 0.0
    with nogil:
        k1 = _pruefer_rhs(s, phi, mu, eps_sc)
        ok = _pruefer_advance(mu, eps_sc, &s, &phi, s_end, rtol, atol, &k1)
    if not ok:
        return -1
    q_trap = TRAP_Q_FACTOR * (1.0 if -mu < 1.0 else -mu)
    for chunk in range(MAX_SETTLE_CHUNKS):
        q = mu + eps_sc * exp(2.0 * s)
        if q >= q_trap:
            psi = fmod(phi, M_PI)
            if 0.0 <= psi < 0.5 * M_PI and tan(psi) <= TRAP_TAN_FACTOR / sqrt(q):
                return int(floor(phi / M_PI))
        with nogil:
            ok = _pruefer_advance(mu, eps_sc, &s, &phi, s + 1.0, rtol, atol, &k1)
        if not ok:
            return -1
    return -1


cdef inline void _dirac_rhs(double r, double f, double g, double kappa, double nu,
                            double lam, double* fp, double* gp) nogil:
    fp[0] = (kappa / r) * f + (lam - nu / r) * g
    gp[0] = (nu / r - lam) * f - (kappa / r) * g


def dirac_shoot(double kappa, double nu, double lam, double r0, double f0, double g0,
                double r_end, double rtol, double atol):
    """Shoot the 2x2 channel system outward; returns (f, g) at r_end, unit max-norm."""
    cdef double r = r0, f = f0, g = g0
    cdef double h = 0.05 * r0
    cdef double facold = 1e-4
    cdef double kf1, kg1, kf2, kg2, kf3, kg3, kf4, kg4, kf5, kg5, kf6, kg6, kf7, kg7
    cdef double f_new, g_new, ef, eg, sf, sg, err, factor, a, inv, m1, m2
    cdef int fail = 0
    if h <= 0.0 or r_end <= r0:
        return NAN, NAN
    with nogil:
        _dirac_rhs(r, f, g, kappa, nu, lam, &kf1, &kg1)
        while r < r_end:
            if r + h >= r_end:
                h = r_end - r
            _dirac_rhs(r + 0.2 * h, f + h * 0.2 * kf1, g + h * 0.2 * kg1,
                       kappa, nu, lam, &kf2, &kg2)
            _dirac_rhs(r + 0.3 * h,
                       f + h * (3.0 / 40.0 * kf1 + 9.0 / 40.0 * kf2),
                       g + h * (3.0 / 40.0 * kg1 + 9.0 / 40.0 * kg2),
                       kappa, nu, lam, &kf3, &kg3)
            _dirac_rhs(r + 0.8 * h,
                       f + h * (44.0 / 45.0 * kf1 - 56.0 / 15.0 * kf2 + 32.0 / 9.0 * kf3),
                       g + h * (44.0 / 45.0 * kg1 - 56.0 / 15.0 * kg2 + 32.0 / 9.0 * kg3),
                       kappa, nu, lam, &kf4, &kg4)
            _dirac_rhs(r + 8.0 / 9.0 * h,
                       f + h * (19372.0 / 6561.0 * kf1 - 25360.0 / 2187.0 * kf2
                                + 64448.0 / 6561.0 * kf3 - 212.0 / 729.0 * kf4),
                       g + h * (19372.0 / 6561.0 * kg1 - 25360.0 / 2187.0 * kg2
                                + 64448.0 / 6561.0 * kg3 - 212.0 / 729.0 * kg4),
                       kappa, nu, lam, &kf5, &kg5)
            _dirac_rhs(r + h,
                       f + h * (9017.0 / 3168.0 * kf1 - 355.0 / 33.0 * kf2
                                + 46732.0 / 5247.0 * kf3 + 49.0 / 176.0 * kf4
                                - 5103.0 / 18656.0 * kf5),
                       g + h * (9017.0 / 3168.0 * kg1 - 355.0 / 33.0 * kg2
                                + 46732.0 / 5247.0 * kg3 + 49.0 / 176.0 * kg4
                                - 5103.0 / 18656.0 * kg5),
                       kappa, nu, lam, &kf6, &kg6)
            f_new = f + h * (35.0 / 384.0 * kf1 + 500.0 / 1113.0 * kf3 + 125.0 / 192.0 * kf4
                             - 2187.0 / 6784.0 * kf5 + 11.0 / 84.0 * kf6)
            g_new = g + h * (35.0 / 384.0 * kg1 + 500.0 / 1113.0 * kg3 + 125.0 / 192.0 * kg4
                             - 2187.0 / 6784.0 * kg5 + 11.0 / 84.0 * kg6)
            _dirac_rhs(r + h, f_new, g_new, kappa, nu, lam, &kf7, &kg7)
            ef = h * (71.0 / 57600.0 * kf1 - 71.0 / 16695.0 * kf3 + 71.0 / 1920.0 * kf4
                      - 17253.0 / 339200.0 * kf5 + 22.0 / 525.0 * kf6 - 1.0 / 40.0 * kf7)
            eg = h * (71.0 / 57600.0 * kg1 - 71.0 / 16695.0 * kg3 + 71.0 / 1920.0 * kg4
                      - 17253.0 / 339200.0 * kg5 + 22.0 / 525.0 * kg6 - 1.0 / 40.0 * kg7)
            m1 = fabs(f)
            m2 = fabs(f_new)
            sf = atol + rtol * (m1 if m1 > m2 else m2)
            m1 = fabs(g)
            m2 = fabs(g_new)
            sg = atol + rtol * (m1 if m1 > m2 else m2)
            err = sqrt(0.5 * ((ef / sf) * (ef / sf) + (eg / sg) * (eg / sg)))
            if err <= 1.0:
                r += h
                f = f_new
                g = g_new
                kf1 = kf7
                kg1 = kg7
                a = fabs(f) if fabs(f) > fabs(g) else fabs(g)
                if a > 1e100 or (0.0 < a < 1e-100):
                    inv = 1.0 / a
                    f *= inv
                    g *= inv
                    kf1 *= inv
                    kg1 *= inv
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = SAFETY * err ** (-PI_ALPHA) * facold ** PI_BETA
                    if factor > MAX_FACTOR:
                        factor = MAX_FACTOR
                    elif factor < MIN_FACTOR:
                        factor = MIN_FACTOR
                facold = err if err > 1e-4 else 1e-4
                h *= factor
            else:
                factor = SAFETY * err ** -0.2
                if factor > 1.0:
                    factor = 1.0
                elif factor < MIN_FACTOR:
                    factor = MIN_FACTOR
                h *= factor
                if h < 1e-15 * (r if r > 1e-3 else 1e-3):
                    fail = 1
                    break
    if fail:
        return NAN, NAN
    a = fabs(f) if fabs(f) > fabs(g) else fabs(g)
    if a == 0.0 or not isfinite(a):
        return NAN, NAN
    return f / a, g / a
