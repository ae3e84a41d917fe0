"""Radial Dirac-Coulomb channel operators on (0, theta).

For half-integer kappa and subcritical coupling nu the channel operator is

    [[ nu/r,        -d/dr - kappa/r ],
     [ d/dr - kappa/r,   nu/r       ]]

with the self-adjoint boundary condition psi_1(theta) = psi_2(theta) at the
outer end.  At the origin both Frobenius exponents are +-s with
s = sqrt(kappa^2 - nu^2); the endpoint is limit circle exactly when s < 1/2
(both powers square-integrable), i.e. for |kappa| = 1/2, and there the
distinguished extension keeps the r^{+s} branch.  Spectra are computed by
shooting from a series seed near the origin and matching the boundary
condition; the shooting solution is renormalized (positively) along the way,
which leaves the zeros of the miss function untouched.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import GapedgeError, InvalidInputError, SeedAccuracyError, StiffnessError
from .linalg import brent_root

#: Shooting start radius: min(R0_CAP, R0_THETA_FACTOR * theta).
R0_CAP = 1e-6
R0_THETA_FACTOR = 1e-3

#: Shooting integrator tolerances.
SHOOT_RTOL = 1e-10
SHOOT_ATOL = 1e-12

#: Eigenvalue refinement tolerance (absolute, scaled by 1/theta).
ROOT_TOL_FACTOR = 1e-10

#: Base scan resolution: eigenvalue gaps are ~pi/theta asymptotically.
SCAN_STEP_FACTOR = 0.25  # of pi/theta
SCAN_MAX_REFINEMENTS = 3

#: min_modulus window growth.
WINDOW_GROWTH = 2.0
WINDOW_MAX_DOUBLINGS = 12


def constants():
    return {
        "r0_cap": R0_CAP,
        "r0_theta_factor": R0_THETA_FACTOR,
        "shoot_rtol": SHOOT_RTOL,
        "shoot_atol": SHOOT_ATOL,
        "root_tol_factor": ROOT_TOL_FACTOR,
        "scan_step_factor": SCAN_STEP_FACTOR,
        "scan_max_refinements": SCAN_MAX_REFINEMENTS,
        "window_growth": WINDOW_GROWTH,
        "window_max_doublings": WINDOW_MAX_DOUBLINGS,
    }


class Endpoint(enum.Enum):
    LIMIT_CIRCLE = "limit_circle"
    LIMIT_POINT = "limit_point"


def _check_kappa(kappa):
    k2 = 2.0 * float(kappa)
    if not math.isfinite(k2) or k2 != round(k2) or int(round(k2)) % 2 == 0:
        raise InvalidInputError("kappa must be a half-integer (in Z + 1/2)")
    return float(kappa)


def _check_nu(nu):
    nu = float(nu)
    if not (math.isfinite(nu) and abs(nu) < 0.5):
        raise InvalidInputError("nu must satisfy |nu| < 1/2")
    return nu


@dataclass(frozen=True)
class DiracChannelSpec:
    """Channel (kappa, nu, theta); nu = 0 is admitted as a test limit."""

    kappa: float
    nu: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "kappa", _check_kappa(self.kappa))
        object.__setattr__(self, "nu", _check_nu(self.nu))
        if not (math.isfinite(self.theta) and self.theta > 0.0):
            raise InvalidInputError("theta must be positive")
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def s(self) -> float:
        return math.sqrt(self.kappa**2 - self.nu**2)


@dataclass(frozen=True)
class FrobeniusSeed:
    """Leading power-law behavior at the origin: amplitude * r^exponent."""

    branch: str          # "+" or "-"
    vector: tuple        # 2-component amplitude, unit norm
    exponent: float


def classify(kappa, nu) -> Endpoint:
    """Weyl classification at the origin: limit circle iff s < 1/2.

    Both r^{+s} and r^{-s} are square-integrable near 0 exactly when 2s < 1;
    under |nu| < 1/2 that happens precisely for |kappa| = 1/2.
    """
    kappa = _check_kappa(kappa)
    nu = _check_nu(nu)
    s = math.sqrt(kappa * kappa - nu * nu)
    return Endpoint.LIMIT_CIRCLE if s < 0.5 else Endpoint.LIMIT_POINT


def _branch_vector(kappa, nu, s, sign):
    """Unit eigenvector of [[kappa, -nu], [nu, -kappa]] for eigenvalue sign*s.

    Two proportional representations exist; pick whichever stays nonzero in
    the nu -> 0 limit.
    """
    v1 = np.array([kappa + sign * s, nu])
    v2 = np.array([-nu, sign * s - kappa])
    v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    n = np.linalg.norm(v)
    if n == 0.0:
        raise InvalidInputError("degenerate Frobenius direction")
    return v / n


def frobenius_seed(spec: DiracChannelSpec, branch: str = "+") -> FrobeniusSeed:
    sign = +1.0 if branch == "+" else -1.0
    v = _branch_vector(spec.kappa, spec.nu, spec.s, sign)
    return FrobeniusSeed(branch=branch, vector=(float(v[0]), float(v[1])), exponent=sign * spec.s)


def default_r0(theta: float) -> float:
    return min(R0_CAP, R0_THETA_FACTOR * theta)


def seed(spec: DiracChannelSpec, r0: float, lam: float = 0.0) -> np.ndarray:
    """Distinguished (+ branch) initial value at r0, first series correction included.

    The series remainder is O(r^{2+s}) relative O(r0^2) with the correction,
    so halving r0 is the accuracy test.  r0 must not exceed 1e-3 * theta.
    """
    r0 = float(r0)
    if not (0.0 < r0 <= R0_THETA_FACTOR * spec.theta):
        raise SeedAccuracyError(f"r0 must lie in (0, {R0_THETA_FACTOR * spec.theta}]")
    s = spec.s
    v0 = _branch_vector(spec.kappa, spec.nu, s, +1.0)
    a0 = np.array([[spec.kappa, -spec.nu], [spec.nu, -spec.kappa]])
    a1 = np.array([[0.0, lam], [-lam, 0.0]])
    v1 = np.linalg.solve((s + 1.0) * np.eye(2) - a0, a1 @ v0)
    return r0**s * (v0 + r0 * v1)


def _miss(spec: DiracChannelSpec, lam: float, r0: float) -> float:
    """Boundary mismatch psi_1(theta) - psi_2(theta) of the normalized shot."""
    y0 = seed(spec, r0, lam)
    f, g = _backend.dirac_shoot(
        spec.kappa, spec.nu, lam, r0, float(y0[0]), float(y0[1]), spec.theta, SHOOT_RTOL, SHOOT_ATOL
    )
    if math.isnan(f) or math.isnan(g):
        raise StiffnessError(lam, f"channel shooting failed at lambda={lam}")
    return f - g


def _scan_roots(spec, lo, hi, step, r0, tol):
    n = max(8, int(math.ceil((hi - lo) / step)))
    grid = np.linspace(lo, hi, n + 1)
    vals = [_miss(spec, lam, r0) for lam in grid]
    roots = []
    for i in range(n):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(brent_root(lambda lam: _miss(spec, lam, r0), a, b, tol))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def eigenvalues(spec: DiracChannelSpec, window, max_count: int = 64, r0: float = None) -> np.ndarray:
    """Channel eigenvalues in the window, ascending, via shooting.

    The scan grid is refined (halved) until two consecutive resolutions agree
    on the root set, which guards against roots closer than the grid step.
    The optional r0 override exists for seed-accuracy studies (halving r0 is
    the documented accuracy test).
    """
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise InvalidInputError("window must be a bounded interval")
    max_count = int(max_count)
    if max_count < 1:
        raise InvalidInputError("max_count must be positive")
    if r0 is None:
        r0 = default_r0(spec.theta)
    tol = ROOT_TOL_FACTOR * max(1.0, 1.0 / spec.theta)
    step = SCAN_STEP_FACTOR * math.pi / spec.theta
    prev = None
    for _ in range(SCAN_MAX_REFINEMENTS + 1):
        roots = _scan_roots(spec, lo, hi, step, r0, tol)
        if prev is not None and len(prev) == len(roots):
            if all(abs(a - b) <= 1e-6 * max(1.0, 1.0 / spec.theta) for a, b in zip(prev, roots)):
                return np.array(roots[:max_count])
        prev = roots
        step *= 0.5
    raise GapedgeError("eigenvalue scan did not stabilize (window too coarse)")


def min_modulus(spec: DiracChannelSpec) -> float:
    """Smallest |lambda| in a window grown until the spectrum shows up."""
    w = max(4.0, abs(spec.kappa) + 2.0) / spec.theta
    for _ in range(WINDOW_MAX_DOUBLINGS):
        evs = eigenvalues(spec, (-w, w), max_count=256)
        if evs.size:
            return float(np.min(np.abs(evs)))
        w *= WINDOW_GROWTH
    raise GapedgeError("no eigenvalue found; window growth exhausted")
