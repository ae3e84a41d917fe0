"""Eigenvalue counting for the radial inverse-square operators.

The channel operator is -u'' + (mu - 1/4)/r^2 on (gamma, inf) with a
Dirichlet condition at gamma; mu is an angular eigenvalue from the Mathieu
module.  In the log coordinate t = log r with u = e^{t/2} w(t), the equation
at energy -eps becomes

    w'' = (mu + eps * gamma^2 * e^{2s}) w,      s = t - log(gamma),

so counting eigenvalues below -eps is counting the zeros of the Dirichlet
solution (oscillation theorem), done with a Pruefer phase whose passage
through multiples of pi is monotone: no zero can be missed under adaptive
stepping.  Because the implementation always integrates the rescaled (s,
eps*gamma^2) problem, the dilation identity

    count_below((mu, gamma), eps) == count_below((mu, 1), gamma^2 * eps)

holds exactly, by construction.
"""

from dataclasses import dataclass

import math

import numpy as np

from . import _backend
from .errors import InvalidInputError, StiffnessError

#: Attractive channels need mu < 1/4 after the -1/4 Hardy shift; at or above
#: this the operator is nonnegative and counting short-circuits to zero.
MU_NONNEGATIVE = 0.25

#: Pruefer phase integrator tolerances.
PHASE_RTOL = 1e-9
PHASE_ATOL = 1e-11

#: Eigenvalue search floor for lowest_eigenvalues.
EPS_FLOOR = 1e-60

#: Bisection tolerance in log(eps).
LOG_EPS_TOL = 1e-10


def constants():
    return {
        "mu_nonnegative": MU_NONNEGATIVE,
        "phase_rtol": PHASE_RTOL,
        "phase_atol": PHASE_ATOL,
        "eps_floor": EPS_FLOOR,
        "log_eps_tol": LOG_EPS_TOL,
    }


@dataclass(frozen=True)
class RadialChannel:
    """Angular eigenvalue mu and inner Dirichlet radius gamma."""

    mu: float
    gamma: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise InvalidInputError("mu must be finite")
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise InvalidInputError("gamma must be positive")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "gamma", float(self.gamma))


@dataclass(frozen=True)
class CountingCurve:
    """Samples (eps, count) with eps strictly decreasing, counts nondecreasing."""

    samples: tuple
    metadata: dict

    def __post_init__(self):
        samples = tuple((float(e), int(n)) for e, n in self.samples)
        eps = np.array([s[0] for s in samples])
        cnt = np.array([s[1] for s in samples])
        if eps.size == 0:
            raise InvalidInputError("counting curve needs at least one sample")
        if np.any(eps <= 0.0) or np.any(np.diff(eps) >= 0.0):
            raise InvalidInputError("eps samples must be positive and strictly decreasing")
        if np.any(np.diff(cnt) < 0):
            raise InvalidInputError("counts must be nondecreasing as eps decreases")
        if np.any(cnt < 0):
            raise InvalidInputError("counts must be nonnegative")
        object.__setattr__(self, "samples", samples)

    @property
    def eps_values(self):
        return np.array([s[0] for s in self.samples])

    @property
    def counts(self):
        return np.array([s[1] for s in self.samples])


@dataclass(frozen=True)
class LowestLevels:
    """Deepest eigenvalues, most negative first; `complete` is False when the
    eps >= EPS_FLOOR search window held fewer levels than requested."""

    eigenvalues: np.ndarray
    complete: bool


def count_below(ch, eps):
    """Number of Dirichlet eigenvalues below -eps.

    Fast path 0 for mu >= 1/4 (nonnegative operator); otherwise Pruefer zero
    counting in the log coordinate, integrated past the classical turning
    point until the phase is trapped in the forbidden region.
    """
    eps = float(eps)
    if not (math.isfinite(eps) and eps > 0.0):
        raise InvalidInputError("eps must be positive")
    if ch.mu >= MU_NONNEGATIVE:
        return 0
    eps_scaled = eps * ch.gamma * ch.gamma
    n = _backend.pruefer_count(ch.mu, eps_scaled, PHASE_RTOL, PHASE_ATOL)
    if n < 0:
        raise StiffnessError(None, f"phase integration failed for mu={ch.mu}, eps={eps}")
    return int(n)


def lowest_eigenvalues(ch, k):
    """The k deepest eigenvalues, located by bisecting count_below in log(eps).

    Returns them most negative first (the magnitudes are the jump locations
    of count_below).  Levels deeper into the threshold than EPS_FLOOR are not
    searched; if fewer than k exist above the floor the result is partial and
    flagged.
    """
    k = int(k)
    if k < 1:
        raise InvalidInputError("k must be positive")
    if ch.mu >= 0.0:
        return LowestLevels(eigenvalues=np.empty(0), complete=True)
    # Variational bound: the potential is >= (mu - 1/4)/gamma^2 on the domain,
    # so no eigenvalue lies below that; one jump above it the count is zero.
    eps_hi = (0.25 - ch.mu) / (ch.gamma * ch.gamma) * (1.0 + 1e-10)
    total = count_below(ch, EPS_FLOOR)
    n_find = min(k, total)
    found = []
    y_hi = math.log(eps_hi)
    for n in range(1, n_find + 1):
        lo = math.log(EPS_FLOOR)  # count(eps_floor) >= n
        hi = y_hi                 # count at the ceiling is n-1 or less
        while hi - lo > LOG_EPS_TOL:
            mid = 0.5 * (lo + hi)
            if count_below(ch, math.exp(mid)) >= n:
                lo = mid
            else:
                hi = mid
        y_n = 0.5 * (lo + hi)
        found.append(-math.exp(y_n))
        y_hi = y_n  # the next level is strictly closer to the threshold
    return LowestLevels(eigenvalues=np.array(found), complete=total >= k)


def channel_slope(mu):
    """Per-channel accumulation rate sqrt(max(-mu, 0)) / (2 pi)."""
    mu = float(mu)
    if not math.isfinite(mu):
        raise InvalidInputError("mu must be finite")
    return math.sqrt(max(-mu, 0.0)) / (2.0 * math.pi)
