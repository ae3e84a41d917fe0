"""Angular operator -d^2/dtheta^2 - p*cos(theta) on the circle.

Periodic boundary conditions; in the Fourier basis e^{ik theta} (k = -K..K)
the operator is exactly tridiagonal: k^2 on the diagonal, -p/2 on the
off-diagonals (cos couples adjacent modes).  The accumulation-rate functional

    rate(p) = (1/pi) * sum_j sqrt(max(-lambda_j, 0))

is the slope constant the counting modules compare against.  Negative
eigenvalues only occur in modes with k^2 < |p|, so the sum is finite and the
truncation rule below makes first-pass convergence typical.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, TruncationError
from .linalg import SymTridiag, eigen_tridiag, sturm_count

#: Fourier cutoff rule: K = ceil(sqrt(2|p|)) + margin.
TRUNCATION_MARGIN = 8

#: Doubling stops once the lowest eigenvalues move by less than this.
CONVERGENCE_TOL = 1e-10

#: Number of K-doublings allowed before giving up.
MAX_DOUBLINGS = 6

#: The spectrum keeps all negative eigenvalues plus this many positive ones.
N_POSITIVE_KEPT = 10


def constants():
    return {
        "truncation_margin": TRUNCATION_MARGIN,
        "convergence_tol": CONVERGENCE_TOL,
        "max_doublings": MAX_DOUBLINGS,
        "n_positive_kept": N_POSITIVE_KEPT,
    }


def _rule_modes(p):
    return math.ceil(math.sqrt(2.0 * abs(p))) + TRUNCATION_MARGIN


@dataclass(frozen=True)
class MathieuProblem:
    """Coupling p and Fourier cutoff K (basis k = -K..K).

    The sign of p is spectrally irrelevant (theta -> theta + pi flips it);
    rate-level quantities use |p|.  `for_coupling` applies the default
    truncation rule; explicit small cutoffs remain constructible for tests.
    """

    p: float
    n_modes: int

    def __post_init__(self):
        if not math.isfinite(self.p):
            raise InvalidInputError("p must be finite")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise InvalidInputError("n_modes must be a positive integer")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "n_modes", int(self.n_modes))

    @classmethod
    def for_coupling(cls, p):
        return cls(p=float(p), n_modes=_rule_modes(p))

    @property
    def dim(self):
        return 2 * self.n_modes + 1


@dataclass(frozen=True)
class MathieuSpectrum:
    """Converged eigenvalues (all negative plus a positive tail) and the rate."""

    problem: MathieuProblem
    eigenvalues: np.ndarray
    rate: float

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(ev) < 0):
            raise InvalidInputError("eigenvalues must be ascending")
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def ceiling(self):
        return float(self.eigenvalues[-1])

    @property
    def negative(self):
        return self.eigenvalues[self.eigenvalues < 0.0]


def assemble(problem):
    """Tridiagonal Fourier matrix of the operator: diag k^2, offdiag -p/2."""
    k = np.arange(-problem.n_modes, problem.n_modes + 1, dtype=float)
    diag = k * k
    off = np.full(k.size - 1, -0.5 * problem.p)
    return SymTridiag(diag, off)


def _converged_eigenvalues(p, n_modes_start, want):
    """Doubling loop shared by spectrum() and eigenvalues().

    ``want(tridiag) -> int`` decides how many eigenvalues to resolve at the
    current truncation; convergence је judged on the lowest ten of them.
    """
    n_modes = n_modes_start
    prev = None
    for _ in range(MAX_DOUBLINGS + 1):
        prob = MathieuProblem(p=p, n_modes=n_modes)
        t = assemble(prob)
        k_want = min(want(t), t.dim)
        eigs = eigen_tridiag(t, k_want)
        head = eigs[: min(10, k_want)]
        if prev is not None and prev.size == head.size:
            if float(np.max(np.abs(head - prev))) < CONVERGENCE_TOL:
                return prob, eigs
        prev = head
        n_modes *= 2
    raise TruncationError(f"Mathieu truncation did not converge for p={p}")


def spectrum(problem):
    """Converged spectrum: all negative eigenvalues plus ten positive ones."""

    def want(t):
        n_neg = sturm_count(t, 0.0)
        return n_neg + N_POSITIVE_KEPT

    prob, eigs = _converged_eigenvalues(problem.p, max(problem.n_modes, _rule_modes(problem.p)), want)
    neg = eigs[eigs < 0.0]
    r = float(np.sum(np.sqrt(-neg))) / math.pi
    return MathieuSpectrum(problem=prob, eigenvalues=eigs, rate=r)


def eigenvalues(p, k):
    """The k lowest eigenvalues of the operator at coupling p, converged in K."""
    k = int(k)
    if k < 1:
        raise InvalidInputError("k must be positive")
    start = max(_rule_modes(p), (k + 1) // 2 + 2)
    _, eigs = _converged_eigenvalues(float(p), start, lambda t: k)
    return eigs[:k]


def rate(p):
    """(1/pi) * tr of the square root of the negative part, at coupling |p|.

    Strictly positive for every p != 0 (the lowest eigenvalue is negative for
    all nonzero couplings); exactly 0 at p = 0, without assembling a matrix.
    """
    p = float(p)
    if not math.isfinite(p):
        raise InvalidInputError("p must be finite")
    p = abs(p)
    if p == 0.0:
        return 0.0
    return spectrum(MathieuProblem.for_coupling(p)).rate
