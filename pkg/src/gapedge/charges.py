"""Charge distributions, their potential, moments, and the effective rest potential.

A distribution is a finite set of in-plane point charges (subcritical
couplings) plus smooth regular parts represented as isotropic 3D Gaussians,
which have closed-form potential (error function) and moments.  The effective
rest potential R subtracts the short-range Coulomb cores and the long-range
point-dipole tail; the hypothesis diagnostics estimate the weighted
integrability conditions that R must satisfy for the accumulation law to
apply, and flag the structural requirements (vanishing total charge, nonzero
dipole moment).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf as _erf

from .errors import InvalidInputError, SingularEvaluationError

#: Nested-shell quadrature: shells out to base * 2^j, j <= this.
SHELL_MAX_DOUBLINGS = 14

#: Convergence rule: each of the last two shells contributes below this fraction.
SHELL_CONV_FRACTION = 0.01

#: Midpoint cells per shell (radial x angular).
SHELL_N_RADIAL = 24
SHELL_N_ANGULAR = 64

#: Equal-area grid for the rearrangement estimate (annuli x angular).
REARR_N_ANNULI = 400
REARR_N_ANGULAR = 64

#: |Q| below this times the total absolute charge counts as vanishing.
CHARGE_ZERO_RTOL = 1e-12


def constants():
    return {
        "shell_max_doublings": SHELL_MAX_DOUBLINGS,
        "shell_conv_fraction": SHELL_CONV_FRACTION,
        "shell_n_radial": SHELL_N_RADIAL,
        "shell_n_angular": SHELL_N_ANGULAR,
        "rearr_n_annuli": REARR_N_ANNULI,
        "rearr_n_angular": REARR_N_ANGULAR,
        "charge_zero_rtol": CHARGE_ZERO_RTOL,
    }


@dataclass(frozen=True)
class PointCharge:
    """In-plane point charge: position in the sheet, dimensionless coupling.

    Subcriticality (0 < |coupling| < 1/2) is reported by :func:`validate`
    rather than enforced here, so off-spec inputs can be diagnosed.
    """

    position: tuple
    coupling: float

    def __post_init__(self):
        pos = tuple(float(c) for c in self.position)
        if len(pos) != 2:
            raise InvalidInputError("point charge position must be 2-d")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "coupling", float(self.coupling))


@dataclass(frozen=True)
class RegularCharge:
    """Isotropic 3D Gaussian charge: center, total charge, width."""

    center: tuple
    total_charge: float
    width: float

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        if len(c) != 3:
            raise InvalidInputError("regular charge center must be 3-d")
        if not all(math.isfinite(v) for v in c):
            raise InvalidInputError("non-finite regular charge center")
        w = float(self.width)
        if not (math.isfinite(w) and w > 0.0):
            raise InvalidInputError("regular charge width must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "total_charge", float(self.total_charge))
        object.__setattr__(self, "width", w)


@dataclass(frozen=True)
class ChargeDistribution:
    points: tuple = ()
    regulars: tuple = ()

    def __post_init__(self):
        pts = tuple(p if isinstance(p, PointCharge) else PointCharge(*p) for p in self.points)
        regs = tuple(r if isinstance(r, RegularCharge) else RegularCharge(*r) for r in self.regulars)
        if not pts and not regs:
            raise InvalidInputError("distribution must contain at least one charge")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "regulars", regs)


@dataclass(frozen=True)
class ChargeMoments:
    """Total charge, dipole moment (first moment of the measure), and the
    radius gamma = 2 max |x_n| of a ball enclosing the point charges."""

    total_charge: float
    dipole: tuple
    gamma: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self):
        return not self.violations


def validate(dist):
    """Check subcriticality, distinctness, finiteness; list violations found."""
    violations = []
    for i, pc in enumerate(dist.points):
        if not all(math.isfinite(c) for c in pc.position):
            violations.append(f"points[{i}]: non-finite position")
        if not math.isfinite(pc.coupling):
            violations.append(f"points[{i}]: non-finite coupling")
        elif abs(pc.coupling) >= 0.5:
            violations.append(f"points[{i}]: critical coupling {pc.coupling}")
        elif pc.coupling == 0.0:
            violations.append(f"points[{i}]: vanishing coupling")
    for i in range(len(dist.points)):
        for j in range(i + 1, len(dist.points)):
            if dist.points[i].position == dist.points[j].position:
                violations.append(f"points[{i}],points[{j}]: coincident point charges")
    for i, rc in enumerate(dist.regulars):
        if not math.isfinite(rc.total_charge):
            violations.append(f"regulars[{i}]: non-finite total charge")
    return ValidationReport(violations=tuple(violations))


def moments(dist):
    """Total charge, dipole moment, and gamma.

    The Gaussian first moment equals its center by symmetry, so regular parts
    contribute q * (c1, c2) to the dipole; gamma sees only the point charges.
    """
    q = 0.0
    d = np.zeros(2)
    gamma = 0.0
    for pc in dist.points:
        q += pc.coupling
        d += pc.coupling * np.asarray(pc.position)
        gamma = max(gamma, math.hypot(*pc.position))
    for rc in dist.regulars:
        q += rc.total_charge
        d += rc.total_charge * np.asarray(rc.center[:2])
    return ChargeMoments(total_charge=q, dipole=(float(d[0]), float(d[1])), gamma=2.0 * gamma)


def _gaussian_potential(q, width, dist3):
    """Potential of a unit-normalized isotropic Gaussian at 3D distance dist3."""
    if dist3 == 0.0:
        return q * math.sqrt(2.0 / math.pi) / width
    return q * math.erf(dist3 / (math.sqrt(2.0) * width)) / dist3


def _point_part(dist, x):
    v = 0.0
    for pc in dist.points:
        r = math.hypot(x[0] - pc.position[0], x[1] - pc.position[1])
        if r == 0.0:
            raise SingularEvaluationError(f"evaluation at point charge position {pc.position}")
        v += pc.coupling / r
    return v


def _regular_part(dist, x):
    v = 0.0
    for rc in dist.regulars:
        d3 = math.sqrt(
            (x[0] - rc.center[0]) ** 2 + (x[1] - rc.center[1]) ** 2 + rc.center[2] ** 2
        )
        v += _gaussian_potential(rc.total_charge, rc.width, d3)
    return v


def potential(dist, x):
    """Electrostatic potential of the distribution at the in-plane point x."""
    x = (float(x[0]), float(x[1]))
    return _point_part(dist, x) + _regular_part(dist, x)


def rest_potential(dist, x, mom=None):
    """Effective rest potential.

    Equals ``V_reg + (V_sing - <d, x>/|x|^3)`` outside the closed ball of
    radius gamma, and plain ``V_reg`` inside: the Coulomb cores and the
    leading dipole tail are removed where they live.
    """
    x = (float(x[0]), float(x[1]))
    if mom is None:
        mom = moments(dist)
    value = _regular_part(dist, x)
    r = math.hypot(*x)
    if r >= mom.gamma:
        if r == 0.0:
            if mom.dipole != (0.0, 0.0):
                raise SingularEvaluationError("dipole tail evaluated at the origin")
            tail = 0.0
        else:
            tail = (mom.dipole[0] * x[0] + mom.dipole[1] * x[1]) / r**3
        value += _point_part(dist, x) - tail
    return value


# ---------------------------------------------------------------------------
# hypothesis diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChargeDiagnostics:
    """Numerical evidence for/against the accumulation-law hypotheses."""

    total_charge: float
    charge_vanishes: bool
    dipole: tuple
    dipole_nonzero: bool
    gamma: float
    abs_integral: float          # integral of |R| log(2+|x|)
    square_integral: float       # integral of R^2 log(2+|x|)
    abs_shells: tuple
    square_shells: tuple
    abs_converged: bool
    square_converged: bool
    rearr_abs_integral: float    # integral of |R|_* log+(1/r)
    rearr_square_integral: float
    rearr_resolution: float      # smallest resolved rearrangement radius
    relative_bounds_note: str = field(
        default=(
            "relative boundedness/compactness of the regular part are assumed "
            "(they hold for finite Gaussian sums) and are not checked numerically"
        )
    )

    @property
    def applicable(self):
        return (
            self.charge_vanishes
            and self.dipole_nonzero
            and self.abs_converged
            and self.square_converged
        )

    def as_dict(self):
        return {
            "total_charge": self.total_charge,
            "charge_vanishes": self.charge_vanishes,
            "dipole": list(self.dipole),
            "dipole_nonzero": self.dipole_nonzero,
            "gamma": self.gamma,
            "abs_integral": self.abs_integral,
            "square_integral": self.square_integral,
            "abs_shells": list(self.abs_shells),
            "square_shells": list(self.square_shells),
            "abs_converged": self.abs_converged,
            "square_converged": self.square_converged,
            "rearr_abs_integral": self.rearr_abs_integral,
            "rearr_square_integral": self.rearr_square_integral,
            "rearr_resolution": self.rearr_resolution,
            "relative_bounds_note": self.relative_bounds_note,
            "applicable": self.applicable,
        }


def _base_radius(dist, mom):
    if mom.gamma > 0.0:
        return mom.gamma
    extent = 1.0
    for rc in dist.regulars:
        extent = max(extent, math.hypot(rc.center[0], rc.center[1]) + 3.0 * rc.width)
    return extent


def _rest_on_grid(dist, mom, r, theta):
    """Vectorized |R| evaluation on a polar grid (r and theta broadcast)."""
    xs = r * np.cos(theta)
    ys = r * np.sin(theta)
    v = np.zeros_like(xs)
    for rc in dist.regulars:
        d3 = np.sqrt((xs - rc.center[0]) ** 2 + (ys - rc.center[1]) ** 2 + rc.center[2] ** 2)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.where(
                d3 == 0.0,
                rc.total_charge * math.sqrt(2.0 / math.pi) / rc.width,
                rc.total_charge * _erf(d3 / (math.sqrt(2.0) * rc.width)) / np.where(d3 == 0.0, 1.0, d3),
            )
        v += g
    outside = r >= mom.gamma
    if np.any(outside):
        sing = np.zeros_like(xs)
        for pc in dist.points:
            rho = np.hypot(xs - pc.position[0], ys - pc.position[1])
            rho = np.where(rho == 0.0, np.nan, rho)
            sing += pc.coupling / rho
        with np.errstate(invalid="ignore", divide="ignore"):
            tail = (mom.dipole[0] * xs + mom.dipole[1] * ys) / np.where(r == 0.0, np.nan, r) ** 3
        v = np.where(outside, v + sing - np.where(np.isnan(tail), 0.0, tail), v)
    return v


def hypothesis_diagnostics(dist):
    """Estimate the weighted integrals of R and the rearrangement integrals.

    Nested polar shells out to base * 2^14 feed the log-weighted integrals
    (convergence flag: last two shells below 1% each); an equal-area grid over
    the region carrying the largest |R| values feeds the rearrangement
    estimate.  Heuristic diagnostics, not proofs.
    """
    mom = moments(dist)
    base = _base_radius(dist, mom)

    abs_shells = []
    sq_shells = []
    theta = (np.arange(SHELL_N_ANGULAR) + 0.5) * (2.0 * math.pi / SHELL_N_ANGULAR)
    for j in range(SHELL_MAX_DOUBLINGS + 1):
        r_lo = 0.0 if j == 0 else base * 2.0 ** (j - 1)
        r_hi = base * 2.0**j
        edges = np.linspace(r_lo, r_hi, SHELL_N_RADIAL + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        dr = np.diff(edges)
        rr, tt = np.meshgrid(mids, theta, indexing="ij")
        vals = _rest_on_grid(dist, mom, rr, tt)
        weight = np.log(2.0 + rr)
        area = (rr * dr[:, None]) * (2.0 * math.pi / SHELL_N_ANGULAR)
        abs_shells.append(float(np.sum(np.abs(vals) * weight * area)))
        sq_shells.append(float(np.sum(vals**2 * weight * area)))

    abs_total = float(np.sum(abs_shells))
    sq_total = float(np.sum(sq_shells))

    def _converged(shells, total):
        if total == 0.0:
            return True
        return all(s < SHELL_CONV_FRACTION * total for s in shells[-2:])

    # Rearrangement estimate: equal-area cells over the disc holding the top
    # |R| values; only rearrangement radii below 1 carry log+ weight, and the
    # disc area exceeds pi, so outward-decaying tails cannot contribute there.
    r_grid = max(4.0 * base, 2.0)
    k = np.arange(REARR_N_ANNULI)
    r_cells = r_grid * np.sqrt((k + 0.5) / REARR_N_ANNULI)
    th = (np.arange(REARR_N_ANGULAR) + 0.5) * (2.0 * math.pi / REARR_N_ANGULAR)
    rr, tt = np.meshgrid(r_cells, th, indexing="ij")
    vals = np.abs(_rest_on_grid(dist, mom, rr, tt)).ravel()
    cell_area = math.pi * r_grid**2 / (REARR_N_ANNULI * REARR_N_ANGULAR)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    cum_area = cell_area * np.arange(1, vals.size + 1)
    radii = np.sqrt(cum_area / math.pi)

    def _g(r):
        # antiderivative of log(1/r), continuously extended by 0 at r = 0
        r = np.asarray(r)
        safe = np.where(r > 0.0, r, 1.0)
        return np.where(r > 0.0, r - r * np.log(safe), 0.0)

    lo = np.concatenate(([0.0], radii[:-1]))
    hi = radii
    lo_c = np.clip(lo, 0.0, 1.0)
    hi_c = np.clip(hi, 0.0, 1.0)
    w = np.where(hi_c > lo_c, _g(hi_c) - _g(lo_c), 0.0)
    rearr_abs = float(np.sum(vals * w))
    rearr_sq = float(np.sum(vals**2 * w))

    q_scale = sum(abs(pc.coupling) for pc in dist.points) + sum(
        abs(rc.total_charge) for rc in dist.regulars
    )
    d_norm = math.hypot(*mom.dipole)
    d_scale = sum(
        abs(pc.coupling) * (1.0 + math.hypot(*pc.position)) for pc in dist.points
    ) + sum(abs(rc.total_charge) * (1.0 + math.hypot(*rc.center[:2])) for rc in dist.regulars)

    return ChargeDiagnostics(
        total_charge=mom.total_charge,
        charge_vanishes=abs(mom.total_charge) <= CHARGE_ZERO_RTOL * max(q_scale, 1e-300),
        dipole=mom.dipole,
        dipole_nonzero=d_norm > CHARGE_ZERO_RTOL * max(d_scale, 1e-300),
        gamma=mom.gamma,
        abs_integral=abs_total,
        square_integral=sq_total,
        abs_shells=tuple(abs_shells),
        square_shells=tuple(sq_shells),
        abs_converged=_converged(abs_shells, abs_total),
        square_converged=_converged(sq_shells, sq_total),
        rearr_abs_integral=rearr_abs,
        rearr_square_integral=rearr_sq,
        rearr_resolution=float(radii[0]),
    )
