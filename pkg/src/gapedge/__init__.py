"""gapedge: a desk-scale spectral counting laboratory.

Verifies, numerically, that bound states of the 2D massive Dirac operator
with dipole-type charge distributions accumulate exponentially at the gap
edges: the count in (-E, E) grows like |log(m - E)| with slope given by the
negative-part trace of a rescaled angular (Mathieu) operator.
"""

__version__ = "0.1.0"

from ._backend import BACKEND as kernel_backend  # noqa: F401
from .linalg import (  # noqa: F401
    BlockTridiag,
    Inertia,
    LineFit,
    SymTridiag,
    brent_root,
    eigen_tridiag,
    integrate_ode,
    ldlt_inertia,
    linfit,
    sturm_count,
)
from .mathieu import MathieuProblem, MathieuSpectrum, rate  # noqa: F401
from .charges import (  # noqa: F401
    ChargeDistribution,
    ChargeMoments,
    PointCharge,
    RegularCharge,
    hypothesis_diagnostics,
    moments,
    potential,
    rest_potential,
    validate,
)
from .radial import CountingCurve, RadialChannel, channel_slope, count_below, lowest_eigenvalues  # noqa: F401
from .dipole import (  # noqa: F401
    DipoleProblem,
    SandwichParams,
    angular_channels,
    counting_curve,
    edge_map,
    sandwich_coefficients,
    verify_rate,
)
from .channel import DiracChannelSpec, Endpoint, classify, min_modulus, seed  # noqa: F401
from .channel import eigenvalues as channel_eigenvalues  # noqa: F401
from .dirac2d import Dirac2DConfig, GapCountCurve, count_in_gap, gap_slope  # noqa: F401
