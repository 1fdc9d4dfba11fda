"""pellarcs: inverse polynomial images consisting of [-1,1] plus a
conjugate-symmetric Jordan arc.

The package provides the Jacobi elliptic/theta backbone (``elliptic``), the
bijective endpoint parametrization and its density construction
(``parammap``), problem instances with the Pell polynomial pair
(``pell``), arc tracing and extremal-point certification (``geometry``)
and a command-line front end (``cli``).
"""

from .elliptic import (
    EllipticContext,
    invert_cn,
    jacobi_elliptic,
    jacobi_zn,
    make_context,
    theta,
    theta_log_derivative,
)
from .errors import (
    BracketError,
    CertificationError,
    ContinuationError,
    ConvergenceError,
    CrossCheckError,
    DegenerateError,
    DomainError,
    PellarcsError,
    PoleError,
)
from .parammap import (
    DensityResult,
    Endpoint,
    ParamPoint,
    circle_side,
    forward,
    inverse,
    nearest_tuple,
)
from .pell import (
    PellPair,
    TnTupleConfig,
    build_config,
    k_star,
    omega,
    recover_pell,
    tn_eval,
    u_of_z,
    z_of_u,
    z_star,
)
from .geometry import (
    ArcTrace,
    BoundaryCurveSample,
    ExtremalReport,
    IntersectionClass,
    boundary_curve,
    classify,
    extremal_points,
    trace_arc,
    trace_real_preimage,
)

__version__ = "0.1.0"

__all__ = [
    "ArcTrace",
    "BoundaryCurveSample",
    "BracketError",
    "CertificationError",
    "ContinuationError",
    "ConvergenceError",
    "CrossCheckError",
    "DegenerateError",
    "DensityResult",
    "DomainError",
    "EllipticContext",
    "Endpoint",
    "ExtremalReport",
    "IntersectionClass",
    "ParamPoint",
    "PellPair",
    "PellarcsError",
    "PoleError",
    "TnTupleConfig",
    "boundary_curve",
    "build_config",
    "circle_side",
    "classify",
    "extremal_points",
    "forward",
    "inverse",
    "invert_cn",
    "jacobi_elliptic",
    "jacobi_zn",
    "k_star",
    "make_context",
    "nearest_tuple",
    "omega",
    "recover_pell",
    "theta",
    "theta_log_derivative",
    "tn_eval",
    "trace_arc",
    "trace_real_preimage",
    "u_of_z",
    "z_of_u",
    "z_star",
]
