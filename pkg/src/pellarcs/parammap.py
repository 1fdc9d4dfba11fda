"""Bijective parametrization of arc endpoints in the open upper-right quadrant.

The map sends (k, lambda) with 0 < k < 1, 0 < lambda < 1/2 to the endpoint

    alpha + i beta = cn(2 lambda K) / dn^2(2 lambda K)
                     + i k k' sn^2(2 lambda K) / dn^2(2 lambda K),

is bijective onto {alpha > 0, beta > 0}, and admits a closed-form inverse
through dn^2(2 lambda K).  The module also classifies endpoints against the
unit circle (which corresponds exactly to k = 1/sqrt(2)) and builds the
nearest rational-parameter endpoint together with its distance bound A/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special as _special

from .elliptic import EllipticContext, _cached_context, jacobi_real
from .errors import CertificationError, DegenerateError, DomainError

__all__ = [
    "ParamPoint",
    "Endpoint",
    "DensityResult",
    "forward",
    "inverse",
    "circle_side",
    "nearest_tuple",
]


@dataclass(frozen=True)
class ParamPoint:
    """Modulus/fraction pair with 0 < k < 1 and 0 < lam < 1/2, both strict."""

    k: float
    lam: float

    def __post_init__(self):
        if not (0.0 < self.k < 1.0):
            raise DomainError(f"k={self.k} outside (0, 1)")
        if not (0.0 < self.lam < 0.5):
            raise DomainError(f"lambda={self.lam} outside (0, 1/2)")


@dataclass(frozen=True)
class Endpoint:
    """Arc endpoint alpha + i beta in the open upper-right quadrant."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise DomainError(
                f"endpoint ({self.alpha}, {self.beta}) not in the open quadrant"
            )

    @property
    def value(self) -> complex:
        return complex(self.alpha, self.beta)


@dataclass(frozen=True)
class DensityResult:
    """Nearest endpoint with rational parameter m/n plus its error bound A/n."""

    m: int
    alpha_star: float
    beta_star: float
    bound: float
    A: float


def _forward_values(k: float, lam: float, tol: float = 1e-12) -> tuple[float, float]:
    ctx = _cached_context(k, tol)
    sn, cn, dn = jacobi_real(2.0 * lam * ctx.K, ctx)
    d2 = dn * dn
    return cn / d2, ctx.k * ctx.k_prime * sn * sn / d2


def forward(p: ParamPoint) -> Endpoint:
    """Endpoint of the arc for parameters (k, lambda)."""
    alpha, beta = _forward_values(p.k, p.lam)
    return Endpoint(alpha, beta)


def _dn2_from_endpoint(alpha: float, beta: float) -> float:
    """Closed-form dn^2(2 lambda K) from the endpoint coordinates.

    The discriminant factors as ((alpha-1)^2 + beta^2)((alpha+1)^2 + beta^2),
    hence is positive for every quadrant point; the max(0, .) only guards
    float rounding.
    """
    s = 1.0 + alpha * alpha + beta * beta
    disc = s * s - 4.0 * alpha * alpha
    root = math.sqrt(max(disc, 0.0))
    return (s - root) / (2.0 * alpha * alpha)


def inverse(e: Endpoint) -> ParamPoint:
    """Parameters (k, lambda) whose forward image is the endpoint e."""
    d2 = _dn2_from_endpoint(e.alpha, e.beta)
    if not (0.0 < d2 < 1.0):
        raise DomainError(f"endpoint {e} yields dn^2 = {d2} outside (0, 1)")
    k2 = (1.0 - d2) / (1.0 - e.alpha * e.alpha * d2 * d2)
    if not (0.0 < k2 < 1.0):
        raise DomainError(f"endpoint {e} yields k^2 = {k2} outside (0, 1)")
    k = math.sqrt(k2)
    ctx = _cached_context(k, 1e-12)
    # sn(2 lambda K) is positive on (0, K); clamp against 1e-16 overshoot
    sn = math.sqrt(max(0.0, 1.0 - d2)) / k
    phi = math.asin(min(1.0, sn))
    lam = float(_special.ellipkinc(phi, k2)) / (2.0 * ctx.K)
    lam = min(max(lam, 1e-15), 0.5 - 1e-15)
    return ParamPoint(k, lam)


def circle_side(e: Endpoint, tol: float = 1e-12) -> str:
    """Classify the endpoint against the unit circle: 'inside', 'on' or
    'outside'; equivalently predicts the sign of k - 1/sqrt(2)."""
    r2 = e.alpha * e.alpha + e.beta * e.beta
    if abs(r2 - 1.0) <= tol:
        return "on"
    return "inside" if r2 < 1.0 else "outside"


def density_constant(ctx: EllipticContext) -> float:
    """The n-independent constant A = 2K/k'^3 + 4kK/k'^2 of the distance bound."""
    kp = ctx.k_prime
    return 2.0 * ctx.K / kp**3 + 4.0 * ctx.k * ctx.K / kp**2


def nearest_tuple(e: Endpoint, n: int) -> DensityResult:
    """Closest endpoint whose parameter is rational with denominator n.

    Chooses m = round(lambda * n) (ties to even), evaluates the forward map
    at m/n with the same modulus, and returns the bound A/n that dominates
    the endpoint displacement.  m = 0 and m = n/2 are surfaced as
    DegenerateError: those tuples collapse onto the quadrant boundary.
    """
    if n < 2:
        raise DomainError(f"n={n} must be at least 2")
    p = inverse(e)
    m = int(round(p.lam * n))
    if m == 0 or 2 * m == n:
        raise DegenerateError(
            f"nearest fraction m/n = {m}/{n} lies on the parameter boundary"
        )
    ctx = _cached_context(p.k, 1e-12)
    a_const = density_constant(ctx)
    alpha_star, beta_star = _forward_values(p.k, m / n)
    bound = a_const / n
    dist = math.hypot(e.alpha - alpha_star, e.beta - beta_star)
    if dist > bound * (1.0 + 1e-9) + 1e-12:
        raise CertificationError(
            f"distance {dist} exceeds bound {bound} for endpoint {e}, n={n}"
        )
    return DensityResult(m, alpha_star, beta_star, bound, a_const)
