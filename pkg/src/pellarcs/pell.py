"""Problem instances and the Pell polynomial pair.

A :class:`TnTupleConfig` fixes one inverse-image problem (n, m, k) with
lambda = m/n.  On it live the theta quotient

    Omega(u) = H(u - lam K) Theta1(u - lam K) / (H(u + lam K) Theta1(u + lam K)),

the degree-2 elliptic map

    z(u) = (cn(2u) cn(2 lam K) - 1) / (cn(2u) - cn(2 lam K)),

the polynomial values T_n(z(u)) = (Omega^n + Omega^-n)/2, the numerically
recovered coefficient pair (T_n, U_{n-2}) certified against the Pell
identity T_n^2 - h U_{n-2}^2 = 1, and the crossing point z* with its two
independent formulas and the boundary modulus k*(lambda) where z* = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from numpy.polynomial import polynomial as _poly

from .elliptic import (
    EllipticContext,
    _cached_context,
    _lattice_distance_scalar,
    _theta_dlog_scalar,
    _theta_scalar,
    invert_cn,
    jacobi_elliptic,
    jacobi_real,
    jacobi_zn,
    make_context,
    theta,
    theta_log_derivative,
)
from .errors import (
    BracketError,
    CertificationError,
    ConvergenceError,
    CrossCheckError,
    DomainError,
    PoleError,
)

__all__ = [
    "TnTupleConfig",
    "PellPair",
    "build_config",
    "omega",
    "z_of_u",
    "u_of_z",
    "tn_eval",
    "recover_pell",
    "z_star",
    "k_star",
]

# modulus range for full tuple configurations (theta-quotient path)
K_CFG_MIN = 1e-6
K_CFG_MAX = 1.0 - 1e-6

_POLE_RADIUS = 1e-10


@dataclass(frozen=True)
class TnTupleConfig:
    """One problem instance (n, m, k) with lambda = m/n.

    c is cn(2 lam K); a3 = alpha + i beta and a4 = conj(a3) are the arc
    endpoints; z_star the crossing point.  special_half marks the closed-form
    lambda = 1/2 route (m = n/2, n even) where a3 = i k/k' and z* = 0.
    """

    n: int
    m: int
    k: float
    lam: float
    ctx: EllipticContext
    c: float
    a3: complex
    a4: complex
    z_star: float
    special_half: bool
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class PellPair:
    """Chebyshev-basis coefficients of T_n and U_{n-2} with certification.

    residual is the maximum of |T_n^2 - h U_{n-2}^2 - 1| over the
    certification grid; dt_sign resolves the sign in
    dT_n/dz = dt_sign * n * (z - z*) * U_{n-2}(z).
    """

    t_coeffs: np.ndarray
    u_coeffs: np.ndarray
    h_roots: tuple[complex, complex, complex, complex]
    residual: float
    dt_sign: int


def _z_star_both(ctx: EllipticContext, lam: float) -> tuple[float, float]:
    """The two closed forms of z*; they must agree to 1e-10."""
    s2, c2, d2 = jacobi_real(2.0 * lam * ctx.K, ctx)
    zn_half = jacobi_zn(lam * ctx.K, ctx)
    zn_full = jacobi_zn(2.0 * lam * ctx.K, ctx)
    f1 = 1.0 + (c2 - 1.0 + 2.0 * s2 * zn_half) / d2
    f2 = c2 + s2 * zn_full / d2
    return f1, f2


def z_star(k: float, lam: float, tol: float = 1e-12) -> float:
    """Crossing point z* for modulus k and fraction lambda in (0, 1/2).

    Evaluates both closed forms and returns the duplication-free one after
    cross-checking; the value decides whether the arc crosses [-1, 1].
    """
    if not (0.0 < lam < 0.5):
        raise DomainError(f"lambda={lam} outside (0, 1/2)")
    ctx = _cached_context(float(k), tol)
    f1, f2 = _z_star_both(ctx, lam)
    if abs(f1 - f2) > 1e-10:
        raise CrossCheckError(
            f"z* formulas disagree by {abs(f1 - f2):.3e} at k={k}, lambda={lam}"
        )
    if f2 <= 0.0:
        raise CrossCheckError(f"z*={f2} not positive at k={k}, lambda={lam}")
    return f2


def k_star(lam: float, tol: float = 1e-10) -> float:
    """Unique modulus with z*(k, lambda) = 1, found by bisection.

    Monotonicity of z* in k justifies plain bisection on the clamped
    bracket [1e-6, 1 - 1e-6]; small lambda can push k* outside the bracket,
    which surfaces as BracketError with the achieved endpoint values.
    """
    if not (0.0 < lam < 0.5):
        raise DomainError(f"lambda={lam} outside (0, 1/2)")
    lo, hi = K_CFG_MIN, K_CFG_MAX
    f_lo = z_star(lo, lam) - 1.0
    f_hi = z_star(hi, lam) - 1.0
    if f_lo * f_hi > 0.0:
        raise BracketError(
            f"z* - 1 does not change sign over [{lo}, {hi}] at lambda={lam}: "
            f"endpoint values {f_lo:.6g}, {f_hi:.6g}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = z_star(mid, lam) - 1.0
        if abs(f_mid) < tol or hi - lo < 1e-15:
            return mid
        if f_lo * f_mid <= 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def build_config(n: int, m: int, k: float, tol: float = 1e-12) -> TnTupleConfig:
    """Build a problem instance; lambda = m/n must satisfy 0 < m <= n/2.

    m = n/2 (n even) selects the closed-form lambda = 1/2 route.  A shared
    factor gcd(m, n) > 1 is legal and only noted in the warnings.
    """
    if n != int(n) or m != int(m):
        raise DomainError("n and m must be integers")
    n, m = int(n), int(m)
    if n < 2:
        raise DomainError(f"n={n} must be at least 2")
    if not (0 < m and 2 * m <= n):
        raise DomainError(f"m={m} outside 0 < m <= n/2 for n={n}")
    if not (K_CFG_MIN < k < K_CFG_MAX):
        raise DomainError(f"k={k} outside ({K_CFG_MIN}, {K_CFG_MAX})")

    warnings: list[str] = []
    if math.gcd(m, n) > 1:
        warnings.append(f"gcd(m, n) = {math.gcd(m, n)} > 1; tuple is still valid")

    ctx = make_context(k, tol)
    lam = m / n

    if 2 * m == n:
        warnings.append("lambda = 1/2: using the closed-form composition route")
        a3 = 1j * ctx.k / ctx.k_prime
        return TnTupleConfig(n, m, k, lam, ctx, 0.0, a3, a3.conjugate(), 0.0,
                             True, tuple(warnings))

    f1, f2 = _z_star_both(ctx, lam)
    if abs(f1 - f2) > 1e-10:
        raise CrossCheckError(
            f"z* formulas disagree by {abs(f1 - f2):.3e} for (n,m,k)=({n},{m},{k})"
        )
    sn2, cn2, dn2 = jacobi_real(2.0 * lam * ctx.K, ctx)
    alpha = cn2 / dn2**2
    beta = ctx.k * ctx.k_prime * sn2**2 / dn2**2
    a3 = complex(alpha, beta)
    return TnTupleConfig(n, m, k, lam, ctx, cn2, a3, a3.conjugate(), f2,
                         False, tuple(warnings))


# ---------------------------------------------------------------------------
# Omega and z(u)
# ---------------------------------------------------------------------------


def _as_complex_array(u):
    a = np.asarray(u, dtype=np.complex128)
    return a, a.ndim == 0


def _rect_lattice_distance(u, center, per_re, per_im):
    d = np.asarray(u) - center
    dx = d.real - per_re * np.round(d.real / per_re)
    dy = d.imag - per_im * np.round(d.imag / per_im)
    return np.hypot(dx, dy)


def _skew_lattice_distance(u, center, K, Kp):
    """Distance to center modulo the lattice generated by 2K and K + iK'."""
    d = np.asarray(u) - center
    b = np.round(d.imag / Kp)
    a = np.round((d.real - b * K) / (2.0 * K))
    res = d - (2.0 * a * K + b * (K + 1j * Kp))
    return np.abs(res)


def _skew_lattice_distance_scalar(u: complex, center: float, K: float, Kp: float) -> float:
    dre = u.real - center
    dim = u.imag
    b = round(dim / Kp)
    a = round((dre - b * K) / (2.0 * K))
    return math.hypot(dre - 2.0 * a * K - b * K, dim - b * Kp)


def omega(u, cfg: TnTupleConfig):
    """The theta quotient driving T_n; |omega| = 1 exactly on the inverse image."""
    ctx = cfg.ctx
    shift = cfg.lam * ctx.K
    two_k, two_kp = 2.0 * ctx.K, 2.0 * ctx.K_prime
    if isinstance(u, (int, float, complex)):
        uu = complex(u)
        close = min(
            _lattice_distance_scalar(uu, complex(-shift), two_k, two_kp),
            _lattice_distance_scalar(uu, complex(-shift + ctx.K, ctx.K_prime),
                                     two_k, two_kp),
        )
        if close < _POLE_RADIUS:
            raise PoleError("omega evaluated within 1e-10 of a pole")
        num = _theta_scalar("H", uu - shift, ctx) * _theta_scalar("Theta1", uu - shift, ctx)
        den = _theta_scalar("H", uu + shift, ctx) * _theta_scalar("Theta1", uu + shift, ctx)
        return num / den
    a, scalar = _as_complex_array(u)
    close = np.minimum(
        _rect_lattice_distance(a, -shift, two_k, two_kp),
        _rect_lattice_distance(a, -shift + ctx.K + 1j * ctx.K_prime, two_k, two_kp),
    )
    if np.any(close < _POLE_RADIUS):
        raise PoleError("omega evaluated within 1e-10 of a pole")
    num = theta("H", a - shift, ctx) * theta("Theta1", a - shift, ctx)
    den = theta("H", a + shift, ctx) * theta("Theta1", a + shift, ctx)
    val = num / den
    return complex(val) if scalar else val


def _omega_dlog(u, cfg: TnTupleConfig):
    """d/du log omega(u); used by Newton steps of the arc continuation."""
    ctx = cfg.ctx
    shift = cfg.lam * ctx.K
    if isinstance(u, (int, float, complex)):
        uu = complex(u)
        return (
            _theta_dlog_scalar("H", uu - shift, ctx)
            + _theta_dlog_scalar("Theta1", uu - shift, ctx)
            - _theta_dlog_scalar("H", uu + shift, ctx)
            - _theta_dlog_scalar("Theta1", uu + shift, ctx)
        )
    a, scalar = _as_complex_array(u)
    val = (
        theta_log_derivative("H", a - shift, ctx)
        + theta_log_derivative("Theta1", a - shift, ctx)
        - theta_log_derivative("H", a + shift, ctx)
        - theta_log_derivative("Theta1", a + shift, ctx)
    )
    return complex(val) if scalar else val


def z_of_u(u, cfg: TnTupleConfig):
    """The degree-2 elliptic map z(u); even, conjugation-symmetric, with
    fundamental periods 2K and K + iK' and simple poles at +-lam K.

    Evaluated in homogeneous theta form, so the poles of cn(2u) itself are
    regular points (they map to z = cn(2 lam K)).
    """
    ctx = cfg.ctx
    shift = cfg.lam * ctx.K
    if isinstance(u, (int, float, complex)):
        uu = complex(u)
        close = min(
            _skew_lattice_distance_scalar(uu, shift, ctx.K, ctx.K_prime),
            _skew_lattice_distance_scalar(uu, -shift, ctx.K, ctx.K_prime),
        )
        if close < _POLE_RADIUS:
            raise PoleError("z(u) evaluated within 1e-10 of a pole")
        w_num = math.sqrt(ctx.k_prime / ctx.k) * _theta_scalar("H1", 2.0 * uu, ctx)
        w_den = _theta_scalar("Theta", 2.0 * uu, ctx)
        return cfg.c + (cfg.c * cfg.c - 1.0) * w_den / (w_num - cfg.c * w_den)
    a, scalar = _as_complex_array(u)
    close = np.minimum(
        _skew_lattice_distance(a, shift, ctx.K, ctx.K_prime),
        _skew_lattice_distance(a, -shift, ctx.K, ctx.K_prime),
    )
    if np.any(close < _POLE_RADIUS):
        raise PoleError("z(u) evaluated within 1e-10 of a pole")
    # cn(2u) = sqrt(k'/k) H1(2u) / Theta(2u); with w_num, w_den those two
    # pieces, z = c + (c^2 - 1) w_den / (w_num - c w_den)
    w_num = math.sqrt(ctx.k_prime / ctx.k) * theta("H1", 2.0 * a, ctx)
    w_den = theta("Theta", 2.0 * a, ctx)
    val = cfg.c + (cfg.c * cfg.c - 1.0) * w_den / (w_num - cfg.c * w_den)
    return complex(val) if scalar else val


def _dz_du(u, cfg: TnTupleConfig):
    sn, cn, dn = jacobi_elliptic(2.0 * np.asarray(u, dtype=complex), cfg.ctx)
    return 2.0 * (cfg.c * cfg.c - 1.0) * sn * dn / (cn - cfg.c) ** 2


def u_of_z(z, cfg: TnTupleConfig) -> complex:
    """Inverse of z(u) on the closed rectangle [0,K] x [0,K'].

    The rectangle is the preimage of the closed lower half plane; points
    with Im z > 0 therefore return the conjugate-rectangle preimage
    [0,K] x [-K',0], so that z_of_u(u_of_z(z)) = z always holds.
    """
    z = complex(z)
    ctx = cfg.ctx
    if abs(z - cfg.c) < _POLE_RADIUS:
        raise PoleError(f"z={z} coincides with the pole image cn(2 lam K)")
    w = cfg.c + (cfg.c * cfg.c - 1.0) / (z - cfg.c)
    u = 0.5 * invert_cn(w, ctx)

    def polish(u0: complex) -> complex:
        for _ in range(4):
            zu = z_of_u(u0, cfg)
            err = zu - z
            if abs(err) < 1e-13 * max(1.0, abs(z)):
                break
            dz = _dz_du(u0, cfg)
            if dz == 0:
                break
            u0 = u0 - err / dz
        return u0

    u = polish(u)

    K, Kp = ctx.K, ctx.K_prime
    lower = z.imag <= 1e-12
    lo, hi = (0.0, Kp) if lower else (-Kp, 0.0)
    eps = 1e-7 * max(K, Kp)
    best = None
    for s in (1.0, -1.0):
        for a in (-2, -1, 0, 1, 2):
            for b in (-2, -1, 0, 1, 2):
                cand = s * u + 2.0 * a * K + b * (K + 1j * Kp)
                if -eps <= cand.real <= K + eps and lo - eps <= cand.imag <= hi + eps:
                    key = (round(cand.imag, 9), round(cand.real, 9))
                    if best is None or key < best[0]:
                        best = (key, cand)
    if best is None:
        raise ConvergenceError(f"could not reduce the preimage of z={z} to the rectangle")
    u = polish(best[1])
    if abs(z_of_u(u, cfg) - z) > 1e-9 * max(1.0, abs(z)):
        raise ConvergenceError(f"u_of_z verification failed at z={z}")
    return u


def _tn_half(z, cfg: TnTupleConfig):
    """Closed-form T_n for lambda = 1/2: a Chebyshev polynomial composed
    with the quadratic 2 k'^2 (z^2 - 1) + 1."""
    x = 2.0 * cfg.ctx.k_prime**2 * (np.asarray(z, dtype=complex) ** 2 - 1.0) + 1.0
    unit = np.zeros(cfg.n // 2 + 1)
    unit[-1] = 1.0
    return _cheb.chebval(x, unit)


def tn_eval(z, cfg: TnTupleConfig) -> complex:
    """T_n at a single点 z through omega; real z gives (numerically) real values."""
    if cfg.special_half:
        val = _tn_half(z, cfg)
        return complex(val)
    u = u_of_z(z, cfg)
    w = omega(u, cfg)
    wn = w**cfg.n
    return complex(0.5 * (wn + 1.0 / wn))


# ---------------------------------------------------------------------------
# Pell pair recovery
# ---------------------------------------------------------------------------


def _cheb_interpolate_extrema(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of the degree-n interpolant through values
    sampled at the extrema nodes x_l = cos(l pi / n), l = 0..n."""
    n = len(values) - 1
    l = np.arange(n + 1)
    weights = np.ones(n + 1)
    weights[0] = weights[-1] = 0.5
    cosmat = np.cos(np.pi * np.outer(l, l) / n)
    coeffs = (2.0 / n) * (cosmat @ (values * weights))
    coeffs[0] *= 0.5
    coeffs[-1] *= 0.5
    return coeffs


def _cheb_sqrt(p: np.ndarray) -> np.ndarray:
    """Square root of a perfect-square polynomial in the Chebyshev basis.

    Uses the product rule T_i T_j = (T_{i+j} + T_|i-j|)/2 and descends from
    the leading coefficient; consistency of the unused low-order equations
    is left to the caller's certification step.
    """
    deg = len(p) - 1
    if deg % 2 != 0:
        raise CertificationError("square-root input has odd degree")
    d = deg // 2
    if p[-1] <= 0.0:
        raise CertificationError("square-root input has non-positive leading term")
    if d == 0:
        return np.array([math.sqrt(p[0])])
    u = np.zeros(d + 1)
    u[d] = math.sqrt(2.0 * p[2 * d])
    # above degree d only the convolution part of the product contributes:
    # 2 p_m = 2 u_{m-d} u_d + sum_{m-d < i < d} u_i u_{m-i}
    for mm in range(2 * d - 1, d, -1):
        i0 = mm - d
        inner = sum(u[i] * u[mm - i] for i in range(i0 + 1, d))
        u[i0] = (2.0 * p[mm] - inner) / (2.0 * u[d])
    # at degree d the |i-j| = d cross terms add another 2 u_0 u_d
    if d >= 1:
        inner_d = sum(u[i] * u[d - i] for i in range(1, d))
        u[0] = (2.0 * p[d] - inner_d) / (4.0 * u[d])
    return u


def _h_polynomials(cfg: TnTupleConfig) -> tuple[np.ndarray, np.ndarray]:
    """Monic quartic h vanishing at (-1, 1, a3, a4): (monomial, Chebyshev)."""
    quad = np.array([abs(cfg.a3) ** 2, -2.0 * cfg.a3.real, 1.0])
    h_mono = _poly.polymul(np.array([-1.0, 0.0, 1.0]), quad)
    return h_mono, _cheb.poly2cheb(h_mono)


def _arc_certification_points(cfg: TnTupleConfig, npts: int) -> np.ndarray:
    from .geometry import trace_arc  # deferred: geometry builds on this module

    return trace_arc(cfg, npts).z_points


def _refine_pair(cfg: TnTupleConfig, t: np.ndarray, u: np.ndarray,
                 h_mono: np.ndarray, grid: np.ndarray):
    """Newton sweeps on the Pell residual over the certification grid.

    The true Chebyshev coefficients decay like |phi(a3)|^(-j), so the
    high-order ones must carry *relative* accuracy or the residual blows up
    near the arc endpoints; interpolation alone only achieves absolute
    accuracy.  Linearising T^2 - h U^2 - 1 = 0 in the coefficients over the
    grid (with the h-roots as strongly weighted rows) and solving a
    column-scaled least-squares system restores it.  A final cubic
    correction pins the h-root values of T exactly; it touches only the
    low-order coefficients, where absolute accuracy is enough.
    """
    n, m = cfg.n, cfg.m
    roots = np.array([-1.0, 1.0, cfg.a3, cfg.a4], dtype=complex)
    root_vals = np.array([(-1.0) ** n, 1.0, (-1.0) ** m, (-1.0) ** m], dtype=complex)
    zc = np.concatenate([grid, roots])
    row_w = np.ones(len(zc))
    row_w[-4:] = 100.0
    vander_t = _cheb.chebvander(zc, n)
    vander_u = _cheb.chebvander(zc, n - 2)
    h_vals = _poly.polyval(zc, h_mono)

    def residual(tc, uc):
        tv = _cheb.chebval(zc, tc)
        uv = _cheb.chebval(zc, uc)
        return tv, uv, tv**2 - h_vals * uv**2 - 1.0

    t_vals, u_vals, resid = residual(t, u)
    best = (float(np.max(np.abs(resid))), t, u)
    for _ in range(5):
        if best[0] < 5e-14:
            break
        design = np.hstack([
            2.0 * t_vals[:, None] * vander_t,
            -2.0 * (h_vals * u_vals)[:, None] * vander_u,
        ]) * row_w[:, None]
        design = np.vstack([design.real, design.imag])
        rhs = np.concatenate([(row_w * resid).real, (row_w * resid).imag])
        scale = np.linalg.norm(design, axis=0)
        scale[scale == 0.0] = 1.0
        delta, *_ = np.linalg.lstsq(design / scale, -rhs, rcond=1e-12)
        delta /= scale
        t = t + delta[: n + 1]
        u = u + delta[n + 1:]
        t_vals, u_vals, resid = residual(t, u)
        worst = float(np.max(np.abs(resid)))
        if worst < best[0]:
            best = (worst, t, u)
    t, u = best[1], best[2]

    root_err = _cheb.chebval(roots, t) - root_vals
    deg_fix = min(3, n)
    if deg_fix == 3:
        rho = np.linalg.solve(_cheb.chebvander(roots, 3), root_err)
    else:
        # n = 2: four consistent conditions on three coefficients
        rho, *_ = np.linalg.lstsq(_cheb.chebvander(roots, deg_fix), root_err,
                                  rcond=None)
    if np.max(np.abs(rho.imag)) > 1e-9:
        raise CertificationError("root-value correction came out non-real")
    t = t.copy()
    t[: deg_fix + 1] -= rho.real
    return t, u


def _tn_values_at(xs: np.ndarray, cfg: TnTupleConfig) -> np.ndarray:
    vals = np.empty(len(xs))
    for i, x in enumerate(xs):
        v = tn_eval(complex(x), cfg)
        if abs(v.imag) > 1e-9:
            raise CertificationError(
                f"T_n({x}) has imaginary part {v.imag:.3e}; elliptic layer inaccurate"
            )
        vals[i] = v.real
    return vals


def _t_part(cfg: TnTupleConfig) -> np.ndarray:
    """Cubic through the exactly known values of T_n at the four h-roots:
    1 at z = 1, (-1)^n at z = -1 and (-1)^m at a3, a4 (endpoint phases
    are +-m pi/n)."""
    roots = np.array([-1.0, 1.0, cfg.a3, cfg.a4], dtype=complex)
    root_vals = np.array(
        [(-1.0) ** cfg.n, 1.0, (-1.0) ** cfg.m, (-1.0) ** cfg.m], dtype=complex
    )
    part = np.linalg.solve(_cheb.chebvander(roots, 3), root_vals)
    if np.max(np.abs(part.imag)) > 1e-10:
        raise CertificationError("cubic through the h-roots came out non-real")
    return part.real


def _initial_q(cfg: TnTupleConfig, h_cheb: np.ndarray, part: np.ndarray) -> np.ndarray:
    """First guess for Q in the decomposition T = T_part + h Q.

    Pinning the h-root values exactly and recovering only Q keeps the
    problem conditioned on [-1, 1]; recovering T by plain interpolation and
    evaluating it at a3 instead would amplify node noise by
    |a3 + sqrt(a3^2 - 1)|^n, which is hopeless in doubles once alpha and n
    grow.
    """
    n = cfg.n
    if n <= 3:
        return np.zeros(0)
    if cfg.special_half:
        # composition values are exact; interpolate, then split off T_part
        nodes = np.cos(np.pi * np.arange(n + 1) / n)
        t_coeffs = _cheb_interpolate_extrema(_tn_values_at(nodes, cfg))
        q, _ = _cheb.chebdiv(_cheb.chebsub(t_coeffs, part), h_cheb)
        return np.pad(q, (0, max(0, n - 3 - len(q))))[: n - 3]
    nodes = np.cos(np.pi * np.arange(1, n) / n)  # interior extrema only
    fvals = _tn_values_at(nodes, cfg)
    g = (fvals - _cheb.chebval(nodes, part)) / _cheb.chebval(nodes, h_cheb)
    design = _cheb.chebvander(nodes, n - 4)
    q, *_ = np.linalg.lstsq(design, g, rcond=None)
    return q


def _assemble_t(part: np.ndarray, q: np.ndarray, h_cheb: np.ndarray, n: int) -> np.ndarray:
    if len(q) == 0:
        # n = 2 leaves a consistent cubic whose top coefficient vanishes
        t = np.pad(part, (0, max(0, n + 1 - len(part))))[: n + 1]
        return t
    t = _cheb.chebadd(np.pad(part, (0, n - 3)), _cheb.chebmul(h_cheb, q))
    return t[: n + 1]


def recover_pell(cfg: TnTupleConfig, grid_size: int = 512) -> PellPair:
    """Recover (T_n, U_{n-2}) and certify the Pell identity on a grid.

    T_n comes from the extrema-node data pinned at the exact h-root values;
    U_{n-2} as the polynomial square root of (T_n^2 - 1)/h; a Newton sweep
    then restores relative accuracy of the decaying high-order coefficients,
    and the residual is certified on grid_size points split between [-1, 1]
    and the traced arc.
    """
    n = cfg.n
    h_mono, h_cheb = _h_polynomials(cfg)
    part = _t_part(cfg)
    q = _initial_q(cfg, h_cheb, part)
    t_coeffs = _assemble_t(part, q, h_cheb, n)

    num = _cheb.chebmul(t_coeffs, t_coeffs)
    num[0] -= 1.0
    quo, _ = _cheb.chebdiv(num, h_cheb)
    if len(quo) != 2 * n - 3:
        quo = np.pad(quo, (0, max(0, 2 * n - 3 - len(quo))))[: 2 * n - 3]
    u_coeffs = _cheb_sqrt(quo)

    n_arc = grid_size // 2
    arc_z = _arc_certification_points(cfg, n_arc)
    grid = np.concatenate([
        np.linspace(-1.0, 1.0, grid_size - n_arc).astype(complex),
        arc_z,
    ])
    t_coeffs, u_coeffs = _refine_pair(cfg, t_coeffs, u_coeffs, h_mono, grid)

    # degrees are exact by construction; the thresholds only catch a
    # collapsed recovery (the true leading coefficients themselves decay
    # like |phi(a3)|^-n and can sit far below 1)
    if abs(t_coeffs[-1]) < 1e-13 * max(1.0, np.max(np.abs(t_coeffs))):
        raise CertificationError("recovered T_n has degenerate leading coefficient")
    if abs(u_coeffs[-1]) < 1e-13 * max(1.0, np.max(np.abs(u_coeffs))):
        raise CertificationError("recovered U_{n-2} has degenerate leading coefficient")
    # division residue of (T_n^2 - 1)/h, measured as the values of T^2 - 1
    # at the roots of h (the remainder's defining data; the coefficient
    # vector coming out of float chebdiv is noise-amplified at distant roots)
    root_resid = np.max(np.abs(
        _cheb.chebval(np.array([-1.0, 1.0, cfg.a3, cfg.a4]), t_coeffs) ** 2 - 1.0
    ))
    if root_resid > 1e-9:
        raise CertificationError(
            f"(T_n^2 - 1)/h leaves residue {root_resid:.3e} at the h-roots"
        )
    lead_t = _cheb.cheb2poly(t_coeffs)[-1]
    lead_u = _cheb.cheb2poly(u_coeffs)[-1]
    if abs(abs(lead_t) - abs(lead_u)) > 1e-6 * abs(lead_t):
        raise CertificationError(
            f"leading coefficients |{lead_t}| vs |{lead_u}| violate the Pell identity"
        )

    t_vals = _cheb.chebval(grid, t_coeffs)
    u_vals = _cheb.chebval(grid, u_coeffs)
    h_vals = _poly.polyval(grid, h_mono)
    residual = float(np.max(np.abs(t_vals**2 - h_vals * u_vals**2 - 1.0)))
    scale = max(1.0, float(np.max(np.abs(t_vals))) ** 2)
    if residual >= 1e-8 * scale:
        raise CertificationError(
            f"Pell residual {residual:.3e} exceeds 1e-8 * {scale:.3g} "
            f"for (n,m,k)=({cfg.n},{cfg.m},{cfg.k})"
        )

    # resolve the sign of dT_n/dz = +- n (z - z*) U_{n-2}(z) at one probe
    z0 = 0.31271 + 0.21531j
    h = 1e-6
    fd = (tn_eval(z0 + h, cfg) - tn_eval(z0 - h, cfg)) / (2.0 * h)
    model = n * (z0 - cfg.z_star) * _cheb.chebval(z0, u_coeffs)
    dt_sign = 1 if abs(fd - model) <= abs(fd + model) else -1

    return PellPair(
        t_coeffs,
        u_coeffs,
        (-1.0 + 0.0j, 1.0 + 0.0j, cfg.a3, cfg.a4),
        residual,
        dt_sign,
    )
