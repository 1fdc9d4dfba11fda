"""Jacobi elliptic and theta functions from AGM and nome q-series.

All quantities derive from an immutable :class:`EllipticContext` holding the
modulus pair (k, k'), the complete integrals K, K', E, E' and the nome
q = exp(-pi*K'/K).  Theta functions are evaluated by truncated q-series after
an exact quasi-period reduction of the argument, the elliptic functions
sn, cn, dn as theta ratios, and the zeta function zn as the logarithmic
derivative of the Theta series.  Every evaluator accepts scalars or numpy
arrays of complex arguments; the hot paths are fully vectorised.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError, PoleError

__all__ = [
    "EllipticContext",
    "make_context",
    "theta",
    "theta_log_derivative",
    "jacobi_elliptic",
    "jacobi_zn",
    "invert_cn",
]

# Moduli this close to 0 or 1 lose all double-precision structure; refuse
# rather than degrade silently.
K_MIN = 1e-8
K_MAX = 1.0 - 1e-8

_PI = math.pi
_MAX_AGM_ITER = 64
_POLE_RADIUS = 1e-10


@dataclass(frozen=True)
class EllipticContext:
    """Cached modulus data shared by all evaluations at one modulus k.

    k_prime is the complementary modulus, K/K_prime and E/E_prime the
    complete integrals of first and second kind at k and k_prime, q the
    nome exp(-pi*K'/K), and tol the truncation tolerance of the q-series.
    """

    k: float
    k_prime: float
    K: float
    K_prime: float
    E: float
    E_prime: float
    q: float
    tol: float


def _agm_with_sums(a0: float, b0: float, c0: float) -> tuple[float, float]:
    """Run the AGM iteration from (a0, b0) and accumulate sum 2^(j-1)*c_j^2.

    c0 seeds the j = 0 term of the second-kind correction sum; subsequent
    c_j = (a_{j-1} - b_{j-1}) / 2 come out of the iteration itself.
    """
    a, b = a0, b0
    csum = 0.5 * c0 * c0
    pow2 = 1.0
    c_prev = math.inf
    for _ in range(_MAX_AGM_ITER):
        c = 0.5 * (a - b)
        # a - b stalls at ulp level once converged; both checks are needed
        if abs(c) <= 4e-16 * a or abs(c) >= c_prev:
            return a, csum
        c_prev = abs(c)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        csum += pow2 * c * c
        pow2 *= 2.0
    raise ConvergenceError(f"AGM failed to contract from ({a0}, {b0})")


def make_context(k: float, tol: float = 1e-12) -> EllipticContext:
    """Build the shared modulus context for 0 < k < 1.

    K' is computed from its own AGM run seeded by k directly, so the
    complementary integrals stay accurate even when k' rounds to 1.
    """
    k = float(k)
    if not (K_MIN <= k <= K_MAX):
        raise DomainError(f"modulus k={k} outside supported range [{K_MIN}, {K_MAX}]")
    if not (0.0 < tol <= 1e-6):
        raise DomainError(f"tolerance tol={tol} outside (0, 1e-6]")

    k_prime = math.sqrt((1.0 - k) * (1.0 + k))

    agm_k, sum_k = _agm_with_sums(1.0, k_prime, k)
    agm_kp, sum_kp = _agm_with_sums(1.0, k, k_prime)

    K = _PI / (2.0 * agm_k)
    K_prime = _PI / (2.0 * agm_kp)
    E = K * (1.0 - sum_k)
    E_prime = K_prime * (1.0 - sum_kp)
    q = math.exp(-_PI * K_prime / K)

    legendre = E * K_prime + E_prime * K - K * K_prime - 0.5 * _PI
    if abs(legendre) > max(10.0 * tol, 1e-11):
        raise ConvergenceError(
            f"Legendre relation violated by {legendre:.3e} at k={k}"
        )
    return EllipticContext(k, k_prime, K, K_prime, E, E_prime, q, tol)


@lru_cache(maxsize=256)
def _cached_context(k: float, tol: float) -> EllipticContext:
    return make_context(k, tol)


# ---------------------------------------------------------------------------
# theta series tables
# ---------------------------------------------------------------------------

# kind -> (uses sin-series of odd frequencies, sign pattern under the two
# reductions).  H pairs with theta_1, H1 with theta_2, Theta1 with theta_3
# and Theta with theta_4 in the classical numbering.
_KINDS = ("H", "H1", "Theta", "Theta1")


@lru_cache(maxsize=256)
def _theta_tables(q: float, tol: float):
    """Precompute series frequencies and coefficients for one nome q.

    Truncation: within the reduced strip |Im v| <= pi*K'/(2K) the j-th term
    of the half-integer series is bounded by 2 q^((j+1/2)^2 - (j+1/2)) and
    of the integer series by 2 q^(j^2 - j); both decay like q^(j^2).
    """
    cutoff = 0.01 * tol
    jmax_half = 3
    while 2.0 * q ** ((jmax_half + 0.5) ** 2 - (jmax_half + 0.5)) > cutoff:
        jmax_half += 1
        if jmax_half > 80:
            raise ConvergenceError(f"theta series will not truncate at q={q}")
    jmax_int = 3
    while 2.0 * q ** (jmax_int**2 - jmax_int) > cutoff:
        jmax_int += 1
        if jmax_int > 80:
            raise ConvergenceError(f"theta series will not truncate at q={q}")

    j_half = np.arange(jmax_half + 1)
    freq_half = 2.0 * j_half + 1.0
    amp_half = 2.0 * q ** ((j_half + 0.5) ** 2)
    alt_half = (-1.0) ** j_half

    j_int = np.arange(1, jmax_int + 1)
    freq_int = 2.0 * j_int
    amp_int = 2.0 * q ** (j_int**2)
    alt_int = (-1.0) ** j_int

    return {
        # theta_1-type: 2 sum (-1)^j q^((j+1/2)^2) sin((2j+1) v)
        "H": (freq_half, amp_half * alt_half, "sin"),
        # theta_2-type: 2 sum q^((j+1/2)^2) cos((2j+1) v)
        "H1": (freq_half, amp_half, "cos"),
        # theta_3-type: 1 + 2 sum q^(j^2) cos(2j v)
        "Theta1": (freq_int, amp_int, "cos1"),
        # theta_4-type: 1 + 2 sum (-1)^j q^(j^2) cos(2j v)
        "Theta": (freq_int, amp_int * alt_int, "cos1"),
    }


@lru_cache(maxsize=256)
def _theta_tables_scalar(q: float, tol: float):
    tables = _theta_tables(q, tol)
    return {
        kind: (tuple(map(float, freq)), tuple(map(float, coef)), form)
        for kind, (freq, coef, form) in tables.items()
    }


def _series(kind: str, v0: np.ndarray, tables) -> np.ndarray:
    freq, coef, form = tables[kind]
    arg = np.multiply.outer(v0, freq)
    if form == "sin":
        out = np.sin(arg) @ coef
    elif form == "cos":
        out = np.cos(arg) @ coef
    else:
        out = 1.0 + np.cos(arg) @ coef
    return out


def _series_dv(kind: str, v0: np.ndarray, tables) -> np.ndarray:
    freq, coef, form = tables[kind]
    arg = np.multiply.outer(v0, freq)
    if form == "sin":
        out = np.cos(arg) @ (coef * freq)
    else:
        out = -np.sin(arg) @ (coef * freq)
    return out


def _reduce_argument(u: np.ndarray, ctx: EllipticContext):
    """Map v = pi*u/(2K) into |Re v0| <= pi/2, |Im v0| <= pi*K'/(2K).

    Returns (v0, n_shift, m_shift) where v = v0 + m*pi + n*pi*tau and
    tau = i*K'/K.
    """
    v = (_PI / (2.0 * ctx.K)) * u
    t_im = _PI * ctx.K_prime / ctx.K
    n = np.round(v.imag / t_im)
    v0 = v - n * (1j * t_im)
    m = np.round(v0.real / _PI)
    v0 = v0 - m * _PI
    return v0, n, m


def _quasi_factor(kind: str, v0, n, m, ctx: EllipticContext):
    """Exact multiplier relating theta at the reduced argument to theta at v.

    theta(v) = sign * q^(-n^2) * exp(-2 i n v0) * theta(v0); the sign is
    (-1)^n for the H/Theta pair and (-1)^m for the H/H1 pair.
    """
    t_im = _PI * ctx.K_prime / ctx.K
    expo = n * n * t_im - 2j * n * v0
    if np.any(expo.real > 690.0):
        raise DomainError("theta argument too far from the convergence strip")
    factor = np.exp(expo)
    if kind in ("H", "Theta"):
        factor = factor * (-1.0) ** n
    if kind in ("H", "H1"):
        factor = factor * (-1.0) ** m
    return factor


def _as_complex_array(u):
    a = np.asarray(u, dtype=np.complex128)
    return a, a.ndim == 0


# scalar fast path: sequential Newton continuation spends all its time in
# theta evaluations at single points, where numpy overhead dominates

def _reduce_scalar(u: complex, ctx: EllipticContext):
    v = (_PI / (2.0 * ctx.K)) * u
    t_im = _PI * ctx.K_prime / ctx.K
    nsh = round(v.imag / t_im)
    v0 = complex(v.real, v.imag - nsh * t_im)
    msh = round(v0.real / _PI)
    return complex(v0.real - msh * _PI, v0.imag), nsh, msh


def _series_scalar(kind: str, v0: complex, tables):
    freq, coef, form = tables[kind]
    acc = 0.0 + 0.0j
    if form == "sin":
        for f, c in zip(freq, coef):
            acc += c * cmath.sin(f * v0)
        return acc
    for f, c in zip(freq, coef):
        acc += c * cmath.cos(f * v0)
    return acc + 1.0 if form == "cos1" else acc


def _series_dv_scalar(kind: str, v0: complex, tables):
    freq, coef, form = tables[kind]
    acc = 0.0 + 0.0j
    if form == "sin":
        for f, c in zip(freq, coef):
            acc += c * f * cmath.cos(f * v0)
        return acc
    for f, c in zip(freq, coef):
        acc -= c * f * cmath.sin(f * v0)
    return acc


def _theta_scalar(kind: str, u: complex, ctx: EllipticContext) -> complex:
    tables = _theta_tables_scalar(ctx.q, ctx.tol)
    v0, nsh, msh = _reduce_scalar(u, ctx)
    t_im = _PI * ctx.K_prime / ctx.K
    expo = complex(nsh * nsh * t_im, 0.0) - 2j * nsh * v0
    if expo.real > 690.0:
        raise DomainError("theta argument too far from the convergence strip")
    factor = cmath.exp(expo)
    if kind in ("H", "Theta") and nsh % 2:
        factor = -factor
    if kind in ("H", "H1") and msh % 2:
        factor = -factor
    return factor * _series_scalar(kind, v0, tables)


def _theta_dlog_scalar(kind: str, u: complex, ctx: EllipticContext) -> complex:
    tables = _theta_tables_scalar(ctx.q, ctx.tol)
    v0, nsh, _ = _reduce_scalar(u, ctx)
    s = _series_scalar(kind, v0, tables)
    ds = _series_dv_scalar(kind, v0, tables)
    return (_PI / (2.0 * ctx.K)) * (ds / s - 2j * nsh)


def theta(kind: str, u, ctx: EllipticContext):
    """Evaluate the Jacobi theta function H, H1, Theta or Theta1 at u."""
    if kind not in _KINDS:
        raise DomainError(f"unknown theta kind {kind!r}")
    if isinstance(u, (int, float, complex)):
        return _theta_scalar(kind, complex(u), ctx)
    a, scalar = _as_complex_array(u)
    tables = _theta_tables(ctx.q, ctx.tol)
    v0, n, m = _reduce_argument(a, ctx)
    val = _quasi_factor(kind, v0, n, m, ctx) * _series(kind, v0, tables)
    return complex(val) if scalar else val


def theta_log_derivative(kind: str, u, ctx: EllipticContext):
    """d/du log theta_kind(u), including the reduction's exact -2in shift."""
    if kind not in _KINDS:
        raise DomainError(f"unknown theta kind {kind!r}")
    if isinstance(u, (int, float, complex)):
        return _theta_dlog_scalar(kind, complex(u), ctx)
    a, scalar = _as_complex_array(u)
    tables = _theta_tables(ctx.q, ctx.tol)
    v0, n, _ = _reduce_argument(a, ctx)
    s = _series(kind, v0, tables)
    ds = _series_dv(kind, v0, tables)
    val = (_PI / (2.0 * ctx.K)) * (ds / s - 2j * n)
    return complex(val) if scalar else val


def _lattice_distance(u, center, per_re: float, per_im: float):
    """Distance from u to center modulo the rectangular lattice
    per_re*Z + i*per_im*Z."""
    d = u - center
    dx = d.real - per_re * np.round(d.real / per_re)
    dy = d.imag - per_im * np.round(d.imag / per_im)
    return np.hypot(dx, dy)


def _lattice_distance_scalar(u: complex, center: complex, per_re: float,
                             per_im: float) -> float:
    dx = u.real - center.real
    dy = u.imag - center.imag
    dx -= per_re * round(dx / per_re)
    dy -= per_im * round(dy / per_im)
    return math.hypot(dx, dy)


def jacobi_elliptic(u, ctx: EllipticContext):
    """Jacobi sn, cn, dn at complex u, computed as theta-function ratios.

    Raises PoleError when u is within 1e-10 of a pole u = i K' modulo the
    period lattice (2K, 2iK').
    """
    if isinstance(u, (int, float, complex)):
        uu = complex(u)
        if _lattice_distance_scalar(uu, 1j * ctx.K_prime, 2.0 * ctx.K,
                                    2.0 * ctx.K_prime) < _POLE_RADIUS:
            raise PoleError("argument within 1e-10 of a pole of sn/cn/dn")
        th4 = _theta_scalar("Theta", uu, ctx)
        sn = _theta_scalar("H", uu, ctx) / (math.sqrt(ctx.k) * th4)
        cn = math.sqrt(ctx.k_prime / ctx.k) * _theta_scalar("H1", uu, ctx) / th4
        dn = math.sqrt(ctx.k_prime) * _theta_scalar("Theta1", uu, ctx) / th4
        if not (cmath.isfinite(sn) and cmath.isfinite(cn) and cmath.isfinite(dn)):
            raise ConvergenceError("non-finite value in sn/cn/dn evaluation")
        return sn, cn, dn
    a, scalar = _as_complex_array(u)
    if np.any(_lattice_distance(a, 1j * ctx.K_prime, 2.0 * ctx.K, 2.0 * ctx.K_prime) < _POLE_RADIUS):
        raise PoleError("argument within 1e-10 of a pole of sn/cn/dn")
    th4 = theta("Theta", a, ctx)
    sn = theta("H", a, ctx) / (math.sqrt(ctx.k) * th4)
    cn = math.sqrt(ctx.k_prime / ctx.k) * theta("H1", a, ctx) / th4
    dn = math.sqrt(ctx.k_prime) * theta("Theta1", a, ctx) / th4
    bad = ~(np.isfinite(sn.real) & np.isfinite(sn.imag)
            & np.isfinite(cn.real) & np.isfinite(cn.imag)
            & np.isfinite(dn.real) & np.isfinite(dn.imag))
    if np.any(bad):
        raise ConvergenceError("non-finite value in sn/cn/dn evaluation")
    if scalar:
        return complex(sn), complex(cn), complex(dn)
    return sn, cn, dn


def jacobi_real(u, ctx: EllipticContext):
    """sn, cn, dn for real u, returned with the spurious imaginary part dropped."""
    sn, cn, dn = jacobi_elliptic(u, ctx)
    return sn.real, cn.real, dn.real


def jacobi_zn(u, ctx: EllipticContext):
    """Jacobi zeta zn(u) = d/du log Theta(u) for real u; period 2K."""
    if isinstance(u, (int, float)):
        u_red = u - 2.0 * ctx.K * round(u / (2.0 * ctx.K))
        v0 = complex((_PI / (2.0 * ctx.K)) * u_red)
        tables = _theta_tables_scalar(ctx.q, ctx.tol)
        val = _series_dv_scalar("Theta", v0, tables) / _series_scalar("Theta", v0, tables)
        return (_PI / (2.0 * ctx.K)) * val.real
    a = np.asarray(u, dtype=np.float64)
    scalar = a.ndim == 0
    u_red = a - 2.0 * ctx.K * np.round(a / (2.0 * ctx.K))
    v0 = (_PI / (2.0 * ctx.K)) * u_red
    tables = _theta_tables(ctx.q, ctx.tol)
    val = (_PI / (2.0 * ctx.K)) * _series_dv("Theta", v0, tables) / _series("Theta", v0, tables)
    return float(val) if scalar else val


# ---------------------------------------------------------------------------
# inverse of cn on the fundamental rectangle
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _cn_seed_table(ctx: EllipticContext):
    """Coarse samples of cn over the closed rectangle [0,K] x [0,K'].

    Used to seed Newton iterations; the grid stays clear of the pole at iK'.
    """
    xs = np.linspace(0.0, ctx.K, 11)
    ys = np.linspace(0.0, ctx.K_prime, 11)[:-1]  # drop the pole row
    uu = (xs[None, :] + 1j * ys[:, None]).ravel()
    uu = uu + (0.013 + 0.017j)  # nudge off exact zeros/edges
    _, cn, _ = jacobi_elliptic(uu, ctx)
    return uu, cn


def _newton_cn(u0: complex, w: complex, ctx: EllipticContext) -> complex:
    """Damped Newton for cn(u) = w; inverts 1/cn instead when |w| is large."""
    big = abs(w) > 2.0
    target = 1.0 / w if big else w

    def f_df(u):
        sn, cn, dn = jacobi_elliptic(u, ctx)
        if big:
            return 1.0 / cn - target, sn * dn / (cn * cn)
        return cn - target, -sn * dn

    u = complex(u0)
    fu, dfu = f_df(u)
    for _ in range(60):
        if abs(fu) < 1e-13 * max(1.0, abs(target)):
            return u
        if dfu == 0:
            break
        step = -fu / dfu
        lam = 1.0
        for _ in range(25):
            try:
                fn, dfn = f_df(u + lam * step)
            except PoleError:
                lam *= 0.5
                continue
            if abs(fn) < abs(fu):
                u, fu, dfu = u + lam * step, fn, dfn
                break
            lam *= 0.5
        else:
            break
    if abs(fu) < 1e-11 * max(1.0, abs(target)):
        return u
    raise ConvergenceError(f"Newton for cn(u) = {w} did not converge")


def _canonicalize_cn(u: complex, ctx: EllipticContext) -> complex | None:
    """Move a solution of cn(u) = w into [0,K] x [0,K'] using u -> -u and the
    period lattice (4K, 2K + 2iK'); returns None if no translate lands there.

    The tolerance is generous because Newton only pins u to ~sqrt(tol) near
    the branch points 0, 2K, K + iK'; those sit on the rectangle boundary,
    where clamping does not disturb the cn value to first order.
    """
    K, Kp = ctx.K, ctx.K_prime
    eps = 1e-6 * max(K, Kp)
    best = None
    for s in (1.0, -1.0):
        base = s * u
        for a in (-2, -1, 0, 1, 2):
            for b in (-1, 0, 1):
                cand = base + 4.0 * K * a + (2.0 * K + 2j * Kp) * b
                if -eps <= cand.real <= K + eps and -eps <= cand.imag <= Kp + eps:
                    key = (round(cand.imag, 9), round(cand.real, 9))
                    if best is None or key < best[0]:
                        best = (key, cand)
    if best is None:
        return None
    cand = best[1]
    return complex(min(max(cand.real, 0.0), K), min(max(cand.imag, 0.0), Kp))


def invert_cn(w, ctx: EllipticContext) -> complex:
    """Solve cn(u) = w.

    For w in the closed lower-right quadrant {Re w >= 0, Im w <= 0} -- the
    conformal image of the rectangle -- the returned u lies in the closed
    fundamental rectangle [0,K] x [0,K'].  Other values of w are reached by
    the exact symmetries cn(2K - u) = -cn(u) and cn(conj u) = conj cn(u),
    so the result then lies in [0,2K] x [-K',K'].
    """
    w = complex(w)
    if abs(w - 1.0) < 1e-14:
        return 0.0 + 0.0j
    if abs(w + 1.0) < 1e-14:
        return complex(2.0 * ctx.K)

    negate = w.real < 0.0
    w1 = -w if negate else w
    conjugate = w1.imag > 0.0
    w0 = w1.conjugate() if conjugate else w1

    seeds_u, seeds_cn = _cn_seed_table(ctx)
    # chordal metric keeps the pole region comparable with the rest
    dist = np.abs(seeds_cn - w0) / np.sqrt((1.0 + np.abs(seeds_cn) ** 2) * (1.0 + abs(w0) ** 2))
    order = np.argsort(dist)
    candidates = [complex(seeds_u[i]) for i in order[:4]]
    if abs(w0 - 1.0) < 0.4:
        candidates.insert(0, complex(np.sqrt(2.0 * (1.0 - w0))))
    if abs(w0) > 3.0:
        candidates.insert(0, 1j * ctx.K_prime - 1j / (ctx.k * w0))

    u_sol = None
    last_err = None
    for u0 in candidates:
        try:
            u_sol = _newton_cn(u0, w0, ctx)
            break
        except (ConvergenceError, PoleError) as exc:
            last_err = exc
    if u_sol is None:
        raise ConvergenceError(f"could not invert cn at w={w}: {last_err}")

    u_rect = _canonicalize_cn(u_sol, ctx)
    if u_rect is None:
        raise ConvergenceError(f"could not reduce acn({w}) into the rectangle")

    u = u_rect.conjugate() if conjugate else u_rect
    if negate:
        u = 2.0 * ctx.K - u
    _, cn_u, _ = jacobi_elliptic(u, ctx)
    if abs(cn_u - w) > 1e-10 * max(1.0, abs(w)):
        raise ConvergenceError(f"acn verification failed at w={w}")
    return u
