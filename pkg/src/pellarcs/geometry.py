"""Arc geometry: tracing the Jordan arc, extremal points, intersection
classification, the z* = 1 boundary curve, and real-preimage contours.

The arc A is the non-real component of the inverse image.  In the u-plane it
is the level set |omega(u)| = 1 between the corner points K/2 +- i K'/2; the
tracer walks a uniform phase grid from +m pi/n down to -m pi/n with damped
Newton corrections, then certifies conjugation symmetry (rebuilding the
second half by mirroring when the continuation slid onto the interval lift,
which happens in the crossing configuration where the level set has a
saddle on the interval preimage).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from .errors import (
    BracketError,
    CertificationError,
    ContinuationError,
    ConvergenceError,
    DomainError,
    PoleError,
)
from .parammap import _forward_values
from .pell import (
    PellPair,
    TnTupleConfig,
    _omega_dlog,
    k_star,
    omega,
    recover_pell,
    tn_eval,
    z_of_u,
)

__all__ = [
    "IntersectionClass",
    "ArcTrace",
    "ExtremalReport",
    "BoundaryCurveSample",
    "classify",
    "trace_arc",
    "extremal_points",
    "boundary_curve",
    "trace_real_preimage",
]

_TANGENT_BAND = 1e-9


@dataclass(frozen=True)
class IntersectionClass:
    """How the arc meets [-1, 1]: 'crossing' (z* < 1), 'tangent' (z* = 1)
    or 'disjoint' (z* > 1)."""

    kind: str
    z_star: float


@dataclass(frozen=True)
class ArcTrace:
    """Ordered polyline along the arc from a4 to a3.

    phases[j] satisfies omega(u_points[j]) = exp(i * phases[j]) and runs
    continuously from +m pi/n to -m pi/n.
    """

    u_points: np.ndarray
    z_points: np.ndarray
    phases: np.ndarray


@dataclass(frozen=True)
class ExtremalReport:
    """Extremal points of T_n on [-1, 1] and on the arc.

    counts = (interval, arc, total) where arc points duplicating interval
    points (junction configurations) are merged with radius 1e-7 before
    being counted in arc/total.
    """

    on_interval: np.ndarray
    on_arc: np.ndarray
    interval_values: np.ndarray
    arc_values: np.ndarray
    counts: tuple[int, int, int]
    certified: bool


@dataclass(frozen=True)
class BoundaryCurveSample:
    """One point of the z* = 1 separating curve in the endpoint plane."""

    lam: float
    k_star: float
    alpha: float
    beta: float


def classify(cfg: TnTupleConfig) -> IntersectionClass:
    """Classify arc-versus-interval by the position of z* relative to 1.

    Also enforces the shortcut criterion: alpha <= 1 forces an intersecting
    configuration, so 'disjoint' with alpha <= 1 indicates broken numerics.
    """
    zs = cfg.z_star
    if abs(zs - 1.0) < _TANGENT_BAND:
        kind = "tangent"
    elif zs > 1.0:
        kind = "disjoint"
    else:
        kind = "crossing"
    if cfg.a3.real <= 1.0 and kind == "disjoint":
        raise CertificationError(
            f"alpha={cfg.a3.real} <= 1 cannot give a disjoint pair (z*={zs})"
        )
    return IntersectionClass(kind, zs)


# ---------------------------------------------------------------------------
# arc tracing
# ---------------------------------------------------------------------------


def _newton_omega(cfg: TnTupleConfig, u0: complex, target: complex) -> complex:
    """Damped Newton for omega(u) = target from the seed u0."""
    cap = 0.35 * min(cfg.ctx.K, cfg.ctx.K_prime)
    u = complex(u0)
    w = omega(u, cfg)
    f = w - target
    for _ in range(50):
        if abs(f) < 1e-12:
            return u
        df = w * _omega_dlog(u, cfg)
        if df == 0:
            break
        step = -f / df
        if abs(step) > cap:
            step *= cap / abs(step)
        lam = 1.0
        for _ in range(22):
            try:
                w2 = omega(u + lam * step, cfg)
            except PoleError:
                lam *= 0.5
                continue
            f2 = w2 - target
            if abs(f2) < abs(f):
                u, w, f = u + lam * step, w2, f2
                break
            lam *= 0.5
        else:
            break
    if abs(f) < 1e-10:
        return u
    raise ConvergenceError(f"phase solve stalled at target {target}")


def _phase_step(cfg: TnTupleConfig, u_start: complex, phi_from: float,
                phi_to: float, depth: int = 0) -> complex:
    """Continue the solution of omega = exp(i phi) from phi_from to phi_to,
    splitting the step recursively when Newton fails."""
    target = cmath.exp(1j * phi_to)
    seed = u_start
    dl = _omega_dlog(u_start, cfg)
    if abs(dl) > 1e-8:
        pred = 1j * (phi_to - phi_from) / dl
        cap = 0.25 * min(cfg.ctx.K, cfg.ctx.K_prime)
        if abs(pred) > cap:
            pred *= cap / abs(pred)
        seed = u_start + pred
    try:
        return _newton_omega(cfg, seed, target)
    except ConvergenceError:
        if depth >= 14:
            raise
        mid = 0.5 * (phi_from + phi_to)
        u_mid = _phase_step(cfg, u_start, phi_from, mid, depth + 1)
        return _phase_step(cfg, u_mid, mid, phi_to, depth + 1)


def _refine_vectorized(cfg: TnTupleConfig, seeds: np.ndarray,
                       phases: np.ndarray) -> np.ndarray:
    """Simultaneous damped Newton on the whole phase grid."""
    targets = np.exp(1j * phases)
    u = seeds.astype(complex).copy()
    cap = 0.35 * min(cfg.ctx.K, cfg.ctx.K_prime)
    for _ in range(16):
        w = omega(u, cfg)
        f = w - targets
        if np.max(np.abs(f)) < 1e-12:
            break
        df = w * _omega_dlog(u, cfg)
        df = np.where(df == 0, 1e-300, df)
        step = -f / df
        mag = np.abs(step)
        step = np.where(mag > cap, step * (cap / np.maximum(mag, 1e-300)), step)
        for _ in range(8):
            f_new = omega(u + step, cfg) - targets
            worse = np.abs(f_new) > np.abs(f)
            if not worse.any():
                break
            step = np.where(worse, 0.5 * step, step)
        u = u + step
    return u


def trace_arc(cfg: TnTupleConfig, npts: int = 256) -> ArcTrace:
    """Trace the arc from a4 (phase +m pi/n) to a3 (phase -m pi/n).

    Runs a coarse sequential continuation, refines the full grid with a
    vectorised Newton pass, and falls back to per-point continuation for
    stragglers.  If the continued curve fails the conjugation-symmetry or
    endpoint checks (crossing case), the second half is rebuilt as the
    conjugate mirror of the first, which still solves the grid equations
    omega(u_j) = exp(i phi_j) exactly.
    """
    if npts < 16:
        raise DomainError(f"npts={npts} must be at least 16")
    ctx = cfg.ctx
    n, m = cfg.n, cfg.m
    corner = complex(0.5 * ctx.K, 0.5 * ctx.K_prime)
    phases = np.linspace(m * math.pi / n, -m * math.pi / n, npts)

    n_coarse = min(npts, 33)
    coarse_idx = np.unique(np.round(np.linspace(0, npts - 1, n_coarse)).astype(int))
    coarse_u = np.empty(len(coarse_idx), dtype=complex)
    coarse_u[0] = corner
    last_good = 0
    for j in range(1, len(coarse_idx)):
        try:
            coarse_u[j] = _phase_step(
                cfg, coarse_u[j - 1],
                phases[coarse_idx[j - 1]], phases[coarse_idx[j]],
            )
            last_good = coarse_idx[j]
        except ConvergenceError as exc:
            raise ContinuationError(
                f"arc continuation stalled at phase index {coarse_idx[j]}: {exc}",
                last_good_index=last_good,
            ) from exc

    seeds = np.empty(npts, dtype=complex)
    seeds.real = np.interp(phases[::-1], phases[coarse_idx][::-1], coarse_u.real[::-1])[::-1]
    seeds.imag = np.interp(phases[::-1], phases[coarse_idx][::-1], coarse_u.imag[::-1])[::-1]
    seeds[coarse_idx] = coarse_u

    try:
        u = _refine_vectorized(cfg, seeds, phases)
        residual = np.abs(omega(u, cfg) - np.exp(1j * phases))
    except PoleError:
        u = seeds.copy()
        residual = np.full(npts, np.inf)

    bad = np.flatnonzero(residual > 1e-10)
    for j in bad:
        prev = j - 1 if j > 0 else 0
        try:
            u[j] = _phase_step(cfg, u[prev], phases[prev], phases[j])
        except ConvergenceError as exc:
            raise ContinuationError(
                f"arc refinement stalled at phase index {j}: {exc}",
                last_good_index=int(j) - 1,
            ) from exc

    u[0] = corner
    z = z_of_u(u, cfg)

    end_ok = abs(z[-1] - cfg.a3) < 1e-8
    sym_ok = np.max(np.abs(z - np.conj(z[::-1]))) < 1e-7
    if not (end_ok and sym_ok):
        # crossing-case continuation slid onto the interval lift; rebuild the
        # second half as the conjugate mirror of the first
        for j in range(npts // 2):
            u[npts - 1 - j] = np.conj(u[j])
        z = z_of_u(u, cfg)
        if abs(z[-1] - cfg.a3) > 1e-8:
            raise ContinuationError(
                "arc trace does not terminate at a3 even after mirroring",
                last_good_index=npts // 2,
            )

    if cfg.z_star < 1.0 - _TANGENT_BAND:
        # the junction with [-1,1] sits between grid phases; splice it in so
        # the trace passes through z* exactly
        u_j = _junction_edge_point(cfg)
        phi_j = cmath.phase(omega(u_j, cfg))
        if abs(phi_j) < m * math.pi / n - 1e-12:
            pos = int(np.searchsorted(-phases, -phi_j))
            mirror_pos = npts - pos
            u = np.insert(u, [pos, mirror_pos], [u_j, np.conj(u_j)])
            z = np.insert(z, [pos, mirror_pos],
                          [complex(z_of_u(u_j, cfg).real),
                           complex(z_of_u(u_j, cfg).real)])
            phases = np.insert(phases, [pos, mirror_pos], [phi_j, -phi_j])
    return ArcTrace(u, z, phases)


def _junction_edge_point(cfg: TnTupleConfig) -> complex:
    """Right-edge preimage K + i t of the junction z* in a crossing
    configuration; z(K + i t) decreases from 1 to -1 as t runs over [0, K']."""
    ctx = cfg.ctx
    lo, hi = 1e-12, ctx.K_prime - 1e-12
    f_lo = z_of_u(ctx.K + 1j * lo, cfg).real - cfg.z_star
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        f_mid = z_of_u(ctx.K + 1j * mid, cfg).real - cfg.z_star
        if f_lo * f_mid >= 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return ctx.K + 0.5j * (lo + hi)


# ---------------------------------------------------------------------------
# extremal points
# ---------------------------------------------------------------------------


def _bisect_phase_roots(cfg: TnTupleConfig, t_lo: np.ndarray, t_hi: np.ndarray,
                        f_lo: np.ndarray) -> np.ndarray:
    """Vectorised bisection for the roots of Im(omega(i t)^n) in [t_lo, t_hi]."""
    n = cfg.n
    lo, hi = t_lo.astype(float).copy(), t_hi.astype(float).copy()
    s_lo = np.sign(f_lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = np.imag(omega(1j * mid, cfg) ** n)
        left = s_lo * np.sign(f_mid) >= 0
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
        if np.max(hi - lo) < 1e-12:
            break
    return 0.5 * (lo + hi)


def extremal_points(cfg: TnTupleConfig, trace: ArcTrace) -> ExtremalReport:
    """Locate all points with T_n = +-1 on [-1, 1] and on the arc.

    On the interval the phase of omega along u = i t is sampled at 1024
    points and the sign changes of Im(omega^n) are polished by bisection;
    on the arc the extremal phases are exactly the multiples of pi/n inside
    the traced phase range and are polished by Newton.  Counts are
    cross-checked against the exact disjoint-case values and the n+2 / n+1
    dichotomy in T_n(z*).
    """
    ctx = cfg.ctx
    n, m = cfg.n, cfg.m

    # interval [-1, 1]: preimage u = i t, t in [0, K']
    t_grid = np.linspace(0.0, ctx.K_prime, 1024)
    w = omega(1j * t_grid[1:-1], cfg)
    f = np.imag(w**n)
    sign_change = np.flatnonzero(f[:-1] * f[1:] < 0.0)
    roots_t = _bisect_phase_roots(
        cfg, t_grid[1:-1][sign_change], t_grid[2:-1][sign_change], f[sign_change]
    ) if len(sign_change) else np.empty(0)

    z_interior = np.array([z_of_u(1j * t, cfg).real for t in roots_t])
    vals_interior = np.array(
        [1 if np.real(omega(1j * t, cfg) ** n) > 0 else -1 for t in roots_t],
        dtype=int,
    )
    on_interval = np.concatenate([[-1.0], z_interior, [1.0]])
    interval_values = np.concatenate([
        [1 if n % 2 == 0 else -1], vals_interior, [1]
    ]).astype(int)
    order = np.argsort(on_interval)
    on_interval, interval_values = on_interval[order], interval_values[order]
    keep = np.concatenate([[True], np.diff(on_interval) > 1e-6])
    on_interval, interval_values = on_interval[keep], interval_values[keep]

    # arc: extremal phases are nu*pi/n for integer nu in [-m, m]
    on_arc: list[complex] = []
    arc_values: list[int] = []
    phases = trace.phases
    for nu in range(m, -m - 1, -1):
        p = nu * math.pi / n
        if nu == m:
            u_root = trace.u_points[0]
        elif nu == -m:
            u_root = trace.u_points[-1]
        else:
            j = int(np.flatnonzero((phases[:-1] - p) * (phases[1:] - p) <= 0.0)[0])
            u_root = _newton_omega(cfg, trace.u_points[j], cmath.exp(1j * p))
        on_arc.append(complex(z_of_u(u_root, cfg)))
        arc_values.append(1 if (-1) ** nu > 0 else -1)
    on_arc_arr = np.array(on_arc)
    arc_values_arr = np.array(arc_values, dtype=int)

    # merge junction duplicates out of the arc list; the radius must absorb
    # near-tangent configurations, where quoting k* to six digits leaves the
    # junction a few 1e-7 away from the endpoint extremal at z = 1
    merge_radius = 1e-6
    dup = np.array([
        bool(np.min(np.abs(za - on_interval)) < merge_radius)
        if abs(za.imag) < merge_radius else False
        for za in on_arc_arr
    ])
    # also merge arc-internal duplicates
    seen: list[complex] = []
    keep_arc = []
    for za, is_dup in zip(on_arc_arr, dup):
        if is_dup or any(abs(za - s) < merge_radius for s in seen):
            keep_arc.append(False)
        else:
            seen.append(za)
            keep_arc.append(True)
    keep_arc = np.asarray(keep_arc, dtype=bool)

    interval_count = len(on_interval)
    arc_count_raw = len(on_arc_arr)
    arc_count = int(np.sum(keep_arc))
    total = interval_count + arc_count

    for z0 in np.concatenate([on_interval.astype(complex), on_arc_arr]):
        t2 = tn_eval(z0, cfg)
        if abs(t2 * t2 - 1.0) > 1e-8:
            raise CertificationError(f"reported extremal point {z0} has |T^2-1| > 1e-8")

    expected_interval = n - 2 * m + 1
    expected_arc = 2 * m + 1
    kind = classify(cfg).kind
    if total > n + 2:
        raise CertificationError(
            f"{total} extremal points exceed the bound n+2 = {n + 2}"
        )
    if interval_count < expected_interval:
        raise CertificationError(
            f"only {interval_count} interval extremal points; "
            f"at least {expected_interval} are guaranteed"
        )
    if kind == "disjoint":
        certified = interval_count == expected_interval and arc_count_raw == expected_arc
        if not certified:
            raise CertificationError(
                f"disjoint counts ({interval_count}, {arc_count_raw}) differ from "
                f"({expected_interval}, {expected_arc})"
            )
        t_at_star = tn_eval(cfg.z_star, cfg)
        expected_total = n + 1 if abs(abs(t_at_star) - 1.0) < 1e-6 else n + 2
        certified = total == expected_total
    elif kind == "tangent":
        certified = total == n + 1
    else:
        certified = True  # crossing counts are empirical beyond the bounds above

    return ExtremalReport(
        on_interval,
        on_arc_arr[keep_arc],
        interval_values,
        arc_values_arr[keep_arc],
        (interval_count, arc_count, total),
        bool(certified),
    )


# ---------------------------------------------------------------------------
# boundary curve and real-preimage contours
# ---------------------------------------------------------------------------


def boundary_curve(lambda_grid, tol: float = 1e-10):
    """k*(lambda) samples with their endpoints; returns (samples, skipped).

    Grid values whose z* - 1 bracket has no sign change inside the clamped
    modulus range are skipped and reported in the second list.
    """
    samples: list[BoundaryCurveSample] = []
    skipped: list[float] = []
    for lam in np.asarray(lambda_grid, dtype=float):
        if not (0.01 <= lam <= 0.49):
            raise DomainError(f"lambda={lam} outside (0.01, 0.49)")
        try:
            ks = k_star(float(lam), tol)
        except BracketError:
            skipped.append(float(lam))
            continue
        alpha, beta = _forward_values(ks, float(lam))
        samples.append(BoundaryCurveSample(float(lam), ks, alpha, beta))
    return samples, skipped


_SEGMENT_TABLE = {
    1: [("L", "B")], 2: [("B", "R")], 3: [("L", "R")], 4: [("R", "T")],
    6: [("B", "T")], 7: [("L", "T")], 8: [("T", "L")], 9: [("T", "B")],
    11: [("T", "R")], 12: [("R", "L")], 13: [("B", "R")], 14: [("L", "B")],
}


def _cell_segments(x0, x1, y0, y1, v, center_value):
    """Marching-squares segments for one cell.

    v = (bottom-left, bottom-right, top-right, top-left) field values; the
    two ambiguous codes are resolved by the sign at the cell centre.
    """
    b = [vi > 0.0 for vi in v]
    code = b[0] | (b[1] << 1) | (b[2] << 2) | (b[3] << 3)
    if code in (0, 15):
        return []

    def edge(name):
        if name == "B":
            va, vb = v[0], v[1]
            t = va / (va - vb)
            return complex(x0 + t * (x1 - x0), y0)
        if name == "R":
            va, vb = v[1], v[2]
            t = va / (va - vb)
            return complex(x1, y0 + t * (y1 - y0))
        if name == "T":
            va, vb = v[3], v[2]
            t = va / (va - vb)
            return complex(x0 + t * (x1 - x0), y1)
        va, vb = v[0], v[3]
        t = va / (va - vb)
        return complex(x0, y0 + t * (y1 - y0))

    if code in (5, 10):
        joined = (center_value > 0.0) == (code == 5)
        if joined:
            pairs = [("L", "B"), ("R", "T")] if code == 5 else [("L", "T"), ("B", "R")]
        else:
            pairs = [("L", "T"), ("B", "R")] if code == 5 else [("L", "B"), ("R", "T")]
        return [(edge(a), edge(b)) for a, b in pairs]
    return [(edge(a), edge(b)) for a, b in _SEGMENT_TABLE[code]]


def _chain_segments(segments, scale):
    """Join marching-squares segments into polylines by shared endpoints."""
    key = lambda p: (round(p.real / scale), round(p.imag / scale))
    adjacency: dict[tuple, list[int]] = {}
    for i, (a, b) in enumerate(segments):
        adjacency.setdefault(key(a), []).append(i)
        adjacency.setdefault(key(b), []).append(i)
    used = [False] * len(segments)
    polylines = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        a, b = segments[start]
        chain = [a, b]
        for end_idx in (0, 1):
            while True:
                tip = chain[-1] if end_idx == 0 else chain[0]
                cands = [i for i in adjacency.get(key(tip), []) if not used[i]]
                if not cands:
                    break
                i = cands[0]
                used[i] = True
                p, q = segments[i]
                nxt = q if key(p) == key(tip) else p
                if end_idx == 0:
                    chain.append(nxt)
                else:
                    chain.insert(0, nxt)
        polylines.append(np.array(chain, dtype=complex))
    return polylines


def trace_real_preimage(cfg: TnTupleConfig, window=None, resolution: int = 256,
                        pell: PellPair | None = None):
    """Zero contours of Im T_n over the window (the preimage of the real
    axis), via marching squares on a resolution x resolution grid.

    T_n is evaluated through the certified polynomial pair, whose agreement
    with the theta-quotient representation is part of the Pell
    certification.  The real-axis segment itself is always included.
    """
    if resolution < 64:
        raise DomainError(f"resolution={resolution} must be at least 64")
    if window is None:
        xmax = max(1.4, abs(cfg.a3.real) + 0.4)
        ymax = max(1.0, abs(cfg.a3.imag) + 0.4)
        window = (-xmax, xmax, -ymax, ymax)
    x0, x1, y0, y1 = map(float, window)
    if not (x0 < -1.0 < 1.0 < x1 and y0 < cfg.a3.imag < y1 and
            x0 < cfg.a3.real < x1 and y0 < cfg.a4.imag < y1):
        raise DomainError(f"window {window} must contain [-1, 1] and the arc endpoints")
    if pell is None:
        pell = recover_pell(cfg)

    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    zz = xs[None, :] + 1j * ys[:, None]
    field = np.imag(_cheb.chebval(zz, pell.t_coeffs))

    def value_at(z):
        return float(np.imag(_cheb.chebval(z, pell.t_coeffs)))

    segments = []
    for iy in range(resolution - 1):
        fy0, fy1 = ys[iy], ys[iy + 1]
        for ix in range(resolution - 1):
            v = (field[iy, ix], field[iy, ix + 1],
                 field[iy + 1, ix + 1], field[iy + 1, ix])
            if (v[0] > 0) == (v[1] > 0) == (v[2] > 0) == (v[3] > 0):
                continue
            fx0, fx1 = xs[ix], xs[ix + 1]
            code_is_ambiguous = ((v[0] > 0) == (v[2] > 0)) and ((v[1] > 0) == (v[3] > 0))
            if code_is_ambiguous:
                # one level of subdivision around the saddle
                xm, ym = 0.5 * (fx0 + fx1), 0.5 * (fy0 + fy1)
                vc = value_at(complex(xm, ym))
                vb = value_at(complex(xm, fy0))
                vt = value_at(complex(xm, fy1))
                vl = value_at(complex(fx0, ym))
                vr = value_at(complex(fx1, ym))
                subcells = [
                    (fx0, xm, fy0, ym, (v[0], vb, vc, vl)),
                    (xm, fx1, fy0, ym, (vb, v[1], vr, vc)),
                    (xm, fx1, ym, fy1, (vc, vr, v[2], vt)),
                    (fx0, xm, ym, fy1, (vl, vc, vt, v[3])),
                ]
                for sx0, sx1, sy0, sy1, sv in subcells:
                    cv = value_at(complex(0.5 * (sx0 + sx1), 0.5 * (sy0 + sy1)))
                    segments.extend(_cell_segments(sx0, sx1, sy0, sy1, sv, cv))
            else:
                segments.extend(_cell_segments(fx0, fx1, fy0, fy1, v, 0.0))

    scale = 1e-6 * max(x1 - x0, y1 - y0)
    polylines = _chain_segments(segments, scale)
    polylines.append(np.array([complex(x0, 0.0), complex(x1, 0.0)]))
    return polylines
