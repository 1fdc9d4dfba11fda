"""Elliptic-core tests: contexts, theta functions, sn/cn/dn, zn, acn.

Oracles: scipy's complete integrals, mpmath's jtheta/ellipfun at 30 digits,
the Gamma-function closed form of K(1/sqrt 2), and the half/quarter-period
closed forms.
"""

import math

import mpmath as mp
import numpy as np
import pytest
from scipy import special as sp

from pellarcs import (
    DomainError,
    PoleError,
    invert_cn,
    jacobi_elliptic,
    jacobi_zn,
    make_context,
    theta,
)
from pellarcs.elliptic import jacobi_real

mp.mp.dps = 30

SQRT2_INV = 1.0 / math.sqrt(2.0)


def mp_theta(kind, u, ctx):
    v = mp.mpc(u) * mp.pi / (2 * ctx.K)
    index = {"H": 1, "H1": 2, "Theta1": 3, "Theta": 4}[kind]
    return complex(mp.jtheta(index, v, ctx.q))


def mp_zn(u, k):
    """Independent zeta oracle: E(am u) - u E/K at 30 digits."""
    m = mp.mpf(k) ** 2
    phi = mp.asin(mp.ellipfun("sn", u, m))
    return float(mp.ellipe(phi, m) - u * mp.ellipe(m) / mp.ellipk(m))


class TestContext:
    def test_k_half_sqrt2_selfdual(self):
        # K = K' by k = k' symmetry; closed form Gamma(1/4)^2 / (4 sqrt(pi))
        ctx = make_context(SQRT2_INV)
        oracle = math.gamma(0.25) ** 2 / (4.0 * math.sqrt(math.pi))
        assert abs(ctx.K - oracle) < 1e-12
        assert abs(ctx.K - 1.8540746773) < 1e-9
        assert ctx.K == ctx.K_prime

    def test_small_k_limit(self):
        ctx = make_context(1e-8)
        assert abs(ctx.K - math.pi / 2) < 1e-12

    def test_k99_against_scipy(self):
        ctx = make_context(0.99)
        assert abs(ctx.K - 3.3566) < 5e-4
        assert abs(ctx.K_prime - 1.5786) < 5e-4
        assert abs(ctx.K - sp.ellipk(0.99**2)) < 1e-13
        assert abs(ctx.E - sp.ellipe(0.99**2)) < 1e-13

    def test_field_identities(self):
        for k in (0.1, 0.4, SQRT2_INV, 0.9, 0.999):
            ctx = make_context(k)
            assert abs(ctx.k**2 + ctx.k_prime**2 - 1.0) < 1e-14
            assert 0.0 < ctx.q < 1.0

    def test_legendre_relation(self):
        for k in np.linspace(0.02, 0.98, 25):
            ctx = make_context(float(k))
            legendre = ctx.E * ctx.K_prime + ctx.E_prime * ctx.K - ctx.K * ctx.K_prime
            assert abs(legendre - math.pi / 2) < 1e-12

    def test_nome_increasing_in_k(self):
        qs = [make_context(float(k)).q for k in np.linspace(0.05, 0.95, 40)]
        assert all(b > a for a, b in zip(qs, qs[1:]))

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            make_context(0.0)
        with pytest.raises(DomainError):
            make_context(1.0)
        with pytest.raises(DomainError):
            make_context(0.5, tol=1e-3)


class TestTheta:
    def test_against_mpmath_grid(self):
        rng = np.random.default_rng(7)
        for k in (0.3, 0.6, 0.95):
            ctx = make_context(k)
            for _ in range(25):
                u = complex(rng.uniform(-4, 4), rng.uniform(-2, 2))
                for kind in ("H", "H1", "Theta", "Theta1"):
                    got = theta(kind, u, ctx)
                    want = mp_theta(kind, u, ctx)
                    assert abs(got - want) < 1e-13 * max(1.0, abs(want))

    def test_parities(self):
        ctx = make_context(SQRT2_INV)
        assert theta("H", 0.0, ctx) == 0.0
        u = 0.3 + 0.2j
        assert abs(theta("Theta1", -u, ctx) - theta("Theta1", u, ctx)) < 1e-14
        assert abs(theta("H", -u, ctx) + theta("H", u, ctx)) < 1e-14
        assert abs(theta("H1", -u, ctx) - theta("H1", u, ctx)) < 1e-14
        assert abs(theta("Theta", -u, ctx) - theta("Theta", u, ctx)) < 1e-14

    def test_quarter_shift_identity(self):
        # H(u + iK') = i q^(-1/4) exp(-i pi u / (2K)) Theta(u)
        ctx = make_context(0.6)
        u = 0.4
        lhs = theta("H", u + 1j * ctx.K_prime, ctx)
        rhs = 1j * ctx.q ** (-0.25) * np.exp(-1j * np.pi * u / (2 * ctx.K)) \
            * theta("Theta", u, ctx)
        assert abs(lhs - rhs) < 1e-11

    def test_scalar_and_array_paths_agree(self):
        ctx = make_context(0.8)
        us = np.array([0.1 + 0.2j, -1.4 + 0.9j, 3.0 - 1.1j])
        for kind in ("H", "H1", "Theta", "Theta1"):
            arr = theta(kind, us, ctx)
            for i, u in enumerate(us):
                assert abs(arr[i] - theta(kind, complex(u), ctx)) < 1e-14

    def test_far_argument_rejected(self):
        ctx = make_context(0.6)
        with pytest.raises(DomainError):
            theta("H", 2000j, ctx)


class TestJacobiFunctions:
    def test_defining_values(self):
        ctx = make_context(0.8)
        sn, cn, dn = jacobi_elliptic(0.0, ctx)
        assert abs(sn) < 1e-15 and abs(cn - 1) < 1e-14 and abs(dn - 1) < 1e-14
        sn, cn, dn = jacobi_elliptic(ctx.K, ctx)
        assert abs(sn - 1) < 1e-13
        assert abs(cn) < 1e-13
        assert abs(dn - ctx.k_prime) < 1e-13

    def test_half_period_closed_form(self):
        ctx = make_context(SQRT2_INV)
        kp = ctx.k_prime
        sn, cn, dn = jacobi_elliptic(ctx.K / 2, ctx)
        assert abs(sn - 1 / math.sqrt(1 + kp)) < 1e-13
        assert abs(cn - math.sqrt(kp / (1 + kp))) < 1e-13
        assert abs(dn - math.sqrt(kp)) < 1e-13
        assert abs(sn - 0.76537) < 1e-5
        assert abs(cn - 0.64359) < 1e-5
        assert abs(dn - 0.84090) < 1e-5

    def test_identities_on_complex_grid(self):
        for k in (0.2, 0.6, 0.95):
            ctx = make_context(k)
            xs = np.linspace(0.0, ctx.K, 12)
            ys = np.linspace(0.0, 0.85 * ctx.K_prime, 9)
            uu = (xs[None, :] + 1j * ys[:, None]).ravel()
            sn, cn, dn = jacobi_elliptic(uu, ctx)
            assert np.max(np.abs(sn**2 + cn**2 - 1)) < 1e-11
            assert np.max(np.abs(dn**2 + k * k * sn**2 - 1)) < 1e-11

    def test_against_mpmath(self):
        rng = np.random.default_rng(11)
        k = 0.6
        ctx = make_context(k)
        for _ in range(20):
            u = complex(rng.uniform(-2, 2), rng.uniform(-1.5, 1.5))
            try:
                sn, cn, dn = jacobi_elliptic(u, ctx)
            except PoleError:
                continue
            assert abs(sn - complex(mp.ellipfun("sn", u, k * k))) < 1e-12
            assert abs(cn - complex(mp.ellipfun("cn", u, k * k))) < 1e-12
            assert abs(dn - complex(mp.ellipfun("dn", u, k * k))) < 1e-12

    def test_pole_rejected(self):
        ctx = make_context(0.6)
        with pytest.raises(PoleError):
            jacobi_elliptic(1j * ctx.K_prime, ctx)
        with pytest.raises(PoleError):
            jacobi_elliptic(2 * ctx.K + 1j * ctx.K_prime + 1e-12, ctx)

    def test_derivative_bound_lemma(self):
        # d/dmu of cn(2 mu K)/dn^2 = 2K sn (k^2 cn^2 - k'^2)/dn^3 and of
        # sn^2/dn^2 = 4K sn cn/dn^3, both against central differences and
        # bounded in magnitude by 2K/k'^3 resp. 4K/k'^3.  (Differentiating
        # cd * nd by the chain rule gives the cn^2 form; the additive
        # k^2 cn + k'^2 variant fails finite differences outright.)
        for k in (0.3, 0.7, 0.95):
            ctx = make_context(k)
            kp = ctx.k_prime
            for mu in (0.1, 0.25, 0.4):
                sn, cn, dn = jacobi_real(2 * mu * ctx.K, ctx)
                d_alpha = 2 * ctx.K * sn * (k * k * cn * cn - kp * kp) / dn**3
                d_srat = 4 * ctx.K * sn * cn / dn**3
                h = 1e-6

                def alpha_of(mm):
                    s, c, d = jacobi_real(2 * mm * ctx.K, ctx)
                    return c / d**2

                def srat_of(mm):
                    s, c, d = jacobi_real(2 * mm * ctx.K, ctx)
                    return s * s / d**2

                fd_alpha = (alpha_of(mu + h) - alpha_of(mu - h)) / (2 * h)
                fd_srat = (srat_of(mu + h) - srat_of(mu - h)) / (2 * h)
                assert abs(fd_alpha - d_alpha) < 1e-6 * max(1.0, abs(d_alpha))
                assert abs(fd_srat - d_srat) < 1e-6 * max(1.0, abs(d_srat))
                assert abs(d_alpha) <= 2 * ctx.K / kp**3 + 1e-12
                assert abs(d_srat) <= 4 * ctx.K / kp**3 + 1e-12


class TestZeta:
    def test_zeros(self):
        ctx = make_context(0.8)
        assert jacobi_zn(0.0, ctx) == 0.0
        assert abs(jacobi_zn(ctx.K, ctx)) < 1e-15

    def test_periodicity(self):
        ctx = make_context(0.8)
        for u in (0.3, 1.1, 2.0):
            assert abs(jacobi_zn(u + 2 * ctx.K, ctx) - jacobi_zn(u, ctx)) < 1e-13

    def test_against_mpmath(self):
        for k in (0.2, 0.8, 0.99):
            ctx = make_context(k)
            for u in np.linspace(0.05, ctx.K - 0.05, 9):
                assert abs(jacobi_zn(float(u), ctx) - mp_zn(float(u), k)) < 1e-13

    def test_duplication_formula(self):
        # zn(u) = (zn(2u) + k^2 sn(2u)(1 - cn(2u))/(1 + dn(2u))) / 2
        k = 0.8
        ctx = make_context(k)
        u = 0.7
        sn2, cn2, dn2 = jacobi_real(2 * u, ctx)
        rhs = 0.5 * (jacobi_zn(2 * u, ctx) + k * k * sn2 * (1 - cn2) / (1 + dn2))
        assert abs(jacobi_zn(u, ctx) - rhs) < 1e-11

    def test_inequality_lemma(self):
        # k^2 k'^2/(1+k'^2) * sn cn/dn <= zn <= k^2/(1+k'^2) * sn cn/dn,
        # equality only at u = 0 and u = K
        for k in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.99]:
            ctx = make_context(k)
            us = np.linspace(0.0, ctx.K, 200)
            sn, cn, dn = jacobi_real(us, ctx)
            zn = jacobi_zn(us, ctx)
            base = sn * cn / dn
            lo = k * k * ctx.k_prime**2 / (1 + ctx.k_prime**2) * base
            hi = k * k / (1 + ctx.k_prime**2) * base
            assert np.all(zn[1:-1] - lo[1:-1] > 1e-12)
            assert np.all(hi[1:-1] - zn[1:-1] > 1e-12)
            assert abs(zn[0] - lo[0]) < 1e-12 and abs(zn[0] - hi[0]) < 1e-12
            assert abs(zn[-1] - lo[-1]) < 1e-12 and abs(zn[-1] - hi[-1]) < 1e-12


class TestInvertCn:
    def test_exact_endpoints(self):
        ctx = make_context(0.6)
        assert invert_cn(1.0, ctx) == 0.0
        assert abs(invert_cn(0.0, ctx) - ctx.K) < 1e-12
        assert abs(invert_cn(-1.0, ctx) - 2 * ctx.K) < 1e-12

    def test_round_trip_rectangle(self):
        rng = np.random.default_rng(5)
        for k in (0.3, 0.6, 0.9):
            ctx = make_context(k)
            for _ in range(40):
                u = complex(rng.uniform(0.01, ctx.K - 0.01),
                            rng.uniform(0.01, ctx.K_prime - 0.05))
                _, w, _ = jacobi_elliptic(u, ctx)
                u_back = invert_cn(w, ctx)
                assert abs(u_back - u) < 1e-10

    def test_spec_round_trip_example(self):
        ctx = make_context(0.6)
        u = 0.5 + 0.3j
        _, w, _ = jacobi_elliptic(u, ctx)
        assert abs(invert_cn(w, ctx) - u) < 1e-10

    def test_outside_quadrant_values(self):
        # values outside the lower-right quadrant are reached via symmetry
        ctx = make_context(0.6)
        for w in (0.4 + 0.7j, -0.8 + 0.2j, -0.3 - 1.2j, 2.5 + 1.0j):
            u = invert_cn(w, ctx)
            _, cn_u, _ = jacobi_elliptic(u, ctx)
            assert abs(cn_u - w) < 1e-10 * max(1.0, abs(w))
