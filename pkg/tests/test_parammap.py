"""Endpoint parametrization tests: forward/inverse bijection, the unit-circle
dichotomy, monotonicity and limit behaviour, and the density construction.
"""

import math

import numpy as np
import pytest

from pellarcs import (
    DegenerateError,
    DomainError,
    Endpoint,
    ParamPoint,
    circle_side,
    forward,
    inverse,
    make_context,
    nearest_tuple,
)
from pellarcs.elliptic import jacobi_real
from pellarcs.parammap import _forward_values, density_constant

SQRT2_INV = 1.0 / math.sqrt(2.0)


def raw_forward(k, lam):
    """Forward map without the open-interval guards; oracle for reflections."""
    ctx = make_context(k)
    sn, cn, dn = jacobi_real(2.0 * lam * ctx.K, ctx)
    return cn / dn**2, ctx.k * ctx.k_prime * sn**2 / dn**2


class TestForward:
    def test_half_argument_point(self):
        # 2 lam K = K/2, where the half-argument closed forms apply and
        # beta = sqrt(2) - 1 exactly
        e = forward(ParamPoint(SQRT2_INV, 0.25))
        assert abs(e.alpha - 0.9101797) < 1e-7
        assert abs(e.beta - (math.sqrt(2.0) - 1.0)) < 1e-13
        assert abs(e.beta - 0.4142136) < 1e-7

    def test_small_k_limit(self):
        e = forward(ParamPoint(1e-6, 1.0 / 3.0))
        assert abs(e.alpha - math.cos(math.pi / 3.0)) < 1e-5
        assert e.beta < 1e-5

    def test_reflection_lambda_to_one_minus(self):
        a1, b1 = raw_forward(0.6, 0.2)
        a2, b2 = raw_forward(0.6, 0.8)
        assert abs(a1 + a2) < 1e-13
        assert abs(b1 - b2) < 1e-13

    def test_validation(self):
        with pytest.raises(DomainError):
            ParamPoint(0.5, 0.5)
        with pytest.raises(DomainError):
            ParamPoint(1.0, 0.2)
        with pytest.raises(DomainError):
            Endpoint(0.0, 0.3)


class TestInverse:
    def test_round_trip_spec_point(self):
        p = inverse(forward(ParamPoint(0.3, 0.2)))
        assert abs(p.k - 0.3) < 1e-9
        assert abs(p.lam - 0.2) < 1e-9

    def test_round_trips_random(self):
        rng = np.random.default_rng(17)
        worst_fwd = worst_inv = 0.0
        for _ in range(500):
            k = rng.uniform(0.05, 0.95)
            lam = rng.uniform(0.02, 0.48)
            e = forward(ParamPoint(k, lam))
            p = inverse(e)
            worst_inv = max(worst_inv, abs(p.k - k), abs(p.lam - lam))
            e2 = forward(p)
            worst_fwd = max(worst_fwd, abs(e2.alpha - e.alpha), abs(e2.beta - e.beta))
        assert worst_inv < 1e-8
        assert worst_fwd < 1e-8

    def test_on_circle_recovers_self_dual_modulus(self):
        e = forward(ParamPoint(SQRT2_INV, 0.25))
        p = inverse(e)
        assert abs(p.k - SQRT2_INV) < 1e-7

    def test_near_real_axis(self):
        p = inverse(Endpoint(0.5, 1e-6))
        assert abs(p.lam - 1.0 / 3.0) < 1e-3
        assert p.k < 0.01


class TestCircleDichotomy:
    def test_classification_tracks_modulus(self):
        for k in np.linspace(0.05, 0.95, 30):
            for lam in np.linspace(0.05, 0.45, 9):
                side = circle_side(forward(ParamPoint(float(k), float(lam))))
                if k < SQRT2_INV - 1e-9:
                    assert side == "inside"
                elif k > SQRT2_INV + 1e-9:
                    assert side == "outside"

    def test_on_circle(self):
        e = forward(ParamPoint(SQRT2_INV, 0.37))
        assert abs(e.alpha**2 + e.beta**2 - 1.0) < 1e-12
        assert circle_side(e) == "on"

    def test_spec_examples(self):
        assert circle_side(forward(ParamPoint(0.5, 0.25))) == "inside"
        assert circle_side(forward(ParamPoint(0.9, 0.25))) == "outside"


class TestMonotonicityAndLimits:
    def test_alpha_increasing_in_k(self):
        for lam in (0.1, 0.25, 0.4):
            vals = [_forward_values(float(k), lam)[0]
                    for k in np.linspace(0.05, 0.95, 100)]
            assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_beta_increasing_quarter(self):
        # at lam = 1/4 the closed form beta = k/(1+k') is globally increasing
        vals = [_forward_values(float(k), 0.25)[1]
                for k in np.linspace(0.05, 0.95, 100)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        ctx = make_context(0.63)
        assert abs(_forward_values(0.63, 0.25)[1] - 0.63 / (1 + ctx.k_prime)) < 1e-13

    def test_beta_increasing_small_lambda_moderate_k(self):
        # for lam < 1/4 the claimed global monotonicity fails near k = 1
        # (beta -> 0 there); it does hold on the moderate-modulus range
        for lam in (0.1, 0.2):
            vals = [_forward_values(float(k), lam)[1]
                    for k in np.linspace(0.05, 0.9, 80)]
            assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_beta_limits_at_k_to_one(self):
        assert abs(_forward_values(1.0 - 1e-8, 0.25)[1] - 1.0) < 1e-3
        assert _forward_values(1.0 - 1e-8, 0.1)[1] < 0.02
        assert _forward_values(1.0 - 1e-8, 0.4)[1] > 50.0


class TestDensity:
    def test_exact_rational_parameter(self):
        e = forward(ParamPoint(0.6, 3.0 / 10.0))
        res = nearest_tuple(e, 10)
        assert res.m == 3
        assert abs(res.alpha_star - e.alpha) < 1e-9
        assert abs(res.beta_star - e.beta) < 1e-9

    def test_spec_bound_example(self):
        e = forward(ParamPoint(0.6, 0.27))
        res = nearest_tuple(e, 10)
        assert res.m == 3
        dist = math.hypot(e.alpha - res.alpha_star, e.beta - res.beta_star)
        ctx = make_context(0.6)
        a_const = 2 * ctx.K / ctx.k_prime**3 + 4 * 0.6 * ctx.K / ctx.k_prime**2
        assert abs(res.A - a_const) < 1e-12
        assert dist <= res.bound

    def test_distance_shrinks_with_n(self):
        e = forward(ParamPoint(0.6, 0.27))
        d10 = nearest_tuple(e, 10)
        d1000 = nearest_tuple(e, 1000)
        dist10 = math.hypot(e.alpha - d10.alpha_star, e.beta - d10.beta_star)
        dist1000 = math.hypot(e.alpha - d1000.alpha_star, e.beta - d1000.beta_star)
        assert dist1000 < dist10 / 50.0

    def test_bound_holds_on_random_samples(self):
        rng = np.random.default_rng(23)
        checked = 0
        while checked < 200:
            k = rng.uniform(0.05, 0.95)
            lam = rng.uniform(0.02, 0.48)
            n = int(rng.integers(2, 65))
            e = forward(ParamPoint(k, lam))
            try:
                res = nearest_tuple(e, n)
            except DegenerateError:
                continue
            dist = math.hypot(e.alpha - res.alpha_star, e.beta - res.beta_star)
            assert dist <= res.bound
            assert abs(res.bound - res.A / n) < 1e-15 * res.A
            assert 0 < res.m < n / 2
            checked += 1

    def test_degenerate_is_reported(self):
        e = forward(ParamPoint(0.5, 0.02))
        with pytest.raises(DegenerateError):
            nearest_tuple(e, 3)  # nearest fraction is 0/3
        e = forward(ParamPoint(0.5, 0.48))
        with pytest.raises(DegenerateError):
            nearest_tuple(e, 2)  # nearest fraction is 1/2

    def test_density_constant(self):
        ctx = make_context(0.6)
        expected = 2 * ctx.K / ctx.k_prime**3 + 4 * 0.6 * ctx.K / ctx.k_prime**2
        assert abs(density_constant(ctx) - expected) == 0.0
