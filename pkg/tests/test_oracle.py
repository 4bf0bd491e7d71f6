import math

import numpy as np
import pytest

from coupledmm.errors import GridTooLarge, NonFiniteObservable
from coupledmm.exact import exact_norms_float
from coupledmm.oracle import (
    ah_identity_check,
    brute_force_Z,
    brute_force_expectation,
    mc_expectation,
)
from coupledmm.quadrature import build_rule


def test_brute_force_Z_matches_norm_products(ref_model, ref_system):
    # the raw integral carries the n!^2 the normalized Z drops
    for n in (1, 2):
        est = brute_force_Z(ref_model, n, 32)
        want = math.factorial(n) ** 2 * np.prod(ref_system.norms[:n])
        assert abs(est.value - want) < 1e-9 * abs(want)
        assert est.error_bound < 1e-10


def test_brute_force_expectation_moments(ref_model):
    # <x_1^2> at n=1 from the coupled Gaussian: Sigma_xx = 1/(1 - c^2)
    def obs(left, right):
        return left[0] ** 2

    est = brute_force_expectation(ref_model, 1, obs, 32)
    assert abs(est.value - 1.0 / (1 - 0.25)) < 1e-10


def test_grid_too_large_guard(ref_model):
    def obs(left, right):
        return left[0]

    with pytest.raises(GridTooLarge):
        brute_force_expectation(ref_model, 4, obs, 16)
    with pytest.raises(GridTooLarge):
        brute_force_expectation(ref_model, 3, obs, 200)


def test_nonfinite_observable_rejected(ref_model):
    def obs(left, right):
        return np.full_like(np.asarray(left[0], float), np.inf)

    with pytest.raises(NonFiniteObservable):
        brute_force_expectation(ref_model, 1, obs, 16)


def test_mc_expectation_seed_determinism(ref_model):
    def obs(left, right):
        return left[0] * right[0]

    a = mc_expectation(ref_model, 2, obs, samples=20000, seed=42)
    b = mc_expectation(ref_model, 2, obs, samples=20000, seed=42)
    c = mc_expectation(ref_model, 2, obs, samples=20000, seed=43)
    assert a.value == b.value
    assert a.value != c.value
    assert a.seed == 42 and a.samples == 20000


def test_mc_agrees_with_quadrature_within_error(ref_model):
    def obs(left, right):
        return left[0] ** 2 + right[0] ** 2

    quad = brute_force_expectation(ref_model, 2, obs, 32)
    mc = mc_expectation(ref_model, 2, obs, samples=200000, seed=7)
    assert abs(mc.value - quad.value) < max(mc.error_bound, 1e-3)


def test_ah_identity_random_families(ref_model):
    rng = np.random.default_rng(5)
    rule = build_rule(ref_model.v_left, ref_model.domain_left, 24)
    for n in (1, 2, 3):
        cf = rng.normal(size=(n, 3))
        cg = rng.normal(size=(n, 3))
        fams_f = [(lambda x, c=cf[i]: np.polyval(c, x)) for i in range(n)]
        fams_g = [(lambda x, c=cg[i]: np.polyval(c, x)) for i in range(n)]
        assert ah_identity_check(fams_f, fams_g, n, rule) < 1e-10


def test_ah_identity_size_guard(ref_model):
    rule = build_rule(ref_model.v_left, ref_model.domain_left, 8)
    fams = [(lambda x, k=k: x ** k) for k in range(5)]
    with pytest.raises(GridTooLarge):
        ah_identity_check(fams, fams, 5, rule)


def test_oracle_agrees_with_exact_norms(ref_model):
    # independent cross-check: oracle Z_1 / n!^2 vs the rational pipeline h_0
    est = brute_force_Z(ref_model, 1, 48)
    h0 = exact_norms_float(ref_model, 0)[0]
    assert abs(est.value - h0) < 1e-12 * abs(h0)
