import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupledmm.errors import CoincidingVariables, ConfigError, PartitionOutsideBox
from coupledmm.schur import (
    Partition,
    charpoly_product_via_schur,
    dual_partition,
    inverse_charpoly_truncated,
    partitions_in_box,
    schur_eval_bialternant,
    schur_eval_jt,
    schur_eval_jt_grid,
)

partitions = st.lists(st.integers(1, 6), max_size=4).map(
    lambda parts: Partition(sorted(parts, reverse=True))
)


def test_partition_validation():
    assert Partition([3, 1, 0, 0]).parts == (3, 1)
    assert Partition().weight == 0
    with pytest.raises(ConfigError):
        Partition([1, 2])
    with pytest.raises(ConfigError):
        Partition([2, -1])


@given(partitions)
def test_transpose_is_an_involution(lam):
    assert lam.transpose().transpose() == lam


@given(partitions)
def test_transpose_preserves_weight(lam):
    assert lam.transpose().weight == lam.weight


def test_dual_partition_involution():
    # the rotated complement of lam in the m x n box lives in the n x m box;
    # applying it again with the box dimensions swapped recovers lam
    lam = Partition([3, 1])
    dual = dual_partition(lam, 4, 3)
    assert dual == Partition([3, 2, 2, 1])
    assert dual_partition(dual, 3, 4) == lam
    with pytest.raises(PartitionOutsideBox):
        dual_partition(Partition([5]), 4, 3)


def test_partitions_in_box_count():
    # number of partitions in a w x h box is binom(w + h, h)
    for w, h in [(2, 2), (3, 2), (1, 4)]:
        got = sum(1 for _ in partitions_in_box(w, h))
        assert got == math.comb(w + h, h)


def test_schur_conventions():
    assert schur_eval_jt(Partition(), [1.0, 2.0]) == 1.0
    assert schur_eval_jt(Partition([1, 1, 1]), [1.0, 2.0]) == 0.0
    # s_(1) = e_1, s_(2) = h_2
    xs = [0.3, -1.2, 2.0]
    assert np.isclose(schur_eval_jt(Partition([1]), xs), sum(xs))
    want_h2 = sum(a * b for i, a in enumerate(xs) for b in xs[i:])
    assert np.isclose(schur_eval_jt(Partition([2]), xs), want_h2)


@settings(max_examples=60)
@given(partitions, st.integers(1, 4), st.integers(0, 10 ** 6))
def test_jt_matches_bialternant(lam, nvars, seed):
    rng = np.random.default_rng(seed)
    xs = rng.normal(size=nvars) + 1j * rng.normal(size=nvars)
    a = schur_eval_jt(lam, xs)
    b = schur_eval_bialternant(lam, xs)
    assert abs(a - b) <= 1e-9 * max(abs(a), abs(b), 1.0)


def test_bialternant_rejects_coinciding_variables():
    with pytest.raises(CoincidingVariables):
        schur_eval_bialternant(Partition([1]), [1.0, 1.0])


def test_jt_grid_matches_scalar():
    lam = Partition([2, 1])
    xs = [np.array([0.5, -1.0]), np.array([1.5, 0.25])]
    grid = schur_eval_jt_grid(lam, xs)
    for k in range(2):
        assert np.isclose(grid[k], schur_eval_jt(lam, [xs[0][k], xs[1][k]]).real)


def test_cauchy_box_identity():
    rng = np.random.default_rng(3)
    for _ in range(5):
        zs = rng.normal(size=2) + 1j * rng.normal(size=2)
        xs = rng.normal(size=3)
        direct = np.prod([np.prod(z - xs) for z in zs])
        expanded = charpoly_product_via_schur(zs, xs)
        assert abs(direct - expanded) < 1e-10 * max(abs(direct), 1.0)


def test_inverse_charpoly_expansion_converges():
    zs = [4.0 + 1j]
    xs = [0.3, -0.5]
    direct = 1.0 / np.prod([zs[0] - x for x in xs])
    approx = inverse_charpoly_truncated(zs, xs, max_weight=40)
    assert abs(direct - approx) < 1e-10 * abs(direct)
