import numpy as np
import pytest

from coupledmm.biortho import eval_P_all, hilbert_dual_P_all, hilbert_grids
from coupledmm.correlators import (
    charpoly_average,
    charpoly_inverse_average_large,
    charpoly_inverse_average_small,
    mixed_pair_average,
    mixed_pair_m1_remark,
    pair_charpoly_average,
    pair_inverse_average_large,
    pair_inverse_average_small,
    partition_function,
    schur_average,
)
from coupledmm.errors import (
    CoincidingPoints,
    InsufficientDegreeBound,
    RankOutOfRange,
)
from coupledmm.schur import Partition


def test_partition_function_matches_determinant(ref_system):
    for n in range(1, 9):
        res = partition_function(ref_system, n)
        assert res.diagnostics["pivot_det_rel_diff"] < 1e-10
    assert partition_function(ref_system, 0).quantity == 1.0
    with pytest.raises(RankOutOfRange):
        partition_function(ref_system, ref_system.degree + 2)


def test_schur_average_conventions(ref_system):
    assert schur_average(ref_system, Partition(), Partition(), 3).quantity == 1.0
    # partition longer than N vanishes
    assert schur_average(ref_system, Partition([1, 1, 1]), Partition(), 2).quantity == 0.0
    with pytest.raises(InsufficientDegreeBound):
        schur_average(ref_system, Partition([20]), Partition(), 2)


def test_schur_average_single_row_matches_moments(ref_system):
    # <s_(2)(X_L)> at N=1 is N_{20}/N_{00} directly
    ent = ref_system.bimoments.entries
    want = ent[2, 0] / ent[0, 0]
    got = schur_average(ref_system, Partition([2]), Partition(), 1).quantity
    assert np.isclose(got, want, rtol=1e-12)


def test_charpoly_average_m1_is_the_monic_polynomial(ref_system):
    # <det(z - X_L)> at rank n is exactly P_n(z)
    for z in (2 + 1j, -0.7 + 0.2j):
        for n in (1, 2, 4):
            got = charpoly_average(ref_system, "L", [z], n).quantity
            want = eval_P_all(ref_system, np.array([z]))[n, 0]
            assert np.isclose(got, want, rtol=1e-11)


def test_charpoly_average_degree_guard(ref_system):
    zs = [1 + 1j * k for k in range(6)]
    with pytest.raises(InsufficientDegreeBound):
        charpoly_average(ref_system, "L", zs, ref_system.degree)


def test_inverse_small_m1_is_the_scaled_dual(ref_model, ref_system):
    # M=1: <1/det(z - X_L)> = ~P_{n-1}(z) / h_{n-1}
    z = 2 + 1j
    n = 3
    got = charpoly_inverse_average_small(ref_system, ref_model, "L", [z], n).quantity
    want = hilbert_dual_P_all(ref_system, ref_model, z)[n - 1] / ref_system.norms[n - 1]
    assert np.isclose(got, want, rtol=1e-12)


def test_inverse_branches_agree_at_m_equals_n(ref_model, ref_system):
    zs = [2 + 1j, 1.5 - 2j]
    a = charpoly_inverse_average_small(ref_system, ref_model, "L", zs, 2).quantity
    b = charpoly_inverse_average_large(ref_system, ref_model, "L", zs, 2).quantity
    assert abs(a - b) < 1e-8 * abs(a)


def test_branch_domain_guards(ref_model, ref_system):
    zs = [2 + 1j, 3 + 2j]
    with pytest.raises(RankOutOfRange):
        charpoly_inverse_average_small(ref_system, ref_model, "L", zs, 1)
    with pytest.raises(RankOutOfRange):
        charpoly_inverse_average_large(ref_system, ref_model, "L", [2 + 1j], 2)


def test_symmetric_model_side_symmetry(ref_model, ref_system):
    # V_L = V_R and symmetric kernel: left and right averages coincide
    z = 1.2 + 0.8j
    a = charpoly_average(ref_system, "L", [z], 3).quantity
    b = charpoly_average(ref_system, "R", [z], 3).quantity
    assert np.isclose(a, b, rtol=1e-10)


def test_pair_average_requires_equal_lengths(ref_model, ref_system):
    with pytest.raises(CoincidingPoints):
        pair_charpoly_average(ref_system, ref_model, [1 + 1j, 2 + 1j], [1 - 1j], 2)


def test_pair_average_log_scale_roundtrip(ref_model, ref_system):
    res = pair_charpoly_average(ref_system, ref_model, [2 + 1j], [1 - 0.5j], 2)
    # value carries the phase, log_scale the magnitude
    assert np.isclose(abs(res.value), 1.0, rtol=1e-12)
    assert np.isfinite(res.log_scale)


def test_inverse_pair_small_reports_tail(ref_model, ref_system):
    res = pair_inverse_average_small(ref_system, ref_model, [2 + 1j], [2 - 1j], 2)
    assert "tail" in res.diagnostics and res.diagnostics["tail"] >= 0.0


def test_inverse_pair_branches_agree_at_m_equals_n(ref_model, ref_system):
    z, w = 2 + 1j, 1 - 1.5j
    a = pair_inverse_average_small(ref_system, ref_model, [z], [w], 1).quantity
    b = pair_inverse_average_large(ref_system, ref_model, [z], [w], 1).quantity
    assert abs(a - b) < 1e-6 * abs(a)


def test_inverse_pair_large_reports_condition(ref_model, ref_system):
    res = pair_inverse_average_large(ref_system, ref_model,
                                     [2 + 1j, 3 + 2j], [1 - 1j, 2 - 2j], 1)
    assert res.diagnostics["cond"] >= 1.0


def test_mixed_pair_general_matches_remark(ref_model, ref_system):
    g = hilbert_grids(ref_system, ref_model, 128)
    for n in (1, 2, 3):
        z, w = 1.5 + 0.0j, 2 + 1j
        a = mixed_pair_average(ref_system, ref_model, [z], [w], n, grids=g).quantity
        b = mixed_pair_m1_remark(ref_system, ref_model, z, w, n, grids=g).quantity
        assert abs(a - b) < 1e-10 * max(abs(a), 1e-30)


def test_mixed_pair_orientations_coincide_for_symmetric_model(ref_model, ref_system):
    z, w = 1.5 + 0.5j, 2 + 1j
    a = mixed_pair_average(ref_system, ref_model, [z], [w], 2, orientation="L").quantity
    b = mixed_pair_average(ref_system, ref_model, [w], [z], 2, orientation="R").quantity
    assert np.isclose(a, b, rtol=1e-9)
