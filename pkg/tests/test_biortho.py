import numpy as np
import pytest

from coupledmm.biortho import (
    cd_kernel,
    cd_kernel_wave,
    dual_cd_kernel,
    eval_P,
    eval_P_all,
    eval_Q_all,
    hilbert_dual_P,
    hilbert_dual_P_all,
    hilbert_dual_Q_all,
    hilbert_grids,
    kernel_trace,
    reproducing_residual,
    wave_phi,
    wave_psi,
)
from coupledmm.errors import (
    DegreeOutOfRange,
    PoleOnContour,
    RankOutOfRange,
    TruncationNotConverged,
)


def test_polynomials_are_monic(ref_system):
    for i in range(ref_system.degree + 1):
        assert np.isclose(ref_system.p_coeffs[i, i], 1.0, rtol=1e-12)
        assert np.isclose(ref_system.q_coeffs[i, i], 1.0, rtol=1e-12)
        if i < ref_system.degree:
            assert np.max(np.abs(ref_system.p_coeffs[i, i + 1:])) == 0.0


def test_coefficient_and_recurrence_evaluations_agree(ref_system):
    z = np.array([0.7, -1.3, 2.1])
    via_rec = eval_P_all(ref_system, z)
    for i in range(ref_system.degree + 1):
        via_coef = np.polyval(ref_system.p_coeffs[i, ::-1][
            ref_system.degree - i:], z)
        assert np.allclose(via_rec[i], via_coef, rtol=1e-9)


def test_biorthogonality_on_grid(ref_model, ref_system):
    g = hilbert_grids(ref_system, ref_model, 128)
    pv = eval_P_all(ref_system, g.x)
    qv = eval_Q_all(ref_system, g.y)
    gram = pv @ g.W @ qv.T
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < 1e-9 * np.max(np.abs(ref_system.norms))
    assert np.allclose(np.diag(gram), ref_system.norms, rtol=1e-10)


def test_wave_function_pairing_is_identity(ref_model, ref_system):
    g = hilbert_grids(ref_system, ref_model, 128)
    from coupledmm.biortho import _plain_kernel_matrix

    b = _plain_kernel_matrix(ref_model, g)
    n = 6
    phi = np.array([wave_phi(ref_system, ref_model, i, g.x) for i in range(n)])
    psi = np.array([wave_psi(ref_system, ref_model, j, g.y) for j in range(n)])
    gram = phi @ b @ psi.T
    assert np.allclose(gram, np.eye(n), atol=1e-9)


def test_cd_kernel_two_forms_agree(ref_model, ref_system):
    x = np.linspace(-2, 2, 5)
    for n in (1, 3, 6):
        a = cd_kernel(ref_system, ref_model, n, x, x[::-1])
        b = cd_kernel_wave(ref_system, ref_model, n, x, x[::-1])
        assert np.allclose(a, b, rtol=1e-10)


def test_kernel_rank_bounds(ref_model, ref_system):
    with pytest.raises(RankOutOfRange):
        cd_kernel(ref_system, ref_model, ref_system.degree + 2, 0.0, 0.0)
    with pytest.raises(DegreeOutOfRange):
        eval_P(ref_system, ref_system.degree + 1, 0.0)


def test_hilbert_dual_large_z_asymptotics(ref_model, ref_system):
    # ~P_j(z) ~ h_j / z^{j+1} as |z| -> infinity
    z = 60.0 + 5.0j
    pt = hilbert_dual_P_all(ref_system, ref_model, z)
    for j in range(4):
        want = ref_system.norms[j] / z ** (j + 1)
        assert abs(pt[j] - want) / abs(want) < 5e-3


def test_hilbert_dual_residue_consistency(ref_model, ref_system):
    # ~P_j is analytic off the axis; conjugate symmetry for the real model
    z = 2 + 1j
    a = hilbert_dual_P(ref_system, ref_model, 2, z)
    b = hilbert_dual_P(ref_system, ref_model, 2, np.conj(z))
    assert np.isclose(a, np.conj(b), rtol=1e-12)


def test_pole_on_contour_rejected(ref_model, ref_system):
    with pytest.raises(PoleOnContour):
        hilbert_dual_P_all(ref_system, ref_model, 0.1 + 0.001j)
    # far off the axis is fine
    hilbert_dual_P_all(ref_system, ref_model, 0.1 + 2.0j)


def test_dual_cd_kernel_tail_and_truncation(ref_model, ref_system):
    res = dual_cd_kernel(ref_system, ref_model, 2, 2 - 1j, 2 + 1j)
    assert np.isfinite(res.tail)
    assert res.truncation_degree == ref_system.degree
    # impossible tolerance must raise, not silently pass
    with pytest.raises(TruncationNotConverged):
        dual_cd_kernel(ref_system, ref_model, 2, 2 - 1j, 2 + 1j, tol=1e-30)
    # starting past the truncation bound gives the empty sum
    empty = dual_cd_kernel(ref_system, ref_model, ref_system.degree + 1,
                           2 - 1j, 2 + 1j, kmax=ref_system.degree)
    assert empty.value == 0.0 and empty.tail == 0.0


def test_kernel_trace_equals_rank(ref_model, ref_system):
    for n in (1, 4, 8):
        assert abs(kernel_trace(ref_system, ref_model, n) - n) < 1e-8


def test_reproducing_identity(ref_model, ref_system):
    from coupledmm.biortho import _cd_matrix

    g = hilbert_grids(ref_system, ref_model, 128)
    for n in (2, 5):
        resid = reproducing_residual(ref_system, ref_model, n, g)
        kmax = np.max(np.abs(_cd_matrix(ref_system, ref_model, n, g)))
        assert resid < 1e-8 * kmax
