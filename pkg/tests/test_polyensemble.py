import numpy as np
import pytest

from coupledmm.biortho import cd_kernel
from coupledmm.correlators import charpoly_average, partition_function, schur_average
from coupledmm.errors import ConfigError, UnsupportedForEnsemble
from coupledmm.polyensemble import (
    FunctionFamily,
    monomial_family,
    pe_cd_kernel,
    pe_charpoly_average,
    pe_factorize,
    pe_mixed_moments,
    pe_pair_correlator,
    pe_partition_function,
    pe_schur_average,
    shifted_exponential_family,
)
from coupledmm.schur import Partition

D = 8


@pytest.fixture(scope="module")
def mono_system(ref_model):
    fam = monomial_family(ref_model, "L", D + 1)
    return pe_factorize(pe_mixed_moments(ref_model, fam, D, order=64))


def test_family_validation(ref_model):
    with pytest.raises(ConfigError):
        FunctionFamily("L", [])
    with pytest.raises(ConfigError):
        FunctionFamily("X", [lambda x: x])
    # linearly dependent probes fail the certificate
    with pytest.raises(ConfigError):
        FunctionFamily("L", [lambda x: x, lambda x: 2.0 * x])


def test_monomial_family_norms_reduce(ref_model, ref_system, mono_system):
    assert np.allclose(mono_system.norms, ref_system.norms[:D + 1], rtol=1e-10)


def test_partition_function_reduction(ref_model, ref_system, mono_system):
    for n in (1, 3, 6):
        a = pe_partition_function(mono_system, n).quantity
        b = partition_function(ref_system, n).quantity
        assert np.isclose(a, b, rtol=1e-10)


def test_cd_kernel_reduction(ref_model, ref_system, mono_system):
    for x, y in [(0.3, -0.7), (1.1, 0.4)]:
        a = pe_cd_kernel(mono_system, ref_model, 4, x, y)
        b = cd_kernel(ref_system, ref_model, 4, x, y)
        assert np.isclose(a, b, rtol=1e-10)


def test_charpoly_reduction(ref_model, ref_system, mono_system):
    z = 2 + 1j
    a = pe_charpoly_average(mono_system, [z], 3).quantity
    b = charpoly_average(ref_system, "R", [z], 3).quantity
    assert np.isclose(a, b, rtol=1e-10)


def test_schur_reduction(ref_model, ref_system, mono_system):
    lam = Partition([2])
    a = pe_schur_average(mono_system, lam, Partition(), 2).quantity
    b = schur_average(ref_system, Partition(), lam, 2).quantity
    assert np.isclose(a, b, rtol=1e-9)


def test_family_side_schur_rejected(mono_system):
    with pytest.raises(UnsupportedForEnsemble):
        pe_schur_average(mono_system, Partition([1]), Partition([1]), 2)


def test_pair_correlators_rejected():
    with pytest.raises(UnsupportedForEnsemble):
        pe_pair_correlator()


def test_shifted_exponential_family_factorizes(ref_model):
    shifts = np.linspace(-1.0, 1.0, 5)
    fam = shifted_exponential_family("L", shifts, decay=0.5)
    sys_ = pe_factorize(pe_mixed_moments(ref_model, fam, 4, order=64))
    assert np.all(np.isfinite(sys_.norms))
    assert np.all(np.abs(sys_.norms) > 0)
    z = pe_partition_function(sys_, 3)
    assert z.diagnostics["pivot_det_rel_diff"] < 1e-9
