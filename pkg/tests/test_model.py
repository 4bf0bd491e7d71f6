import numpy as np
import pytest

from coupledmm.errors import (
    CoincidingPoints,
    ConfigError,
    DivergentCoupling,
    DomainPoleOverlap,
    InvalidPotential,
)
from coupledmm.model import (
    CauchyShift,
    ExpProduct,
    ModelSpec,
    PolynomialPotential,
    SpectralPoints,
    Tabulated,
    gaussian_reference_model,
    model_fingerprint,
    validate_model,
)


def test_potential_evaluation_and_derivative():
    v = PolynomialPotential([1.0, -2.0, 0.0, 3.0])
    assert v(2.0) == 1.0 - 4.0 + 24.0
    dv = v.deriv()
    assert dv.coeffs == (-2.0, 0.0, 9.0)
    # vectorized and complex
    x = np.array([0.0, 1.0, -1.0])
    assert np.allclose(v(x), [1.0, 2.0, 0.0])
    assert np.isclose(v(1j), 1.0 - 2j - 3j)


def test_trailing_zero_coefficients_are_canonicalized():
    assert PolynomialPotential([0, 0, 0.5, 0, 0]).coeffs == (0.0, 0.0, 0.5)
    assert PolynomialPotential([0.0]).coeffs == (0.0,)


def test_odd_potential_not_confining_on_real_line():
    with pytest.raises(InvalidPotential):
        PolynomialPotential([0, 0, 0, 1.0]).check_confining((None, None))
    with pytest.raises(InvalidPotential):
        PolynomialPotential([0, 0, -0.5]).check_confining((None, None))
    # fine on the half line if it grows to the right
    PolynomialPotential([0, 1.0]).check_confining((0.0, None))


def test_divergent_coupling_rejected():
    v = PolynomialPotential([0, 0, 0.5])
    with pytest.raises(DivergentCoupling):
        validate_model(ModelSpec(v, v, ExpProduct(1.0)))
    validate_model(ModelSpec(v, v, ExpProduct(0.99)))


def test_cauchy_kernel_needs_positive_support():
    vq = PolynomialPotential([0, 0, 0.5])   # confining on any domain
    with pytest.raises(DomainPoleOverlap):
        validate_model(ModelSpec(vq, vq, CauchyShift(),
                                 (None, None), (0.0, None)))
    v = PolynomialPotential([0, 1.0])
    validate_model(ModelSpec(v, v, CauchyShift(), (0.5, None), (0.5, None)))


def test_spectral_points_reject_duplicates():
    with pytest.raises(CoincidingPoints):
        SpectralPoints([1 + 1j, 2.0, 1 + 1j])
    pts = SpectralPoints([1 + 1j, 2.0])
    assert len(pts) == 2


def test_tabulated_kernel_validation():
    with pytest.raises(ConfigError):
        Tabulated([0.0, 0.0], [0.0, 1.0], [[1, 1], [1, 1]])
    tab = Tabulated([0.0, 1.0], [0.0, 1.0], [[1.0, 2.0], [3.0, 4.0]])
    assert np.isclose(tab(0.5, 0.5), 2.5)
    with pytest.raises(ConfigError):
        tab.log_on_grid(np.array([0.5]), np.array([0.5]))


def test_fingerprint_is_stable_and_model_sensitive():
    m1 = gaussian_reference_model(0.5)
    m2 = gaussian_reference_model(0.5)
    m3 = gaussian_reference_model(0.25)
    assert model_fingerprint(m1) == model_fingerprint(m2)
    assert model_fingerprint(m1) != model_fingerprint(m3)


def test_reference_model_is_symmetric():
    assert gaussian_reference_model(0.5).is_symmetric
