import pytest

from coupledmm import bimoment_matrix, factorize, gaussian_reference_model, model_fingerprint


@pytest.fixture(scope="session")
def ref_model():
    return gaussian_reference_model(0.5)


@pytest.fixture(scope="session")
def ref_system(ref_model):
    bm = bimoment_matrix(ref_model, 13, 64, model_fingerprint(ref_model))
    return factorize(bm)
