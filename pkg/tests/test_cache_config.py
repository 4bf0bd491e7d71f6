import json

import numpy as np
import pytest

from coupledmm.cache import (
    cache_path,
    load_bimoments,
    load_or_build,
    save_bimoments,
)
from coupledmm.config import load_config, parse_config
from coupledmm.errors import CacheError, ConfigError
from coupledmm.model import gaussian_reference_model, model_fingerprint
from coupledmm.quadrature import bimoment_matrix

BASE_CONFIG = {
    "model": {
        "v_left": [0, 0, 0.5],
        "v_right": [0, 0, 0.5],
        "kernel": {"type": "exp_product", "c": 0.5},
    },
    "compute": {"degree": 6, "order": 32},
    "task": {"correlator": "charpoly_average", "N": 2, "M": 1,
             "z_points": [[2.0, 1.0]]},
}


@pytest.fixture(scope="module")
def model_and_fp():
    m = gaussian_reference_model(0.5)
    return m, model_fingerprint(m)


def test_cache_roundtrip(tmp_path, model_and_fp):
    m, fp = model_and_fp
    bm = bimoment_matrix(m, 6, 32, fp)
    path = cache_path(str(tmp_path), fp, 6, 32)
    save_bimoments(path, bm)
    loaded = load_bimoments(path, fp)
    assert np.array_equal(loaded.entries, bm.entries)
    assert loaded.degree == 6 and loaded.order == 32
    assert loaded.fingerprint == fp


def test_cache_miss_then_hit(tmp_path, model_and_fp):
    m, fp = model_and_fp
    _, sys1, hit1 = load_or_build(str(tmp_path), m, fp, 6, 32)
    _, sys2, hit2 = load_or_build(str(tmp_path), m, fp, 6, 32)
    assert not hit1 and hit2
    assert np.allclose(sys1.norms, sys2.norms, rtol=0, atol=0)


def test_corrupted_cache_detected_and_recomputed(tmp_path, model_and_fp):
    m, fp = model_and_fp
    bm = bimoment_matrix(m, 6, 32, fp)
    path = cache_path(str(tmp_path), fp, 6, 32)
    save_bimoments(path, bm)
    blob = bytearray(open(path, "rb").read())
    # corrupt a byte inside the stored array payload, not zip bookkeeping
    payload = bm.entries.tobytes()
    at = blob.find(payload)
    assert at >= 0
    blob[at + len(payload) // 2] ^= 0xFF
    open(path, "wb").write(bytes(blob))
    with pytest.raises(CacheError):
        load_bimoments(path, fp)
    # load_or_build recovers by recomputing
    _, sys_, hit = load_or_build(str(tmp_path), m, fp, 6, 32)
    assert not hit
    assert np.all(np.isfinite(sys_.norms))


def test_fingerprint_mismatch_detected(tmp_path, model_and_fp):
    m, fp = model_and_fp
    bm = bimoment_matrix(m, 6, 32, fp)
    path = cache_path(str(tmp_path), fp, 6, 32)
    save_bimoments(path, bm)
    with pytest.raises(CacheError):
        load_bimoments(path, "deadbeef" * 8)


def test_parse_config_happy_path():
    cfg = parse_config(BASE_CONFIG)
    assert cfg.correlator == "charpoly_average"
    assert cfg.z_points == [2 + 1j]
    assert cfg.degree == 6 and cfg.order == 32
    assert len(cfg.config_hash()) == 16


def test_parse_config_rejects_unknown_correlator():
    bad = json.loads(json.dumps(BASE_CONFIG))
    bad["task"]["correlator"] = "frobnicate"
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_parse_config_rejects_divergent_model():
    bad = json.loads(json.dumps(BASE_CONFIG))
    bad["model"]["kernel"]["c"] = 2.0
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    assert "diverges" in str(exc.value)


def test_parse_config_branch_preconditions():
    bad = json.loads(json.dumps(BASE_CONFIG))
    bad["task"]["correlator"] = "charpoly_inverse_small"
    bad["task"]["M"] = 3
    bad["task"]["N"] = 2
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_parse_config_rejects_bad_points_and_domains():
    bad = json.loads(json.dumps(BASE_CONFIG))
    bad["task"]["z_points"] = [{"re": 1}]
    with pytest.raises(ConfigError):
        parse_config(bad)
    bad = json.loads(json.dumps(BASE_CONFIG))
    bad["model"]["domain_left"] = [1.0]
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_load_config_io_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(p))
