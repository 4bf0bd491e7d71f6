"""Structured run configuration (JSON).

Layout:

    {
      "model": {
        "v_left":  [0, 0, 0.5],            # coefficients, x^k at index k
        "v_right": [0, 0, 0.5],
        "kernel":  {"type": "exp_product", "c": 0.5},
        "domain_left":  [null, null],      # null = unbounded end
        "domain_right": [null, null]
      },
      "compute": {
        "degree": 12, "order": 64, "hilbert_order": 128,
        "kmax": 12, "seed": 0, "cache_dir": ".coupledmm-cache"
      },
      "task": {
        "correlator": "charpoly_average",
        "N": 2, "M": 1, "side": "L", "orientation": "L",
        "z_points": [[2.0, 1.0]], "w_points": [],
        "lambda": [2, 1], "mu": [1]
      },
      "output": {"format": "csv", "path": "out.csv"}
    }

Kernel types: exp_product {c}, cauchy_shift {}, chain {inner: [[coeffs],...],
interaction: "exp"|"cauchy", order, inner_domain}, tabulated {grid_x, grid_y,
values}.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import ConfigError
from .model import (
    CauchyShift,
    ChainEffective,
    ExpProduct,
    ModelSpec,
    PolynomialPotential,
    Tabulated,
    validate_model,
)

KNOWN_CORRELATORS = (
    "partition_function",
    "schur_average",
    "charpoly_average",
    "charpoly_inverse_small",
    "charpoly_inverse_large",
    "pair_charpoly_average",
    "pair_inverse_small",
    "pair_inverse_large",
    "mixed_pair_average",
)


def _domain(raw) -> Tuple[Optional[float], Optional[float]]:
    if raw is None:
        return (None, None)
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise ConfigError(f"domain must be a 2-element list, got {raw!r}")
    return tuple(None if v is None else float(v) for v in raw)


def _kernel(raw: dict):
    if not isinstance(raw, dict) or "type" not in raw:
        raise ConfigError("kernel section must be an object with a 'type'")
    kind = raw["type"]
    if kind == "exp_product":
        return ExpProduct(float(raw.get("c", 1.0)))
    if kind == "cauchy_shift":
        return CauchyShift()
    if kind == "chain":
        inner = tuple(PolynomialPotential(c) for c in raw.get("inner", []))
        return ChainEffective(inner, raw.get("interaction", "exp"),
                              int(raw.get("order", 48)),
                              _domain(raw.get("inner_domain")))
    if kind == "tabulated":
        return Tabulated(raw["grid_x"], raw["grid_y"], raw["values"])
    raise ConfigError(f"unknown kernel type {kind!r}")


@dataclass
class RunConfig:
    model: ModelSpec
    degree: int = 12
    order: int = 64
    hilbert_order: int = 128
    kmax: Optional[int] = None
    seed: int = 0
    cache_dir: str = ".coupledmm-cache"
    correlator: Optional[str] = None
    n: int = 2
    m: int = 1
    side: str = "L"
    orientation: str = "L"
    z_points: List[complex] = field(default_factory=list)
    w_points: List[complex] = field(default_factory=list)
    lam: List[int] = field(default_factory=list)
    mu: List[int] = field(default_factory=list)
    out_format: str = "csv"
    out_path: Optional[str] = None
    raw: Dict = field(default_factory=dict)

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _points(raw) -> List[complex]:
    out = []
    for item in raw or []:
        if isinstance(item, (list, tuple)) and len(item) == 2:
            out.append(complex(float(item[0]), float(item[1])))
        elif isinstance(item, (int, float)):
            out.append(complex(item))
        else:
            raise ConfigError(f"point {item!r} must be [re, im] or a real number")
    return out


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict) or "model" not in raw:
        raise ConfigError("config must be an object with a 'model' section")
    msec = raw["model"]
    try:
        spec = ModelSpec(
            PolynomialPotential(msec.get("v_left", [0, 0, 0.5])),
            PolynomialPotential(msec.get("v_right", [0, 0, 0.5])),
            _kernel(msec.get("kernel", {"type": "exp_product", "c": 0.5})),
            _domain(msec.get("domain_left")),
            _domain(msec.get("domain_right")),
        )
        spec = validate_model(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad model section: {exc}") from exc

    csec = raw.get("compute", {})
    tsec = raw.get("task", {})
    osec = raw.get("output", {})

    corr = tsec.get("correlator")
    if corr is not None and corr not in KNOWN_CORRELATORS:
        raise ConfigError(
            f"unknown correlator {corr!r}; known: {', '.join(KNOWN_CORRELATORS)}"
        )
    cfg = RunConfig(
        model=spec,
        degree=int(csec.get("degree", 12)),
        order=int(csec.get("order", 64)),
        hilbert_order=int(csec.get("hilbert_order", 128)),
        kmax=None if csec.get("kmax") is None else int(csec["kmax"]),
        seed=int(csec.get("seed", 0)),
        cache_dir=str(csec.get("cache_dir", ".coupledmm-cache")),
        correlator=corr,
        n=int(tsec.get("N", 2)),
        m=int(tsec.get("M", 1)),
        side=str(tsec.get("side", "L")),
        orientation=str(tsec.get("orientation", "L")),
        z_points=_points(tsec.get("z_points")),
        w_points=_points(tsec.get("w_points")),
        lam=[int(v) for v in tsec.get("lambda", [])],
        mu=[int(v) for v in tsec.get("mu", [])],
        out_format=str(osec.get("format", "csv")),
        out_path=osec.get("path"),
        raw=raw,
    )
    if cfg.out_format not in ("csv", "json"):
        raise ConfigError(f"unknown output format {cfg.out_format!r}")
    if cfg.degree < 0 or cfg.order < 2:
        raise ConfigError("compute.degree must be >= 0 and compute.order >= 2")
    _check_branch(cfg)
    return cfg


def _check_branch(cfg: RunConfig) -> None:
    c = cfg.correlator
    if c in ("charpoly_inverse_small", "pair_inverse_small", "mixed_pair_average"):
        if cfg.m > cfg.n:
            raise ConfigError(f"{c} requires M <= N, got M={cfg.m}, N={cfg.n}")
    if c in ("charpoly_inverse_large", "pair_inverse_large"):
        if cfg.m < cfg.n:
            raise ConfigError(f"{c} requires M >= N, got M={cfg.m}, N={cfg.n}")
        if c == "pair_inverse_large" and cfg.n < 1:
            raise ConfigError("pair_inverse_large requires N >= 1")


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)
