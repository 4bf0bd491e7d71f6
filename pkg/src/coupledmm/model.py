"""Domain types for a coupled two-matrix model instance.

A model is a pair of confining polynomial potentials V_L, V_R, a coupling
kernel omega(x, y) and per-side integration domains.  The joint eigenvalue
measure is

    prod_k e^{-V_k} * Delta(X_L) * det omega(x_{L,i}, x_{R,j}) * Delta(X_R).

Everything here is an immutable value object; validation happens in the
constructors so that downstream modules can assume the invariants.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    CoincidingPoints,
    ConfigError,
    DivergentCoupling,
    DomainPoleOverlap,
    InvalidPotential,
)

# A domain is an (a, b) pair where None means unbounded on that end.
Domain = Tuple[Optional[float], Optional[float]]

REAL_LINE: Domain = (None, None)
HALF_LINE: Domain = (0.0, None)


def _canon_coeffs(coeffs) -> Tuple[float, ...]:
    c = [float(v) for v in coeffs]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


def domain_is_unbounded(dom: Domain) -> bool:
    return dom[0] is None or dom[1] is None


@dataclass(frozen=True)
class PolynomialPotential:
    """V(x) = sum_k coeffs[k] x^k, confining on the given domain."""

    coeffs: Tuple[float, ...]

    def __init__(self, coeffs: Sequence[float]):
        object.__setattr__(self, "coeffs", _canon_coeffs(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def __call__(self, x):
        # Horner; x may be real or complex array
        acc = np.zeros_like(np.asarray(x, dtype=complex) if np.iscomplexobj(x) else np.asarray(x, dtype=float))
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def deriv(self) -> "PolynomialPotential":
        d = [k * c for k, c in enumerate(self.coeffs)][1:]
        return PolynomialPotential(d or [0.0])

    def check_confining(self, domain: Domain) -> None:
        """Raise InvalidPotential unless e^{-V} is integrable on domain."""
        if domain_is_unbounded(domain):
            if domain[0] is None and domain[1] is None:
                if self.degree < 2 or self.degree % 2 != 0 or self.leading <= 0:
                    raise InvalidPotential(
                        f"V of degree {self.degree} with leading coefficient "
                        f"{self.leading} is not confining on the real line"
                    )
            else:
                # half line: need V -> +inf at the unbounded end
                sign = 1.0 if domain[0] is not None else (-1.0) ** self.degree
                if self.degree < 1 or self.leading * sign <= 0:
                    raise InvalidPotential(
                        "potential does not grow at the unbounded end of the half line"
                    )
        # finite interval: any polynomial is fine


@dataclass(frozen=True)
class ExpProduct:
    """omega(x, y) = exp(c * x * y)."""

    c: float

    kind = "exp_product"

    def __call__(self, x, y):
        return np.exp(self.c * np.asarray(x) * np.asarray(y))

    def log_on_grid(self, x, y):
        """log omega on the tensor grid, for overflow-safe weighting."""
        return self.c * np.multiply.outer(np.asarray(x, float), np.asarray(y, float))


@dataclass(frozen=True)
class CauchyShift:
    """omega(x, y) = 1 / (x + y), valid for strictly positive supports."""

    kind = "cauchy_shift"

    def __call__(self, x, y):
        return 1.0 / (np.asarray(x) + np.asarray(y))

    def log_on_grid(self, x, y):
        return -np.log(np.add.outer(np.asarray(x, float), np.asarray(y, float)))


@dataclass(frozen=True)
class Tabulated:
    """Kernel sampled on a rectangular grid, bilinear interpolation."""

    grid_x: Tuple[float, ...]
    grid_y: Tuple[float, ...]
    values: Tuple[Tuple[float, ...], ...]

    kind = "tabulated"

    def __init__(self, grid_x, grid_y, values):
        gx = tuple(float(v) for v in grid_x)
        gy = tuple(float(v) for v in grid_y)
        vals = np.asarray(values, dtype=float)
        if np.any(np.diff(gx) <= 0) or np.any(np.diff(gy) <= 0):
            raise ConfigError("tabulated kernel grids must be strictly increasing")
        if vals.shape != (len(gx), len(gy)) or not np.all(np.isfinite(vals)):
            raise ConfigError("tabulated kernel values malformed or non-finite")
        object.__setattr__(self, "grid_x", gx)
        object.__setattr__(self, "grid_y", gy)
        object.__setattr__(self, "values", tuple(map(tuple, vals.tolist())))

    def __call__(self, x, y):
        from scipy.interpolate import RegularGridInterpolator

        interp = RegularGridInterpolator(
            (np.asarray(self.grid_x), np.asarray(self.grid_y)),
            np.asarray(self.values),
            bounds_error=False,
            fill_value=0.0,
        )
        xx, yy = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
        return interp(pts).reshape(xx.shape)

    def log_on_grid(self, x, y):
        raise ConfigError("tabulated kernels have no log form; evaluate directly")


@dataclass(frozen=True)
class ChainEffective:
    """Reduced kernel of a matrix chain: the middle eigenvalues integrated out.

    inner holds the potentials of the ell-2 middle matrices; interaction is
    'exp' (e^{x x'}) or 'cauchy' (1/(x + x')).  The reduction drops overall
    constants, which cancel in every normalized expectation value.
    """

    inner: Tuple[PolynomialPotential, ...]
    interaction: str
    order: int
    inner_domain: Domain = REAL_LINE

    kind = "chain"

    def __post_init__(self):
        if self.interaction not in ("exp", "cauchy"):
            raise ConfigError(f"unknown chain interaction {self.interaction!r}")
        if self.order < 2:
            raise ConfigError("chain quadrature order must be >= 2")

    def __call__(self, x, y):
        from .quadrature import evaluate_chain_kernel

        return evaluate_chain_kernel(self, x, y)

    def log_on_grid(self, x, y):
        raise ConfigError("chain kernels have no closed log form; evaluate directly")


CouplingKernel = (ExpProduct, CauchyShift, Tabulated, ChainEffective)


@dataclass(frozen=True)
class ModelSpec:
    v_left: PolynomialPotential
    v_right: PolynomialPotential
    kernel: object
    domain_left: Domain = REAL_LINE
    domain_right: Domain = REAL_LINE

    @property
    def is_symmetric(self) -> bool:
        sym_kernel = isinstance(self.kernel, (ExpProduct, CauchyShift))
        return (
            self.v_left == self.v_right
            and self.domain_left == self.domain_right
            and sym_kernel
        )


@dataclass(frozen=True)
class SpectralPoints:
    """The z_alpha (or w_alpha) at which correlators are evaluated."""

    points: Tuple[complex, ...]

    def __init__(self, points: Sequence[complex]):
        pts = tuple(complex(p) for p in points)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if pts[i] == pts[j]:
                    raise CoincidingPoints(f"duplicate spectral point {pts[i]}")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def _is_pure_quadratic(v: PolynomialPotential) -> bool:
    return v.degree == 2 and all(c == 0.0 for c in v.coeffs[:2])


def validate_model(spec: ModelSpec) -> ModelSpec:
    """Check every type invariant; collect all violations before raising."""
    problems = []
    for v, dom, side in (
        (spec.v_left, spec.domain_left, "left"),
        (spec.v_right, spec.domain_right, "right"),
    ):
        try:
            v.check_confining(dom)
        except InvalidPotential as exc:
            problems.append((InvalidPotential, f"{side}: {exc}"))

    k = spec.kernel
    if isinstance(k, ExpProduct):
        if _is_pure_quadratic(spec.v_left) and _is_pure_quadratic(spec.v_right):
            a_l = 2.0 * spec.v_left.coeffs[2]
            a_r = 2.0 * spec.v_right.coeffs[2]
            if k.c * k.c >= a_l * a_r:
                problems.append(
                    (DivergentCoupling,
                     f"|c|={abs(k.c)} >= sqrt(a_L a_R)={math.sqrt(a_l * a_r)}: "
                     "Gaussian double integral diverges")
                )
    elif isinstance(k, CauchyShift):
        for dom, side in ((spec.domain_left, "left"), (spec.domain_right, "right")):
            lo = dom[0]
            if lo is None or lo < 0.0:
                problems.append(
                    (DomainPoleOverlap,
                     f"Cauchy kernel needs strictly positive {side} support, got {dom}")
                )

    if problems:
        msg = "; ".join(m for _, m in problems)
        raise problems[0][0](msg)
    return spec


def _kernel_dict(k) -> dict:
    if isinstance(k, ExpProduct):
        return {"type": "exp_product", "c": k.c}
    if isinstance(k, CauchyShift):
        return {"type": "cauchy_shift"}
    if isinstance(k, Tabulated):
        return {"type": "tabulated", "grid_x": list(k.grid_x),
                "grid_y": list(k.grid_y), "values": [list(r) for r in k.values]}
    if isinstance(k, ChainEffective):
        return {
            "type": "chain",
            "inner": [list(v.coeffs) for v in k.inner],
            "interaction": k.interaction,
            "order": k.order,
            "inner_domain": list(k.inner_domain),
        }
    raise ConfigError(f"unknown kernel type {type(k).__name__}")


def model_fingerprint(spec: ModelSpec) -> str:
    """Deterministic cache key: sha256 of the canonicalized model description."""
    payload = {
        "v_left": list(spec.v_left.coeffs),
        "v_right": list(spec.v_right.coeffs),
        "kernel": _kernel_dict(spec.kernel),
        "domain_left": list(spec.domain_left),
        "domain_right": list(spec.domain_right),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def gaussian_reference_model(c: float = 0.5) -> ModelSpec:
    """V_L = V_R = x^2/2, omega = e^{cxy} on the real line."""
    v = PolynomialPotential([0.0, 0.0, 0.5])
    return validate_model(ModelSpec(v, v, ExpProduct(c)))
