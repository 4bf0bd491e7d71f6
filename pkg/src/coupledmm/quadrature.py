"""Quadrature rules, the bimoment (norm) matrix, and effective chain kernels.

Rules absorb the confining weight e^{-V} into their weights, so that

    integral f(x) e^{-V(x)} dx  ~=  sum_i weights[i] * f(nodes[i]).

Weights are assembled in log space to survive high orders without overflow
or premature underflow.  The bimoment matrix is computed both in the raw
monomial basis (the public entries) and in a per-side monic orthogonal
working basis obtained by a discrete Stieltjes procedure; the working-basis
Gram matrix is what the factorization module eliminates, because monomial
Gram pivots lose many digits to cancellation already at degree ~10.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.special import roots_hermite, roots_laguerre, roots_legendre

from .errors import (
    ConfigError,
    DivergentChain,
    NonFiniteIntegrand,
    UnsupportedDomain,
)
from .model import (
    CauchyShift,
    ChainEffective,
    Domain,
    ExpProduct,
    ModelSpec,
    PolynomialPotential,
    domain_is_unbounded,
)

MAX_ORDER = 300  # classical-weight nodes underflow beyond this


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray         # strictly increasing
    log_weights: np.ndarray   # log of the absorbed weights (e^{-V} included)
    kind: str                 # gauss-hermite | gauss-laguerre | gauss-legendre
    order: int
    potential: PolynomialPotential
    domain: Domain

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def plain_log_weights(self) -> np.ndarray:
        """Log weights for integration WITHOUT the e^{-V} factor."""
        return self.log_weights + np.real(self.potential(self.nodes))


def _gaussian_curvature(v: PolynomialPotential) -> Tuple[float, float]:
    """(mu, a): reference Gaussian e^{-a (x-mu)^2 / 2} matched to V."""
    if v.degree == 2:
        a = 2.0 * v.coeffs[2]
        mu = -v.coeffs[1] / (2.0 * v.coeffs[2])
        return mu, a
    # general even degree: expand around the global minimum of V
    dv = v.deriv()
    roots = np.roots(list(reversed(dv.coeffs)))
    real_roots = [r.real for r in roots if abs(r.imag) < 1e-9]
    if not real_roots:
        return 0.0, max(v.leading, 1.0)
    mu = min(real_roots, key=lambda r: np.real(v(r)))
    ddv = dv.deriv()
    a = float(np.real(ddv(mu)))
    if a <= 0:
        a = max(v.leading, 1.0)
    return float(mu), a


def build_rule(potential: PolynomialPotential, domain: Domain, order: int) -> QuadratureRule:
    if order < 2:
        raise ConfigError("quadrature order must be >= 2")
    if order > MAX_ORDER:
        raise ConfigError(f"quadrature order {order} exceeds the supported maximum {MAX_ORDER}")
    lo, hi = domain
    if lo is None and hi is None:
        mu, a = _gaussian_curvature(potential)
        t, w = roots_hermite(order)
        scale = np.sqrt(2.0 / a)
        x = mu + scale * t
        logw = np.log(w) + t * t - np.real(potential(x)) + np.log(scale)
        return QuadratureRule(x, logw, "gauss-hermite", order, potential, domain)
    if (lo is not None) and (hi is None):
        # scale from the local slope of V one unit into the domain
        s = max(1.0, float(np.real(potential.deriv()(lo + 1.0))))
        u, w = roots_laguerre(order)
        x = lo + u / s
        logw = np.log(w) + u - np.real(potential(x)) - np.log(s)
        return QuadratureRule(x, logw, "gauss-laguerre", order, potential, domain)
    if (lo is None) and (hi is not None):
        # mirror of the previous case
        s = max(1.0, float(-np.real(potential.deriv()(hi - 1.0))))
        u, w = roots_laguerre(order)
        x = hi - u / s
        logw = np.log(w) + u - np.real(potential(x)) - np.log(s)
        idx = np.argsort(x)
        return QuadratureRule(x[idx], logw[idx], "gauss-laguerre", order, potential, domain)
    if lo is not None and hi is not None:
        if not (hi > lo):
            raise UnsupportedDomain(f"empty interval {domain}")
        t, w = roots_legendre(order)
        half = 0.5 * (hi - lo)
        x = 0.5 * (hi + lo) + half * t
        logw = np.log(w) + np.log(half) - np.real(potential(x))
        return QuadratureRule(x, logw, "gauss-legendre", order, potential, domain)
    raise UnsupportedDomain(f"cannot build a rule on {domain}")


def integrate(rule: QuadratureRule, values: np.ndarray) -> float:
    return float(np.exp(rule.log_weights) @ np.asarray(values))


def exactness_check(rule: QuadratureRule, kmax: Optional[int] = None) -> float:
    """Worst relative deviation of monomial integrals against a doubled rule.

    For quadratic V on the real line this should be at roundoff level up to
    degree 2*order - 2.
    """
    if kmax is None:
        kmax = min(2 * rule.order - 2, 24)
    ref = build_rule(rule.potential, rule.domain, min(2 * rule.order, MAX_ORDER))
    worst = 0.0
    for k in range(kmax + 1):
        a = integrate(rule, rule.nodes ** k)
        b = integrate(ref, ref.nodes ** k)
        scale = max(abs(a), abs(b), integrate(ref, np.abs(ref.nodes) ** k))
        if scale > 0:
            worst = max(worst, abs(a - b) / scale)
    return worst


# ---------------------------------------------------------------------------
# weighted kernel grids


@dataclass(frozen=True)
class Grids:
    """Tensor-product rules for the two sides plus the fully weighted kernel.

    W[i, j] = w_L[i] * omega(x_i, y_j) * w_R[j], assembled in log space when
    the kernel supplies a log form.
    """

    rule_left: QuadratureRule
    rule_right: QuadratureRule
    W: np.ndarray

    @property
    def x(self):
        return self.rule_left.nodes

    @property
    def y(self):
        return self.rule_right.nodes


def build_grids(model: ModelSpec, order: int, order_right: Optional[int] = None) -> Grids:
    rl = build_rule(model.v_left, model.domain_left, order)
    rr = build_rule(model.v_right, model.domain_right, order_right or order)
    k = model.kernel
    try:
        logw = rl.log_weights[:, None] + k.log_on_grid(rl.nodes, rr.nodes) + rr.log_weights[None, :]
        W = np.exp(logw)
    except ConfigError:
        if isinstance(k, ChainEffective):
            vals = evaluate_chain_kernel(k, rl.nodes, rr.nodes).reshape(len(rl.nodes), len(rr.nodes))
        else:
            vals = np.asarray(k(rl.nodes[:, None], rr.nodes[None, :]))
        W = rl.weights[:, None] * vals * rr.weights[None, :]
    if not np.all(np.isfinite(W)):
        raise NonFiniteIntegrand("weighted kernel matrix contains non-finite entries")
    return Grids(rl, rr, W)


def bimoment(model: ModelSpec, i: int, j: int, grids: Grids) -> float:
    """(x_L^i | omega | x_R^j) by tensor-product quadrature."""
    val = (grids.x ** i) @ grids.W @ (grids.y ** j)
    if not np.isfinite(val):
        raise NonFiniteIntegrand(f"bimoment ({i},{j}) is not finite")
    return float(val)


def stieltjes_recurrence(rule: QuadratureRule, d: int) -> Tuple[np.ndarray, np.ndarray]:
    """Three-term recurrence (alpha_k, beta_k) of the monic polynomials
    orthogonal with respect to the discrete measure sum_i w_i delta(x_i).

    pi_{k+1}(x) = (x - alpha_k) pi_k(x) - beta_k pi_{k-1}(x),  beta_0 unused.
    """
    x = rule.nodes
    w = rule.weights
    alpha = np.zeros(d + 1)
    beta = np.zeros(d + 1)
    pi_prev = np.zeros_like(x)
    pi = np.ones_like(x)
    nrm_prev = 1.0
    for k in range(d + 1):
        nrm = w @ (pi * pi)
        if nrm <= 0:
            raise NonFiniteIntegrand("discrete measure degenerated in Stieltjes recurrence")
        alpha[k] = (w @ (x * pi * pi)) / nrm
        if k > 0:
            beta[k] = nrm / nrm_prev
        pi_next = (x - alpha[k]) * pi - (beta[k] if k > 0 else 0.0) * pi_prev
        pi_prev, pi = pi, pi_next
        nrm_prev = nrm
    return alpha, beta


def recurrence_values(alpha: np.ndarray, beta: np.ndarray, d: int, x) -> np.ndarray:
    """Values pi_0..pi_d at points x (real or complex), rows = degree."""
    x = np.asarray(x)
    out = np.zeros((d + 1,) + x.shape, dtype=complex if np.iscomplexobj(x) else float)
    out[0] = 1.0
    if d >= 1:
        out[1] = x - alpha[0]
    for k in range(1, d):
        out[k + 1] = (x - alpha[k]) * out[k] - beta[k] * out[k - 1]
    return out


def recurrence_coefficients_triangle(alpha: np.ndarray, beta: np.ndarray, d: int) -> np.ndarray:
    """Unit-lower-triangular C with row k = monomial coefficients of pi_k."""
    C = np.zeros((d + 1, d + 1))
    C[0, 0] = 1.0
    if d >= 1:
        C[1, 1] = 1.0
        C[1, 0] = -alpha[0]
    for k in range(1, d):
        C[k + 1, 1:] += C[k, :-1]
        C[k + 1, :] -= alpha[k] * C[k, :]
        C[k + 1, :] -= beta[k] * C[k - 1, :]
    return C


@dataclass(frozen=True)
class BimomentMatrix:
    """Norm matrix N_{ij} = (x_L^i | omega | x_R^j), 0 <= i, j <= degree.

    The public entries are monomial bimoments.  The private working-basis
    fields carry the same Gram matrix expressed in per-side monic orthogonal
    polynomials, which is what the factorization actually eliminates.
    """

    entries: np.ndarray
    degree: int
    order: int
    fingerprint: str
    work_entries: np.ndarray = field(repr=False)
    alpha_left: np.ndarray = field(repr=False)
    beta_left: np.ndarray = field(repr=False)
    alpha_right: np.ndarray = field(repr=False)
    beta_right: np.ndarray = field(repr=False)
    basis_left: np.ndarray = field(repr=False)   # unit-lower-triangular coeffs
    basis_right: np.ndarray = field(repr=False)


def bimoment_matrix(model: ModelSpec, d: int, order: int, fingerprint: str = "") -> BimomentMatrix:
    if d < 0:
        raise ConfigError("degree bound must be >= 0")
    grids = build_grids(model, order)
    xv = np.vstack([grids.x ** k for k in range(d + 1)])
    yv = np.vstack([grids.y ** k for k in range(d + 1)])
    entries = xv @ grids.W @ yv.T
    if not np.all(np.isfinite(entries)):
        raise NonFiniteIntegrand("bimoment matrix contains non-finite entries")

    al, bl = stieltjes_recurrence(grids.rule_left, d)
    ar, br = stieltjes_recurrence(grids.rule_right, d)
    piL = recurrence_values(al, bl, d, grids.x)
    piR = recurrence_values(ar, br, d, grids.y)
    work = piL @ grids.W @ piR.T
    CL = recurrence_coefficients_triangle(al, bl, d)
    CR = recurrence_coefficients_triangle(ar, br, d)
    return BimomentMatrix(entries, d, order, fingerprint, work, al, bl, ar, br, CL, CR)


# ---------------------------------------------------------------------------
# chain kernels


def effective_chain_kernel(inner, interaction: str, order: int,
                           inner_domain: Domain = (None, None)):
    """Reduced two-variable kernel of a matrix chain.

    With no inner potentials this is the bare interaction; otherwise the
    middle eigenvalues are integrated out by nested quadrature (overall
    constants dropped).
    """
    inner = tuple(inner)
    if not inner:
        return ExpProduct(1.0) if interaction == "exp" else CauchyShift()
    return ChainEffective(inner, interaction, order, inner_domain)


def _interaction_matrix(kind: str, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    if kind == "exp":
        return np.exp(np.multiply.outer(u, v))
    return 1.0 / np.add.outer(u, v)


def evaluate_chain_kernel(chain: ChainEffective, x, y) -> np.ndarray:
    """omega(x, y) with the middle chain variables integrated out."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    rules = [build_rule(v, chain.inner_domain, chain.order) for v in chain.inner]
    U = _interaction_matrix(chain.interaction, x.ravel(), rules[0].nodes)
    U = U * rules[0].weights[None, :]
    for prev, cur in zip(rules[:-1], rules[1:]):
        T = _interaction_matrix(chain.interaction, prev.nodes, cur.nodes)
        U = (U @ T) * cur.weights[None, :]
    out = U @ _interaction_matrix(chain.interaction, rules[-1].nodes, y.ravel())
    if not np.all(np.isfinite(out)):
        raise DivergentChain("nested chain integral produced non-finite values")
    return out.reshape((x.size, y.size)).squeeze()
