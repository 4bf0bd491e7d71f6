"""Brute-force evaluation of the defining eigenvalue integrals at small N.

This module is the ground truth: it never touches biorthogonal polynomials,
determinantal formulas, or the CD kernel.  Everything is a direct
2n-dimensional tensor-product quadrature (or importance-sampled Monte Carlo)
of

    Z_n    = (1/n!^2) int prod_k dX_k e^{-tr V_k}
             Delta(X_L) det omega(x_{L,i}, x_{R,j}) Delta(X_R),
    <O>    = Z_n^{-1} * (same integral with the observable inserted).

The n!^2 and any constant prefactors cancel in every expectation, so they
are dropped consistently from both numerator and denominator.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DegenerateProposal,
    GridTooLarge,
    NonFiniteObservable,
)
from .model import ModelSpec
from .quadrature import QuadratureRule, build_rule

Orders = Union[int, Tuple[int, int]]


@dataclass(frozen=True)
class OracleEstimate:
    value: complex
    method: str                    # tensor-quadrature | monte-carlo
    error_bound: float
    samples: Optional[int] = None
    seed: Optional[int] = None


def _perm_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def _vandermonde_grid(axes: Sequence[np.ndarray]) -> np.ndarray:
    """Delta(x_1..x_n) on broadcast grid axes."""
    n = len(axes)
    out = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            out = out * (axes[i] - axes[j])
    return out


def _side_rules(model: ModelSpec, n: int, order: Orders) -> Tuple[QuadratureRule, QuadratureRule]:
    if isinstance(order, tuple):
        m_l, m_r = order
    else:
        m_l = m_r = order
    rl = build_rule(model.v_left, model.domain_left, m_l)
    rr = build_rule(model.v_right, model.domain_right, m_r)
    return rl, rr


def _raw_integrals(model: ModelSpec, n: int, order: Orders,
                   observable: Optional[Callable] = None) -> Tuple[complex, float]:
    """(numerator, denominator): the 2n-dim sums with and without observable.

    Chunked over the leading n-1 left indices so peak memory stays at one
    (m_L, m_R, ..., m_R) block.
    """
    rl, rr = _side_rules(model, n, order)
    m_l, m_r = len(rl.nodes), len(rr.nodes)
    if m_l ** n > 2_000_000 or m_r ** n > 2_000_000 or n > 3:
        raise GridTooLarge(f"tensor grid {m_l}^{n} x {m_r}^{n} is not tractable")
    xl, wl = rl.nodes, rl.weights
    xr, wr = rr.nodes, rr.weights

    # pairwise kernel values, computed once (in log space when available)
    try:
        omega2 = np.exp(model.kernel.log_on_grid(xl, xr))
    except Exception:
        omega2 = np.asarray(model.kernel(xl[:, None], xr[None, :]))

    # broadcast axes of the inner tensor: 0 = last left axis, 1..n = right
    def axis_view(vec, pos, total):
        shape = [1] * total
        shape[pos] = len(vec)
        return np.asarray(vec).reshape(shape)

    inner = n + 1
    xl_in = axis_view(xl, 0, inner)
    right_axes = [axis_view(xr, 1 + b, inner) for b in range(n)]
    wr_prod = 1.0
    for b in range(n):
        wr_prod = wr_prod * axis_view(wr, 1 + b, inner)
    vand_r = _vandermonde_grid(right_axes)
    base_static = vand_r * wr_prod * axis_view(wl, 0, inner)

    perms = [(p, _perm_sign(p)) for p in permutations(range(n))]

    num = 0.0
    den = 0.0
    for lead in product(range(m_l), repeat=n - 1):
        lead_w = 1.0
        for i in lead:
            lead_w *= wl[i]
        left_axes = [np.asarray(xl[i]).reshape([1] * inner) for i in lead] + [xl_in]
        vand_l = _vandermonde_grid(left_axes)
        detw = 0.0
        for perm, sign in perms:
            term = float(sign)
            for a in range(n):
                b = perm[a]
                if a < n - 1:
                    term = term * axis_view(omega2[lead[a], :], 1 + b, inner)
                else:
                    shape = [1] * inner
                    shape[0] = m_l
                    shape[1 + b] = m_r
                    term = term * omega2.reshape(shape)
            detw = detw + term
        base = vand_l * detw * base_static * lead_w
        den += np.sum(base)
        if observable is not None:
            ov = observable(tuple(left_axes), tuple(right_axes))
            if not np.all(np.isfinite(ov)):
                raise NonFiniteObservable("observable non-finite on the grid")
            num += np.sum(base * ov)
    return complex(num), float(den)


def brute_force_Z(model: ModelSpec, n: int, order: Orders) -> OracleEstimate:
    """Z_n up to the constant n!^2, with a self-convergence error bound."""
    _, z1 = _raw_integrals(model, n, order)
    step = 8
    if isinstance(order, tuple):
        order2 = (order[0] + step, order[1] + step) if n >= 3 else (2 * order[0], 2 * order[1])
    else:
        order2 = order + step if n >= 3 else 2 * order
    _, z2 = _raw_integrals(model, n, order2)
    err = abs(z2 - z1) / max(abs(z2), 1e-300)
    return OracleEstimate(z2, "tensor-quadrature", err)


def brute_force_expectation(model: ModelSpec, n: int,
                            observable: Callable, order: Orders,
                            order2: Optional[Orders] = None) -> OracleEstimate:
    """<O> where observable(left_axes, right_axes) is vectorized over grids.

    The reported value comes from the refined grid (order2, default: doubled
    for n <= 2, stepped +8 per axis for n = 3 where doubling is intractable);
    the error bound is the relative shift between the two grids.
    """
    n1, d1 = _raw_integrals(model, n, order, observable)
    step = 8
    if order2 is None:
        if isinstance(order, tuple):
            order2 = (order[0] + step, order[1] + step) if n >= 3 else (2 * order[0], 2 * order[1])
        else:
            order2 = order + step if n >= 3 else 2 * order
    n2, d2 = _raw_integrals(model, n, order2, observable)
    v1 = n1 / d1
    v2 = n2 / d2
    err = abs(v2 - v1) / max(abs(v2), 1e-300)
    return OracleEstimate(v2, "tensor-quadrature", err)


# ---------------------------------------------------------------------------
# Monte Carlo with per-side Gaussian importance proposals


def _gaussian_proposal(model_v, domain) -> Tuple[float, float]:
    """(mu, sigma) of a Gaussian fit to e^{-V} at its mode.

    sigma is inflated by sqrt(2): with a product coupling e^{cxy} the
    importance ratio only has a finite second moment when the proposal is
    wider than the single-side weight (at curvature a and |c| up to 0.75 a
    the inflated width suffices; the matched width already diverges at
    |c| = a/2).
    """
    from .quadrature import _gaussian_curvature

    mu, a = _gaussian_curvature(model_v)
    return mu, np.sqrt(2.0 / a)


def mc_expectation(model: ModelSpec, n: int, observable: Callable,
                   samples: int, seed: int) -> OracleEstimate:
    """Self-normalized importance sampling of <O> with a 3-sigma bound."""
    rng = np.random.default_rng(seed)
    mu_l, s_l = _gaussian_proposal(model.v_left, model.domain_left)
    mu_r, s_r = _gaussian_proposal(model.v_right, model.domain_right)
    xl = rng.normal(mu_l, s_l, size=(samples, n))
    xr = rng.normal(mu_r, s_r, size=(samples, n))

    logq = (
        -0.5 * np.sum(((xl - mu_l) / s_l) ** 2, axis=1)
        - 0.5 * np.sum(((xr - mu_r) / s_r) ** 2, axis=1)
        - n * np.log(s_l * s_r)
    )
    logtarget = -np.sum(np.real(model.v_left(xl)), axis=1) - np.sum(np.real(model.v_right(xr)), axis=1)

    vand_l = np.ones(samples)
    vand_r = np.ones(samples)
    for i in range(n):
        for j in range(i + 1, n):
            vand_l *= xl[:, i] - xl[:, j]
            vand_r *= xr[:, i] - xr[:, j]
    detw = np.zeros(samples)
    for perm in permutations(range(n)):
        term = float(_perm_sign(perm)) * np.ones(samples)
        for a in range(n):
            term = term * np.asarray(model.kernel(xl[:, a], xr[:, perm[a]]))
        detw = detw + term

    w = np.exp(logtarget - logq) * vand_l * vand_r * detw
    ess = np.sum(np.abs(w)) ** 2 / max(np.sum(w * w), 1e-300)
    if ess < 0.01 * samples:
        raise DegenerateProposal(f"effective sample size {ess:.1f} < 1% of {samples}")

    left_axes = tuple(xl[:, i] for i in range(n))
    right_axes = tuple(xr[:, i] for i in range(n))
    ov = np.asarray(observable(left_axes, right_axes))
    if not np.all(np.isfinite(ov)):
        raise NonFiniteObservable("observable non-finite on MC samples")

    num = w * ov
    den = w
    value = np.sum(num) / np.sum(den)
    # delta-method standard error of the ratio estimator
    resid = num - value * den
    var = np.sum(np.abs(resid) ** 2) / (np.abs(np.sum(den)) ** 2)
    bound = 3.0 * np.sqrt(var)
    return OracleEstimate(complex(value), "monte-carlo", float(bound),
                          samples=samples, seed=seed)


# ---------------------------------------------------------------------------
# Andreief-Heine identity checker


def ah_identity_check(f_family: Sequence[Callable], g_family: Sequence[Callable],
                      n: int, rule: QuadratureRule) -> float:
    """Relative gap between the n-fold integral of det[f_j(x_i)] det[g_j(x_i)]
    and n! * det of the pairwise integrals.

    The left side is evaluated pointwise on the tensor grid (dets via
    numpy on stacked matrices), NOT factorized through the permutation
    expansion, so the two routes stay independent.
    """
    if n > 4:
        raise GridTooLarge("AH checker supports n <= 4")
    x, w = rule.nodes, rule.weights
    m = len(x)
    fv = np.array([f(x) for f in f_family[:n]])   # (n, m)
    gv = np.array([g(x) for g in g_family[:n]])

    idx = np.array(list(product(range(m), repeat=n)))          # (m^n, n)
    fmats = fv[:, idx].transpose(1, 2, 0)                      # (m^n, n, n): [s, i, j] = f_j(x_{idx[s,i]})
    gmats = gv[:, idx].transpose(1, 2, 0)
    integrand = np.linalg.det(fmats) * np.linalg.det(gmats)
    wprod = np.prod(w[idx], axis=1)
    lhs = np.sum(wprod * integrand)

    import math as _math

    pair = np.array([[np.sum(w * fv[i] * gv[j]) for j in range(n)] for i in range(n)])
    rhs = _math.factorial(n) * np.linalg.det(pair)
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return float(abs(lhs - rhs) / scale)
