"""Exact-rational pipeline for the Gaussian ExpProduct model.

For V_k = a_k x^2 / 2 and omega = e^{cxy} with rational a_L, a_R, c, the
bimoments are rational multiples of the scalar prefactor

    pref = 2*pi / sqrt(a_L a_R - c^2),

because the pairing is a centered bivariate Gaussian with covariance
Sigma = [[a_R, c], [c, a_L]] / (a_L a_R - c^2).  Moments follow the
Isserlis-style recurrence

    m_{i,j} = (i-1) Sigma_xx m_{i-2,j} + j Sigma_xy m_{i-1,j-1},

run entirely over fractions.Fraction, and the LDU pivots of the rational
moment matrix are the norms h_i / pref exactly.  This is the roundoff-free
ground truth the float path is checked against.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Tuple

from .errors import ConfigError, DivergentCoupling, SingularMinor
from .model import ExpProduct, ModelSpec


def _rational_quadratic_params(model: ModelSpec) -> Tuple[Fraction, Fraction, Fraction]:
    k = model.kernel
    if not isinstance(k, ExpProduct):
        raise ConfigError("exact path requires an ExpProduct kernel")
    for v in (model.v_left, model.v_right):
        if v.degree != 2 or any(c != 0.0 for c in v.coeffs[:2]):
            raise ConfigError("exact path requires pure quadratic potentials a x^2/2")
    if model.domain_left != (None, None) or model.domain_right != (None, None):
        raise ConfigError("exact path requires real-line domains")
    a_l = Fraction(2 * model.v_left.coeffs[2]).limit_denominator(10**12)
    a_r = Fraction(2 * model.v_right.coeffs[2]).limit_denominator(10**12)
    c = Fraction(k.c).limit_denominator(10**12)
    if float(a_l) != 2 * model.v_left.coeffs[2] or float(c) != k.c:
        raise ConfigError("exact path requires exactly-rational parameters")
    if c * c >= a_l * a_r:
        raise DivergentCoupling("|c|^2 >= a_L a_R")
    return a_l, a_r, c


def exact_moments(model: ModelSpec, d: int) -> List[List[Fraction]]:
    """Rational bimoments m_{ij} normalized so m_00 = 1 (true value m*pref)."""
    a_l, a_r, c = _rational_quadratic_params(model)
    det = a_l * a_r - c * c
    sxx = a_r / det
    syy = a_l / det
    sxy = c / det
    m = [[Fraction(0)] * (d + 2) for _ in range(d + 2)]
    m[0][0] = Fraction(1)
    for i in range(d + 1):
        for j in range(d + 1):
            if i == 0 and j == 0:
                continue
            if i >= 1:
                acc = sxy * j * m[i - 1][j - 1] if j >= 1 else Fraction(0)
                if i >= 2:
                    acc += sxx * (i - 1) * m[i - 2][j]
                m[i][j] = acc
            else:
                # i == 0, j >= 1: recurse on j
                acc = sxy * i * m[i - 1][j - 1] if i >= 1 else Fraction(0)
                if j >= 2:
                    acc += syy * (j - 1) * m[i][j - 2]
                m[i][j] = acc
    return [row[: d + 1] for row in m[: d + 1]]


def exact_prefactor(model: ModelSpec) -> float:
    a_l, a_r, c = _rational_quadratic_params(model)
    return 2.0 * math.pi / math.sqrt(float(a_l * a_r - c * c))


def exact_norms(model: ModelSpec, d: int) -> List[Fraction]:
    """h_i / pref as exact fractions, via rational LDU pivots."""
    m = exact_moments(model, d)
    n = d + 1
    a = [row[:] for row in m]
    pivots: List[Fraction] = []
    for k in range(n):
        piv = a[k][k]
        if piv == 0:
            raise SingularMinor(k)
        pivots.append(piv)
        for i in range(k + 1, n):
            f = a[i][k] / piv
            if f == 0:
                continue
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    return pivots


def exact_norms_float(model: ModelSpec, d: int) -> List[float]:
    pref = exact_prefactor(model)
    return [float(h) * pref for h in exact_norms(model, d)]


def sidecar_text(model: ModelSpec, d: int) -> str:
    """Sidecar listing h_i as exact fractions times the symbolic prefactor."""
    a_l, a_r, c = _rational_quadratic_params(model)
    lines = [
        "# exact norms h_i = (num/den) * pref",
        f"# pref = 2*pi/sqrt({a_l} * {a_r} - ({c})^2)",
    ]
    for i, h in enumerate(exact_norms(model, d)):
        lines.append(f"{i} {h.numerator} {h.denominator}")
    return "\n".join(lines) + "\n"
