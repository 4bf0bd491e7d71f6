"""Closed-form determinantal correlators of the coupled two-matrix model.

Conventions used throughout (all verified against the brute-force oracle):

  * Vandermonde: Delta_M(Z) = prod_{a<b} (z_a - z_b).
  * The inverse characteristic-polynomial averages (both branches) and the
    mixed pair formula carry the sign (-1)^{M(M-1)/2} relative to the naive
    row ordering; with it, the two inverse branches agree at M = N.
  * The M >= N inverse-pair branch contracts the border polynomials with the
    transposed inverse of the double-Cauchy matrix and has overall sign +1.

Determinants are evaluated with log-magnitude factoring: every result is
CorrelatorResult(value, log_scale, diagnostics), the quantity being
value * exp(log_scale).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .biortho import (
    BiorthogonalSystem,
    dual_cd_kernel,
    eval_P_all,
    eval_Q_all,
    hilbert_dual_P_all,
    hilbert_dual_Q_all,
    hilbert_grids,
    cd_kernel,
)
from .errors import (
    CoincidingPoints,
    InsufficientDegreeBound,
    RankOutOfRange,
    SingularCauchyMatrix,
)
from .model import ModelSpec, SpectralPoints
from .quadrature import Grids


@dataclass(frozen=True)
class CorrelatorResult:
    value: complex
    log_scale: float = 0.0
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def quantity(self) -> complex:
        return self.value * np.exp(self.log_scale)


def _points(zs) -> np.ndarray:
    if isinstance(zs, SpectralPoints):
        return np.asarray(zs.points, dtype=complex)
    pts = SpectralPoints(list(zs))  # validates distinctness
    return np.asarray(pts.points, dtype=complex)


def _vandermonde(zs: np.ndarray) -> complex:
    out = 1.0 + 0.0j
    m = len(zs)
    for i in range(m):
        for j in range(i + 1, m):
            out *= zs[i] - zs[j]
    return out


def _logdet(mat: np.ndarray):
    """(unit-modulus value, log magnitude) of det(mat)."""
    sign, logabs = np.linalg.slogdet(np.asarray(mat, dtype=complex))
    return sign, float(logabs)


def _half_sign(m: int) -> float:
    return -1.0 if (m * (m - 1) // 2) % 2 else 1.0


def _require_rank(sys: BiorthogonalSystem, n: int) -> None:
    if n < 0 or n > sys.degree + 1:
        raise RankOutOfRange(f"rank {n} outside [0, {sys.degree + 1}]")


def partition_function(sys: BiorthogonalSystem, n: int) -> CorrelatorResult:
    """Z_n = prod_{i<n} h_i, cross-checked against det of the bimoment block."""
    _require_rank(sys, n)
    value = float(np.prod(sys.norms[:n])) if n > 0 else 1.0
    diag = {}
    if sys.bimoments is not None and n > 0:
        block = sys.bimoments.entries[:n, :n]
        det = float(np.linalg.det(block))
        diag["det_block"] = det
        diag["pivot_det_rel_diff"] = abs(det - value) / max(abs(det), 1e-300)
    return CorrelatorResult(value, 0.0, diag)


def schur_average(sys: BiorthogonalSystem, lam, mu, n: int) -> CorrelatorResult:
    """<s_lam(X_L) s_mu(X_R)> = det N_{lam_i+n-i, mu_j+n-j} / Z_n."""
    _require_rank(sys, n)
    if lam.length > n or mu.length > n:
        return CorrelatorResult(0.0 + 0.0j)
    if n == 0 or (lam.length == 0 and mu.length == 0):
        # the observable is identically 1, no determinant needed
        return CorrelatorResult(1.0 + 0.0j)
    need = max(lam.part(1), mu.part(1)) + n - 1
    if sys.bimoments is None or sys.bimoments.degree < need:
        raise InsufficientDegreeBound(
            f"schur_average needs bimoments up to degree {need}"
        )
    ent = sys.bimoments.entries
    mat = np.array(
        [[ent[lam.part(i) + n - i, mu.part(j) + n - j] for j in range(1, n + 1)]
         for i in range(1, n + 1)]
    )
    zn = float(np.prod(sys.norms[:n]))
    value = float(np.linalg.det(mat)) / zn
    return CorrelatorResult(value)


def charpoly_average(sys: BiorthogonalSystem, side: str, zs, n: int) -> CorrelatorResult:
    """<prod_a det(z_a - X_side)> = det P_{n+M-b}(z_a) / Delta_M(Z)."""
    z = _points(zs)
    m = len(z)
    _require_rank(sys, n)
    if sys.degree < n + m - 1:
        raise InsufficientDegreeBound(
            f"need polynomial degree {n + m - 1}, system bound is {sys.degree}"
        )
    ev = eval_P_all if side == "L" else eval_Q_all
    vals = ev(sys, z)                                # (d+1, M)
    mat = np.array([[vals[n + m - b, a] for b in range(1, m + 1)] for a in range(m)])
    sign, logabs = _logdet(mat)
    vand = _vandermonde(z)
    value = sign * np.exp(logabs - np.log(abs(vand))) * (abs(vand) / vand)
    return CorrelatorResult(complex(value), 0.0, {})


def charpoly_inverse_average_small(sys: BiorthogonalSystem, model: ModelSpec,
                                   side: str, zs, n: int,
                                   grids: Optional[Grids] = None) -> CorrelatorResult:
    """M <= N branch: (Z_{n-M}/Z_n) det ~P_{n-b}(z_a) / Delta_M(Z), with the
    Vandermonde-ordering sign (-1)^{M(M-1)/2}."""
    z = _points(zs)
    m = len(z)
    _require_rank(sys, n)
    if m > n:
        raise RankOutOfRange(f"small branch needs M <= N, got M={m}, N={n}")
    hd = hilbert_dual_P_all if side == "L" else hilbert_dual_Q_all
    dual = np.array([hd(sys, model, za, grids) for za in z])   # (M, d+1)
    mat = np.array([[dual[a, n - b] for b in range(1, m + 1)] for a in range(m)])
    ratio = 1.0 / float(np.prod(sys.norms[n - m:n]))           # Z_{n-M}/Z_n
    vand = _vandermonde(z)
    value = _half_sign(m) * ratio * np.linalg.det(mat) / vand
    return CorrelatorResult(complex(value), 0.0, {})


def charpoly_inverse_average_large(sys: BiorthogonalSystem, model: ModelSpec,
                                   side: str, zs, n: int,
                                   grids: Optional[Grids] = None) -> CorrelatorResult:
    """M >= N branch: mixed block of Hilbert duals ~p_{n-i} and monic rows,
    divided by Z_n Delta_M(Z), with the sign (-1)^{M(M-1)/2}."""
    z = _points(zs)
    m = len(z)
    _require_rank(sys, n)
    if m < n:
        raise RankOutOfRange(f"large branch needs M >= N, got M={m}, N={n}")
    hd = hilbert_dual_P_all if side == "L" else hilbert_dual_Q_all
    dual = np.array([hd(sys, model, za, grids) for za in z])   # (M, d+1)
    mat = np.zeros((m, m), dtype=complex)
    for a in range(m):
        for i in range(1, n + 1):
            mat[a, i - 1] = dual[a, n - i]
        for k in range(m - n):
            mat[a, n + k] = z[a] ** k
    zn = float(np.prod(sys.norms[:n])) if n > 0 else 1.0
    vand = _vandermonde(z)
    value = _half_sign(m) * np.linalg.det(mat) / (zn * vand)
    return CorrelatorResult(complex(value), 0.0, {})


def pair_charpoly_average(sys: BiorthogonalSystem, model: ModelSpec,
                          zs, ws, n: int) -> CorrelatorResult:
    """<prod det(z-X_L) det(w-X_R)> via the rank-M determinant of K_{n+M}."""
    z = _points(zs)
    w = _points(ws)
    if len(z) != len(w):
        raise CoincidingPoints("zs and ws must have equal length M")
    m = len(z)
    _require_rank(sys, n)
    if sys.degree < n + m - 1:
        raise InsufficientDegreeBound(
            f"pair formula needs degree {n + m - 1}, system bound is {sys.degree}"
        )
    kmat = np.array([[cd_kernel(sys, model, n + m, w[a], z[b]) for b in range(m)]
                     for a in range(m)])
    sign, logabs = _logdet(kmat)
    ratio = float(np.prod(sys.norms[n:n + m]))                 # Z_{n+M}/Z_n
    tr_v = np.sum(model.v_left(z)) + np.sum(model.v_right(w))  # complex
    vand = _vandermonde(z) * _vandermonde(w)
    log_scale = float(np.real(tr_v)) + logabs + np.log(abs(ratio)) - np.log(abs(vand))
    value = sign * np.exp(1j * np.imag(tr_v)) * np.sign(ratio) * (abs(vand) / vand)
    return CorrelatorResult(complex(value), log_scale, {})


def pair_inverse_average_small(sys: BiorthogonalSystem, model: ModelSpec,
                               zs, ws, n: int, kmax: Optional[int] = None,
                               grids: Optional[Grids] = None) -> CorrelatorResult:
    """M <= N branch of the inverse pair, in the exactly-cancelled form

        (Z_{n-M}/Z_n) det_{ab} S(z_a, w_b) / (Delta(Z) Delta(W)),
        S(z, w) = sum_{i >= n-M} ~P_i(z) ~Q_i(w) / h_i.

    The e^{+-trV} dressings of the dual CD kernel cancel algebraically and
    never get exponentiated.  Diagnostics carry the worst truncation tail.
    """
    z = _points(zs)
    w = _points(ws)
    if len(z) != len(w):
        raise CoincidingPoints("zs and ws must have equal length M")
    m = len(z)
    _require_rank(sys, n)
    if m > n:
        raise RankOutOfRange(f"small branch needs M <= N, got M={m}, N={n}")
    if kmax is None:
        kmax = sys.degree
    g = grids or hilbert_grids(sys, model)
    pt = np.array([hilbert_dual_P_all(sys, model, za, g) for za in z])  # (M, d+1)
    qt = np.array([hilbert_dual_Q_all(sys, model, wb, g) for wb in w])
    lo = n - m
    smat = np.zeros((m, m), dtype=complex)
    worst_tail = 0.0
    for a in range(m):
        for b in range(m):
            terms = pt[a, lo:kmax + 1] * qt[b, lo:kmax + 1] / sys.norms[lo:kmax + 1]
            smat[a, b] = np.sum(terms)
            last = abs(terms[-1])
            r = last / abs(terms[-2]) if len(terms) > 1 and abs(terms[-2]) > 0 else 1.0
            tail = last * max(1.0, r / (1.0 - r)) if r < 1.0 else float("inf")
            scale = max(abs(smat[a, b]), 1e-300)
            worst_tail = max(worst_tail, tail / scale)
    ratio = 1.0 / float(np.prod(sys.norms[lo:n]))
    vand = _vandermonde(z) * _vandermonde(w)
    value = ratio * np.linalg.det(smat) / vand
    return CorrelatorResult(complex(value), 0.0, {"tail": worst_tail})


def pair_inverse_average_large(sys: BiorthogonalSystem, model: ModelSpec,
                               zs, ws, n: int,
                               grids: Optional[Grids] = None) -> CorrelatorResult:
    """M >= N branch: det C * det(border contraction) / (Z_n Delta Delta),
    where C_ab = (1/(z_a - x_L) | omega | 1/(w_b - x_R)) and the border uses
    the transposed inverse of C.  Overall sign +1."""
    z = _points(zs)
    w = _points(ws)
    if len(z) != len(w):
        raise CoincidingPoints("zs and ws must have equal length M")
    m = len(z)
    if n < 1:
        raise RankOutOfRange("N >= 1 required")
    _require_rank(sys, n)
    if m < n:
        raise RankOutOfRange(f"large branch needs M >= N, got M={m}, N={n}")
    g = grids or hilbert_grids(sys, model)
    cx = np.array([1.0 / (za - g.x) for za in z])              # (M, m_x)
    cy = np.array([1.0 / (wb - g.y) for wb in w])
    cmat = cx @ g.W @ cy.T                                      # (M, M)
    cond = float(np.linalg.cond(cmat))
    k = m - n
    if k > 0:
        if not np.all(np.isfinite(cmat)) or cond > 1e15:
            raise SingularCauchyMatrix(f"double-Cauchy matrix condition {cond:.2e}")
        pz = np.array([z ** a for a in range(k)])               # (K, M) monic rows
        qw = np.array([w ** b for b in range(k)])
        border = np.linalg.det(pz @ np.linalg.inv(cmat).T @ qw.T)
    else:
        border = 1.0 + 0.0j
    zn = float(np.prod(sys.norms[:n]))
    vand = _vandermonde(z) * _vandermonde(w)
    value = np.linalg.det(cmat) * border / (zn * vand)
    return CorrelatorResult(complex(value), 0.0, {"cond": cond})


def mixed_pair_average(sys: BiorthogonalSystem, model: ModelSpec,
                       zs, ws, n: int, orientation: str = "L",
                       grids: Optional[Grids] = None) -> CorrelatorResult:
    """<prod det(z-X_L) / det(w-X_R)> (orientation "L") for M <= N:

        (-1)^{M(M-1)/2} (Z_{n-M}/Z_n) det B / (Delta(Z) Delta(W)),

    B stacking M rows P_{n+M-b}(z_a) over M rows ~Q_{n+M-b}(w_a), with the
    2M columns b = 1..2M.  Orientation "R" swaps the roles of the sides.
    """
    z = _points(zs)
    w = _points(ws)
    if len(z) != len(w):
        raise CoincidingPoints("zs and ws must have equal length M")
    m = len(z)
    _require_rank(sys, n)
    if m > n:
        raise RankOutOfRange(f"mixed pair needs M <= N, got M={m}, N={n}")
    if sys.degree < n + m - 1:
        raise InsufficientDegreeBound(
            f"mixed pair needs degree {n + m - 1}, system bound is {sys.degree}"
        )
    if orientation == "L":
        poly = eval_P_all(sys, z)                               # (d+1, M)
        dual = np.array([hilbert_dual_Q_all(sys, model, wb, grids) for wb in w])
    elif orientation == "R":
        poly = eval_Q_all(sys, w)
        dual = np.array([hilbert_dual_P_all(sys, model, za, grids) for za in z])
        z, w = w, z
    else:
        raise CoincidingPoints(f"unknown orientation {orientation!r}")
    b = np.zeros((2 * m, 2 * m), dtype=complex)
    for a in range(m):
        for col in range(1, 2 * m + 1):
            b[a, col - 1] = poly[n + m - col, a]
            b[m + a, col - 1] = dual[a, n + m - col]
    ratio = 1.0 / float(np.prod(sys.norms[n - m:n]))
    vand = _vandermonde(z) * _vandermonde(w)
    value = _half_sign(m) * ratio * np.linalg.det(b) / vand
    return CorrelatorResult(complex(value), 0.0, {})


def mixed_pair_m1_remark(sys: BiorthogonalSystem, model: ModelSpec,
                         z: complex, w: complex,
                         n: int, grids: Optional[Grids] = None) -> CorrelatorResult:
    """The closed M = 1 form: (P_n(z) ~Q_{n-1}(w) - P_{n-1}(z) ~Q_n(w)) / h_{n-1}."""
    _require_rank(sys, n)
    if n < 1:
        raise RankOutOfRange("N >= 1 required")
    pv = eval_P_all(sys, np.asarray([z], dtype=complex))[:, 0]
    qd = hilbert_dual_Q_all(sys, model, w, grids)
    value = (pv[n] * qd[n - 1] - pv[n - 1] * qd[n]) / sys.norms[n - 1]
    return CorrelatorResult(complex(value))
