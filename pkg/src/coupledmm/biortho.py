"""Biorthogonal polynomial systems, CD kernels, Hilbert transforms, duals.

The monic families P_i, Q_j diagonalize the bimoment pairing,

    <P_i | omega | Q_j> = h_i delta_ij,

and come out of an LDU factorization of the Gram matrix.  The elimination
runs in the working basis carried by the BimomentMatrix (per-side monic
orthogonal polynomials); results convert back to monomial coefficient
triangles.  Pivots can be negative for general couplings, so the wave
functions are normalized with sqrt(|h_i|) and a recorded sign on the psi
side, which keeps <phi_i|omega|psi_j> = delta_ij.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DegreeOutOfRange,
    IllConditionedWarning,
    PoleOnContour,
    RankOutOfRange,
    SingularMinor,
    TruncationNotConverged,
)
from .model import ModelSpec
from .quadrature import BimomentMatrix, Grids, build_grids, recurrence_values

DEFAULT_HILBERT_ORDER = 128
PIVOT_RATIO_WARN = 1e13
POLE_SPACING_FACTOR = 2.0


@dataclass
class BiorthogonalSystem:
    p_coeffs: np.ndarray       # row i = monomial coefficients of monic P_i
    q_coeffs: np.ndarray
    norms: np.ndarray          # h_0 .. h_d
    degree: int
    fingerprint: str = ""
    # working-basis data (kept for numerically stable evaluation)
    p_work: np.ndarray = field(default=None, repr=False)
    q_work: np.ndarray = field(default=None, repr=False)
    alpha_left: np.ndarray = field(default=None, repr=False)
    beta_left: np.ndarray = field(default=None, repr=False)
    alpha_right: np.ndarray = field(default=None, repr=False)
    beta_right: np.ndarray = field(default=None, repr=False)
    bimoments: BimomentMatrix = field(default=None, repr=False)
    _grid_cache: Dict[int, Grids] = field(default_factory=dict, repr=False)

    @property
    def signs(self) -> np.ndarray:
        return np.sign(self.norms)


def factorize(bm: BimomentMatrix) -> BiorthogonalSystem:
    """LDU of the Gram matrix; pivots are the norms h_i."""
    d = bm.degree
    n = d + 1
    a = bm.work_entries.astype(float).copy()
    low = np.eye(n)
    up = np.eye(n)
    scale = np.max(np.abs(bm.work_entries))
    for k in range(n):
        piv = a[k, k]
        if not np.isfinite(piv) or abs(piv) < 1e-300 * max(scale, 1.0):
            raise SingularMinor(k)
        if k + 1 < n:
            low[k + 1:, k] = a[k + 1:, k] / piv
            up[k, k + 1:] = a[k, k + 1:] / piv
            a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:]) / piv
    h = np.diag(a).copy()
    if np.max(np.abs(h)) / np.min(np.abs(h)) > PIVOT_RATIO_WARN:
        warnings.warn(
            f"pivot ratio {np.max(np.abs(h)) / np.min(np.abs(h)):.2e} exceeds "
            f"{PIVOT_RATIO_WARN:.0e}; results past the decayed pivots are suspect",
            IllConditionedWarning,
        )
    eye = np.eye(n)
    p_work = solve_triangular(low, eye, lower=True, unit_diagonal=True)
    q_work = solve_triangular(up.T, eye, lower=True, unit_diagonal=True)
    p_coeffs = p_work @ bm.basis_left
    q_coeffs = q_work @ bm.basis_right
    return BiorthogonalSystem(
        p_coeffs, q_coeffs, h, d, bm.fingerprint,
        p_work=p_work, q_work=q_work,
        alpha_left=bm.alpha_left, beta_left=bm.beta_left,
        alpha_right=bm.alpha_right, beta_right=bm.beta_right,
        bimoments=bm,
    )


def _check_degree(sys: BiorthogonalSystem, i: int) -> None:
    if not (0 <= i <= sys.degree):
        raise DegreeOutOfRange(f"degree {i} outside [0, {sys.degree}]")


def eval_P_all(sys: BiorthogonalSystem, z) -> np.ndarray:
    """P_0..P_d at z (any shape, real or complex); axis 0 = degree."""
    base = recurrence_values(sys.alpha_left, sys.beta_left, sys.degree, np.asarray(z))
    return np.tensordot(sys.p_work, base, axes=(1, 0))


def eval_Q_all(sys: BiorthogonalSystem, z) -> np.ndarray:
    base = recurrence_values(sys.alpha_right, sys.beta_right, sys.degree, np.asarray(z))
    return np.tensordot(sys.q_work, base, axes=(1, 0))


def eval_P(sys: BiorthogonalSystem, i: int, z):
    _check_degree(sys, i)
    val = eval_P_all(sys, z)[i]
    return complex(val) if np.ndim(z) == 0 else val


def eval_Q(sys: BiorthogonalSystem, j: int, z):
    _check_degree(sys, j)
    val = eval_Q_all(sys, z)[j]
    return complex(val) if np.ndim(z) == 0 else val


def wave_phi(sys: BiorthogonalSystem, model: ModelSpec, i: int, x):
    """phi_i = e^{-V_L} P_i / sqrt|h_i|."""
    _check_degree(sys, i)
    return np.exp(-model.v_left(x)) * eval_P_all(sys, x)[i] / np.sqrt(abs(sys.norms[i]))


def wave_psi(sys: BiorthogonalSystem, model: ModelSpec, j: int, x):
    """psi_j = s_j e^{-V_R} Q_j / sqrt|h_j| (sign keeps the pairing = delta)."""
    _check_degree(sys, j)
    s = sys.signs[j]
    return s * np.exp(-model.v_right(x)) * eval_Q_all(sys, x)[j] / np.sqrt(abs(sys.norms[j]))


def cd_kernel(sys: BiorthogonalSystem, model: ModelSpec, n: int, x_r, x_l):
    """K_n(x_R, x_L) = e^{-V_L(x_L)-V_R(x_R)} sum_{i<n} Q_i(x_R) P_i(x_L) / h_i."""
    if not (0 <= n <= sys.degree + 1):
        raise RankOutOfRange(f"rank {n} outside [0, {sys.degree + 1}]")
    if n == 0:
        return 0.0 * (np.asarray(x_r) + np.asarray(x_l))
    qv = eval_Q_all(sys, x_r)[:n]
    pv = eval_P_all(sys, x_l)[:n]
    s = np.tensordot(1.0 / sys.norms[:n], qv * pv, axes=(0, 0))
    out = np.exp(-model.v_left(x_l) - model.v_right(x_r)) * s
    return complex(out) if np.ndim(out) == 0 else out


def cd_kernel_wave(sys: BiorthogonalSystem, model: ModelSpec, n: int, x_r, x_l):
    """Same kernel assembled from the wave functions (cross-check form)."""
    if not (0 <= n <= sys.degree + 1):
        raise RankOutOfRange(f"rank {n} outside [0, {sys.degree + 1}]")
    acc = 0.0 * (np.asarray(x_r) + np.asarray(x_l))
    for i in range(n):
        acc = acc + wave_psi(sys, model, i, x_r) * wave_phi(sys, model, i, x_l)
    return acc


# ---------------------------------------------------------------------------
# Hilbert transforms and the dual CD kernel


def hilbert_grids(sys: BiorthogonalSystem, model: ModelSpec,
                  order: int = DEFAULT_HILBERT_ORDER) -> Grids:
    if order not in sys._grid_cache:
        sys._grid_cache[order] = build_grids(model, order)
    return sys._grid_cache[order]


def _check_pole(z: complex, nodes: np.ndarray) -> None:
    z = complex(z)
    idx = int(np.argmin(np.abs(nodes - z.real)))
    lo = max(idx - 1, 0)
    hi = min(idx + 1, len(nodes) - 1)
    spacing = (nodes[hi] - nodes[lo]) / max(hi - lo, 1)
    dist = np.min(np.abs(nodes - z))
    if z.real < nodes[0] or z.real > nodes[-1]:
        return  # outside numerical support
    if dist < POLE_SPACING_FACTOR * spacing:
        raise PoleOnContour(
            f"point {z} is {dist:.3g} from the contour; needs >= "
            f"{POLE_SPACING_FACTOR:.1f} x local node spacing {spacing:.3g}"
        )


def hilbert_dual_P_all(sys: BiorthogonalSystem, model: ModelSpec, z: complex,
                       grids: Optional[Grids] = None) -> np.ndarray:
    """~P_j(z) = int e^{-V_L-V_R} omega(x,y) Q_j(y) / (z - x), all j at once."""
    g = grids or hilbert_grids(sys, model)
    _check_pole(z, g.x)
    qv = eval_Q_all(sys, g.y)
    right = g.W @ qv.T                       # (m_x, d+1)
    return (1.0 / (complex(z) - g.x)) @ right


def hilbert_dual_Q_all(sys: BiorthogonalSystem, model: ModelSpec, w: complex,
                       grids: Optional[Grids] = None) -> np.ndarray:
    """~Q_j(w) = int e^{-V_L-V_R} P_j(x) omega(x,y) / (w - y), all j."""
    g = grids or hilbert_grids(sys, model)
    _check_pole(w, g.y)
    pv = eval_P_all(sys, g.x)
    left = pv @ g.W                          # (d+1, m_y)
    return left @ (1.0 / (complex(w) - g.y))


def hilbert_dual_P(sys: BiorthogonalSystem, model: ModelSpec, j: int, z: complex,
                   grids: Optional[Grids] = None) -> complex:
    _check_degree(sys, j)
    return complex(hilbert_dual_P_all(sys, model, z, grids)[j])


def hilbert_dual_Q(sys: BiorthogonalSystem, model: ModelSpec, j: int, w: complex,
                   grids: Optional[Grids] = None) -> complex:
    _check_degree(sys, j)
    return complex(hilbert_dual_Q_all(sys, model, w, grids)[j])


@dataclass(frozen=True)
class DualEvaluation:
    value: complex
    truncation_degree: int
    tail: float


def dual_cd_kernel(sys: BiorthogonalSystem, model: ModelSpec, n: int,
                   w: complex, z: complex, kmax: Optional[int] = None,
                   tol: Optional[float] = None,
                   grids: Optional[Grids] = None) -> DualEvaluation:
    """~K_n(w, z) = sum_{i>=n} ~psi_i(w) ~phi_i(z), truncated at kmax.

    Each term is e^{V_L(z)+V_R(w)} ~P_i(z) ~Q_i(w) / h_i.  The tail estimate
    extrapolates the observed geometric decay and always dominates the last
    included term.
    """
    if kmax is None:
        kmax = sys.degree
    if kmax > sys.degree:
        raise DegreeOutOfRange(f"kmax {kmax} exceeds degree bound {sys.degree}")
    if n > kmax:
        return DualEvaluation(0.0 + 0.0j, kmax, 0.0)
    pt = hilbert_dual_P_all(sys, model, z, grids)
    qt = hilbert_dual_Q_all(sys, model, w, grids)
    pref = np.exp(model.v_left(complex(z)) + model.v_right(complex(w)))
    terms = pref * pt[n:kmax + 1] * qt[n:kmax + 1] / sys.norms[n:kmax + 1]
    value = complex(np.sum(terms))
    last = abs(terms[-1])
    if len(terms) >= 2 and abs(terms[-2]) > 0:
        r = last / abs(terms[-2])
    else:
        r = 1.0
    if r < 1.0:
        tail = last * max(1.0, r / (1.0 - r))
    else:
        tail = float("inf")
    if tol is not None and tail > tol:
        raise TruncationNotConverged(
            f"dual CD tail {tail:.3g} exceeds tolerance {tol:.3g} at kmax={kmax}"
        )
    return DualEvaluation(value, kmax, float(tail))


# ---------------------------------------------------------------------------
# operator identities on the quadrature grid


def _plain_kernel_matrix(model: ModelSpec, g: Grids) -> np.ndarray:
    """B[i, j] = pw_x[i] * omega(x_i, y_j) * pw_y[j]  (no e^{-V} factors)."""
    lx = g.rule_left.plain_log_weights()
    ly = g.rule_right.plain_log_weights()
    try:
        return np.exp(lx[:, None] + model.kernel.log_on_grid(g.x, g.y) + ly[None, :])
    except Exception:
        vals = np.asarray(model.kernel(g.x[:, None], g.y[None, :]))
        return np.exp(lx)[:, None] * vals * np.exp(ly)[None, :]


def _cd_matrix(sys: BiorthogonalSystem, model: ModelSpec, n: int, g: Grids) -> np.ndarray:
    """K_mat[a, b] = K_n(y_a, x_b) on the grid nodes."""
    qv = eval_Q_all(sys, g.y)[:n] * np.exp(-np.real(model.v_right(g.y)))[None, :]
    pv = eval_P_all(sys, g.x)[:n] * np.exp(-np.real(model.v_left(g.x)))[None, :]
    return (qv / sys.norms[:n, None]).T @ pv


def kernel_trace(sys: BiorthogonalSystem, model: ModelSpec, n: int,
                 grids: Optional[Grids] = None) -> float:
    """tr(omega K_n) = int dx dy omega(x, y) K_n(y, x); should equal n."""
    if not (0 <= n <= sys.degree + 1):
        raise RankOutOfRange(f"rank {n} outside [0, {sys.degree + 1}]")
    g = grids or hilbert_grids(sys, model)
    if n == 0:
        return 0.0
    b = _plain_kernel_matrix(model, g)       # (m_x, m_y)
    k = _cd_matrix(sys, model, n, g)         # (m_y, m_x)
    return float(np.trace(b @ k))


def reproducing_residual(sys: BiorthogonalSystem, model: ModelSpec, n: int,
                         grids: Optional[Grids] = None) -> float:
    """max |(K omega K) - K| on the grid (self-reproducing property)."""
    if not (0 <= n <= sys.degree + 1):
        raise RankOutOfRange(f"rank {n} outside [0, {sys.degree + 1}]")
    if n == 0:
        return 0.0
    g = grids or hilbert_grids(sys, model)
    b = _plain_kernel_matrix(model, g)
    k = _cd_matrix(sys, model, n, g)
    return float(np.max(np.abs(k @ b @ k - k)))
