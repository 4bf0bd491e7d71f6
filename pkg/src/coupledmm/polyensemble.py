"""Coupled polynomial ensemble: one side's monomials replaced by an
arbitrary function family f_{k,0..N-1}.

The mixed pairing puts the confining weight only on the polynomial side:

    <f_i | omega | q_j> = int dx dy f_i(x) omega(x, y) e^{-V(y)} y^j,

so families like f_i(x) = x^i e^{-V_L(x)} reduce the whole module to the
standard biorthogonal machinery (this reduction is a tested invariant).
Pair correlators are deliberately not available through ensembles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from .correlators import CorrelatorResult
from .errors import (
    ConfigError,
    NonFiniteIntegrand,
    RankOutOfRange,
    SingularMinor,
    UnsupportedForEnsemble,
)
from .model import ModelSpec, SpectralPoints
from .quadrature import (
    Grids,
    build_grids,
    recurrence_values,
    recurrence_coefficients_triangle,
    stieltjes_recurrence,
)


@dataclass(frozen=True)
class FunctionFamily:
    side: str                                   # 'L' or 'R'
    functions: Tuple[Callable, ...]
    gram_certificate: float = field(default=0.0)

    def __init__(self, side: str, functions: Sequence[Callable],
                 probe_points: Optional[np.ndarray] = None):
        if side not in ("L", "R"):
            raise ConfigError("family side must be 'L' or 'R'")
        funcs = tuple(functions)
        if not funcs:
            raise ConfigError("family must contain at least one function")
        probes = probe_points if probe_points is not None else np.linspace(-2.0, 2.0, len(funcs))
        probes = np.asarray(probes, dtype=float)[: len(funcs)]
        gram = np.array([[float(f(p)) for p in probes] for f in funcs])
        cert = float(np.linalg.det(gram))
        if cert == 0.0 or not np.isfinite(cert):
            raise ConfigError(
                "family failed the linear-independence certificate at the probe points"
            )
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "functions", funcs)
        object.__setattr__(self, "gram_certificate", cert)

    def __len__(self):
        return len(self.functions)


def monomial_family(model: ModelSpec, side: str, count: int) -> FunctionFamily:
    """f_i(x) = x^i e^{-V(x)}: the family that reduces to the standard model."""
    v = model.v_left if side == "L" else model.v_right
    funcs = [
        (lambda x, k=k: np.asarray(x) ** k * np.exp(-np.real(v(x))))
        for k in range(count)
    ]
    return FunctionFamily(side, funcs)


def shifted_exponential_family(side: str, shifts: Sequence[float], decay: float = 0.5) -> FunctionFamily:
    """External-source style family f_i(x) = e^{s_i x - decay x^2}."""
    funcs = [
        (lambda x, s=float(s): np.exp(s * np.asarray(x, float) - decay * np.asarray(x, float) ** 2))
        for s in shifts
    ]
    return FunctionFamily(side, funcs)


@dataclass
class MixedMoments:
    entries: np.ndarray                 # <f_i | omega | y^j>, monomials on the poly side
    family: FunctionFamily
    degree: int
    grids: Grids = field(repr=False, default=None)
    work_entries: np.ndarray = field(repr=False, default=None)
    alpha_poly: np.ndarray = field(repr=False, default=None)
    beta_poly: np.ndarray = field(repr=False, default=None)
    basis_poly: np.ndarray = field(repr=False, default=None)


def pe_mixed_moments(model: ModelSpec, family: FunctionFamily, d: int,
                     order: int = 64) -> MixedMoments:
    """Mixed Gram matrix, weight on the polynomial side only.

    The public entries pair the family against raw monomials; a working copy
    against the per-side monic orthogonal basis is kept for factorization.
    """
    if len(family) < d + 1:
        raise ConfigError(f"family holds {len(family)} functions, need {d + 1}")
    g = build_grids(model, order)
    if family.side == "L":
        rule, nodes, other_nodes = g.rule_left, g.x, g.y
        # strip the e^{-V_L} the weighted matrix carries: family supplies its own decay
        logw_fam = rule.plain_log_weights()
        wmat = np.exp(logw_fam - rule.log_weights)[:, None] * g.W
        fam_vals = np.array([np.asarray(f(nodes), dtype=float) for f in family.functions[: d + 1]])
        mono = np.vstack([other_nodes ** k for k in range(d + 1)])
        entries = fam_vals @ wmat @ mono.T
        alpha, beta = stieltjes_recurrence(g.rule_right, d)
        work_basis = recurrence_values(alpha, beta, d, other_nodes)
        work = fam_vals @ wmat @ work_basis.T
    else:
        rule, nodes, other_nodes = g.rule_right, g.y, g.x
        logw_fam = rule.plain_log_weights()
        wmat = g.W * np.exp(logw_fam - rule.log_weights)[None, :]
        fam_vals = np.array([np.asarray(f(nodes), dtype=float) for f in family.functions[: d + 1]])
        mono = np.vstack([other_nodes ** k for k in range(d + 1)])
        entries = mono @ wmat @ fam_vals.T
        alpha, beta = stieltjes_recurrence(g.rule_left, d)
        work_basis = recurrence_values(alpha, beta, d, other_nodes)
        work = work_basis @ wmat @ fam_vals.T
    if not np.all(np.isfinite(entries)):
        raise NonFiniteIntegrand("mixed moment matrix contains non-finite entries")
    basis = recurrence_coefficients_triangle(alpha, beta, d)
    return MixedMoments(entries, family, d, g, work, alpha, beta, basis)


@dataclass
class EnsembleBiorthogonalSystem:
    family_transform: np.ndarray        # unit-lower-triangular: F_i in span(f_0..f_i)
    poly_coeffs: np.ndarray             # monic monomial coefficients of the poly side
    norms: np.ndarray
    degree: int
    family: FunctionFamily
    moments: MixedMoments = field(repr=False, default=None)
    poly_work: np.ndarray = field(repr=False, default=None)


def pe_factorize(moments: MixedMoments) -> EnsembleBiorthogonalSystem:
    """LDU of the mixed Gram: family side triangular, polynomial side monic."""
    d = moments.degree
    nsz = d + 1
    # orient so rows always index the family
    a = moments.work_entries.astype(float).copy()
    fam_on_rows = moments.family.side == "L"
    if not fam_on_rows:
        a = a.T
    low = np.eye(nsz)
    up = np.eye(nsz)
    for k in range(nsz):
        piv = a[k, k]
        if not np.isfinite(piv) or piv == 0.0:
            raise SingularMinor(k)
        if k + 1 < nsz:
            low[k + 1:, k] = a[k + 1:, k] / piv
            up[k, k + 1:] = a[k, k + 1:] / piv
            a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:]) / piv
    h = np.diag(a).copy()
    eye = np.eye(nsz)
    fam_t = solve_triangular(low, eye, lower=True, unit_diagonal=True)
    poly_work = solve_triangular(up.T, eye, lower=True, unit_diagonal=True)
    poly_coeffs = poly_work @ moments.basis_poly
    return EnsembleBiorthogonalSystem(fam_t, poly_coeffs, h, d, moments.family,
                                      moments, poly_work)


def pe_partition_function(sys: EnsembleBiorthogonalSystem, n: int) -> CorrelatorResult:
    if n < 0 or n > sys.degree + 1:
        raise RankOutOfRange(f"rank {n} outside [0, {sys.degree + 1}]")
    value = float(np.prod(sys.norms[:n])) if n > 0 else 1.0
    diag = {}
    if n > 0:
        det = float(np.linalg.det(sys.moments.entries[:n, :n]))
        diag["det_block"] = det
        diag["pivot_det_rel_diff"] = abs(det - value) / max(abs(det), 1e-300)
    return CorrelatorResult(value, 0.0, diag)


def _family_values(sys: EnsembleBiorthogonalSystem, x) -> np.ndarray:
    raw = np.array([np.asarray(f(x)) for f in sys.family.functions[: sys.degree + 1]])
    return np.tensordot(sys.family_transform, raw, axes=(1, 0))


def _poly_values(sys: EnsembleBiorthogonalSystem, x) -> np.ndarray:
    m = sys.moments
    base = recurrence_values(m.alpha_poly, m.beta_poly, sys.degree, np.asarray(x))
    return np.tensordot(sys.poly_work, base, axes=(1, 0))


def pe_cd_kernel(sys: EnsembleBiorthogonalSystem, model: ModelSpec,
                 n: int, x, y):
    """K_{n,f}(x, y) = e^{-V_poly(x)} sum_{i<n} poly_i(x) F_i(y) / h_i."""
    if n < 0 or n > sys.degree + 1:
        raise RankOutOfRange(f"rank {n} outside [0, {sys.degree + 1}]")
    if n == 0:
        return 0.0 * (np.asarray(x) + np.asarray(y))
    v_poly = model.v_right if sys.family.side == "L" else model.v_left
    pv = _poly_values(sys, x)[:n]
    fv = _family_values(sys, y)[:n]
    s = np.tensordot(1.0 / sys.norms[:n], pv * fv, axes=(0, 0))
    out = np.exp(-v_poly(x)) * s
    return complex(out) if np.ndim(out) == 0 else out


def pe_charpoly_average(sys: EnsembleBiorthogonalSystem, zs, n: int) -> CorrelatorResult:
    """<prod_a det(z_a - X_poly)> through the ensemble's monic polynomials."""
    if isinstance(zs, SpectralPoints):
        z = np.asarray(zs.points, dtype=complex)
    else:
        z = np.asarray(SpectralPoints(list(zs)).points, dtype=complex)
    m = len(z)
    if n < 0 or n > sys.degree + 1:
        raise RankOutOfRange(f"rank {n} outside [0, {sys.degree + 1}]")
    if sys.degree < n + m - 1:
        raise ConfigError(f"need polynomial degree {n + m - 1}")
    vals = _poly_values(sys, z)
    mat = np.array([[vals[n + m - b, a] for b in range(1, m + 1)] for a in range(m)])
    vand = 1.0 + 0.0j
    for i in range(m):
        for j in range(i + 1, m):
            vand *= z[i] - z[j]
    return CorrelatorResult(complex(np.linalg.det(mat) / vand))


def pe_schur_average(sys: EnsembleBiorthogonalSystem, lam, mu, n: int) -> CorrelatorResult:
    """Schur average on the polynomial side paired with shifted family rows.

    Only the polynomial-side partition can be nontrivial; the family side
    must stay at the unshifted rows (mu empty), mirroring the structure of
    the mixed moments.
    """
    if mu.length > 0:
        raise UnsupportedForEnsemble(
            "only polynomial-side Schur averages are defined for ensembles"
        )
    if n < 0 or n > sys.degree + 1:
        raise RankOutOfRange(f"rank {n} outside [0, {sys.degree + 1}]")
    if lam.length > n:
        return CorrelatorResult(0.0 + 0.0j)
    if n == 0:
        return CorrelatorResult(1.0 + 0.0j)
    need = lam.part(1) + n - 1
    if sys.moments.degree < need:
        raise ConfigError(f"needs mixed moments up to degree {need}")
    ent = sys.moments.entries
    fam_on_rows = sys.family.side == "L"
    mat = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            p = lam.part(j) + n - j      # polynomial-side shifted degree
            f = n - i                    # family-side plain row
            mat[i - 1, j - 1] = ent[f, p] if fam_on_rows else ent[p, f]
    zn = float(np.prod(sys.norms[:n]))
    return CorrelatorResult(float(np.linalg.det(mat)) / zn)


def pe_pair_correlator(*args, **kwargs):
    raise UnsupportedForEnsemble(
        "pair correlation functions are not defined for coupled polynomial ensembles"
    )
