"""Verification suite: every closed-form formula against its oracle.

Shared between `coupledmm verify` and the acceptance test module.  All
checks run on the reference model V_L = V_R = x^2/2, omega = e^{0.5 xy}
unless a check says otherwise.  Each criterion yields one or more records
{check id, formula value, oracle value, bound, pass}; a criterion passes iff
all of its records do.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import biortho, correlators, exact, oracle, polyensemble, schur
from .biortho import factorize, hilbert_grids
from .model import gaussian_reference_model, model_fingerprint
from .quadrature import bimoment_matrix, build_grids, build_rule
from .schur import Partition, schur_eval_jt_grid

DEGREE = 13          # one above the d=12 the criteria exercise, for dual tails
BUILD_ORDER = 64
RECHECK_ORDER = 128


@dataclass
class CheckRecord:
    check_id: str
    formula: complex
    reference: complex
    bound: float
    passed: bool
    note: str = ""

    @property
    def deviation(self) -> float:
        scale = max(abs(self.reference), 1e-300)
        return abs(self.formula - self.reference) / scale


@dataclass
class CriterionResult:
    cid: int
    label: str
    passed: bool
    records: List[CheckRecord]
    elapsed: float


@dataclass
class Workspace:
    """Everything the checks share: reference system + grids."""

    model: object
    sys: biortho.BiorthogonalSystem
    grids: object          # high-order grids for Hilbert transforms / kernels


def make_workspace() -> Workspace:
    model = gaussian_reference_model(0.5)
    bm = bimoment_matrix(model, DEGREE, BUILD_ORDER, model_fingerprint(model))
    sys = factorize(bm)
    grids = hilbert_grids(sys, model, RECHECK_ORDER)
    return Workspace(model, sys, grids)


def _rec(check_id: str, formula, reference, bound, note: str = "") -> CheckRecord:
    formula = complex(formula)
    reference = complex(reference)
    scale = max(abs(reference), 1e-300)
    passed = abs(formula - reference) / scale <= bound
    return CheckRecord(check_id, formula, reference, float(bound), bool(passed), note)


# ---------------------------------------------------------------------------
# criteria


def check_biorthogonality(ws: Workspace) -> List[CheckRecord]:
    """C1: recomputed Gram of (P_i, Q_j) is diagonal with the pivots."""
    d = 12
    g = ws.grids
    pv = biortho.eval_P_all(ws.sys, g.x)[: d + 1]
    qv = biortho.eval_Q_all(ws.sys, g.y)[: d + 1]
    gram = pv @ g.W @ qv.T
    hmax = float(np.max(np.abs(ws.sys.norms[: d + 1])))
    off = gram - np.diag(np.diag(gram))
    worst_off = float(np.max(np.abs(off)))
    recs = [_rec("1.offdiag", worst_off / hmax, 0.0, 0.0, "abs bound")]
    recs[0].passed = worst_off <= 1e-9 * hmax
    recs[0].bound = 1e-9
    worst_diag = float(np.max(np.abs(np.diag(gram) - ws.sys.norms[: d + 1])
                              / np.abs(ws.sys.norms[: d + 1])))
    recs.append(_rec("1.diag", worst_diag, 0.0, 0.0, "rel bound"))
    recs[1].passed = worst_diag <= 1e-10
    recs[1].bound = 1e-10
    return recs


def check_partition_function(ws: Workspace) -> List[CheckRecord]:
    """C2: prod h_i vs det of the bimoment block, N <= 8."""
    recs = []
    for n in range(1, 9):
        res = correlators.partition_function(ws.sys, n)
        recs.append(_rec(f"2.N{n}", res.value, res.diagnostics["det_block"], 1e-10))
    return recs


def check_exact_rational(ws: Workspace) -> List[CheckRecord]:
    """C3: float norms vs the exact-rational Gaussian pipeline, i <= 8."""
    hx = exact.exact_norms_float(ws.model, 8)
    return [_rec(f"3.h{i}", ws.sys.norms[i], hx[i], 1e-11) for i in range(9)]


def check_ah_identity(ws: Workspace) -> List[CheckRecord]:
    """C4: Andreief-Heine identity for random polynomial families, n <= 4."""
    rng = np.random.default_rng(20240817)
    rule = build_rule(ws.model.v_left, ws.model.domain_left, 24)
    recs = []
    for n in range(1, 5):
        cf = rng.normal(size=(n, 4))
        cg = rng.normal(size=(n, 4))
        fam_f = [(lambda x, c=cf[i]: np.polyval(c, x)) for i in range(n)]
        fam_g = [(lambda x, c=cg[i]: np.polyval(c, x)) for i in range(n)]
        gap = oracle.ah_identity_check(fam_f, fam_g, n, rule)
        bound = 1e-10 if n <= 3 else 1e-9
        rec = _rec(f"4.n{n}", gap, 0.0, bound, "rel gap")
        rec.passed = gap <= bound
        recs.append(rec)
    return recs


def check_schur_evaluators(ws: Workspace) -> List[CheckRecord]:
    """C5: JT vs bialternant on 200 random cases + edge conventions."""
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        nv = rng.integers(1, 5)
        ell = rng.integers(0, 5)
        parts = sorted(rng.integers(1, 5, size=ell).tolist(), reverse=True)
        lam = Partition(parts)
        xs = rng.normal(size=nv) + 1j * rng.normal(size=nv)
        a = schur.schur_eval_jt(lam, xs)
        b = schur.schur_eval_bialternant(lam, xs)
        scale = max(abs(a), abs(b), 1.0)
        worst = max(worst, abs(a - b) / scale)
    recs = [_rec("5.jt_vs_bialt", worst, 0.0, 1e-10, "worst of 200")]
    recs[0].passed = worst <= 1e-10
    empty_ok = schur.schur_eval_jt(Partition(), [1.0, 2.0]) == 1.0
    long_ok = schur.schur_eval_jt(Partition([1, 1, 1]), [1.0, 2.0]) == 0.0
    recs.append(CheckRecord("5.conventions", complex(empty_ok and long_ok), 1.0, 0.0,
                            bool(empty_ok and long_ok), "s_empty=1, l>N => 0"))
    return recs


def check_cauchy_box(ws: Workspace) -> List[CheckRecord]:
    """C6: finite Schur expansion of prod det(z - X), N=2, M=1."""
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10):
        z = complex(rng.normal(), rng.normal())
        xs = rng.normal(size=2)
        direct = (z - xs[0]) * (z - xs[1])
        expanded = schur.charpoly_product_via_schur([z], xs)
        worst = max(worst, abs(direct - expanded) / max(abs(direct), 1e-30))
    rec = _rec("6.box", worst, 0.0, 1e-12, "worst of 10 points")
    rec.passed = worst <= 1e-12
    return [rec]


def check_schur_average(ws: Workspace) -> List[CheckRecord]:
    """C7: Schur averages at N=2 vs the 4-dim oracle.

    For lam=(2,1), mu=(1) the exact value is 0: every entry of the shifted
    bimoment determinant has odd index sum, and odd Gaussian bimoments
    vanish.  A ratio to zero is meaningless, so that case is compared
    relative to the magnitude scale <|s_lam s_mu|> taken from the same
    oracle.  A parity-allowed pair lam=mu=(2,1) exercises the nonzero case
    at the plain relative tolerance.
    """
    lam, mu = Partition([2, 1]), Partition([1])
    res = correlators.schur_average(ws.sys, lam, mu, 2)

    def obs(left, right):
        return schur_eval_jt_grid(lam, list(left)) * schur_eval_jt_grid(mu, list(right))

    def obs_abs(left, right):
        return np.abs(obs(left, right))

    est = oracle.brute_force_expectation(ws.model, 2, obs, 24)
    scale = abs(oracle.brute_force_expectation(ws.model, 2, obs_abs, 24).value)
    dev = abs(complex(res.quantity) - est.value) / scale
    recs = [CheckRecord("7.s21_s1", res.quantity, est.value, 1e-6, dev <= 1e-6,
                        f"true value 0; deviation {dev:.1e} of scale {scale:.3g}")]

    lam2 = mu2 = Partition([2, 1])
    res2 = correlators.schur_average(ws.sys, lam2, mu2, 2)

    def obs2(left, right):
        return (schur_eval_jt_grid(lam2, list(left))
                * schur_eval_jt_grid(mu2, list(right)))

    est2 = oracle.brute_force_expectation(ws.model, 2, obs2, 24)
    recs.append(_rec("7.s21_s21", res2.quantity, est2.value, 1e-6,
                     f"oracle err {est2.error_bound:.1e}"))
    triv = correlators.schur_average(ws.sys, Partition(), Partition(), 2)
    recs.append(CheckRecord("7.empty", triv.quantity, 1.0, 0.0,
                            triv.quantity == 1.0, "normalization, exact"))
    return recs


def check_charpoly_average(ws: Workspace, quick: bool = False) -> List[CheckRecord]:
    """C8: <det(z - X_L)> formulas vs oracles."""
    pts = [2 + 1j, -1.5 + 0.5j, 0.3 - 2j, 3.0 + 0j, -0.7 - 0.2j]
    recs = []
    for k, z in enumerate(pts):
        res = correlators.charpoly_average(ws.sys, "L", [z], 2)

        def obs(left, right, z=z):
            return (z - left[0]) * (z - left[1])

        est = oracle.brute_force_expectation(ws.model, 2, obs, 24)
        recs.append(_rec(f"8.M1.z{k}", res.quantity, est.value, 1e-6))
    if not quick:
        zs = [2 + 1j, 3 + 2j]
        res = correlators.charpoly_average(ws.sys, "L", zs, 2)

        def obs2(left, right):
            return ((zs[0] - left[0]) * (zs[0] - left[1])
                    * (zs[1] - left[0]) * (zs[1] - left[1]))

        est = oracle.brute_force_expectation(ws.model, 2, obs2, 24)
        recs.append(_rec("8.M2", res.quantity, est.value, 1e-5))
    return recs


def check_inverse_average(ws: Workspace) -> List[CheckRecord]:
    """C9: inverse characteristic polynomial averages, both branches."""
    recs = []
    z = 2 + 1j
    res = correlators.charpoly_inverse_average_small(ws.sys, ws.model, "L", [z], 3,
                                                     grids=ws.grids)

    def obs(left, right):
        return 1.0 / ((z - left[0]) * (z - left[1]) * (z - left[2]))

    est = oracle.brute_force_expectation(ws.model, 3, obs, (64, 12), order2=(72, 16))
    recs.append(_rec("9.small.M1N3", res.quantity, est.value, 1e-5,
                     f"oracle err {est.error_bound:.1e}"))

    zs = [2 + 1j, 3 + 2j]
    res = correlators.charpoly_inverse_average_large(ws.sys, ws.model, "L", zs, 1,
                                                     grids=ws.grids)

    def obs1(left, right):
        return 1.0 / ((zs[0] - left[0]) * (zs[1] - left[0]))

    est = oracle.brute_force_expectation(ws.model, 1, obs1, 128)
    recs.append(_rec("9.large.M2N1", res.quantity, est.value, 1e-6))

    zc = [2 + 1j, 1.5 - 2j]
    a = correlators.charpoly_inverse_average_small(ws.sys, ws.model, "L", zc, 2,
                                                   grids=ws.grids)
    b = correlators.charpoly_inverse_average_large(ws.sys, ws.model, "L", zc, 2,
                                                   grids=ws.grids)
    recs.append(_rec("9.branches.M2N2", a.quantity, b.quantity, 1e-8))
    return recs


def check_pair_average(ws: Workspace, quick: bool = False) -> List[CheckRecord]:
    """C10: pair correlator <det(z-X_L) det(w-X_R)>, M = 1."""
    z, w = 2 + 1j, 1 - 0.5j
    recs = []
    res = correlators.pair_charpoly_average(ws.sys, ws.model, [z], [w], 1)

    def obs1(left, right):
        return (z - left[0]) * (w - right[0])

    est = oracle.brute_force_expectation(ws.model, 1, obs1, 48)
    recs.append(_rec("10.N1", res.quantity, est.value, 1e-7))
    if not quick:
        res = correlators.pair_charpoly_average(ws.sys, ws.model, [z], [w], 2)

        def obs2(left, right):
            return ((z - left[0]) * (z - left[1]) * (w - right[0]) * (w - right[1]))

        est = oracle.brute_force_expectation(ws.model, 2, obs2, 24)
        recs.append(_rec("10.N2", res.quantity, est.value, 1e-6))
    return recs


def check_inverse_pair(ws: Workspace) -> List[CheckRecord]:
    """C11: inverse pair correlators, dual-CD and double-Cauchy branches."""
    recs = []
    z, w = 2 + 1j, 2 - 1j
    res = correlators.pair_inverse_average_small(ws.sys, ws.model, [z], [w], 2,
                                                 grids=ws.grids)

    def obs(left, right):
        return 1.0 / ((z - left[0]) * (z - left[1]) * (w - right[0]) * (w - right[1]))

    est = oracle.brute_force_expectation(ws.model, 2, obs, 48)
    rec = _rec("11.small.M1N2", res.quantity, est.value, 1e-4,
               f"tail {res.diagnostics['tail']:.1e}, oracle err {est.error_bound:.1e}")
    recs.append(rec)
    # the reported truncation tail must cover the residual (+ oracle error)
    resid = abs(res.quantity - est.value) / max(abs(est.value), 1e-300)
    covered = resid <= 2.0 * res.diagnostics["tail"] + 10.0 * est.error_bound + 1e-9
    recs.append(CheckRecord("11.small.tail", resid, res.diagnostics["tail"], 0.0,
                            bool(covered), "residual covered by reported tail"))

    zs = [2 + 1j, 3 + 2j]
    wsp = [1 - 0.5j, 0.5 + 1.5j]
    # w = 1 - 0.5i sits only 0.5 off the contour, so the double-Cauchy
    # pairings need a finer grid than the shared 128-node one
    g_fine = build_grids(ws.model, 256)
    res = correlators.pair_inverse_average_large(ws.sys, ws.model, zs, wsp, 1,
                                                 grids=g_fine)

    def obs1(left, right):
        return 1.0 / ((zs[0] - left[0]) * (zs[1] - left[0])
                      * (wsp[0] - right[0]) * (wsp[1] - right[0]))

    est = oracle.brute_force_expectation(ws.model, 1, obs1, 150)
    recs.append(_rec("11.large.M2N1", res.quantity, est.value, 1e-5))

    a = correlators.pair_inverse_average_small(ws.sys, ws.model, [z], [w], 1,
                                               grids=ws.grids)
    b = correlators.pair_inverse_average_large(ws.sys, ws.model, [z], [w], 1,
                                               grids=ws.grids)
    recs.append(_rec("11.branches.M1N1", a.quantity, b.quantity, 1e-6))
    return recs


def check_mixed_pair(ws: Workspace) -> List[CheckRecord]:
    """C12: mixed pair <det(z-X_L)/det(w-X_R)>."""
    recs = []
    z, w = 1.5 + 0.0j, 2 + 1j
    gen = correlators.mixed_pair_average(ws.sys, ws.model, [z], [w], 2,
                                         grids=ws.grids)
    rem = correlators.mixed_pair_m1_remark(ws.sys, ws.model, z, w, 2, grids=ws.grids)
    recs.append(_rec("12.remark", gen.quantity, rem.quantity, 1e-10))

    def obs(left, right):
        return ((z - left[0]) * (z - left[1])
                / ((w - right[0]) * (w - right[1])))

    est = oracle.brute_force_expectation(ws.model, 2, obs, 48)
    recs.append(_rec("12.oracle.N2", gen.quantity, est.value, 1e-5,
                     f"oracle err {est.error_bound:.1e}"))
    return recs


def check_kernel_identities(ws: Workspace) -> List[CheckRecord]:
    """C13: tr(omega K_N) = N and the self-reproducing residual, N <= 8."""
    recs = []
    for n in range(1, 9):
        tr = biortho.kernel_trace(ws.sys, ws.model, n, ws.grids)
        rec = CheckRecord(f"13.trace.N{n}", tr, float(n), 1e-8,
                          abs(tr - n) <= 1e-8, "abs bound")
        recs.append(rec)
    for n in range(1, 9):
        resid = biortho.reproducing_residual(ws.sys, ws.model, n, ws.grids)
        kmax = float(np.max(np.abs(biortho._cd_matrix(ws.sys, ws.model, n, ws.grids))))
        rec = CheckRecord(f"13.reprod.N{n}", resid, 0.0, 1e-8,
                          resid <= 1e-8 * kmax, f"vs 1e-8 * max|K|={kmax:.2e}")
        recs.append(rec)
    return recs


def check_polyensemble_reduction(ws: Workspace) -> List[CheckRecord]:
    """C14: monomial family reproduces Z_N, CD kernel, charpoly averages."""
    d = 8
    fam = polyensemble.monomial_family(ws.model, "L", d + 1)
    mm = polyensemble.pe_mixed_moments(ws.model, fam, d, order=BUILD_ORDER)
    pes = polyensemble.pe_factorize(mm)
    recs = []
    for n in (2, 4, 6):
        a = polyensemble.pe_partition_function(pes, n).quantity
        b = correlators.partition_function(ws.sys, n).quantity
        recs.append(_rec(f"14.Z.N{n}", a, b, 1e-10))
    worst = 0.0
    for (x, y) in [(0.3, -0.7), (1.1, 0.4), (-2.0, 0.9)]:
        a = polyensemble.pe_cd_kernel(pes, ws.model, 4, x, y)
        b = biortho.cd_kernel(ws.sys, ws.model, 4, x, y)
        worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    rec = _rec("14.cd_kernel", worst, 0.0, 1e-10, "worst of 3 points")
    rec.passed = worst <= 1e-10
    recs.append(rec)
    for z in (2 + 1j, -0.5 + 0.3j):
        a = polyensemble.pe_charpoly_average(pes, [z], 3).quantity
        b = correlators.charpoly_average(ws.sys, "R", [z], 3).quantity
        recs.append(_rec(f"14.charpoly.z{z}", a, b, 1e-10))
    return recs


CRITERIA = [
    (1, "biorthogonality at d=12", check_biorthogonality, True),
    (2, "partition function pivots vs determinant", check_partition_function, True),
    (3, "float vs exact-rational norms", check_exact_rational, True),
    (4, "Andreief-Heine identity", check_ah_identity, True),
    (5, "Schur evaluators JT vs bialternant", check_schur_evaluators, True),
    (6, "finite Cauchy-box Schur expansion", check_cauchy_box, True),
    (7, "Schur average vs 4-dim oracle", check_schur_average, False),
    (8, "characteristic polynomial averages", check_charpoly_average, True),
    (9, "inverse averages, both branches", check_inverse_average, False),
    (10, "pair correlators", check_pair_average, True),
    (11, "inverse pair correlators", check_inverse_pair, False),
    (12, "mixed pair correlators", check_mixed_pair, False),
    (13, "kernel trace and reproducing identities", check_kernel_identities, True),
    (14, "polynomial ensemble reduction", check_polyensemble_reduction, True),
]


def run_criteria(ws: Optional[Workspace] = None, quick: bool = False) -> List[CriterionResult]:
    if ws is None:
        ws = make_workspace()
    results = []
    for cid, label, fn, in_quick in CRITERIA:
        if quick and not in_quick:
            continue
        start = time.perf_counter()
        if fn in (check_charpoly_average, check_pair_average):
            records = fn(ws, quick=quick)
        else:
            records = fn(ws)
        elapsed = time.perf_counter() - start
        results.append(CriterionResult(cid, label, all(r.passed for r in records),
                                       records, elapsed))
    return results


def report_rows(results: Sequence[CriterionResult]) -> List[dict]:
    rows = []
    for res in results:
        for r in res.records:
            rows.append({
                "check_id": r.check_id,
                "formula_value": f"{r.formula.real:.12g}{r.formula.imag:+.12g}j",
                "oracle_value": f"{r.reference.real:.12g}{r.reference.imag:+.12g}j",
                "bound": f"{r.bound:.3g}",
                "pass": "pass" if r.passed else "FAIL",
            })
    return rows


def write_report(results: Sequence[CriterionResult], path: str) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["check_id", "formula_value", "oracle_value", "bound", "pass"]
        )
        writer.writeheader()
        for row in report_rows(results):
            writer.writerow(row)
