"""Integer partitions and Schur polynomial evaluation.

The primary evaluator goes through the Jacobi-Trudi determinant in complete
homogeneous symmetric polynomials (computed by the Newton power-sum
recurrence), which stays stable near coinciding variables.  The bialternant
ratio-of-determinants definition is kept as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count
from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from .errors import CoincidingVariables, ConfigError, PartitionOutsideBox


@dataclass(frozen=True)
class Partition:
    parts: Tuple[int, ...]

    def __init__(self, parts: Iterable[int] = ()):
        p = [int(v) for v in parts]
        while p and p[-1] == 0:
            p.pop()
        if any(v < 0 for v in p):
            raise ConfigError("partition parts must be nonnegative")
        if any(p[i] < p[i + 1] for i in range(len(p) - 1)):
            raise ConfigError(f"partition parts must be non-increasing, got {p}")
        object.__setattr__(self, "parts", tuple(p))

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    def part(self, i: int) -> int:
        """lambda_i with 1-based index, zero past the length."""
        return self.parts[i - 1] if 1 <= i <= len(self.parts) else 0

    def transpose(self) -> "Partition":
        if not self.parts:
            return Partition()
        cols = [sum(1 for p in self.parts if p >= k) for k in range(1, self.parts[0] + 1)]
        return Partition(cols)

    def fits_in_box(self, width: int, height: int) -> bool:
        return self.length <= height and (self.part(1) <= width)

    def __repr__(self):
        return f"Partition{self.parts}"


EMPTY = Partition()


def dual_partition(lam: Partition, m: int, n: int) -> Partition:
    """Rotated complement in the m x n box: dual_a = n - lam^T_{m-a+1}."""
    if not lam.fits_in_box(m, n):
        raise PartitionOutsideBox(f"{lam} does not fit in the {m}x{n} box")
    lt = lam.transpose()
    return Partition([n - lt.part(m - a + 1) for a in range(1, m + 1)])


def partitions_in_box(width: int, height: int) -> Iterator[Partition]:
    """All partitions with at most `height` parts, each at most `width`."""
    def rec(prefix: List[int], maxpart: int, rows_left: int):
        yield Partition(prefix)
        if rows_left == 0:
            return
        for p in range(min(maxpart, width), 0, -1):
            yield from rec(prefix + [p], p, rows_left - 1)

    yield from rec([], width, height)


def _power_sums(xs: np.ndarray, kmax: int) -> np.ndarray:
    p = np.zeros(kmax + 1, dtype=complex)
    p[0] = len(xs)
    acc = np.ones_like(xs)
    for k in range(1, kmax + 1):
        acc = acc * xs
        p[k] = np.sum(acc)
    return p


def complete_homogeneous(xs: Sequence[complex], kmax: int) -> np.ndarray:
    """h_0..h_kmax via the Newton recurrence k h_k = sum_i p_i h_{k-i}."""
    xs = np.asarray(xs, dtype=complex)
    p = _power_sums(xs, kmax)
    h = np.zeros(kmax + 1, dtype=complex)
    h[0] = 1.0
    for k in range(1, kmax + 1):
        h[k] = sum(p[i] * h[k - i] for i in range(1, k + 1)) / k
    return h


def schur_eval_jt(lam: Partition, xs: Sequence[complex]) -> complex:
    """s_lambda(x_1..x_N) by the Jacobi-Trudi determinant det h_{lam_i - i + j}."""
    xs = np.asarray(list(xs), dtype=complex)
    n_vars = len(xs)
    if lam.length > n_vars:
        return 0.0 + 0.0j
    ell = lam.length
    if ell == 0:
        return 1.0 + 0.0j
    kmax = lam.part(1) + ell
    h = complete_homogeneous(xs, kmax)

    def h_at(k: int) -> complex:
        if k < 0:
            return 0.0 + 0.0j
        return h[k]

    mat = np.array(
        [[h_at(lam.part(i) - i + j) for j in range(1, ell + 1)] for i in range(1, ell + 1)],
        dtype=complex,
    )
    return complex(np.linalg.det(mat))


def schur_eval_jt_grid(lam: Partition, xs: Sequence[np.ndarray]) -> np.ndarray:
    """Jacobi-Trudi evaluation with array-valued variables (broadcasting).

    xs is a list of mutually broadcastable arrays, one per variable; the
    result has their broadcast shape.  Used to build oracle observables on
    tensor quadrature grids.
    """
    n_vars = len(xs)
    if lam.length > n_vars:
        return np.zeros(np.broadcast_shapes(*[np.shape(x) for x in xs]))
    ell = lam.length
    if ell == 0:
        return np.ones(np.broadcast_shapes(*[np.shape(x) for x in xs]))
    kmax = lam.part(1) + ell
    shape = np.broadcast_shapes(*[np.shape(x) for x in xs])
    p = [np.full(shape, float(n_vars), dtype=float)]
    powers = [np.broadcast_to(np.asarray(x, float), shape).copy() for x in xs]
    for k in range(1, kmax + 1):
        if k > 1:
            powers = [pw * np.broadcast_to(np.asarray(x, float), shape)
                      for pw, x in zip(powers, xs)]
        p.append(sum(powers))
    h = [np.ones(shape)]
    for k in range(1, kmax + 1):
        h.append(sum(p[i] * h[k - i] for i in range(1, k + 1)) / k)

    def h_at(k):
        return np.zeros(shape) if k < 0 else h[k]

    mat = np.empty(shape + (ell, ell))
    for i in range(1, ell + 1):
        for j in range(1, ell + 1):
            mat[..., i - 1, j - 1] = h_at(lam.part(i) - i + j)
    return np.linalg.det(mat)


def schur_eval_bialternant(lam: Partition, xs: Sequence[complex]) -> complex:
    """s_lambda = det(x_i^{lam_j + N - j}) / det(x_i^{N - j})."""
    xs = np.asarray(list(xs), dtype=complex)
    n_vars = len(xs)
    if lam.length > n_vars:
        return 0.0 + 0.0j
    for i in range(n_vars):
        for j in range(i + 1, n_vars):
            if xs[i] == xs[j]:
                raise CoincidingVariables(f"coinciding variables {xs[i]}")
    num = np.array(
        [[x ** (lam.part(j) + n_vars - j) for j in range(1, n_vars + 1)] for x in xs],
        dtype=complex,
    )
    den = np.array(
        [[x ** (n_vars - j) for j in range(1, n_vars + 1)] for x in xs],
        dtype=complex,
    )
    return complex(np.linalg.det(num) / np.linalg.det(den))


def charpoly_product_via_schur(zs: Sequence[complex], xs: Sequence[complex]) -> complex:
    """prod_a det(z_a - X) expanded over the (M^N) box:

        sum_{lam in box} (-1)^{|lam|} s_{lam^dual}(Z) s_lam(X),

    with the dual taken in the box of width M and height N.  Finite and
    exact; used as an identity check against the direct product.
    """
    zs = list(zs)
    xs = list(xs)
    m, n = len(zs), len(xs)
    total = 0.0 + 0.0j
    for lam in partitions_in_box(m, n):
        dual = dual_partition(lam, m, n)
        total += (-1) ** lam.weight * schur_eval_jt(dual, zs) * schur_eval_jt(lam, xs)
    return total


def inverse_charpoly_truncated(zs: Sequence[complex], xs: Sequence[complex],
                               max_weight: int = 20) -> complex:
    """Truncated Schur expansion of prod_a det(z_a - X)^{-1}.

    Test utility only: the exact expansion is an infinite sum over partitions
    with at most M = len(zs) rows,

        prod_a z_a^{-N} sum_lam s_lam(1/Z) s_lam(X),

    truncated here at |lam| <= max_weight.
    """
    zs = np.asarray(list(zs), dtype=complex)
    xs = list(xs)
    m, n = len(zs), len(xs)
    inv_z = list(1.0 / zs)
    pref = np.prod(zs ** (-float(n)))
    total = 0.0 + 0.0j

    def gen(prefix, maxpart, rows_left, budget):
        yield Partition(prefix)
        if rows_left == 0:
            return
        for p in range(min(maxpart, budget), 0, -1):
            yield from gen(prefix + [p], p, rows_left - 1, budget - p)

    for lam in gen([], max_weight, m, max_weight):
        total += schur_eval_jt(lam, inv_z) * schur_eval_jt(lam, xs)
    return complex(pref * total)
