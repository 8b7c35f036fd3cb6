"""Pairwise-comparison algebra for the Analytic Hierarchy Process.

Priority vectors come from repeated squaring of the judgment matrix: the
normalized row sums of ``A**(2**k)`` converge to the principal eigenvector.
Consistency uses ``RI = 1.98 (n - 2) / n`` rather than a lookup table.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    BadDiagonalError,
    BrokenReciprocityError,
    DimensionMismatchError,
    NoConvergenceError,
    NonPositiveEntryError,
    NonSquareError,
    NumericOverflowError,
    SaatyScaleWarning,
    SsoptError,
    ZeroWeightError,
)

RECIPROCITY_TOL = 1e-9
DEFAULT_TOL = 1e-9
DEFAULT_MAX_SQUARINGS = 50
CR_THRESHOLD = 0.1

_SAATY_VALUES = tuple(range(1, 10)) + tuple(1.0 / k for k in range(2, 10))


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PairwiseMatrix:
    entries: np.ndarray
    labels: tuple

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class PriorityVector:
    weights: np.ndarray
    squarings: int = 0

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]


@dataclass(frozen=True)
class ConsistencyReport:
    n: int
    lambda_max: float
    ci: float
    ri: float
    cr: float
    acceptable: bool
    ri_undefined: bool = False


@dataclass(frozen=True)
class Hierarchy:
    criteria_matrix: PairwiseMatrix
    alternative_matrices: tuple
    alternative_labels: tuple

    def __post_init__(self):
        if len(self.alternative_matrices) != self.criteria_matrix.n:
            raise DimensionMismatchError(
                f"{self.criteria_matrix.n} criteria but {len(self.alternative_matrices)} "
                "alternative matrices"
            )
        for crit, m in zip(self.criteria_matrix.labels, self.alternative_matrices):
            if m.n != len(self.alternative_labels) or tuple(m.labels) != tuple(self.alternative_labels):
                raise DimensionMismatchError(
                    f"alternative matrix for {crit!r} does not match the alternative labels"
                )


@dataclass(frozen=True)
class CompositeRanking:
    labels: tuple
    scores: np.ndarray
    ranks: tuple
    criteria_weights: PriorityVector
    alternative_weights: tuple = field(default=())

    def ordered(self):
        """Labels from best to worst."""
        return [lab for _, lab in sorted(zip(self.ranks, self.labels))]


def parse_judgment(value) -> Fraction:
    """Exact parse of a judgment given as int, float, or a string like ``"1/9"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def _on_saaty_scale(x):
    return any(math.isclose(x, s, rel_tol=1e-9) for s in _SAATY_VALUES)


def validate_pairwise(raw, labels=None) -> PairwiseMatrix:
    """Check a raw judgment matrix and wrap it as a :class:`PairwiseMatrix`.

    Off-scale judgments only warn (:class:`SaatyScaleWarning`); structural
    problems raise, naming the offending cell by label.
    """
    try:
        a = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise NonSquareError(f"matrix is not a rectangular numeric array: {exc}") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquareError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if n < 2:
        raise NonSquareError("matrix must be at least 2x2")
    labels = tuple(labels) if labels is not None else tuple(str(i + 1) for i in range(n))
    if len(labels) != n:
        raise DimensionMismatchError(f"{len(labels)} labels for a {n}x{n} matrix")

    for i in range(n):
        for j in range(n):
            if not (a[i, j] > 0) or not math.isfinite(a[i, j]):
                raise NonPositiveEntryError(
                    f"entry ({labels[i]}, {labels[j]}) = {a[i, j]} is not strictly positive"
                )
    for i in range(n):
        if a[i, i] != 1.0:
            raise BadDiagonalError(f"diagonal entry ({labels[i]}, {labels[i]}) = {a[i, i]}, expected 1")
    for i in range(n):
        for j in range(i + 1, n):
            if abs(a[i, j] * a[j, i] - 1.0) > RECIPROCITY_TOL:
                raise BrokenReciprocityError(
                    f"entries ({labels[i]}, {labels[j]}) = {a[i, j]:g} and "
                    f"({labels[j]}, {labels[i]}) = {a[j, i]:g} are not reciprocal"
                )
    off = [(labels[i], labels[j], a[i, j]) for i in range(n) for j in range(n)
           if i != j and not _on_saaty_scale(a[i, j])]
    if off:
        li, lj, v = off[0]
        warnings.warn(
            f"{len(off)} entries off the 1-9 scale, first ({li}, {lj}) = {v:g}",
            SaatyScaleWarning,
            stacklevel=2,
        )
    return PairwiseMatrix(_readonly(a), labels)


def from_weights(w, labels=None) -> PairwiseMatrix:
    """Perfectly consistent matrix ``a_ij = w_i / w_j``."""
    w = np.asarray(w, dtype=float)
    a = w[:, None] / w[None, :]
    np.fill_diagonal(a, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SaatyScaleWarning)
        return validate_pairwise(a, labels)


def _normalized_row_sums(a):
    rs = a.sum(axis=1)
    total = rs.sum()
    if not math.isfinite(total) or total <= 0:
        raise NumericOverflowError("row sums left the representable range")
    return rs / total


def _square(a):
    sq = a @ a
    peak = sq.max()
    if not math.isfinite(peak) or peak <= 0:
        raise NumericOverflowError("matrix power overflowed before normalization")
    return sq / peak


def principal_eigenvector(m: PairwiseMatrix, tol: float = DEFAULT_TOL,
                          max_sq: int = DEFAULT_MAX_SQUARINGS) -> PriorityVector:
    """Priority vector by repeated squaring.

    Each pass squares the (max-entry rescaled) matrix and normalizes its row
    sums; the loop stops once successive vectors differ by less than ``tol``
    in every component.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_sq < 1:
        raise ValueError("max_sq must be at least 1")
    a = _square(np.asarray(m.entries, dtype=float))
    prev = _normalized_row_sums(a)
    squarings = 1
    diff = math.inf
    while squarings < max_sq:
        a = _square(a)
        squarings += 1
        cur = _normalized_row_sums(a)
        diff = float(np.max(np.abs(cur - prev)))
        if diff < tol:
            return PriorityVector(_readonly(cur), squarings)
        prev = cur
    raise NoConvergenceError(
        f"max |D| = {diff:.3e} still >= {tol:g} after {max_sq} squarings"
    )


def lambda_max(m: PairwiseMatrix, pv: PriorityVector) -> float:
    x = np.asarray(pv.weights, dtype=float)
    if np.any(x <= 1e-15):
        raise ZeroWeightError("priority vector has a zero component; lambda_max undefined")
    return float(np.mean((m.entries @ x) / x))


def random_index(n: int) -> float:
    return 1.98 * (n - 2) / n


def consistency(m: PairwiseMatrix, pv: PriorityVector | None = None) -> ConsistencyReport:
    n = m.n
    if n == 2:
        # any 2x2 reciprocal matrix is consistent; RI = 0 makes CR undefined
        return ConsistencyReport(2, 2.0, 0.0, 0.0, 0.0, True, ri_undefined=True)
    if pv is None:
        pv = principal_eigenvector(m)
    lam = lambda_max(m, pv)
    ci = (lam - n) / (n - 1)
    ri = random_index(n)
    cr = ci / ri
    return ConsistencyReport(n, lam, ci, ri, cr, cr < CR_THRESHOLD)


def composite_scores(h: Hierarchy) -> CompositeRanking:
    """Weight each alternative's per-criterion priority by the criterion priority and sum."""
    cw = principal_eigenvector(h.criteria_matrix)
    alt = tuple(principal_eigenvector(m) for m in h.alternative_matrices)
    table = np.column_stack([pv.weights for pv in alt])
    scores = table @ cw.weights
    return CompositeRanking(
        labels=tuple(h.alternative_labels),
        scores=_readonly(scores),
        ranks=rank_descending(scores, h.alternative_labels),
        criteria_weights=cw,
        alternative_weights=alt,
    )


def rank_descending(scores: Sequence[float], labels: Sequence[str]) -> tuple:
    """Rank 1 = highest score; ties go to the lexicographically smaller label."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], labels[i]))
    ranks = [0] * len(scores)
    for pos, i in enumerate(order, start=1):
        ranks[i] = pos
    return tuple(ranks)


def fill_reciprocal(rows) -> list:
    """Expand judgment rows into a full matrix of Fractions.

    Accepts full rows, rows with ``None`` below the diagonal, or ragged upper
    triangles (row ``i`` holding ``n - i`` entries starting at the diagonal).
    """
    rows = [list(r) for r in rows]
    n = len(rows)
    if n and all(len(r) == n - i for i, r in enumerate(rows)) and any(len(r) != n for r in rows):
        rows = [[None] * i + r for i, r in enumerate(rows)]
    out = []
    for i, r in enumerate(rows):
        if len(r) != n:
            raise NonSquareError(f"row {i + 1} has {len(r)} entries, expected {n}")
        out.append([None if v is None else parse_judgment(v) for v in r])
    for i in range(n):
        for j in range(n):
            if out[i][j] is None:
                if i == j:
                    out[i][j] = Fraction(1)
                elif out[j][i] is None:
                    raise NonSquareError(f"cells ({i + 1}, {j + 1}) and ({j + 1}, {i + 1}) both missing")
                elif out[j][i] == 0:
                    raise NonPositiveEntryError(f"entry ({j + 1}, {i + 1}) is zero")
                else:
                    out[i][j] = 1 / out[j][i]
    return out


def _validate_named(name, rows, labels):
    try:
        full = fill_reciprocal(rows)
        return validate_pairwise([[float(v) for v in r] for r in full], labels)
    except (SsoptError, ZeroDivisionError, ValueError) as exc:
        cls = type(exc) if isinstance(exc, SsoptError) else NonPositiveEntryError
        raise cls(f"{name} matrix: {exc}") from exc


def build_hierarchy(criteria: Sequence[str], criteria_matrix, alternatives: Sequence[str],
                    alternative_matrices: Mapping[str, object]) -> Hierarchy:
    cm = _validate_named("criteria", criteria_matrix, criteria)
    missing = [c for c in criteria if c not in alternative_matrices]
    if missing:
        raise DimensionMismatchError(f"no alternative matrix for criteria {missing}")
    alts = tuple(_validate_named(repr(c), alternative_matrices[c], alternatives) for c in criteria)
    return Hierarchy(cm, alts, tuple(alternatives))
