"""Taguchi L9 tuning of the annealer: design, runs, ANOVA, response table."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import betainc

from .annealing import RankSolution, SaParams, solve
from .errors import NonPositiveResponseError, SsoptError
from .rng import derive_seed

FACTORS = ("t_init", "alpha", "markov_len")

# columns 1-3 of the standard L9(3^4) array
L9_ROWS = (
    (1, 1, 1), (1, 2, 2), (1, 3, 3),
    (2, 1, 2), (2, 2, 3), (2, 3, 1),
    (3, 1, 3), (3, 2, 1), (3, 3, 2),
)


@dataclass(frozen=True)
class FactorLevels:
    t_init: tuple = (10.0, 20.0, 30.0)
    alpha: tuple = (0.75, 0.85, 0.95)
    markov_len: tuple = (20, 30, 40)

    def __post_init__(self):
        for name in FACTORS:
            vals = getattr(self, name)
            if len(vals) != 3:
                raise SsoptError(f"{name}: exactly three levels required, got {len(vals)}")
            if len(set(vals)) != 3:
                raise SsoptError(f"{name}: levels must be distinct")
        if not all(0 < a <= 1 for a in self.alpha):
            raise SsoptError("alpha levels must lie in (0, 1]")
        if not all(t > 0 for t in self.t_init):
            raise SsoptError("t_init levels must be positive")
        if not all(int(m) == m and m >= 1 for m in self.markov_len):
            raise SsoptError("markov_len levels must be positive integers")

    def value(self, factor, level):
        return getattr(self, factor)[level - 1]


@dataclass(frozen=True)
class L9Design:
    levels: FactorLevels
    rows: tuple = L9_ROWS

    def settings(self):
        """Factor values per experiment, in row order."""
        return [
            {f: self.levels.value(f, lv) for f, lv in zip(FACTORS, row)}
            for row in self.rows
        ]

    def column(self, factor):
        return np.array([row[FACTORS.index(factor)] for row in self.rows])


@dataclass(frozen=True)
class AnovaRow:
    source: str
    df: int
    ss: float
    ms: float | None = None
    f: float | None = None
    p: float | None = None


@dataclass(frozen=True)
class AnovaTable:
    factors: tuple  # AnovaRow per factor
    residual: AnovaRow
    total: AnovaRow

    def row(self, factor):
        for r in self.factors:
            if r.source == factor:
                return r
        raise KeyError(factor)


@dataclass(frozen=True)
class ResponseTable:
    level_means: dict  # factor -> (mean at level 1, 2, 3)
    deltas: dict
    ranks: dict
    recommended_levels: dict  # factor -> level index
    recommended_values: dict


def build_l9(levels: FactorLevels = FactorLevels()) -> L9Design:
    return L9Design(levels)


def _base_params(base):
    return SaParams() if base is None else base


def run_experiments(inst, design: L9Design, replicates: int = 1, base_seed: int = 42, *,
                    initial: RankSolution, mode: str = "min-cost",
                    base_params: SaParams | None = None, workers: int = 1) -> np.ndarray:
    """Final best score of one annealing run per (experiment, replicate).

    Seeds derive from ``(row, replicate)`` only, so the matrix does not depend
    on ``workers`` or on execution order.
    """
    if replicates < 1:
        raise SsoptError("replicates must be at least 1")
    base = _base_params(base_params)
    jobs = []
    for row, setting in enumerate(design.settings()):
        for rep in range(replicates):
            params = replace(
                base,
                t_init=float(setting["t_init"]),
                alpha=float(setting["alpha"]),
                markov_len=int(setting["markov_len"]),
                seed=derive_seed(base_seed, row, rep),
            )
            jobs.append((row, rep, params))

    def run(job):
        return solve(inst, initial, job[2], mode).score

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(run, jobs))
    else:
        scores = [run(j) for j in jobs]
    out = np.empty((len(design.rows), replicates))
    for (row, rep, _), s in zip(jobs, scores):
        out[row, rep] = s
    return out


def sn_ratio_ltb(responses) -> float:
    """Larger-the-better signal-to-noise ratio in decibels."""
    y = np.atleast_1d(np.asarray(responses, dtype=float))
    if y.size == 0 or np.any(y <= 0):
        raise NonPositiveResponseError("S/N (larger-the-better) needs strictly positive responses")
    return float(-10.0 * math.log10(np.mean(1.0 / y**2)))


def f_survival(f: float, d1: int, d2: int) -> float:
    """Upper tail ``P(F(d1, d2) > f)`` via the regularized incomplete beta function."""
    if f < 0 or d1 < 1 or d2 < 1:
        raise ValueError("need f >= 0 and positive degrees of freedom")
    if f == 0:
        return 1.0
    x = d2 / (d2 + d1 * f)
    return float(betainc(d2 / 2.0, d1 / 2.0, x))


def _row_means(responses):
    y = np.asarray(responses, dtype=float)
    if y.ndim == 2:
        y = y.mean(axis=1)
    if y.shape != (9,):
        raise SsoptError(f"expected 9 responses, got shape {np.shape(responses)}")
    return y


def anova(design: L9Design, responses) -> AnovaTable:
    """Main-effects ANOVA on raw responses (replicates averaged per row).

    With three 3-level factors in 9 runs the residual keeps 2 degrees of
    freedom. A zero residual leaves F and p undefined (``None``).
    """
    y = _row_means(responses)
    grand = y.mean()
    ss_total = float(((y - grand) ** 2).sum())
    rows = []
    for factor in FACTORS:
        col = design.column(factor)
        means = [y[col == lv].mean() for lv in (1, 2, 3)]
        ss = float(3 * sum((m - grand) ** 2 for m in means))
        rows.append((factor, ss))
    ss_res = max(ss_total - sum(ss for _, ss in rows), 0.0)
    df_res = 8 - 2 * len(FACTORS)
    ms_res = ss_res / df_res
    # below this the residual is rounding noise and F would be meaningless
    zero_tol = 1e-24 * max(1.0, float((y**2).sum())) + 1e-12 * ss_total
    table = []
    for factor, ss in rows:
        ms = ss / 2
        if ss_res > zero_tol:
            f = ms / ms_res
            table.append(AnovaRow(factor, 2, ss, ms, f, f_survival(f, 2, df_res)))
        else:
            table.append(AnovaRow(factor, 2, ss, ms, None, None))
    return AnovaTable(
        tuple(table),
        AnovaRow("residual", df_res, ss_res, ms_res),
        AnovaRow("total", 8, ss_total),
    )


def response_table(design: L9Design, responses) -> ResponseTable:
    y = _row_means(responses)
    means, deltas = {}, {}
    for factor in FACTORS:
        col = design.column(factor)
        m = tuple(float(y[col == lv].mean()) for lv in (1, 2, 3))
        means[factor] = m
        deltas[factor] = max(m) - min(m)
    order = sorted(FACTORS, key=lambda f: (-deltas[f], FACTORS.index(f)))
    ranks = {f: order.index(f) + 1 for f in FACTORS}
    rec = {f: int(np.argmax(means[f])) + 1 for f in FACTORS}
    values = {f: design.levels.value(f, rec[f]) for f in FACTORS}
    return ResponseTable(means, deltas, ranks, rec, values)


def main_effects(design: L9Design, responses):
    """``(factor, level, value, mean)`` rows: the series behind a main-effects plot."""
    rt = response_table(design, responses)
    for f in FACTORS:
        for lv in (1, 2, 3):
            yield f, lv, design.levels.value(f, lv), rt.level_means[f][lv - 1]


def sn_ratios(responses):
    y = np.asarray(responses, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    return [sn_ratio_ltb(row) for row in y]
