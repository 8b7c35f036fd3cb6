"""Simulated annealing over supplier-rank permutations, plus an exhaustive oracle."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, replace

from . import kernel
from .errors import (
    DegenerateProblemError,
    InfeasibleInitialError,
    InsufficientCapacityError,
    NonPositiveTemperatureError,
    SsoptError,
    TooLargeError,
    UnknownModeError,
)
from .model import (
    MODES,
    CostBreakdown,
    OrderPlan,
    ProblemInstance,
    allocate,
    compile_instance,
    supplier_order,
    total_cost,
)
from .rng import MASK64, Xoshiro256

BRUTE_FORCE_MAX_SUPPLIERS = 10


@dataclass(frozen=True)
class SaParams:
    t_init: float = 30.0
    alpha: float = 0.75
    markov_len: int = 20
    t_min: float = 1e-3
    max_iters: int = 1000
    stagnation_limit: int = 50
    seed: int = 42

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise SsoptError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.markov_len < 1:
            raise SsoptError("markov_len must be at least 1")
        if not self.t_init > self.t_min >= 0:
            raise SsoptError(f"need t_init > t_min >= 0, got {self.t_init}, {self.t_min}")
        if self.max_iters < 0 or self.stagnation_limit < 0:
            raise SsoptError("max_iters and stagnation_limit must be nonnegative")
        if not 0 <= int(self.seed) <= MASK64:
            raise SsoptError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class RankSolution:
    """``ranks[i]`` is the rank (1 = best) of supplier ``i``."""

    ranks: tuple

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))
        n = len(self.ranks)
        if sorted(self.ranks) != list(range(1, n + 1)):
            raise SsoptError(f"{list(self.ranks)} is not a permutation of 1..{n}")

    def __len__(self):
        return len(self.ranks)

    def order(self):
        return supplier_order(self.ranks)

    @classmethod
    def from_order(cls, order, n=None):
        """Ranks with the given supplier indices first, the rest in index order."""
        n = len(order) if n is None else n
        seq = list(order) + [i for i in range(n) if i not in order]
        ranks = [0] * n
        for pos, i in enumerate(seq, start=1):
            ranks[i] = pos
        return cls(tuple(ranks))


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    temperature: float
    current_score: float
    best_score: float
    accepted: bool


@dataclass(frozen=True)
class SearchTrace:
    records: tuple
    iterations: int
    wall_time: float
    backend: str

    def best_series(self):
        return [r.best_score for r in self.records]

    def to_csv_rows(self):
        yield ("iter", "temperature", "current_score", "best_score", "accepted")
        for r in self.records:
            yield (r.iteration, repr(r.temperature), repr(r.current_score),
                   repr(r.best_score), int(r.accepted))


@dataclass(frozen=True)
class SolveResult:
    best: RankSolution
    plan: OrderPlan
    breakdown: CostBreakdown
    score: float
    initial_breakdown: CostBreakdown
    trace: SearchTrace
    params: SaParams = field(default_factory=SaParams)
    mode: str = "min-cost"


@dataclass(frozen=True)
class BruteForceResult:
    ranks: RankSolution
    plan: OrderPlan
    breakdown: CostBreakdown
    enumerated: int
    feasible: int


def exchange_move(s: RankSolution, rng: Xoshiro256) -> RankSolution:
    """Swap the ranks of two distinct, uniformly chosen suppliers."""
    n = len(s)
    if n < 2:
        raise DegenerateProblemError("exchange move needs at least two suppliers")
    i = rng.below(n)
    j = rng.below(n)
    while j == i:
        j = rng.below(n)
    ranks = list(s.ranks)
    ranks[i], ranks[j] = ranks[j], ranks[i]
    return RankSolution(tuple(ranks))


def swap(s: RankSolution, i: int, j: int) -> RankSolution:
    ranks = list(s.ranks)
    ranks[i], ranks[j] = ranks[j], ranks[i]
    return RankSolution(tuple(ranks))


def metropolis(delta: float, t: float, r: float) -> bool:
    if t <= 0:
        raise NonPositiveTemperatureError(f"temperature must be positive, got {t}")
    if delta >= 0:
        return True
    return math.exp(delta / t) > r


def cool(t: float, alpha: float) -> float:
    if t <= 0:
        raise NonPositiveTemperatureError(f"temperature must be positive, got {t}")
    return alpha * t


def solve(inst: ProblemInstance, s0: RankSolution, params: SaParams = SaParams(),
          mode: str = "min-cost", k: int | None = None) -> SolveResult:
    """Anneal from ``s0``; the best solution seen (``s0`` included) is returned.

    Per temperature level ``markov_len`` exchange moves are evaluated. A move
    that beats the best is taken; one that ties it is taken and counts as
    stagnation; a worse one faces the Metropolis test. Neighbours whose top-k
    suppliers cannot cover demand are rejected. The stagnation counter
    resets only when the best improves, so it counts consecutive
    non-improving evaluations. The run ends when the temperature drops below
    ``t_min``, when the counter reaches ``stagnation_limit``, or after
    ``max_iters`` evaluations.
    """
    if mode not in MODES:
        raise UnknownModeError(f"unknown objective mode {mode!r}; choose from {MODES}")
    if not isinstance(s0, RankSolution):
        s0 = RankSolution(tuple(s0))
    if len(s0) != inst.n_suppliers:
        raise SsoptError(f"initial solution has {len(s0)} ranks for {inst.n_suppliers} suppliers")
    k = inst.k_select if k is None else k
    try:
        initial_plan = allocate(inst, s0.ranks, k)
    except InsufficientCapacityError as exc:
        raise InfeasibleInitialError(f"initial solution is infeasible: {exc}") from exc
    initial = total_cost(inst, initial_plan)
    if inst.n_suppliers < 2 and params.max_iters > 0 and params.stagnation_limit > 0:
        raise DegenerateProblemError("annealing needs at least two suppliers")

    ci = compile_instance(inst, k)
    backend = kernel.backend_for(ci)
    t0 = time.perf_counter()
    best, best_score, temps, curs, bests, accs = backend.run_chain(
        ci, list(s0.ranks),
        t_init=float(params.t_init), alpha=float(params.alpha),
        markov_len=int(params.markov_len), t_min=float(params.t_min),
        max_iters=int(params.max_iters), stagnation_limit=int(params.stagnation_limit),
        seed=int(params.seed), mode=MODES.index(mode), c_ref=int(initial.total),
    )
    wall = time.perf_counter() - t0

    records = tuple(
        TraceRecord(i, t, c, b, bool(a)) for i, (t, c, b, a) in enumerate(zip(temps, curs, bests, accs))
    )
    trace = SearchTrace(records, len(records) - 1, wall,
                        "cython" if backend is not kernel._kernel_py else "python")
    best_sol = RankSolution(tuple(best))
    plan = allocate(inst, best_sol.ranks, k)
    return SolveResult(best_sol, plan, total_cost(inst, plan), best_score, initial, trace,
                       params, mode)


def evaluate_initial(inst: ProblemInstance, s0: RankSolution, mode: str = "min-cost",
                     k: int | None = None) -> SolveResult:
    """The initial ranking as a zero-iteration result (no annealing)."""
    params = SaParams(max_iters=0)
    return solve(inst, s0, params, mode, k)


def brute_force(inst: ProblemInstance, k: int | None = None) -> BruteForceResult:
    """Enumerate every ordered choice of ``k`` suppliers; keep the cheapest plan.

    Ties go to the lexicographically smallest tuple of supplier ids in
    visiting order.
    """
    n = inst.n_suppliers
    if n > BRUTE_FORCE_MAX_SUPPLIERS:
        raise TooLargeError(f"brute force limited to {BRUTE_FORCE_MAX_SUPPLIERS} suppliers, got {n}")
    k = inst.k_select if k is None else k
    if not 1 <= k <= n:
        raise SsoptError(f"k = {k} outside 1..{n}")
    ids = inst.supplier_ids
    best = None
    count = feasible = 0
    for sel in itertools.permutations(range(n), k):
        count += 1
        ranks = RankSolution.from_order(sel, n)
        try:
            plan = allocate(inst, ranks.ranks, k)
        except InsufficientCapacityError:
            continue
        feasible += 1
        b = total_cost(inst, plan)
        key = (b.total, tuple(ids[i] for i in sel))
        if best is None or key < best[0]:
            best = (key, ranks, plan, b)
    if best is None:
        raise SsoptError(f"no selection of {k} suppliers covers demand")
    _, ranks, plan, b = best
    return BruteForceResult(ranks, plan, b, count, feasible)


def with_seed(params: SaParams, seed: int) -> SaParams:
    return replace(params, seed=seed)
