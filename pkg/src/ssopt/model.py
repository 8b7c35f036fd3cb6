"""Procurement cost model: allocation from a ranking, cost accounting, constraints.

Quantities are metric tons, unit costs are money per kilogram, and every
monetary amount is an ``int`` of whole currency units. Arithmetic runs on
``Decimal`` so the case-study tables reproduce exactly; rounding happens
once, at the points the model defines:

* defective tons per (material, supplier) cell: round half up
* delay days per cell: ceiling
* procurement cost: exact sum, then round half up to a whole unit
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_CEILING, ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

import numpy as np

from .errors import InsufficientCapacityError, SsoptError, UnknownModeError

KG_PER_TON = 1000
REPLACEMENT_DAYS = 7
MODES = ("min-cost", "paper-fitness")


def to_decimal(x) -> Decimal:
    if isinstance(x, Decimal):
        return x
    if isinstance(x, float):
        return Decimal(repr(x))
    return Decimal(x)


def _per_material(value, materials, what, sid):
    if isinstance(value, Mapping):
        missing = [m for m in materials if m not in value]
        if missing:
            raise SsoptError(f"supplier {sid!r}: {what} missing for materials {missing}")
        return {m: to_decimal(value[m]) for m in materials}
    return {m: to_decimal(value) for m in materials}


@dataclass(frozen=True)
class Material:
    id: str
    demand: Decimal

    def __post_init__(self):
        object.__setattr__(self, "demand", to_decimal(self.demand))
        if self.demand < 0:
            raise SsoptError(f"material {self.id!r}: negative demand")


@dataclass(frozen=True)
class SupplierOffer:
    """One supplier's terms. Scalars apply to every material; mappings are per material."""

    id: str
    capacity: Mapping[str, Decimal]
    unit_cost: Mapping[str, Decimal]
    defect_pct: Mapping[str, Decimal]
    delay_pct: Mapping[str, Decimal]

    def check(self):
        for m in self.capacity:
            if self.capacity[m] < 0:
                raise SsoptError(f"supplier {self.id!r}: negative capacity for {m!r}")
            if self.unit_cost[m] <= 0:
                raise SsoptError(f"supplier {self.id!r}: unit cost must be positive")
            for name, pct in (("defect_pct", self.defect_pct[m]), ("delay_pct", self.delay_pct[m])):
                if not 0 <= pct <= 100:
                    raise SsoptError(f"supplier {self.id!r}: {name} {pct} outside [0, 100]")


def make_supplier(id, capacity, unit_cost, defect_pct, delay_pct, materials) -> SupplierOffer:
    s = SupplierOffer(
        id=id,
        capacity=_per_material(capacity, materials, "capacity", id),
        unit_cost=_per_material(unit_cost, materials, "unit_cost", id),
        defect_pct=_per_material(defect_pct, materials, "defect_pct", id),
        delay_pct=_per_material(delay_pct, materials, "delay_pct", id),
    )
    s.check()
    return s


@dataclass(frozen=True)
class ProblemInstance:
    materials: tuple
    suppliers: tuple
    delay_cost_rate: int
    weight1: float = 0.3
    weight2: float = 0.7
    k_select: int = 3
    # ((supplier, tons), ...) -> total as printed in a source table, for reports
    published_totals: tuple = ()

    def __post_init__(self):
        if abs(self.weight1 + self.weight2 - 1.0) > 1e-12:
            raise SsoptError(f"weights must sum to 1, got {self.weight1} + {self.weight2}")
        if self.k_select < 1:
            raise SsoptError("k_select must be at least 1")
        if self.delay_cost_rate < 0:
            raise SsoptError("delay cost rate must be nonnegative")
        if not self.suppliers:
            raise SsoptError("instance has no suppliers")
        ids = [s.id for s in self.suppliers]
        if len(set(ids)) != len(ids):
            raise SsoptError("duplicate supplier ids")

    @property
    def n_suppliers(self) -> int:
        return len(self.suppliers)

    @property
    def supplier_ids(self) -> list:
        return [s.id for s in self.suppliers]


@dataclass(frozen=True)
class OrderPlan:
    """``quantities[material][supplier]`` in tons, every supplier present."""

    quantities: Mapping[str, Mapping[str, Decimal]]
    source_rank: tuple = ()

    def active_suppliers(self, material=None) -> list:
        mats = [material] if material is not None else list(self.quantities)
        seen = []
        for m in mats:
            for sid, q in self.quantities[m].items():
                if q > 0 and sid not in seen:
                    seen.append(sid)
        return seen

    def supplier_totals(self) -> dict:
        out = {}
        for row in self.quantities.values():
            for sid, q in row.items():
                out[sid] = out.get(sid, Decimal(0)) + q
        return out


@dataclass(frozen=True)
class CostBreakdown:
    procurement: int
    defective_units: int
    delay_days: int
    quality_cost: int
    delay_cost: int
    noncompliance: int
    total: int
    fitness: float
    supplier_cost: Mapping[str, int] = field(default_factory=dict)
    supplier_defects: Mapping[str, int] = field(default_factory=dict)
    supplier_delay: Mapping[str, int] = field(default_factory=dict)


def _round_half_up(x: Decimal) -> int:
    return int(x.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def _ceil(x: Decimal) -> int:
    return int(x.quantize(Decimal(1), rounding=ROUND_CEILING))


def supplier_order(ranks: Sequence[int]) -> list:
    """Supplier indices sorted best rank first; ``ranks[i]`` is supplier ``i``'s rank."""
    n = len(ranks)
    if sorted(ranks) != list(range(1, n + 1)):
        raise SsoptError(f"ranks {list(ranks)} are not a permutation of 1..{n}")
    order = [0] * n
    for i, r in enumerate(ranks):
        order[r - 1] = i
    return order


def allocate(inst: ProblemInstance, ranks: Sequence[int], k: int | None = None) -> OrderPlan:
    """Fill each material's demand greedily from the ``k`` best-ranked suppliers."""
    k = inst.k_select if k is None else k
    if len(ranks) != inst.n_suppliers:
        raise SsoptError(f"{len(ranks)} ranks for {inst.n_suppliers} suppliers")
    if not 1 <= k <= inst.n_suppliers:
        raise SsoptError(f"k = {k} outside 1..{inst.n_suppliers}")
    top = supplier_order(ranks)[:k]
    quantities = {}
    for mat in inst.materials:
        row = {s.id: Decimal(0) for s in inst.suppliers}
        remaining = mat.demand
        for idx in top:
            if remaining <= 0:
                break
            s = inst.suppliers[idx]
            q = min(s.capacity[mat.id], remaining)
            row[s.id] = q
            remaining -= q
        if remaining > 0:
            raise InsufficientCapacityError(mat.id, mat.demand, mat.demand - remaining)
        quantities[mat.id] = row
    return OrderPlan(quantities, tuple(ranks))


def _cells(inst, plan):
    for mat in inst.materials:
        row = plan.quantities[mat.id]
        for s in inst.suppliers:
            yield mat.id, s, to_decimal(row.get(s.id, 0))


def procurement_cost(inst: ProblemInstance, plan: OrderPlan) -> int:
    exact = sum((s.unit_cost[m] * q * KG_PER_TON for m, s, q in _cells(inst, plan)), Decimal(0))
    return _round_half_up(exact)


def defective_units(inst: ProblemInstance, plan: OrderPlan):
    """Per-supplier defective tons (each cell rounded half up) and their total."""
    per = {s.id: 0 for s in inst.suppliers}
    for m, s, q in _cells(inst, plan):
        per[s.id] += _round_half_up(q * s.defect_pct[m] / 100)
    return per, sum(per.values())


def delay_days(inst: ProblemInstance, plan: OrderPlan):
    """Per-supplier late days (each cell rounded up) and their total."""
    per = {s.id: 0 for s in inst.suppliers}
    for m, s, q in _cells(inst, plan):
        per[s.id] += _ceil(q * s.delay_pct[m] / 100)
    return per, sum(per.values())


def noncompliance_cost(defects: int, dd: int, cd: int):
    """Return ``(quality_cost, delay_cost, total)``.

    A substandard delivery costs a fixed replacement week; a clean one costs nothing.
    """
    quality = REPLACEMENT_DAYS * cd if defects > 0 else 0
    delay = dd * cd
    return quality, delay, quality + delay


def fitness_value(total: int, quality_cost: int, delay_cost: int, w1: float, w2: float) -> float:
    if total <= 0:
        raise SsoptError("fitness undefined for a non-positive total cost")
    return total / (total + quality_cost) * w1 + total / (total + delay_cost) * w2


def fitness(breakdown: CostBreakdown, w1: float, w2: float) -> float:
    return fitness_value(breakdown.total, breakdown.quality_cost, breakdown.delay_cost, w1, w2)


def total_cost(inst: ProblemInstance, plan: OrderPlan) -> CostBreakdown:
    per_cost = {s.id: Decimal(0) for s in inst.suppliers}
    for m, s, q in _cells(inst, plan):
        per_cost[s.id] += s.unit_cost[m] * q * KG_PER_TON
    pc = procurement_cost(inst, plan)
    per_def, qd = defective_units(inst, plan)
    per_delay, dd = delay_days(inst, plan)
    quality, delay, qc = noncompliance_cost(qd, dd, inst.delay_cost_rate)
    total = pc + qc
    fit = fitness_value(total, quality, delay, inst.weight1, inst.weight2) if total > 0 else 1.0
    return CostBreakdown(
        procurement=pc,
        defective_units=qd,
        delay_days=dd,
        quality_cost=quality,
        delay_cost=delay,
        noncompliance=qc,
        total=total,
        fitness=fit,
        supplier_cost={k: _round_half_up(v) for k, v in per_cost.items()},
        supplier_defects=per_def,
        supplier_delay=per_delay,
    )


def objective_score(inst: ProblemInstance, plan: OrderPlan, mode: str = "min-cost",
                    reference_total: int | None = None) -> float:
    """Maximize-direction score of a plan.

    ``min-cost`` returns ``reference_total / total`` (1.0 when the plan is its
    own reference); ``paper-fitness`` returns the weighted fitness.
    """
    if mode not in MODES:
        raise UnknownModeError(f"unknown objective mode {mode!r}; choose from {MODES}")
    b = total_cost(inst, plan)
    if mode == "paper-fitness":
        return b.fitness
    ref = b.total if reference_total is None else reference_total
    return ref / b.total


@dataclass(frozen=True)
class Violation:
    kind: str  # "capacity" | "demand" | "surplus"
    material: str
    supplier: str | None
    amount: Decimal

    @property
    def is_warning(self) -> bool:
        return self.kind == "surplus"

    def __str__(self):
        if self.kind == "capacity":
            return f"supplier {self.supplier!r} exceeds capacity for {self.material!r} by {self.amount}"
        if self.kind == "demand":
            return f"material {self.material!r} short of demand by {self.amount}"
        return f"material {self.material!r} over-supplied by {self.amount}"


def check_feasible(inst: ProblemInstance, plan: OrderPlan) -> list:
    """Every capacity breach and demand shortfall; surplus shows up as a warning entry.

    An empty list (or one holding only warnings) means feasible.
    """
    out = []
    for mat in inst.materials:
        row = plan.quantities.get(mat.id, {})
        got = Decimal(0)
        for s in inst.suppliers:
            q = to_decimal(row.get(s.id, 0))
            got += q
            if q < 0:
                out.append(Violation("capacity", mat.id, s.id, q))
            elif q > s.capacity[mat.id]:
                out.append(Violation("capacity", mat.id, s.id, q - s.capacity[mat.id]))
        if got < mat.demand:
            out.append(Violation("demand", mat.id, None, mat.demand - got))
        elif got > mat.demand:
            out.append(Violation("surplus", mat.id, None, got - mat.demand))
    return out


def is_feasible(inst: ProblemInstance, plan: OrderPlan) -> bool:
    return not any(not v.is_warning for v in check_feasible(inst, plan))


# --- integer form for the search kernels ---------------------------------

_INT64_SAFE = 1 << 62


def _decimals(values) -> int:
    return max((max(0, -v.normalize().as_tuple().exponent) for v in values), default=0)


@dataclass(frozen=True)
class CompiledInstance:
    """Instance scaled to int64 so the kernels evaluate plans exactly.

    Quantities are in units of ``10**-q_exp`` tons. For a cell receiving ``q``
    units: procurement contributes ``cost[j, k] * q / cost_den`` money,
    defects ``defect[j, k] * q / defect_den`` tons, delay
    ``delay[j, k] * q / delay_den`` days.
    """

    capacity: np.ndarray  # (materials, suppliers)
    demand: np.ndarray
    cost: np.ndarray
    defect: np.ndarray
    delay: np.ndarray
    cost_den: int
    defect_den: int
    delay_den: int
    delay_cost_rate: int
    k: int
    weight1: float
    weight2: float
    native_safe: bool


def compile_instance(inst: ProblemInstance, k: int | None = None) -> CompiledInstance:
    k = inst.k_select if k is None else k
    mats = [m.id for m in inst.materials]
    sups = inst.suppliers
    q_exp = _decimals([m.demand for m in inst.materials] + [s.capacity[m] for s in sups for m in mats])
    c_exp = _decimals([s.unit_cost[m] for s in sups for m in mats])
    d_exp = _decimals([s.defect_pct[m] for s in sups for m in mats])
    t_exp = _decimals([s.delay_pct[m] for s in sups for m in mats])
    qs, cs, ds, ts = 10 ** q_exp, 10 ** c_exp, 10 ** d_exp, 10 ** t_exp

    def grid(fn):
        return [[int(fn(s, m)) for s in sups] for m in mats]

    capacity = grid(lambda s, m: s.capacity[m] * qs)
    demand = [int(m.demand * qs) for m in inst.materials]
    cost = grid(lambda s, m: s.unit_cost[m] * cs * KG_PER_TON)
    defect = grid(lambda s, m: s.defect_pct[m] * ds)
    delay = grid(lambda s, m: s.delay_pct[m] * ts)
    cost_den, defect_den, delay_den = cs * qs, 100 * ds * qs, 100 * ts * qs

    cap_max = max((max(r) for r in capacity), default=0)
    worst_pc = sum(max(r) for r in cost) * max(cap_max, max(demand, default=0))
    worst_days = sum(max(r) for r in delay) * cap_max // delay_den + len(mats) * len(sups)
    safe = (
        worst_pc * 2 + cost_den < _INT64_SAFE
        and 2 * max((max(r) for r in defect), default=0) * cap_max + defect_den < _INT64_SAFE
        and max((max(r) for r in delay), default=0) * cap_max + delay_den < _INT64_SAFE
        and max(cost_den, defect_den, delay_den) < _INT64_SAFE
        # totals must stay exact as doubles for bit-identical scores
        and worst_pc // cost_den + (REPLACEMENT_DAYS + worst_days) * inst.delay_cost_rate < (1 << 52)
    )
    dtype = np.int64 if safe else object
    return CompiledInstance(
        capacity=np.array(capacity, dtype=dtype).reshape(len(mats), len(sups)),
        demand=np.array(demand, dtype=dtype),
        cost=np.array(cost, dtype=dtype).reshape(len(mats), len(sups)),
        defect=np.array(defect, dtype=dtype).reshape(len(mats), len(sups)),
        delay=np.array(delay, dtype=dtype).reshape(len(mats), len(sups)),
        cost_den=cost_den,
        defect_den=defect_den,
        delay_den=delay_den,
        delay_cost_rate=int(inst.delay_cost_rate),
        k=k,
        weight1=float(inst.weight1),
        weight2=float(inst.weight2),
        native_safe=safe,
    )
