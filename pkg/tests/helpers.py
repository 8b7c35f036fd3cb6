"""Shared test helpers: random instances and an exact Fraction cost oracle."""

import math
import random
from fractions import Fraction

from ssopt.model import Material, ProblemInstance, make_supplier


def random_instance(rnd: random.Random, n=None, k=None, materials=1, decimals=True):
    n = n or rnd.randint(2, 6)
    k = k or rnd.randint(1, min(3, n))
    mats = [f"m{j}" for j in range(materials)]
    sups = []
    for i in range(n):
        def pick(lo, hi, places):
            v = rnd.uniform(lo, hi)
            return round(v, places) if decimals else round(v)
        sups.append(make_supplier(
            f"v{i + 1}",
            {m: rnd.randint(50, 400) for m in mats},
            {m: pick(40, 80, 2) for m in mats},
            {m: pick(0, 8, 1) for m in mats},
            {m: pick(0, 6, 2) for m in mats},
            mats,
        ))
    # demand must be coverable by the k largest suppliers for some ranking
    demand = []
    for m in mats:
        caps = sorted((int(s.capacity[m]) for s in sups), reverse=True)
        demand.append(Material(m, rnd.randint(1, sum(caps[:k]))))
    return ProblemInstance(tuple(demand), tuple(sups), rnd.choice([0, 1000, 50_000, 250_000]),
                           k_select=k)


def _half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def oracle_cost(inst, quantities):
    """Exact totals from first principles; ``quantities[(material, supplier)]`` in tons."""
    pc = Fraction(0)
    defects = days = 0
    for mat in inst.materials:
        for s in inst.suppliers:
            q = Fraction(str(quantities.get((mat.id, s.id), 0)))
            pc += Fraction(str(s.unit_cost[mat.id])) * q * 1000
            defects += _half_up(q * Fraction(str(s.defect_pct[mat.id])) / 100)
            days += math.ceil(q * Fraction(str(s.delay_pct[mat.id])) / 100)
    pc = _half_up(pc)
    quality = 7 * inst.delay_cost_rate if defects > 0 else 0
    delay = days * inst.delay_cost_rate
    total = pc + quality + delay
    fit = (Fraction(total, total + quality) * Fraction(str(inst.weight1))
           + Fraction(total, total + delay) * Fraction(str(inst.weight2)))
    return {"procurement": pc, "defects": defects, "days": days, "quality": quality,
            "delay": delay, "total": total, "fitness": float(fit)}


def oracle_allocate(inst, ranks, k):
    order = sorted(range(len(ranks)), key=lambda i: ranks[i])[:k]
    out = {}
    for mat in inst.materials:
        left = mat.demand
        for i in order:
            s = inst.suppliers[i]
            q = min(s.capacity[mat.id], left)
            if q > 0:
                out[(mat.id, s.id)] = q
            left -= q
        if left > 0:
            return None
    return out
