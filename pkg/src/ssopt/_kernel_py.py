"""Pure-Python search kernel. ``_kernel.pyx`` mirrors this module line for line."""

import math

from .rng import Xoshiro256

MIN_COST = 0
PAPER_FITNESS = 1
REPLACEMENT_DAYS = 7


def evaluate(ci, ranks):
    """``(feasible, procurement, defective_units, delay_days)`` for a rank vector."""
    n = len(ranks)
    order = [0] * n
    for i in range(n):
        order[ranks[i] - 1] = i
    return _evaluate(_unpack(ci), order)


def _unpack(ci):
    return (
        [[int(v) for v in row] for row in ci.capacity],
        [int(v) for v in ci.demand],
        [[int(v) for v in row] for row in ci.cost],
        [[int(v) for v in row] for row in ci.defect],
        [[int(v) for v in row] for row in ci.delay],
        int(ci.cost_den), int(ci.defect_den), int(ci.delay_den), int(ci.k),
    )


def _evaluate(data, order):
    capacity, demand, cost, defect, delay, cost_den, defect_den, delay_den, k = data
    pc_num = 0
    defects = 0
    days = 0
    for j in range(len(demand)):
        remaining = demand[j]
        cap_j, cost_j, def_j, del_j = capacity[j], cost[j], defect[j], delay[j]
        for pos in range(k):
            if remaining <= 0:
                break
            s = order[pos]
            q = cap_j[s] if cap_j[s] < remaining else remaining
            remaining -= q
            pc_num += cost_j[s] * q
            defects += (2 * def_j[s] * q + defect_den) // (2 * defect_den)
            days += -((-del_j[s] * q) // delay_den)
        if remaining > 0:
            return False, 0, 0, 0
    return True, (2 * pc_num + cost_den) // (2 * cost_den), defects, days


def _score(pc, defects, days, cd, mode, c_ref, w1, w2):
    quality = REPLACEMENT_DAYS * cd if defects > 0 else 0
    delay = days * cd
    total = pc + quality + delay
    if total <= 0:
        return 1.0
    if mode == MIN_COST:
        return c_ref / total
    return total / (total + quality) * w1 + total / (total + delay) * w2


def run_chain(ci, ranks0, t_init, alpha, markov_len, t_min, max_iters,
              stagnation_limit, seed, mode, c_ref):
    """Run one annealing chain.

    Returns ``(best_ranks, best_score, temps, cur_scores, best_scores, accepted)``;
    record 0 is the initial solution.
    """
    data = _unpack(ci)
    cd, w1, w2 = int(ci.delay_cost_rate), float(ci.weight1), float(ci.weight2)
    n = len(ranks0)
    rng = Xoshiro256(seed)

    cur = [int(r) for r in ranks0]
    order = [0] * n
    for i in range(n):
        order[cur[i] - 1] = i
    ok, pc, qd, dd = _evaluate(data, order)
    if not ok:
        raise ValueError("initial ranking is infeasible")
    cur_score = _score(pc, qd, dd, cd, mode, c_ref, w1, w2)
    best = list(cur)
    best_score = cur_score

    temps = [float(t_init)]
    cur_scores = [cur_score]
    best_scores = [best_score]
    accepted = [1]

    t = float(t_init)
    it = 0
    stag = 0
    stop = False
    while not stop and t >= t_min and t > 0.0:  # t can underflow when t_min is 0
        count = 0
        while count < markov_len:
            if it >= max_iters or stag >= stagnation_limit:
                stop = True
                break
            i = rng.below(n)
            j = rng.below(n)
            while j == i:
                j = rng.below(n)
            cand = list(cur)
            cand[i], cand[j] = cand[j], cand[i]
            order[cand[i] - 1] = i
            order[cand[j] - 1] = j
            it += 1
            count += 1

            ok, pc, qd, dd = _evaluate(data, order)
            acc = 0
            if not ok:
                stag += 1
            else:
                score = _score(pc, qd, dd, cd, mode, c_ref, w1, w2)
                if score > best_score:
                    best = cand
                    best_score = score
                    acc = 1
                    stag = 0
                elif score == best_score:
                    acc = 1
                    stag += 1
                else:
                    delta = score - cur_score
                    r = rng.uniform()
                    if delta >= 0.0 or math.exp(delta / t) > r:
                        acc = 1
                    stag += 1
                if acc:
                    cur = cand
                    cur_score = score
            if not acc:
                order[cur[i] - 1] = i
                order[cur[j] - 1] = j
            temps.append(t)
            cur_scores.append(cur_score)
            best_scores.append(best_score)
            accepted.append(acc)
        if not stop:
            t = alpha * t
    return best, best_score, temps, cur_scores, best_scores, accepted
