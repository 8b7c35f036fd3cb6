"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single ``ACn PASS|FAIL`` line (visible under plain
``pytest -v``) before asserting, so the suite doubles as a checklist.
Run just this file with ``pytest -v tests/test_acceptance.py``.
"""

import os
import random
import resource
import shutil
import subprocess
import sys

import numpy as np
import pytest

from ssopt import ahp, annealing, io, model, taguchi
from ssopt.annealing import RankSolution, SaParams
from ssopt.errors import InsufficientCapacityError

from helpers import random_instance

DOCUMENTED_SEED = 42


@pytest.fixture
def report(capsys):
    def _report(tag, ok, detail):
        with capsys.disabled():
            print(f"\n{tag} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, f"{tag}: {detail}"

    return _report


def _supplier_set(plan):
    return {s for s, q in plan.supplier_totals().items() if q > 0}


def test_ac1_ahp_weights(hierarchy, report):
    r = ahp.composite_scores(hierarchy)
    want = {
        "criteria": [0.062941, 0.265433, 0.671625],
        "cost": [0.40201, 0.18549, 0.21024, 0.03831, 0.05611, 0.10786],
        "quality": [0.26949, 0.15914, 0.07354, 0.43202, 0.04087, 0.02493],
        "delivery": [0.26324, 0.11631, 0.10426, 0.43627, 0.05268, 0.02723],
        "composite": [0.2733, 0.1319, 0.1026, 0.4099, 0.0496, 0.0315],
    }
    got = {
        "criteria": r.criteria_weights.weights,
        "cost": r.alternative_weights[0].weights,
        "quality": r.alternative_weights[1].weights,
        "delivery": r.alternative_weights[2].weights,
        "composite": r.scores,
    }
    err = max(float(np.max(np.abs(np.asarray(got[k]) - want[k]))) for k in want)
    order = r.ordered()
    ok = err <= 1e-3 and order == ["S4", "S1", "S2", "S3", "S5", "S6"]
    report("AC1", ok, f"max weight/score error {err:.2e} (tol 1e-3), order {' > '.join(order)}")


def test_ac2_consistency(hierarchy, report):
    mats = (hierarchy.criteria_matrix,) + hierarchy.alternative_matrices
    reps = [ahp.consistency(m) for m in mats]
    # order: between criteria, cost, quality, delivery
    want_ci = [0.0145, 0.0552, 0.0944, 0.0957]
    want_ri = [0.66, 1.32, 1.32, 1.32]
    want_cr = [0.022, 0.0417, 0.0715, 0.0725]
    err = max(
        max(abs(r.ci - c), abs(r.ri - i), abs(r.cr - q))
        for r, c, i, q in zip(reps, want_ci, want_ri, want_cr)
    )
    ok = err <= 1e-3 and all(r.cr < 0.1 for r in reps)
    report("AC2", ok, f"max CI/RI/CR error {err:.2e} (tol 1e-3), CRs {[round(r.cr, 4) for r in reps]}")


def test_ac3_ahp_plan(firm, hierarchy, report):
    ranking = ahp.composite_scores(hierarchy)
    ranks = io.ranks_for_suppliers(ranking.labels, ranking.ranks, firm.supplier_ids)
    plan = model.allocate(firm, ranks)
    b = model.total_cost(firm, plan)
    order = [firm.supplier_ids[i] for i in model.supplier_order(ranks)][:3]
    got = (
        [(s, int(plan.supplier_totals()[s])) for s in order],
        [b.supplier_defects[s] for s in order],
        [b.supplier_delay[s] for s in order],
        b.procurement, b.quality_cost, b.delay_cost,
    )
    want = ([("v4", 200), ("v1", 150), ("v2", 250)], [4, 5, 10], [3, 4, 8],
            37_312_500, 1_750_000, 3_750_000)
    report("AC3", got == want, f"allocation/defects/late/P_c/QC/DC = {got}")


def test_ac4_sa_plan(firm, report):
    s0 = RankSolution((2, 3, 4, 1, 5, 6))
    r = annealing.solve(firm, s0, SaParams(seed=DOCUMENTED_SEED), "min-cost")
    gain = r.initial_breakdown.total - r.breakdown.total
    pct = 100.0 * gain / r.initial_breakdown.total
    sups = _supplier_set(r.plan)
    ok = (sups == {"v3", "v1", "v4"} and r.breakdown.procurement == 37_187_500
          and r.breakdown.total == 42_687_500 and gain == 125_000 and abs(pct - 0.29) < 0.01)
    report("AC4", ok,
           f"seed {DOCUMENTED_SEED}: suppliers {sorted(sups)}, P_c {r.breakdown.procurement:,}, "
           f"total {r.breakdown.total:,}, improvement {gain:,} ({pct:.3f}%); "
           f"required {{v1,v3,v4}}, 37,187,500, 42,687,500, 125,000")


def test_ac5_oracle_optimality(firm, report):
    b = annealing.brute_force(firm)
    target = 42_687_500
    s0 = RankSolution((2, 3, 4, 1, 5, 6))
    hits = sum(
        annealing.solve(firm, s0, SaParams(seed=seed)).breakdown.total == target for seed in range(1, 11)
    )
    ok = b.enumerated == 120 and b.breakdown.total == target and hits >= 9
    report("AC5", ok,
           f"brute force over {b.enumerated} ordered triples: optimum {b.breakdown.total:,} "
           f"via {sorted(_supplier_set(b.plan))}; solve reached {target:,} on {hits}/10 seeds "
           f"(required optimum {target:,} and >= 9/10)")


def test_ac6_taguchi(case_responses, report):
    design = taguchi.build_l9()
    t = taguchi.anova(design, case_responses)
    rt = taguchi.response_table(design, case_responses)
    F = taguchi.FACTORS
    ss_err = max(
        [abs(t.row(f).ss - w) for f, w in zip(F, [0.000301, 0.000222, 0.000078])]
        + [abs(t.residual.ss - 0.000875), abs(t.total.ss - 0.001475)]
    )
    f_err = max(abs(t.row(f).f - w) for f, w in zip(F, [0.34, 0.25, 0.09]))
    p_err = max(abs(t.row(f).p - w) for f, w in zip(F, [0.744, 0.798, 0.918]))
    means = {"t_init": (0.9438, 0.9448, 0.9566), "alpha": (0.9553, 0.9439, 0.9460),
             "markov_len": (0.9526, 0.9464, 0.9462)}
    m_err = max(abs(a - b) for f in F for a, b in zip(rt.level_means[f], means[f]))
    rec = tuple(rt.recommended_values[f] for f in F)
    ranks = tuple(rt.ranks[f] for f in F)
    ok = (ss_err <= 1e-6 and f_err <= 0.01 and p_err <= 0.005 and m_err <= 5e-4
          and ranks == (1, 2, 3) and rec == (30.0, 0.75, 20))
    report("AC6", ok,
           f"SS err {ss_err:.1e}, F err {f_err:.3f}, p err {p_err:.4f}, level-mean err {m_err:.1e}, "
           f"ranks {ranks}, recommended {rec}")


def test_ac7_runtime(tmp_path, report):
    exe = shutil.which("ssopt")
    cmd = [exe] if exe else [sys.executable, "-m", "ssopt.cli"]
    cmd += ["solve", "--problem", str(io.fixture_path("firm600")),
            "--judgments", str(io.fixture_path("judgments")), "--out", str(tmp_path)]
    before = resource.getrusage(resource.RUSAGE_CHILDREN)
    proc = subprocess.run(cmd, capture_output=True, text=True, env={**os.environ, "SSOPT_SEED": "42"})
    after = resource.getrusage(resource.RUSAGE_CHILDREN)
    cpu = (after.ru_utime - before.ru_utime) + (after.ru_stime - before.ru_stime)
    ok = proc.returncode == 0 and cpu < 2.0
    report("AC7", ok, f"`ssopt solve` exit {proc.returncode}, {cpu:.3f} s CPU including interpreter start (limit 2 s)")


def test_ac8_properties(report):
    failures = []

    # determinism and trace monotonicity on the case instance
    inst = io.load_problem(io.fixture_path("firm600"))
    s0 = RankSolution((2, 3, 4, 1, 5, 6))
    for seed in range(5):
        a = annealing.solve(inst, s0, SaParams(seed=seed))
        b = annealing.solve(inst, s0, SaParams(seed=seed))
        best = a.trace.best_series()
        if a.trace.records != b.trace.records:
            failures.append(f"nondeterministic trace for seed {seed}")
        if any(y < x for x, y in zip(best, best[1:])):
            failures.append(f"best series not monotone for seed {seed}")

    # consistent matrices have CR = 0; eigenvector agrees with power iteration
    rnd = random.Random(0)
    worst_eig = 0.0
    for _ in range(100):
        n = rnd.randint(3, 7)
        w = np.array([rnd.uniform(0.1, 10) for _ in range(n)])
        if abs(ahp.consistency(ahp.from_weights(w)).cr) > 1e-9:
            failures.append("consistent matrix with nonzero CR")
        scale = [1 / 9, 1 / 7, 1 / 5, 1 / 3, 1, 3, 5, 7, 9]
        a = np.ones((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                a[i, j] = rnd.choice(scale)
                a[j, i] = 1 / a[i, j]
        x = np.full(n, 1.0 / n)
        for _ in range(10_000):
            y = a @ x
            y /= y.sum()
            if np.max(np.abs(y - x)) < 1e-15:
                break
            x = y
        pm = ahp.PairwiseMatrix(a, tuple(map(str, range(n))))
        worst_eig = max(worst_eig, float(np.max(np.abs(ahp.principal_eigenvector(pm).weights - y))))
    if worst_eig > 1e-8:
        failures.append(f"eigenvector vs power iteration {worst_eig:.1e}")

    # ANOVA decomposition identity on random responses
    design = taguchi.build_l9()
    rng = np.random.default_rng(1)
    for _ in range(100):
        t = taguchi.anova(design, rng.uniform(0.5, 1.5, 9))
        if abs(sum(r.ss for r in t.factors) + t.residual.ss - t.total.ss) > 1e-12:
            failures.append("ANOVA sums of squares do not add up")
            break

    # F(2, 2) survival function has the closed form 1 / (1 + f)
    f_err = max(abs(taguchi.f_survival(f, 2, 2) - 1 / (1 + f)) for f in np.linspace(0, 100, 1001))
    if f_err > 1e-10:
        failures.append(f"f_survival error {f_err:.1e}")

    # solve equals brute force on 50 random instances with N <= 6
    rnd = random.Random(5)
    params = SaParams(max_iters=5000, stagnation_limit=10**9, t_min=0.0)
    agree = checked = 0
    while checked < 50:
        inst = random_instance(rnd, n=rnd.randint(2, 6))
        start = RankSolution(tuple(range(1, inst.n_suppliers + 1)))
        try:
            model.allocate(inst, start.ranks)
        except InsufficientCapacityError:
            continue
        checked += 1
        agree += annealing.solve(inst, start, params).breakdown.total == annealing.brute_force(inst).breakdown.total
    if agree != 50:
        failures.append(f"solve matched brute force on {agree}/50 instances")

    report("AC8", not failures,
           "; ".join(failures) or f"all property checks hold (eigen err {worst_eig:.1e}, F err {f_err:.1e}, "
                                   f"solve = brute force on {agree}/50)")
