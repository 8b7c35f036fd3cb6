"""``ssopt`` command line: rank, solve, brute, tune, report.

Exit codes: 0 success, 1 success with warnings (a judgment matrix with
CR >= 0.1), 2 input or feasibility error.

Every command writes its CSV outputs plus ``last_run.json`` into ``--out``;
``ssopt report --out DIR`` re-renders that last run.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import os
import sys
import warnings
from decimal import Decimal
from pathlib import Path

from . import __version__, ahp, annealing, io, kernel, model, taguchi
from .errors import SaatyScaleWarning, SsoptError

DEFAULT_SEED = 42
DEFAULT_OUT = "ssopt-out"
RUN_FILE = "last_run.json"

EXIT_OK, EXIT_WARN, EXIT_ERROR = 0, 1, 2


def default_seed() -> int:
    env = os.environ.get("SSOPT_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise SsoptError(f"SSOPT_SEED must be an integer, got {env!r}")
    return DEFAULT_SEED


def _qty(q) -> str:
    q = Decimal(q)
    return str(int(q)) if q == q.to_integral_value() else format(q.normalize(), "f")


def _money(x) -> str:
    return f"{int(x):,}"


def _num(x, digits=6):
    return "NA" if x is None else f"{x:.{digits}f}"


def _write_csv(path: Path, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(r)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return buf.getvalue()


def _provenance(**files):
    parts = []
    for key, path in files.items():
        if path:
            parts.append(f"{key}={Path(path).name}@{io.file_digest(path)}")
    return " ".join(parts)


def _table(headers, rows, aligns=None):
    cols = list(zip(*([headers] + rows))) if rows else [[h] for h in headers]
    widths = [max(len(str(c)) for c in col) for col in cols]
    aligns = aligns or ["<"] + [">"] * (len(headers) - 1)
    fmt = "  ".join(f"{{:{a}{w}}}" for a, w in zip(aligns, widths))
    lines = [fmt.format(*headers), fmt.format(*["-" * w for w in widths])]
    lines += [fmt.format(*[str(c) for c in r]) for r in rows]
    return ["  " + ln for ln in lines]


# ---------------------------------------------------------------- rank


def _rank_payload(h: ahp.Hierarchy):
    ranking = ahp.composite_scores(h)
    crit = list(h.criteria_matrix.labels)
    reports = [("between criteria", ahp.consistency(h.criteria_matrix, ranking.criteria_weights))]
    for c, m, pv in zip(crit, h.alternative_matrices, ranking.alternative_weights):
        reports.append((c, ahp.consistency(m, pv)))
    return ranking, {
        "criteria": crit,
        "criteria_weights": [float(w) for w in ranking.criteria_weights.weights],
        "alternatives": list(ranking.labels),
        "alternative_weights": [[float(w) for w in pv.weights] for pv in ranking.alternative_weights],
        "scores": [float(s) for s in ranking.scores],
        "ranks": list(ranking.ranks),
        "consistency": [
            {"matrix": name, "n": r.n, "lambda_max": r.lambda_max, "ci": r.ci, "ri": r.ri,
             "cr": r.cr, "acceptable": r.acceptable, "ri_undefined": r.ri_undefined}
            for name, r in reports
        ],
    }


def render_rank(data):
    out = ["Criteria weights"]
    out += _table(["criterion", "weight"],
                  [[c, f"{w:.6f}"] for c, w in zip(data["criteria"], data["criteria_weights"])])
    out += ["", "Composite scores"]
    rows = []
    for a_idx, alt in enumerate(data["alternatives"]):
        rows.append([alt] + [f"{data['alternative_weights'][c][a_idx]:.6f}" for c in range(len(data["criteria"]))]
                    + [f"{data['scores'][a_idx]:.4f}", data["ranks"][a_idx]])
    out += _table(["alternative"] + data["criteria"] + ["composite", "rank"], rows)
    out += ["", "Consistency"]
    rows = [[r["matrix"], f"{r['lambda_max']:.4f}", f"{r['ci']:.6f}", f"{r['ri']:.2f}",
             "undefined" if r["ri_undefined"] else f"{r['cr']:.4f}",
             "yes" if r["acceptable"] else "NO"] for r in data["consistency"]]
    out += _table(["matrix", "lambda_max", "CI", "RI", "CR", "CR<0.1"], rows)
    return out


def _rank_csvs(data):
    comp = [["alternative"] + data["criteria"] + ["composite", "rank"]]
    for a_idx, alt in enumerate(data["alternatives"]):
        comp.append([alt] + [repr(data["alternative_weights"][c][a_idx]) for c in range(len(data["criteria"]))]
                    + [repr(data["scores"][a_idx]), data["ranks"][a_idx]])
    cons = [["matrix", "n", "lambda_max", "ci", "ri", "cr", "acceptable"]]
    for r in data["consistency"]:
        cons.append([r["matrix"], r["n"], repr(r["lambda_max"]), repr(r["ci"]), repr(r["ri"]),
                     repr(r["cr"]), int(r["acceptable"])])
    return {"composite.csv": comp, "consistency.csv": cons}


def cmd_rank(args):
    h = _load_judgments(args.judgments)
    _, data = _rank_payload(h)
    bad = [r["matrix"] for r in data["consistency"] if not r["acceptable"]]
    status = EXIT_WARN if bad else EXIT_OK
    warnings_ = [f"CR >= 0.1 for: {', '.join(bad)}"] if bad else []
    header = f"ssopt rank {_provenance(judgments=args.judgments)}"
    return _finish(args, "rank", header, data, _rank_csvs(data), status, warnings_)


# ---------------------------------------------------------------- solve


def _load_judgments(path):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SaatyScaleWarning)
        h = io.load_judgments(path)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return h


def _initial_ranks(args, inst):
    if getattr(args, "ranks", None):
        return annealing.RankSolution(io.parse_ranks(args.ranks))
    if getattr(args, "judgments", None):
        ranking = ahp.composite_scores(_load_judgments(args.judgments))
        return annealing.RankSolution(io.ranks_for_suppliers(ranking.labels, ranking.ranks, inst.supplier_ids))
    return annealing.RankSolution(tuple(range(1, inst.n_suppliers + 1)))


def _sa_params(args, seed):
    base = annealing.SaParams()
    return annealing.SaParams(
        t_init=args.t_init if args.t_init is not None else base.t_init,
        alpha=args.alpha if args.alpha is not None else base.alpha,
        markov_len=args.markov if args.markov is not None else base.markov_len,
        t_min=args.t_min if args.t_min is not None else base.t_min,
        max_iters=args.max_iters if args.max_iters is not None else base.max_iters,
        stagnation_limit=args.stagnation if args.stagnation is not None else base.stagnation_limit,
        seed=seed,
    )


def _plan_block(inst, plan, b, ranks):
    order = [inst.supplier_ids[i] for i in model.supplier_order(ranks)]
    totals = plan.supplier_totals()
    active = [s for s in order if totals.get(s, 0) > 0]
    rows = [{"vendor": s, "order": _qty(totals[s]), "defective": b.supplier_defects[s],
             "late_days": b.supplier_delay[s], "cost": b.supplier_cost[s]} for s in active]
    published = None
    orders = tuple(sorted((s, totals[s]) for s in active))
    for ref, total in inst.published_totals:
        if ref == orders:
            published = total
    return {
        "ranks": list(ranks),
        "rows": rows,
        "quantity": _qty(sum(totals.values(), Decimal(0))),
        "procurement": b.procurement,
        "defective_units": b.defective_units,
        "delay_days": b.delay_days,
        "quality_cost": b.quality_cost,
        "delay_cost": b.delay_cost,
        "noncompliance": b.noncompliance,
        "total": b.total,
        "fitness": b.fitness,
        "published_total": published,
    }


def _render_plan(title, p):
    out = [f"{title}  (ranks {','.join(map(str, p['ranks']))})"]
    rows = [[r["vendor"], r["order"], r["defective"], r["late_days"], _money(r["cost"])] for r in p["rows"]]
    rows.append(["total", p["quantity"], p["defective_units"], p["delay_days"], _money(p["procurement"])])
    out += _table(["vendor", "order", "defective", "late delivery", "cost"], rows)
    out.append(f"  quality cost            {_money(p['quality_cost']):>14}")
    out.append(f"  delay cost              {_money(p['delay_cost']):>14}")
    out.append(f"  total (component sum)   {_money(p['total']):>14}")
    if p["published_total"] is not None:
        diff = p["published_total"] - p["total"]
        out.append(f"  published total         {_money(p['published_total']):>14}"
                   f"  (differs from the component sum by {diff:+,})")
    out.append(f"  fitness (w1, w2)        {p['fitness']:>14.6f}")
    return out


def render_solve(data):
    out = _render_plan("Initial plan", data["initial"])
    if data["annealed"]:
        out += [""] + _render_plan("Annealed plan", data["best"])
        gain = data["initial"]["total"] - data["best"]["total"]
        pct = 100.0 * gain / data["initial"]["total"] if data["initial"]["total"] else 0.0
        out += ["", f"  improvement over initial: {_money(gain)} ({pct:.3f}%)",
                f"  objective ({data['mode']}): {data['score']:.6f}",
                f"  iterations: {data['iterations']}  backend: {data['backend']}"]
    return out


def _solve_csvs(data, trace_rows):
    plan = data["best"] if data["annealed"] else data["initial"]
    rows = [["vendor", "order_tons", "defective", "late_days", "cost"]]
    rows += [[r["vendor"], r["order"], r["defective"], r["late_days"], r["cost"]] for r in plan["rows"]]
    rows += [["procurement", "", "", "", plan["procurement"]],
             ["quality_cost", "", "", "", plan["quality_cost"]],
             ["delay_cost", "", "", "", plan["delay_cost"]],
             ["total", "", "", "", plan["total"]]]
    return {"plan.csv": rows, "trace.csv": list(trace_rows)}


def cmd_solve(args):
    inst = io.load_problem(args.problem)
    seed = args.seed if args.seed is not None else default_seed()
    params = _sa_params(args, seed)
    s0 = _initial_ranks(args, inst)
    k = args.k if args.k is not None else inst.k_select
    if args.no_anneal:
        res = annealing.evaluate_initial(inst, s0, args.objective, k)
    else:
        res = annealing.solve(inst, s0, params, args.objective, k)
    initial_plan = model.allocate(inst, s0.ranks, k)
    data = {
        "mode": args.objective,
        "annealed": not args.no_anneal,
        "initial": _plan_block(inst, initial_plan, res.initial_breakdown, s0.ranks),
        "best": _plan_block(inst, res.plan, res.breakdown, res.best.ranks),
        "score": res.score,
        "iterations": res.trace.iterations,
        "backend": res.trace.backend,
        "search_seconds": res.trace.wall_time,
    }
    header = (f"ssopt solve seed={seed} t_init={params.t_init:g} alpha={params.alpha:g} "
              f"markov={params.markov_len} t_min={params.t_min:g} max_iters={params.max_iters} "
              f"stagnation={params.stagnation_limit} k={k} mode={args.objective} "
              + _provenance(problem=args.problem, judgments=args.judgments))
    return _finish(args, "solve", header, data, _solve_csvs(data, res.trace.to_csv_rows()))


# ---------------------------------------------------------------- brute


def render_brute(data):
    out = _render_plan("Global optimum", data["best"])
    out.append(f"  ordered selections enumerated: {data['enumerated']} (feasible {data['feasible']})")
    return out


def cmd_brute(args):
    inst = io.load_problem(args.problem)
    k = args.k if args.k is not None else inst.k_select
    res = annealing.brute_force(inst, k)
    data = {"best": _plan_block(inst, res.plan, res.breakdown, res.ranks.ranks),
            "enumerated": res.enumerated, "feasible": res.feasible}
    rows = [["vendor", "order_tons", "defective", "late_days", "cost"]]
    rows += [[r["vendor"], r["order"], r["defective"], r["late_days"], r["cost"]] for r in data["best"]["rows"]]
    rows += [["total", "", "", "", res.breakdown.total]]
    header = f"ssopt brute k={k} " + _provenance(problem=args.problem)
    return _finish(args, "brute", header, data, {"brute.csv": rows})


# ---------------------------------------------------------------- tune


def render_tune(data):
    f_names = {"t_init": "T_init", "alpha": "alpha", "markov_len": "M"}
    out = ["Experiments (L9)"]
    rows = []
    for i, (s, y, sn) in enumerate(zip(data["settings"], data["responses"], data["sn"]), start=1):
        rows.append([i, f"{s['t_init']:g}", f"{s['alpha']:g}", s["markov_len"],
                     " ".join(f"{v:.6f}" for v in y), f"{sn:.4f}"])
    out += _table(["exp", "T_init", "alpha", "M", "response", "S/N (dB)"], rows)
    out += ["", "ANOVA"]
    rows = [[f_names.get(r["source"], r["source"]), r["df"], f"{r['ss']:.6f}", _num(r["ms"]),
             _num(r["f"], 2), _num(r["p"], 3)] for r in data["anova"]]
    out += _table(["source", "df", "SS", "MS", "F", "p"], rows)
    out += ["", "Response table"]
    rt = data["response_table"]
    rows = [[lv] + [f"{rt['level_means'][f][lv - 1]:.4f}" for f in taguchi.FACTORS] for lv in (1, 2, 3)]
    rows.append(["delta"] + [f"{rt['deltas'][f]:.4f}" for f in taguchi.FACTORS])
    rows.append(["rank"] + [rt["ranks"][f] for f in taguchi.FACTORS])
    out += _table(["level", "T_init", "alpha", "M"], rows)
    rec = rt["recommended_values"]
    out += ["", f"  recommended: T_init={rec['t_init']:g} alpha={rec['alpha']:g} M={rec['markov_len']}"]
    return out


def cmd_tune(args):
    levels = io.load_levels(args.levels) if args.levels else taguchi.FactorLevels()
    design = taguchi.build_l9(levels)
    seed = args.seed if args.seed is not None else default_seed()
    if args.responses:
        responses = io.load_responses(args.responses)
        source = _provenance(responses=args.responses)
    else:
        if not args.problem:
            raise SsoptError("tune needs --problem for live runs, or --responses")
        inst = io.load_problem(args.problem)
        s0 = _initial_ranks(args, inst)
        matrix = taguchi.run_experiments(inst, design, args.replicates, seed, initial=s0,
                                         mode=args.objective, workers=args.workers)
        responses = matrix.tolist()
        source = (f"seed={seed} replicates={args.replicates} mode={args.objective} "
                  + _provenance(problem=args.problem, judgments=args.judgments))
    table = taguchi.anova(design, responses)
    rt = taguchi.response_table(design, responses)
    data = {
        "settings": design.settings(),
        "responses": [list(map(float, r)) for r in responses],
        "sn": taguchi.sn_ratios(responses),
        "anova": [r.__dict__ for r in table.factors + (table.residual, table.total)],
        "response_table": {
            "level_means": {f: list(v) for f, v in rt.level_means.items()},
            "deltas": rt.deltas, "ranks": rt.ranks,
            "recommended_levels": rt.recommended_levels,
            "recommended_values": rt.recommended_values,
        },
    }
    csvs = {
        "design.csv": [["experiment", "t_init", "alpha", "markov_len", "mean_response", "sn_db"]]
        + [[i, repr(float(s["t_init"])), repr(float(s["alpha"])), s["markov_len"],
            repr(sum(y) / len(y)), repr(sn)]
           for i, (s, y, sn) in enumerate(zip(data["settings"], data["responses"], data["sn"]), start=1)],
        "anova.csv": [["source", "df", "ss", "ms", "f", "p"]]
        + [[r["source"], r["df"], repr(r["ss"]),
            "NA" if r["ms"] is None else repr(r["ms"]),
            "NA" if r["f"] is None else repr(r["f"]),
            "NA" if r["p"] is None else repr(r["p"])] for r in data["anova"]],
        "response_table.csv": [["level", *taguchi.FACTORS]]
        + [[lv] + [repr(rt.level_means[f][lv - 1]) for f in taguchi.FACTORS] for lv in (1, 2, 3)]
        + [["delta"] + [repr(rt.deltas[f]) for f in taguchi.FACTORS],
           ["rank"] + [rt.ranks[f] for f in taguchi.FACTORS],
           ["recommended"] + [rt.recommended_values[f] for f in taguchi.FACTORS]],
        "main_effects.csv": [["factor", "level", "value", "mean_response"]]
        + [[f, lv, v, repr(m)] for f, lv, v, m in taguchi.main_effects(design, responses)],
    }
    header = f"ssopt tune {source} " + _provenance(levels=args.levels)
    return _finish(args, "tune", header.strip(), data, csvs)


# ---------------------------------------------------------------- report

RENDERERS = {"rank": render_rank, "solve": render_solve, "brute": render_brute, "tune": render_tune}


def cmd_report(args):
    path = Path(args.out) / RUN_FILE
    if not path.exists():
        raise SsoptError(f"no previous run recorded in {args.out}")
    run = json.loads(path.read_text(encoding="utf-8"))
    _print_report(run["header"], RENDERERS[run["command"]](run["data"]), run.get("warnings", []))
    return run.get("status", EXIT_OK)


# ---------------------------------------------------------------- plumbing


def _print_report(header, lines, warnings_):
    print(f"# {header}")
    for ln in lines:
        print(ln)
    for w in warnings_:
        print(f"warning: {w}", file=sys.stderr)


def _finish(args, command, header, data, csvs, status=EXIT_OK, warnings_=()):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    texts = {name: _write_csv(out_dir / name, rows) for name, rows in csvs.items()}
    run = {"command": command, "header": header, "data": data, "status": status,
           "warnings": list(warnings_), "version": __version__}
    (out_dir / RUN_FILE).write_text(json.dumps(run, indent=1, default=str), encoding="utf-8")
    if args.format == "csv":
        for name, text in texts.items():
            print(f"# {name}")
            sys.stdout.write(text)
        for w in warnings_:
            print(f"warning: {w}", file=sys.stderr)
    else:
        _print_report(header, RENDERERS[command](data), warnings_)
    return status


def _add_sa_options(p):
    p.add_argument("--t-init", type=float, help="initial temperature (default 30)")
    p.add_argument("--alpha", type=float, help="cooling factor in (0, 1] (default 0.75)")
    p.add_argument("--markov", type=int, help="moves per temperature level (default 20)")
    p.add_argument("--t-min", type=float, help="stop once the temperature falls below this (default 1e-3)")
    p.add_argument("--max-iters", type=int, help="evaluation budget (default 1000)")
    p.add_argument("--stagnation", type=int, help="stop after this many static moves (default 50)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=DEFAULT_OUT, help=f"output directory (default {DEFAULT_OUT})")
    common.add_argument("--format", choices=["table", "csv"], default="table")

    parser = argparse.ArgumentParser(
        prog="ssopt",
        description="Supplier ranking (AHP), annealed order allocation, and Taguchi tuning.",
    )
    parser.add_argument("--version", action="version", version=f"ssopt {__version__} ({kernel.BACKEND} kernel)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", parents=[common], help="AHP priorities, composite ranking, consistency")
    p.add_argument("--judgments", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("solve", parents=[common], help="anneal an order plan from an initial ranking")
    p.add_argument("--problem", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--judgments", help="derive the initial ranking by AHP")
    src.add_argument("--ranks", help="explicit initial ranks, e.g. 2,3,4,1,5,6")
    _add_sa_options(p)
    p.add_argument("--objective", choices=model.MODES, default="min-cost")
    p.add_argument("--seed", type=int, help=f"PRNG seed (default $SSOPT_SEED or {DEFAULT_SEED})")
    p.add_argument("--k", type=int, help="suppliers to allocate across (default from problem)")
    p.add_argument("--no-anneal", action="store_true", help="only evaluate the initial ranking")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("brute", parents=[common], help="exhaustive optimum over ordered selections")
    p.add_argument("--problem", required=True)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_brute)

    p = sub.add_parser("tune", parents=[common], help="L9 experiment, ANOVA and response table")
    p.add_argument("--problem")
    p.add_argument("--levels", help="levels JSON (default 10/20/30, 0.75/0.85/0.95, 20/30/40)")
    p.add_argument("--responses", help="analyze a CSV of externally supplied responses")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--judgments")
    src.add_argument("--ranks")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--objective", choices=model.MODES, default="min-cost")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("report", parents=[common], help="re-render the last run in --out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SsoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
