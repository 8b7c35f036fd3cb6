"""Readers for the JSON/CSV input files and the bundled case-study fixtures."""

from __future__ import annotations

import csv
import hashlib
import json
from decimal import Decimal
from importlib import resources
from pathlib import Path

from .ahp import Hierarchy, build_hierarchy
from .errors import SsoptError
from .model import Material, ProblemInstance, make_supplier

FIXTURES = {
    "firm600": "firm600.json",
    "judgments": "judgments_case.json",
    "responses": "tuning_responses.csv",
    "levels": "levels_default.json",
}


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("ssopt") / "fixtures" / FIXTURES.get(name, name)))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:12]


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh, parse_float=Decimal)
    except OSError as exc:
        raise SsoptError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SsoptError(f"{path}: invalid JSON ({exc})") from exc


def _require(d, key, where):
    if key not in d:
        raise SsoptError(f"{where}: missing field {key!r}")
    return d[key]


def problem_from_dict(d) -> ProblemInstance:
    mats = [Material(str(_require(m, "id", "material")), Decimal(str(_require(m, "demand_tons", "material"))))
            for m in _require(d, "materials", "problem")]
    mat_ids = [m.id for m in mats]
    sups = []
    for s in _require(d, "suppliers", "problem"):
        sid = str(_require(s, "id", "supplier"))
        sups.append(make_supplier(
            sid,
            _require(s, "capacity_tons", sid),
            _require(s, "unit_cost_per_kg", sid),
            _require(s, "defect_pct", sid),
            _require(s, "delay_pct", sid),
            mat_ids,
        ))
    cd = Decimal(str(_require(d, "delay_cost_per_day", "problem")))
    if cd != cd.to_integral_value():
        raise SsoptError("delay_cost_per_day must be a whole amount")
    w = d.get("weights", {"w1": 0.3, "w2": 0.7})
    published = tuple(
        (tuple(sorted((str(k), Decimal(str(v))) for k, v in p["orders"].items())), int(p["total"]))
        for p in d.get("published_totals", [])
    )
    return ProblemInstance(
        materials=tuple(mats),
        suppliers=tuple(sups),
        delay_cost_rate=int(cd),
        weight1=float(w["w1"]),
        weight2=float(w["w2"]),
        k_select=int(d.get("k_select", 3)),
        published_totals=published,
    )


def load_problem(path) -> ProblemInstance:
    return problem_from_dict(_load_json(path))


def _judgment(v):
    # Decimal from parse_float would otherwise reach Fraction as a non-string
    return str(v) if isinstance(v, Decimal) else v


def _rows(m):
    return [[None if v is None else _judgment(v) for v in row] for row in m]


def hierarchy_from_dict(d) -> Hierarchy:
    criteria = [str(c) for c in _require(d, "criteria", "judgments")]
    alts = [str(a) for a in _require(d, "alternatives", "judgments")]
    mats = _require(d, "alternative_matrices", "judgments")
    return build_hierarchy(
        criteria,
        _rows(_require(d, "criteria_matrix", "judgments")),
        alts,
        {str(k): _rows(v) for k, v in mats.items()},
    )


def load_judgments(path) -> Hierarchy:
    return hierarchy_from_dict(_load_json(path))


def load_levels(path):
    from .taguchi import FactorLevels

    d = _load_json(path)
    try:
        return FactorLevels(
            t_init=tuple(float(x) for x in d["t_init"]),
            alpha=tuple(float(x) for x in d["alpha"]),
            markov_len=tuple(int(x) for x in d["markov_len"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SsoptError(f"{path}: malformed levels ({exc})") from exc


def load_responses(path):
    """Response rows from CSV: ``experiment`` then one or more response columns."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SsoptError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows or len(rows[0]) < 2:
        raise SsoptError(f"{path}: expected a header 'experiment,response[,...]'")
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    if len(body) != 9:
        raise SsoptError(f"{path}: expected 9 experiment rows, got {len(body)}")
    try:
        body.sort(key=lambda r: int(r[0]))
        return [[float(c) for c in r[1:]] for r in body]
    except ValueError as exc:
        raise SsoptError(f"{path}: non-numeric response ({exc})") from exc


def parse_ranks(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise SsoptError(f"--ranks expects comma-separated integers, got {text!r}") from exc


def ranks_for_suppliers(ranking_labels, ranking_ranks, supplier_ids) -> tuple:
    """Map an AHP ranking onto the problem's suppliers.

    Labels are matched by name when the two sets coincide, otherwise by
    position when the counts agree.
    """
    labels = list(ranking_labels)
    if set(labels) == set(supplier_ids):
        by_label = dict(zip(labels, ranking_ranks))
        return tuple(by_label[s] for s in supplier_ids)
    if len(labels) == len(supplier_ids):
        return tuple(ranking_ranks)
    raise SsoptError(
        f"judgments rank {len(labels)} alternatives but the problem has {len(supplier_ids)} suppliers"
    )
