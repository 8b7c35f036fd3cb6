import csv
import json

import numpy as np
import pytest

from ssopt import cli, io

FIRM = str(io.fixture_path("firm600"))
JUDG = str(io.fixture_path("judgments"))
RESPONSES = str(io.fixture_path("responses"))
LEVELS = str(io.fixture_path("levels"))


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_rank(tmp_path, capsys):
    code, out, _ = run(capsys, "rank", "--judgments", JUDG, "--out", str(tmp_path))
    assert code == 0
    assert "0.4101" in out and "judgments=judgments_case.json@" in out
    rows = read_csv(tmp_path / "composite.csv")
    assert rows[0] == ["alternative", "Cost", "Quality", "Delivery", "composite", "rank"]
    assert [r[-1] for r in rows[1:]] == ["2", "3", "4", "1", "5", "6"]
    assert len(read_csv(tmp_path / "consistency.csv")) == 5


def test_rank_inconsistent_matrix_exits_1(tmp_path, capsys):
    m = [[1, 9, "1/9"], [None, 1, 9], [None, None, 1]]
    # oracle: CR from numpy's eigenvalues
    a = np.array([[1, 9, 1 / 9], [1 / 9, 1, 9], [9, 1 / 9, 1]])
    lam = max(np.linalg.eigvals(a).real)
    cr = (lam - 3) / 2 / 0.66
    assert cr >= 0.1
    path = write_json(tmp_path / "j.json", {
        "criteria": ["A", "B", "C"], "criteria_matrix": m,
        "alternatives": ["x", "y"], "alternative_matrices": {c: [[1, 2], [None, 1]] for c in "ABC"},
    })
    code, _, err = run(capsys, "rank", "--judgments", path, "--out", str(tmp_path))
    assert code == 1 and "CR >= 0.1" in err
    rows = read_csv(tmp_path / "consistency.csv")
    assert float(rows[1][5]) == pytest.approx(cr, rel=1e-6)


def test_malformed_matrix_exits_2_naming_cell(tmp_path, capsys):
    path = write_json(tmp_path / "j.json", {
        "criteria": ["A", "B"], "criteria_matrix": [[1, 3], ["1/2", 1]],
        "alternatives": ["x", "y"], "alternative_matrices": {c: [[1, 2], [None, 1]] for c in "AB"},
    })
    code, _, err = run(capsys, "rank", "--judgments", path, "--out", str(tmp_path))
    assert code == 2 and "(A, B)" in err and "criteria matrix" in err


def test_infeasible_demand_exits_2(tmp_path, capsys):
    d = json.loads(io.fixture_path("firm600").read_text())
    d["materials"][0]["demand_tons"] = 2000
    code, _, err = run(capsys, "solve", "--problem", write_json(tmp_path / "p.json", d),
                       "--ranks", "2,3,4,1,5,6", "--out", str(tmp_path))
    assert code == 2 and "infeasible" in err


def test_missing_file_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "solve", "--problem", str(tmp_path / "nope.json"), "--out", str(tmp_path))
    assert code == 2 and "cannot read" in err


def test_solve_no_anneal_gives_ahp_plan(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "--problem", FIRM, "--judgments", JUDG, "--no-anneal",
                       "--out", str(tmp_path))
    assert code == 0
    rows = read_csv(tmp_path / "plan.csv")
    assert rows[1:4] == [["v4", "200", "4", "3", "13000000"], ["v1", "150", "5", "4", "8812500"],
                         ["v2", "250", "10", "8", "15500000"]]
    assert ["procurement", "", "", "", "37312500"] in rows
    assert ["total", "", "", "", "42812500"] in rows
    assert "43,812,500" in out and "+1,000,000" in out


def test_solve_writes_trace(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "--problem", FIRM, "--ranks", "2,3,4,1,5,6", "--out", str(tmp_path))
    assert code == 0 and "Annealed plan" in out
    trace = read_csv(tmp_path / "trace.csv")
    assert trace[0] == ["iter", "temperature", "current_score", "best_score", "accepted"]
    best = [float(r[3]) for r in trace[1:]]
    assert best == sorted(best) and trace[1][0] == "0"


def test_solve_csvs_byte_identical_on_rerun(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        run(capsys, "solve", "--problem", FIRM, "--judgments", JUDG, "--seed", "9", "--out", str(d))
    for name in ("plan.csv", "trace.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SSOPT_SEED", "5")
    _, out, _ = run(capsys, "solve", "--problem", FIRM, "--ranks", "2,3,4,1,5,6", "--out", str(tmp_path))
    assert "seed=5" in out
    env_trace = (tmp_path / "trace.csv").read_bytes()
    monkeypatch.delenv("SSOPT_SEED")
    run(capsys, "solve", "--problem", FIRM, "--ranks", "2,3,4,1,5,6", "--seed", "5", "--out", str(tmp_path))
    assert (tmp_path / "trace.csv").read_bytes() == env_trace


def test_csv_format_prints_files(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "--problem", FIRM, "--ranks", "2,3,4,1,5,6", "--no-anneal",
                       "--format", "csv", "--out", str(tmp_path))
    assert code == 0 and "# plan.csv" in out and "# trace.csv" in out
    assert (tmp_path / "plan.csv").read_text() in out


def test_brute(tmp_path, capsys):
    code, out, _ = run(capsys, "brute", "--problem", FIRM, "--out", str(tmp_path))
    assert code == 0 and "42,662,500" in out and "120" in out
    assert read_csv(tmp_path / "brute.csv")[-1] == ["total", "", "", "", "42662500"]
    code, out, _ = run(capsys, "brute", "--problem", FIRM, "--k", "1", "--out", str(tmp_path))
    assert code == 0 and "v5" in out


def test_tune_from_responses(tmp_path, capsys):
    code, out, _ = run(capsys, "tune", "--responses", RESPONSES, "--levels", LEVELS, "--out", str(tmp_path))
    assert code == 0 and "recommended: T_init=30 alpha=0.75 M=20" in out
    anova = read_csv(tmp_path / "anova.csv")
    assert anova[0] == ["source", "df", "ss", "ms", "f", "p"]
    assert float(anova[1][2]) == pytest.approx(0.000301, abs=1e-6)
    rt = read_csv(tmp_path / "response_table.csv")
    assert rt[-2] == ["rank", "1", "2", "3"]
    assert len(read_csv(tmp_path / "design.csv")) == 10
    assert len(read_csv(tmp_path / "main_effects.csv")) == 10


def test_tune_live_runs(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    code, out, _ = run(capsys, "tune", "--problem", FIRM, "--judgments", JUDG, "--replicates", "2",
                       "--out", str(a))
    assert code == 0 and "ANOVA" in out
    run(capsys, "tune", "--problem", FIRM, "--judgments", JUDG, "--replicates", "2", "--workers", "3",
        "--out", str(b))
    assert (a / "design.csv").read_bytes() == (b / "design.csv").read_bytes()


def test_tune_needs_input(tmp_path, capsys):
    code, _, err = run(capsys, "tune", "--out", str(tmp_path))
    assert code == 2 and "--problem" in err


def test_report_rerenders_last_run(tmp_path, capsys):
    _, first, _ = run(capsys, "tune", "--responses", RESPONSES, "--out", str(tmp_path))
    code, again, _ = run(capsys, "report", "--out", str(tmp_path))
    assert code == 0 and again == first


def test_report_without_run(tmp_path, capsys):
    code, _, err = run(capsys, "report", "--out", str(tmp_path / "empty"))
    assert code == 2 and "no previous run" in err


def test_bad_ranks_argument(tmp_path, capsys):
    code, _, err = run(capsys, "solve", "--problem", FIRM, "--ranks", "1,2,x", "--out", str(tmp_path))
    assert code == 2 and "--ranks" in err
