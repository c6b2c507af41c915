import json

import pytest

from uic.cli import main, parse_point, UsageError
from uic.metric import L1Point, PlanePoint


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_iterate_ex1_table(capsys):
    code, out, _ = run(capsys, "iterate", "--map", "ex1", "--start", "8.5", "--milestones", "20")
    assert code == 0
    rows = csv_rows(out)
    assert list(rows[0]) == ["n", "p_n", "iterate", "bound_alpha", "bound_sup"]
    assert len(rows) == 21
    assert rows[1]["p_n"] == "10"
    assert abs(float(rows[1]["iterate"]) - 0.654004) <= 1e-4
    assert abs(float(rows[1]["bound_alpha"]) - 12.8014) <= 1e-3


def test_iterate_ex4_refuted(capsys):
    code, out, _ = run(capsys, "iterate", "--map", "ex4", "--start", "0.6", "--format", "json")
    assert code == 2
    payload = json.loads(out)
    assert payload["status"] == "LimitOutsideDomain"
    assert abs(payload["witness"] - 1.0) <= 1e-3


def test_iterate_at_fixed_point(capsys):
    code, out, _ = run(capsys, "iterate", "--map", "ex1", "--start", "0.653697", "--milestones", "1", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["status"] == "ConvergedToFixedPoint"
    assert len(payload["rows"]) == 2


def test_iterate_ex2_and_ex3(capsys):
    code, out, _ = run(capsys, "iterate", "--map", "ex2", "--start", "5:1,7:-0.5", "--milestones", "2")
    assert code == 0
    code, out, _ = run(capsys, "iterate", "--map", "ex3", "--start", "0.4,0.5", "--tol", "1e-4", "--milestones", "2")
    assert code == 0
    assert list(csv_rows(out)[0])[2:4] == ["iterate_x", "iterate_y"]


def test_floats_round_trip(capsys):
    _, out, _ = run(capsys, "iterate", "--map", "ex1", "--start", "8.5", "--milestones", "5", "--format", "json")
    payload = json.loads(out)
    _, out_csv, _ = run(capsys, "iterate", "--map", "ex1", "--start", "8.5", "--milestones", "5")
    for row, cells in zip(payload["rows"], csv_rows(out_csv)):
        assert float(cells["iterate"]) == row["iterate"]
        assert float(cells["bound_alpha"]) == row["bound_alpha"]


def test_output_is_byte_identical(tmp_path):
    paths = []
    for i, workers in enumerate(("1", "4", "1")):
        path = tmp_path / f"report{i}.json"
        code = main(["check", "--map", "ex2", "--condition", "meir-keeler", "--eps", "0.5", "1",
                     "--delta", "1", "--seed", "42", "--samples", "300", "--workers", workers,
                     "--format", "json", "--output", str(path)])
        assert code == 3
        paths.append(path.read_bytes())
    assert paths[0] == paths[1] == paths[2]


def test_check_examples(capsys):
    assert run(capsys, "check", "--map", "ex2", "--condition", "meir-keeler", "--eps", "1", "--delta", "1")[0] == 3
    assert run(capsys, "check", "--map", "ex2", "--condition", "hardy-rogers",
               "--k1", "0.3", "--k2", "0.3", "--k3", "0.3")[0] == 3
    assert run(capsys, "check", "--map", "ex1", "--condition", "banach", "--k", "0.62",
               "--restrict", "-1", "3")[0] == 0
    assert run(capsys, "check", "--map", "ex2", "--condition", "iterate-contraction", "--k", "0.9", "--n", "3")[0] == 3
    assert run(capsys, "check", "--map", "ex2", "--condition", "uic", "--samples", "200")[0] == 0


def test_check_constructed_pair_reported(capsys):
    code, out, _ = run(capsys, "check", "--map", "ex2", "--condition", "hardy-rogers", "--k1", "0.3",
                       "--k2", "0.3", "--k3", "0.3", "--samples", "3", "--format", "json")
    payload = json.loads(out)
    assert {"centered": True, "offsets": [[28, 1.0]]} in [v["y"] for v in payload["violations"]]


def test_usage_errors(capsys):
    assert run(capsys, "check", "--map", "ex1", "--condition", "hardy-rogers",
               "--k1", "0.5", "--k2", "0.5", "--k3", "0.1")[0] == 1
    assert run(capsys, "check", "--map", "ex1", "--condition", "banach")[0] == 1
    assert run(capsys, "check", "--map", "ex4", "--condition", "uic")[0] == 1
    assert run(capsys, "iterate", "--map", "ex1")[0] == 1
    assert run(capsys, "iterate", "--map", "ex4", "--start", "1.5")[0] == 1
    assert run(capsys, "iterate", "--map", "ex1", "--start", "abc")[0] == 1
    with pytest.raises(SystemExit) as info:
        main(["iterate", "--map", "nope"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1


def test_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "reproduce-table", "--output", str(tmp_path / "missing" / "t.csv"))
    assert code == 1 and "error" in err


def test_config_file(capsys, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"map": "ex1", "start": "8.5", "milestone_count": 3, "output_format": "json"}))
    code, out, _ = run(capsys, "iterate", "--config", str(config))
    assert code == 0
    assert [r["p_n"] for r in json.loads(out)["rows"]] == [0, 10, 11, 12]
    # flags override the file
    code, out, _ = run(capsys, "iterate", "--config", str(config), "--format", "csv")
    assert out.startswith("#")
    config.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "iterate", "--config", str(config))[0] == 1
    config.write_text(json.dumps({"map": "ex1", "start": "1", "fp_tolerance": -1}))
    assert run(capsys, "iterate", "--config", str(config))[0] == 1


def test_reproduce_table(capsys):
    code, out, _ = run(capsys, "reproduce-table")
    assert code == 0
    rows = csv_rows(out)
    assert [int(r["n"]) for r in rows] == [0, 1, 2, 5, 10, 20]
    assert [int(r["p_n"]) for r in rows] == [0, 10, 11, 14, 19, 29]
    assert all(r["pass_iterate"] == r["pass_bound"] == r["pass_p_n"] == "True" for r in rows)


def test_counterexample_command(capsys):
    code, out, _ = run(capsys, "counterexample", "--kind", "sehgal", "--k", "0.9", "--n", "3")
    assert code == 0
    payload = json.loads(out)
    assert payload["y"]["offsets"] == [[20, 1.0]] and payload["margin"] > 0
    code, out, _ = run(capsys, "counterexample", "--kind", "meir-keeler", "--eps", "1", "--delta", "1", "--format", "csv")
    assert code == 0 and "N=4" in out
    assert run(capsys, "counterexample", "--kind", "sehgal", "--k", "0.9")[0] == 1


def test_parse_point():
    assert parse_point("ex1", "3/5") == 0.6
    assert parse_point("ex3", "0.4, 0.5") == PlanePoint(0.4, 0.5)
    assert parse_point("ex2", "center") == L1Point.center()
    assert parse_point("ex2", "2:1,2:0.5").offsets == ((2, 1.5),)
    with pytest.raises(UsageError):
        parse_point("ex2", "x:1")
    with pytest.raises(UsageError):
        parse_point("ex3", "0.4")


def test_module_entry_point():
    import subprocess
    import sys
    done = subprocess.run([sys.executable, "-m", "uic", "reproduce-table", "--format", "json"],
                          capture_output=True, text=True)
    assert done.returncode == 0
    assert json.loads(done.stdout)["all_pass"] is True
