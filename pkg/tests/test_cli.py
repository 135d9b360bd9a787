import json
import math

import pytest

from frontweave.cli import main, parse_config, read_csv, ConfigError
from frontweave.registry import get_example


def test_unknown_example_exit_code(capsys):
    assert main(["run", "--example", "nope", "--n", "10"]) == 2
    assert "unknown example" in capsys.readouterr().err


def test_run_ex1_csv(tmp_path):
    out = tmp_path / "ex1.csv"
    assert main(["run", "--example", "ex1", "--n", "40", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["i", "j", "x", "y", "psi", "nx", "ny", "nt", "orient", "source", "attempts"]
    psi = [r[4] for r in rows]
    collapse = get_example("ex1").notes["collapse_time"]
    assert abs(max(psi) - collapse) <= 3 * 0.64 / 40
    assert out.read_bytes().count(b"\r") == 0
    man = json.loads((tmp_path / "ex1.csv.manifest.json").read_text())
    assert man["example"] == "ex1" and man["n"] == 40


def test_run_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["run", "--example", "unit", "--n", "30", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_csv_round_trip(tmp_path):
    out = tmp_path / "u.csv"
    main(["run", "--example", "unit", "--n", "20", "--out", str(out)])
    _, rows = read_csv(out)
    from frontweave.cli import fmt

    for r in rows:
        for v in r:
            if isinstance(v, float):
                assert float(fmt(v)) == v
    assert fmt(math.inf) == "inf" and float("inf") == math.inf


def test_run_ex2_failures_listed(tmp_path):
    out = tmp_path / "ex2.csv"
    assert main(["run", "--example", "ex2", "--n", "80", "--out", str(out)]) == 0
    header, rows = read_csv(str(out) + ".failures.csv")
    assert header[-1] == "attempts" and rows
    for r in rows:
        x, y = r[2], r[3]
        assert r[-1] == 3
        assert min(math.hypot(x, y - 0.25), math.hypot(x, y + 0.25)) <= 5 * 2.0 / 80


def test_classical_toggle_same_csv(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["run", "--example", "unit", "--n", "30", "--out", str(a)])
    main(["run", "--example", "unit", "--n", "30", "--out", str(b), "--set", "classical = true"])
    ra, rb = read_csv(a)[1], read_csv(b)[1]
    assert [r[:5] for r in ra] == [r[:5] for r in rb]


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# engine\nsign_test_samples = 8\nslope_cap = none\nrecord_sideways = false\n")
    assert parse_config(cfg.read_text()) == {"sign_test_samples": 8, "slope_cap": None, "record_sideways": False}
    out = tmp_path / "r.csv"
    rc = main(["run", "--example", "ex1", "--n", "30", "--out", str(out), "--config", str(cfg),
               "--set", "sign_test_samples=12", "--record-sideways"])
    assert rc == 0
    man = json.loads((tmp_path / "r.csv.manifest.json").read_text())
    assert man["config"]["sign_test_samples"] == 12 and man["config"]["record_sideways"] is True
    assert (tmp_path / "r.csv.sideways.csv").exists()


def test_bad_config_exit_code(tmp_path, capsys):
    assert main(["run", "--example", "unit", "--n", "10", "--set", "warp = 9"]) == 4
    with pytest.raises(ConfigError):
        parse_config("no equals sign")


def test_converge_table(tmp_path):
    out = tmp_path / "conv.csv"
    pts = tmp_path / "pts.csv"
    assert main(["converge", "--example", "ex1", "--grids", "20,40", "--region", "bottom",
                 "--out", str(out), "--points", str(pts)]) == 0
    header, rows = read_csv(out)
    assert header == ["n", "h", "L1", "Linf", "slope"]
    assert [r[0] for r in rows] == [20, 40] and rows[1][2] < rows[0][2]
    _, prow = read_csv(pts)
    assert prow and all(0 <= r[-1] <= 1 for r in prow)


def test_converge_patch(tmp_path):
    out = tmp_path / "patch.csv"
    assert main(["converge", "--example", "ex1", "--grids", "40,80", "--patch", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert 0.85 <= rows[-1][4] <= 1.3


def test_oracle_unit_speed(tmp_path):
    out = tmp_path / "o.csv"
    assert main(["oracle", "--example", "unit", "--n", "80", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["x", "y", "t"]
    # the unit example's box is left once r exceeds 0.319
    inner = [r for r in rows if r[2] <= 0.06]
    assert inner
    assert max(abs(math.hypot(x, y) - 0.25 - t) for x, y, t in inner) <= 1e-3


def test_oracle_ex4_before_merge_matches_exact(tmp_path):
    from frontweave.study import example_oracle

    ex = get_example("ex4")
    cloud = example_oracle("ex4", 200).points
    cloud = cloud[cloud[:, 2] < 0.45]
    phi = ex.exact.phi(cloud[:, 0], cloud[:, 1], cloud[:, 2])
    assert max(abs(phi)) <= 2 * (3.0 / 200)


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    assert "FAIL" not in capsys.readouterr().out
