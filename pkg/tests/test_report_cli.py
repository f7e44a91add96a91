import csv
import io
import json

import pytest

from tau3ternary.cli import main
from tau3ternary.errors import EXIT_CODES, Tau3Error
from tau3ternary.report import COMPARISON_COLUMNS, parse_comparison_csv, serialize_report
from tau3ternary.special import singular_series_partial
from tau3ternary.theorem import ComparisonReport


def sample_report():
    return ComparisonReport("tau3-box", 100.0, 123456, 0.1 + 0.2, 1 / 3, 2.0**-40, 7.5, 1.0000000000000002, 256,
                            {"integrals": "quadrature"})


def test_empty_sweep_header_only():
    text = serialize_report({"reports": []}, "csv")
    assert text == ",".join(COMPARISON_COLUMNS) + "\n"


def test_comparison_csv_round_trip():
    r = sample_report()
    text = serialize_report(r, "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == list(COMPARISON_COLUMNS) and len(rows[1]) == 8
    back = parse_comparison_csv(text)[0]
    for c in COMPARISON_COLUMNS:
        assert back[c] == getattr(r, c)


def test_json_round_trip_full_precision():
    c0 = singular_series_partial(0, 256)
    back = json.loads(serialize_report(c0, "json"))
    assert back["value"] == c0.value
    assert json.loads(serialize_report({"z": 1 + 2j}))["z"] == {"re": 1.0, "im": 2.0}


def test_json_key_order_stable():
    r = sample_report()
    keys = list(json.loads(serialize_report(r)).keys())
    assert keys[: len(COMPARISON_COLUMNS)] == list(COMPARISON_COLUMNS)
    assert serialize_report(r) == serialize_report(r)


def test_generic_csv_flattens():
    rows = list(csv.reader(io.StringIO(serialize_report({"a": [1, {"b": 0.5}], "c": True}, "csv"))))
    assert rows == [["key", "value"], ["a[0]", "1"], ["a[1].b", "0.5"], ["c", "true"]]


def test_exit_codes_distinct():
    codes = [c.exit_code for c in [Tau3Error, *Tau3Error.__subclasses__()]]
    assert len(codes) == len(set(codes))
    assert set(codes) <= set(EXIT_CODES) and {0, 1, 2, 3} <= set(EXIT_CODES)


def run(args, tmp_path, name="out"):
    path = tmp_path / name
    code = main([*args, "--output", str(path)])
    return code, path.read_text() if path.exists() else None


def test_cli_compare(tmp_path):
    code, text = run(["compare", "--variant", "tau3-box", "--x", "10000", "--Q", "256"], tmp_path)
    assert code == 0
    d = json.loads(text)
    assert d["lhs"] == 48514131 and isinstance(d["lhs"], int)
    assert d["ratio"] == d["lhs"] / d["predicted"]
    assert {"t1", "t2", "t3"} <= set(d)


def test_cli_integrals(tmp_path):
    code, text = run(["integrals", "--kind", "K", "--ell", "0"], tmp_path)
    assert code == 0
    row = json.loads(text)["rows"][0]
    assert row["value"] == pytest.approx(0.523599, abs=1e-5) and row["oracle_delta"] <= 1e-5


def test_cli_identity(tmp_path):
    _, left = run(["lhs", "--variant", "identity-1.5-left", "--x", "100"], tmp_path, "l")
    _, right = run(["lhs", "--variant", "identity-1.5-right", "--x", "100"], tmp_path, "r")
    assert json.loads(left)["lhs"] == json.loads(right)["lhs"] == 60866


def test_cli_deterministic(tmp_path):
    args = ["charsum", "--prime-max", "29", "--samples", "30", "--weil-c-max", "12", "--seed", "5"]
    c1, a = run(args, tmp_path, "a")
    c2, b = run(args, tmp_path, "b")
    assert c1 == c2 == 0 and a == b


def test_cli_sieve_cache(tmp_path):
    code, text = run(["sieve", "--limit", "1000", "--cache-dir", str(tmp_path)], tmp_path)
    assert code == 0 and json.loads(text)["head"][11] == {"n": 12, "tau": 6, "tau3": 18}
    assert (tmp_path / "tables_1000.bin").exists()


def test_cli_errors(tmp_path, capsys):
    assert main(["lhs", "--variant", "bogus", "--x", "3"]) == 2
    assert main(["voronoi", "--q", "4", "--a", "2"]) == 12
    assert main(["predict", "--x", "100", "--Q", "10"]) == 14
    assert main(["lhs", "--variant", "tau3-box", "--x", "4", "--output", str(tmp_path / "no" / "f")]) == 3


def test_cli_csv_sweep(tmp_path):
    code, text = run(["compare", "--x", "100", "1000", "--format", "csv"], tmp_path)
    assert code == 0
    rows = parse_comparison_csv(text)
    assert [r["x"] for r in rows] == [100.0, 1000.0]
