import csv
import io
import json

import pytest

from fderiv import cli
from fderiv import scenarios as sc
from fderiv.errors import ScenarioError

BUNDLED = ["chain-holds-grid", "hom-fail-sqrt32", "square-incompatible"]


def test_bundled_names():
    assert sc.bundled_names() == BUNDLED


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenarios_pass(name):
    result = sc.run_scenario(name)
    failing = [e["metric"] for e in result.report["expectations"] if not e["ok"]]
    assert result.exit_code == 0, failing


def test_reports_written(tmp_path):
    sc.run_scenario("square-incompatible", out_dir=tmp_path)
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] is True
    rows = list(csv.DictReader(io.StringIO((tmp_path / "report.csv").read_text())))
    assert set(rows[0]) == {"scenario", "step", "pair", "verdict", "max_residual", "witness"}
    assert {r["verdict"] for r in rows if r["step"] == "compat"} == {"incompatible"}


def test_report_has_no_volatile_fields():
    text = sc.run_scenario("hom-fail-sqrt32").report_json()
    for word in ("time", "date", "elapsed", "host"):
        assert f'"{word}' not in text


def test_round15():
    assert sc.round15(0.1 + 0.2) == 0.3
    assert sc.round15({"a": [1 / 3, 2]}) == {"a": [0.333333333333333, 2]}
    assert sc.round15(float("inf")) == "inf"
    assert sc.round15(1 + 2j) == [1.0, 2.0]


def _mini(expectations, pipeline=None):
    return {
        "name": "mini",
        "exprs": {"sq": "pow(z,2)"},
        "pairs": {"sq": {"holomorphic": "sq"}},
        "pipeline": pipeline or [{"id": "c", "op": "check_family", "pair": "sq", "family": "unit-square-edges"}],
        "expectations": expectations,
    }


def test_failing_expectation_named():
    result = sc.run_scenario(_mini([
        {"metric": "c.verdict", "cmp": "==", "value": "pass"},
        {"metric": "c.max_residual", "cmp": ">", "value": 1.0},
    ]))
    assert result.exit_code == 1
    assert result.report["first_failure"] == "c.max_residual"


def test_approx_comparator():
    doc = _mini(
        [{"metric": "i.seg_re", "cmp": "approx", "value": 0.5, "tol": 1e-12}],
        [{"id": "i", "op": "integrate", "expr": "z", "path": {"kind": "polyline", "vertices": [[0, 0], [1, 0]]},
          "route": "seg"}],
    )
    assert sc.run_scenario(doc).passed


@pytest.mark.parametrize(
    "doc",
    [
        {"name": "x"},
        {"pipeline": [{"op": "check_family"}]},
        {"pipeline": [{"id": "a", "op": "nope"}]},
        {"pipeline": [{"id": "a", "op": "check_family", "pair": "missing", "family": "unit-square-grid"}]},
        {"exprs": {"bad": "add("}, "pipeline": []},
    ],
)
def test_parse_errors(doc):
    with pytest.raises(ScenarioError):
        sc.run_scenario(doc)


def test_unknown_scenario_name():
    with pytest.raises(ScenarioError):
        sc.load_document("no-such-scenario")


def test_scenario_file(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(_mini([{"metric": "c.verdict", "cmp": "==", "value": "pass"}])))
    assert sc.run_scenario(str(path)).passed


def test_overrides_reach_steps():
    result = sc.run_scenario(_mini([]), overrides={"mesh_depth": 1})
    assert result.report["steps"][0]["metrics"]["subpaths_checked"] == 4 * 3


# -- command line --------------------------------------------------------------


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_repro_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        code, _, _ = run_cli(["repro", "square-incompatible", "--out", str(tmp_path / d)], capsys)
        assert code == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_cli_repro_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run_cli(["repro", str(bad)], capsys)
    assert code == 2 and "error" in err


def test_cli_repro_expectation_failure(tmp_path, capsys):
    path = tmp_path / "f.json"
    path.write_text(json.dumps(_mini([{"metric": "c.verdict", "cmp": "==", "value": "fail"}])))
    code, _, err = run_cli(["repro", str(path)], capsys)
    assert code == 1 and "c.verdict" in err


def test_cli_list(capsys):
    code, out, _ = run_cli(["list-scenarios"], capsys)
    assert code == 0
    assert [s["name"] for s in json.loads(out)["scenarios"]] == BUNDLED


def test_cli_integrate_both(capsys):
    code, out, _ = run_cli(["integrate", "conj", "[[0,0],[1,1]]", "--route", "both"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["seg"] == [1.0, 0.0]
    assert doc["route_gap"] < 1e-6


def test_cli_integrate_pullback(capsys):
    path = json.dumps({"kind": "mapped", "base": {"kind": "polyline", "vertices": [[0, 0], [1, 0]]}, "map": "pow(z,2)"})
    code, out, _ = run_cli(["integrate", "z", path, "--route", "seg", "--allow-pullback"], capsys)
    assert json.loads(out)["seg"] == [0.5, 0.0]


def test_cli_check_deriv_exit_codes(capsys):
    assert run_cli(["check-deriv", "im", "0", "--family", "unit-square-horizontal"], capsys)[0] == 0
    assert run_cli(["check-deriv", "im", "0", "--family", "unit-square-vertical"], capsys)[0] == 1
    assert run_cli(["check-deriv", "pow(z,3)", "--family", "unit-square-edges"], capsys)[0] == 0


def test_cli_check_deriv_family_file(tmp_path, capsys):
    from fderiv import families as fam

    path = tmp_path / "fam.json"
    path.write_text(json.dumps(fam.horizontal_segments().to_json()))
    code, out, _ = run_cli(["check-deriv", "im", "0", "--family", str(path), "--format", "csv"], capsys)
    assert code == 0 and out.splitlines()[0] == "max_residual,pair,verdict,witness"


def test_cli_compat_and_chain(capsys):
    code, out, _ = run_cli(["compat", "z", "--probe", "im:const(0,-1)", "--family", "unit-square-horizontal",
                            "--fam-g", "unit-square-vertical"], capsys)
    assert code == 1
    assert {g["status"] for g in json.loads(out)["generators"]} == {"incompatible"}
    code, out, _ = run_cli(["chain", "pow(z,2)", "add(z,1)", "--family", "unit-square-grid"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "pass"


def test_cli_fdb_table_csv(capsys):
    code, out, _ = run_cli(["fdb", "--k", "4", "--table", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 5
    i2 = {r["a"]: r["contribution"] for r in rows if r["i"] == "2"}
    assert i2 == {"1 0 1 0": "4", "0 2 0 0": "3"}


def test_cli_fdb_expression(capsys):
    code, out, _ = run_cli(["fdb", "--k", "2", "--f", "pow(z,3)", "--phi", "pow(z,2)"], capsys)
    assert code == 0 and "derivative" in json.loads(out)


def test_cli_algseq(capsys):
    code, out, _ = run_cli(["algseq", "check", "--p", "3/2", "--n", "40"], capsys)
    assert code == 0 and json.loads(out)["status"] == "pass"
    code, out, _ = run_cli(["algseq", "check", "--values", "1,1,1,1", "--n", "3"], capsys)
    assert code == 1 and json.loads(out)["witness"] == [1, 1]
    code, out, _ = run_cli(["algseq", "d", "--p", "3/2", "--n", "60"], capsys)
    assert json.loads(out)["verdict"] == "->0"
    code, out, _ = run_cli(["algseq", "ratio", "--p", "3/2", "--n", "4", "--format", "csv"], capsys)
    assert out.splitlines()[-1].split(",") == ["4", "2.0", "4", "2"]


def test_cli_norm_and_hom(capsys):
    code, out, _ = run_cli(["norm", "pow(z,2)", "--n", "2", "--family", "unit-square-edges"], capsys)
    assert json.loads(out)["norm"] == pytest.approx(5.82842712474619)
    code, out, _ = run_cli(["hom", "check", "div(add(1,pow(z,2)),2)", "--family", "unit-interval"], capsys)
    assert json.loads(out)["condition"] == "none"
    code, out, _ = run_cli(["hom", "check", "mul(0.5,z)", "--family", "unit-interval"], capsys)
    assert json.loads(out)["condition"] == "condA"
    code, out, _ = run_cli(["hom", "probe", "mul(0.5,z)", "--family", "unit-interval", "--test", "pow(z,3)",
                            "--p", "1"], capsys)
    assert json.loads(out)["rows"][0]["ratio"] <= 1 + 1e-6


def test_cli_bad_expression(capsys):
    code, _, err = run_cli(["integrate", "add(", "[[0,0],[1,1]]"], capsys)
    assert code == 2 and err.startswith("error:")
