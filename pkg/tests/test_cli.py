import json
import subprocess
import sys

import pytest

from sarafina.cli import build_parser, main, parse_config
from sarafina.errors import ConfigError

SUBCOMMANDS = ["score", "project", "estimate", "diagnose", "datasets", "report"]
GLOBAL_FLAGS = ["--config", "--output", "--svg", "--format", "--seed"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table_rows(out):
    return [line.split() for line in out.splitlines()[1:] if not line.startswith("#")]


def test_score_brazil_first_row(capsys):
    code, out, _ = run(capsys, "score", "--dataset", "brazil-case-study", "--reduction", "0.25",
                       "--enactment", "2008")
    assert code == 0
    first = table_rows(out)[0]
    assert first[0] == "2008" and abs(float(first[-1]) - 59.7) <= 1e-9


def test_score_null_policy_equals_gap(capsys):
    code, out, _ = run(capsys, "score", "--dataset", "brazil-case-study", "--reduction", "0")
    assert code == 0
    for row in table_rows(out):
        assert row[1] == row[-1]


def test_score_missing_input_is_io_error(capsys):
    code, _, err = run(capsys, "score", "--input", "missing.csv", "--reduction", "0.25")
    assert code == 2 and "missing.csv" in err


def test_score_validation_error_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("year,men_pct,women_pct\n2000,89,12\n")
    code, _, err = run(capsys, "score", "--input", str(bad), "--reduction", "0.25")
    assert code == 1 and "shares sum" in err


def test_score_sparse_dataset_needs_interpolation(capsys):
    code, _, err = run(capsys, "score", "--dataset", "brazil", "--reduction", "0.25")
    assert code == 1 and "2001" in err
    code, out, _ = run(capsys, "score", "--dataset", "brazil", "--reduction", "0.25", "--interpolate",
                       "--enactment", "2006")
    assert code == 0 and table_rows(out)[0][0] == "2006"


@pytest.mark.parametrize("argv", [
    ["score", "--reduction", "0.2"],
    ["score", "--dataset", "brazil", "--input", "x.csv", "--reduction", "0.2"],
    ["score", "--dataset", "brazil-case-study", "--reduction", "1.5"],
    ["score", "--dataset", "brazil-case-study", "--model", "exponential"],
    ["score", "--dataset", "nope"],
    ["score", "--unknown-flag"],
    ["diagnose", "--dataset", "brazil-case-study", "--trials", "10"],
])
def test_config_errors_exit_3(capsys, argv):
    code = main(argv)
    _, err = capsys.readouterr()
    expected = 1 if "nope" in argv else 3
    assert code == expected and err.startswith("error:")


def test_score_outputs_files_deterministically(capsys, tmp_path):
    paths = []
    for i in range(2):
        j, s = tmp_path / f"r{i}.json", tmp_path / f"r{i}.svg"
        code, out, _ = run(capsys, "score", "--dataset", "brazil-case-study", "--output", str(j),
                           "--svg", str(s), "--flags")
        assert code == 0
        paths.append((j.read_bytes(), s.read_bytes(), out))
    assert paths[0] == paths[1]
    assert json.loads(paths[0][0])["rows"][0]["sarafina_score"] == 59.7


def test_score_json_format(capsys):
    code, out, _ = run(capsys, "--format", "json", "score", "--dataset", "brazil-case-study")
    assert code == 0 and json.loads(out)["schema_version"] == 1
    code, out2, _ = run(capsys, "score", "--dataset", "brazil-case-study", "--format", "json")
    assert out2 == out


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# case study with a short horizon\nsource.dataset = brazil-case-study\n"
                   "projection.horizon_years = 5\npolicy.reduction_fraction = 0.25\n")
    code, out5, _ = run(capsys, "score", "--config", str(cfg))
    code, out10, _ = run(capsys, "score", "--config", str(cfg), "--horizon", "10")
    code, ref10, _ = run(capsys, "score", "--dataset", "brazil-case-study")
    assert out10 == ref10 and out5 != out10
    assert float(table_rows(out5)[5][2]) == pytest.approx(79.6 - 19.9, abs=1e-4)


def test_parse_config_errors():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("foo.bar = 1")
    with pytest.raises(ConfigError, match="bad value"):
        parse_config("diagnostics.trials = many")
    with pytest.raises(ConfigError):
        parse_config("no equals sign")
    assert parse_config("source.interpolate = yes\ndiagnostics.seed=7") == {
        "source.interpolate": True, "diagnostics.seed": 7}


def test_project_linear_and_exponential(capsys):
    code, out, _ = run(capsys, "project", "--dataset", "brazil-case-study", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["projected_gap"][0] == 79.6 and d["years"][-1] == 2017
    code, out, _ = run(capsys, "project", "--dataset", "brazil-case-study", "--model", "exponential",
                       "--rate", "0.5", "--format", "json")
    assert code == 0 and json.loads(out)["model"] == "exponential"


def write_training(tmp_path):
    train = tmp_path / "train.csv"
    train.write_text("a,b,realized_reduction_pct\n1,10,2\n2,20,2\n3,10,2\n4,20,6\n5,20,6\n6,10,6\n")
    query = tmp_path / "query.csv"
    query.write_text("a,b\n2.5,20\n")
    return train, query


def test_estimate(capsys, tmp_path):
    train, query = write_training(tmp_path)
    code, out, _ = run(capsys, "estimate", "--training", str(train), "--query", str(query),
                       "--categories", "2,6", "--bins", "2", "--baseline", "74", "--format", "json")
    assert code == 0
    est = json.loads(out)["estimates"][0]
    assert est["category_pct"] == 2
    assert est["posterior"]["2"] == pytest.approx(8 / 11, abs=1e-12)
    assert est["p_final"] == pytest.approx(1.48, abs=1e-12)


def test_estimate_needs_inputs(capsys):
    assert main(["estimate"]) == 3


def test_score_from_indicators(capsys, tmp_path):
    train, query = write_training(tmp_path)
    code, out, _ = run(capsys, "score", "--dataset", "brazil-case-study", "--training", str(train),
                       "--indicators", str(query), "--categories", "2,6", "--bins", "2",
                       "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["policy"]["reduction_fraction"] == 0.02
    code = main(["score", "--dataset", "brazil-case-study", "--training", str(train),
                 "--indicators", str(query), "--reduction", "0.25"])
    capsys.readouterr()
    assert code == 3


def test_diagnose(capsys):
    argv = ["diagnose", "--dataset", "brazil-case-study", "--trials", "200", "--seed", "9",
            "--format", "json"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    d = json.loads(out)
    assert set(d) >= {"resiliency", "consistency", "convergence", "flags"}
    assert d["consistency"]["seed"] == 9
    code, again, _ = run(capsys, *argv)
    assert again == out
    code, zero, _ = run(capsys, "diagnose", "--dataset", "brazil-case-study", "--trials", "100",
                        "--delta", "0", "--sigma", "0", "--format", "json")
    z = json.loads(zero)
    assert set(z["resiliency"]["per_year"].values()) == {0.0}
    assert z["consistency"]["std"] == 0.0


def test_datasets(capsys):
    code, out, _ = run(capsys, "datasets")
    assert code == 0 and out.split() == ["brazil", "mexico", "brazil-case-study", "mexico-case-study"]
    code, out, _ = run(capsys, "datasets", "mexico", "--format", "json")
    assert [r["gap_pct"] for r in json.loads(out)["rows"]] == [74, 56, 55.2]


def test_report_rerenders(capsys, tmp_path):
    j = tmp_path / "r.json"
    run(capsys, "score", "--dataset", "brazil-case-study", "--output", str(j))
    svg, j2 = tmp_path / "c.svg", tmp_path / "r2.json"
    code, out, _ = run(capsys, "report", "--report", str(j), "--svg", str(svg), "--output", str(j2))
    assert code == 0 and svg.read_text().count("<polyline") == 2
    assert j2.read_bytes() == j.read_bytes()
    assert table_rows(out)[0][-1] == "59.7000"


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help_documents_flags(cmd):
    proc = subprocess.run([sys.executable, "-m", "sarafina", cmd, "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for flag in GLOBAL_FLAGS:
        assert flag in proc.stdout


def test_help_mentions_subcommand_flags():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    score_help = sub["score"].format_help()
    for flag in ["--dataset", "--input", "--reduction", "--enactment", "--model", "--horizon",
                 "--rate", "--interpolate", "--training", "--indicators"]:
        assert flag in score_help
    diag_help = sub["diagnose"].format_help()
    for flag in ["--delta", "--sigma", "--trials", "--threshold", "--window", "--tol"]:
        assert flag in diag_help
