"""End to end tests of the profiling pipeline and its command line."""
import csv
import pathlib
import typing

import pytest

from outlier_profiler import __version__, constants
from outlier_profiler.profiler import config, models, pipeline

from . import conftest

OUTPUT_NAMES = {
    "violations": "violations.csv",
    "report": "report.csv",
    "chart": "chart.svg",
    "model": "model.toml",
    "predictions": "predictions.csv",
    "row_status": "status.csv",
    "encoded_dump": "encoded.csv",
}
# Rows breaking the target null rule, the pay class domain and the calendar.
BAD_LINES = [
    "X1,,FT,2001-01-01,3",
    "X2,DEPT OF HEALTH,CONTRACT,2001-01-01,3,50000",
    "X3,DEPT OF HEALTH,FT,2001-02-30,3,50000",
]


def read_table(path: pathlib.Path) -> typing.List[typing.Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as thefile:
        return list(csv.DictReader(line for line in thefile if not line.startswith("#")))


class Run(typing.NamedTuple):
    data: conftest.SalaryData
    outputs: pathlib.Path
    summary: models.PipelineSummary


def profile(data: conftest.SalaryData, outputs: pathlib.Path) -> Run:
    outputs.mkdir()
    cfg = config.build_pipeline_config(
        str(data.path),
        str(data.schema_path),
        spc_mode="direct",
        epochs=20,
        **{key: str(outputs / name) for key, name in OUTPUT_NAMES.items()},
    )
    return Run(data, outputs, pipeline.run_pipeline(cfg))


@pytest.fixture(scope="module")
def dirty_salaries(tmp_path_factory: pytest.TempPathFactory) -> conftest.SalaryData:
    """Planted salary data followed by three rows the quality rules reject."""
    data = conftest.write_salary_data(
        tmp_path_factory.mktemp("dirty"), planted=conftest.PLANTED_ROW_IDS
    )
    with open(data.path, "a", encoding="utf-8") as thefile:
        thefile.write("\n".join(BAD_LINES) + "\n")
    return data


@pytest.fixture(scope="module")
def runs(
    dirty_salaries: conftest.SalaryData, tmp_path_factory: pytest.TempPathFactory
) -> typing.Tuple[Run, Run]:
    """The same profiling run written to two directories."""
    base = tmp_path_factory.mktemp("runs")
    return profile(dirty_salaries, base / "first"), profile(dirty_salaries, base / "second")


def test_planted_errors_found(runs: typing.Tuple[Run, Run]) -> None:
    """At least 18 of the 20 planted gross errors are reported as outliers."""
    run = runs[0]
    outliers = {
        int(row["id"])
        for row in read_table(run.outputs / "report.csv")
        if row["classification"] == "outlier"
    }
    assert len(outliers & set(run.data.planted)) >= 18
    assert run.summary.outliers == len(outliers)


def test_stage_conservation(runs: typing.Tuple[Run, Run]) -> None:
    summary = runs[0].summary
    assert summary.rows_in == conftest.N_ROWS + len(BAD_LINES)
    assert summary.rows_in == summary.rows_clean + summary.rows_violating
    assert summary.rows_violating == len(BAD_LINES)
    assert summary.rows_excluded_by_encoder == 0
    assert summary.rows_predicted == summary.rows_clean
    assert summary.rows_reported == summary.rows_predicted
    assert summary.limits.mode == "direct"


def test_report_contents(runs: typing.Tuple[Run, Run]) -> None:
    outputs = runs[0].outputs
    report = read_table(outputs / "report.csv")
    assert list(report[0]) == [
        "id",
        "actual_annual_salary",
        "predicted_annual_salary",
        "error",
        "difference_ratio",
        "classification",
    ]
    assert len(report) == conftest.N_ROWS
    ratios = [abs(float(row["difference_ratio"])) for row in report]
    assert ratios == sorted(ratios, reverse=True)

    predictions = read_table(outputs / "predictions.csv")
    assert len(predictions) == conftest.N_ROWS
    assert {row["split"] for row in predictions} == {"train", "test"}

    chart_data = read_table(outputs / "chart.csv")
    assert [row["series"] for row in chart_data[-3:]] == ["ucl", "cl", "lcl"]
    assert (outputs / "chart.svg").read_text(encoding="utf-8").lstrip().startswith("<?xml")

    encoded = read_table(outputs / "encoded.csv")
    assert list(encoded[0]) == ["row_id", "f0", "f1", "f2", "f3", "target"]


def test_violations_and_row_status(runs: typing.Tuple[Run, Run]) -> None:
    outputs = runs[0].outputs
    violations = read_table(outputs / "violations.csv")
    assert [(row["row_id"], row["column"], row["rule_id"]) for row in violations] == [
        ("2000", "annual_salary", constants.RULE_NULL),
        ("2001", "pay_class", constants.RULE_DOMAIN),
        ("2002", "hire_date", constants.RULE_DATE),
    ]
    status = {int(row["row_id"]): row["status"] for row in read_table(outputs / "status.csv")}
    assert len(status) == conftest.N_ROWS + len(BAD_LINES)
    assert all(status[row_id] == "error" for row_id in (2000, 2001, 2002))
    planted_risks = sum(status[row_id] == "risk" for row_id in conftest.PLANTED_ROW_IDS)
    assert planted_risks >= 18
    assert list(status.values()).count("correct") > 1900


def test_outputs_carry_header(runs: typing.Tuple[Run, Run]) -> None:
    for name in ("violations.csv", "report.csv", "predictions.csv", "model.toml", "chart.csv"):
        first_line = (runs[0].outputs / name).read_text(encoding="utf-8").splitlines()[0]
        assert first_line.startswith(f"# outlier_profiler {__version__} train_seed=1 spc_seed=1 ")
        assert "config_digest=" in first_line
    chart_lines = (runs[0].outputs / "chart.svg").read_text(encoding="utf-8").splitlines()
    assert chart_lines[0].startswith("<?xml")
    assert chart_lines[1].startswith(f"<!-- outlier_profiler {__version__} train_seed=1 ")
    assert chart_lines[1].endswith(" -->")


def test_reruns_are_byte_identical(runs: typing.Tuple[Run, Run]) -> None:
    first, second = runs
    assert first.summary == second.summary
    for name in OUTPUT_NAMES.values():
        assert (first.outputs / name).read_bytes() == (second.outputs / name).read_bytes(), name
    assert (first.outputs / "chart.csv").read_bytes() == (second.outputs / "chart.csv").read_bytes()


def test_spc_subcommand(
    runs: typing.Tuple[Run, Run], tmp_path: pathlib.Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Control limits from a saved predictions file match the full pipeline."""
    outputs = runs[0].outputs
    report = tmp_path / "report.csv"
    code = pipeline.main(
        [
            "spc",
            "--predictions",
            str(outputs / "predictions.csv"),
            "--spc-mode",
            "direct",
            "--report",
            str(report),
            "-q",
        ]
    )
    assert code == constants.EXIT_OK
    assert f"UCL={runs[0].summary.limits.ucl}" in capsys.readouterr().out
    rows = read_table(report)
    assert "actual_value" in rows[0]
    assert [row["id"] for row in rows] == [
        row["id"] for row in read_table(outputs / "report.csv")
    ]


def test_profile_command(
    clean_salaries: conftest.SalaryData,
    tmp_path: pathlib.Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    code = pipeline.main(
        [
            "profile",
            "--input",
            str(clean_salaries.path),
            "--schema",
            str(clean_salaries.schema_path),
            "--epochs",
            "2",
            "--hidden",
            "4",
            "--report",
            str(tmp_path / "report.csv"),
            "--chart",
            str(tmp_path / "chart.svg"),
        ]
    )
    assert code == constants.EXIT_OK
    out = capsys.readouterr().out
    assert f"rows in:              {conftest.N_ROWS}" in out
    assert (tmp_path / "chart.csv").exists()


def test_train_then_predict(
    clean_salaries: conftest.SalaryData, tmp_path: pathlib.Path
) -> None:
    dataset = ["--input", str(clean_salaries.path), "--schema", str(clean_salaries.schema_path)]
    model = tmp_path / "model.toml"
    predictions = tmp_path / "predictions.csv"
    assert pipeline.main(["train", *dataset, "--epochs", "2", "--model", str(model), "-q"]) == 0
    code = pipeline.main(
        ["predict", *dataset, "--model", str(model), "--predictions", str(predictions), "-q"]
    )
    assert code == constants.EXIT_OK
    table = read_table(predictions)
    assert len(table) == conftest.N_ROWS
    # A saved model does not know which rows it was trained on.
    assert {row["split"] for row in table} == {"unknown"}


def test_sweep_single_architecture(
    clean_salaries: conftest.SalaryData, tmp_path: pathlib.Path
) -> None:
    cfg = config.build_pipeline_config(
        str(clean_salaries.path),
        str(clean_salaries.schema_path),
        epochs=2,
        sweep_report=str(tmp_path / "sweep.csv"),
    )
    rows, best = pipeline.run_sweep(cfg, [(12, 18, 12, 10)])
    assert len(rows) == 1
    table = read_table(tmp_path / "sweep.csv")
    assert len(table) == 1
    assert table[0]["no"] == "1" and table[0]["hidden_layers"] == "12,18,12,10"
    lines = (tmp_path / "sweep.csv").read_text(encoding="utf-8").splitlines()
    if best is not None:
        assert lines[-1] == "# best: no=1 hidden_layers=12,18,12,10"


def test_sweep_command_default_architectures(
    clean_salaries: conftest.SalaryData,
    tmp_path: pathlib.Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """Without --architectures every reference architecture gets a row, in order."""
    code = pipeline.main(
        [
            "sweep",
            "--input",
            str(clean_salaries.path),
            "--schema",
            str(clean_salaries.schema_path),
            "--epochs",
            "0",
            "--jobs",
            "2",
            "--sweep-report",
            str(tmp_path / "sweep.csv"),
            "-q",
        ]
    )
    assert code == constants.EXIT_OK
    table = read_table(tmp_path / "sweep.csv")
    assert [row["hidden_layers"] for row in table] == [
        ",".join(str(size) for size in hidden) for hidden in constants.TABLE1_ARCHITECTURES
    ]
    assert capsys.readouterr().out.startswith("best:")


def test_empty_dataset(
    tmp_path: pathlib.Path, capsys: pytest.CaptureFixture[str]
) -> None:
    data = conftest.write_salary_data(tmp_path, n_rows=0)
    code = pipeline.main(["check", "--input", str(data.path), "--schema", str(data.schema_path)])
    assert code == constants.EXIT_INGEST
    assert "ingest: no data rows" in capsys.readouterr().err


def test_failed_stage_removes_outputs(tmp_path: pathlib.Path) -> None:
    """A control limit failure removes the files earlier stages wrote."""
    data = conftest.write_salary_data(tmp_path / "data", n_rows=10)
    violations = tmp_path / "violations.csv"
    model = tmp_path / "model.toml"
    code = pipeline.main(
        [
            "profile",
            "--input",
            str(data.path),
            "--schema",
            str(data.schema_path),
            "--epochs",
            "1",
            "--sample-size",
            "100",
            "--violations",
            str(violations),
            "--model",
            str(model),
            "-q",
        ]
    )
    assert code == constants.EXIT_SPC
    assert not violations.exists()
    assert not model.exists()


def test_unwritable_output_names_stage(
    clean_salaries: conftest.SalaryData,
    tmp_path: pathlib.Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """A report path in a missing directory fails the stage writing it."""
    dataset = ["--input", str(clean_salaries.path), "--schema", str(clean_salaries.schema_path)]
    violations = tmp_path / "violations.csv"
    code = pipeline.main(
        [
            "profile",
            *dataset,
            "--epochs",
            "1",
            "--spc-mode",
            "direct",
            "--violations",
            str(violations),
            "--report",
            str(tmp_path / "missing" / "report.csv"),
        ]
    )
    assert code == constants.EXIT_SPC
    assert "spc: cannot write" in capsys.readouterr().err
    assert not violations.exists()

    code = pipeline.main(
        ["check", *dataset, "--violations", str(tmp_path / "missing" / "violations.csv")]
    )
    assert code == constants.EXIT_INGEST
    assert "ingest: cannot write" in capsys.readouterr().err


def test_config_errors_exit_1(
    clean_salaries: conftest.SalaryData, capsys: pytest.CaptureFixture[str]
) -> None:
    dataset = ["--input", str(clean_salaries.path), "--schema", str(clean_salaries.schema_path)]
    assert pipeline.main(["profile", *dataset, "--train-fraction", "1.5"]) == constants.EXIT_CONFIG
    assert "config: train fraction" in capsys.readouterr().err
    assert pipeline.main(["check", "--input", str(clean_salaries.path)]) == constants.EXIT_CONFIG


def test_pipeline_config_file(
    clean_salaries: conftest.SalaryData, tmp_path: pathlib.Path
) -> None:
    path = tmp_path / "pipeline.toml"
    path.write_text(
        f"""\
input = "{clean_salaries.path}"
schema = "{clean_salaries.schema_path}"

[outputs]
violations = "{tmp_path / 'violations.csv'}"
""",
        encoding="utf-8",
    )
    assert pipeline.main(["check", "--config", str(path), "-q"]) == constants.EXIT_OK
    assert read_table(tmp_path / "violations.csv") == []


@pytest.mark.parametrize(
    "argv", [[], ["profile", "--epochs", "many"], ["sweep", "--architectures", "4,x"]]
)
def test_usage_errors_exit_1(argv: typing.List[str]) -> None:
    with pytest.raises(SystemExit) as excinfo:
        pipeline.main(argv)
    assert excinfo.value.code == constants.EXIT_CONFIG
