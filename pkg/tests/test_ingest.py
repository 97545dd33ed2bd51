"""Tests for reading delimited datasets."""
import pathlib

import pytest

from outlier_profiler.profiler import errors, ingest, models

from . import conftest


@pytest.fixture
def schema() -> models.SchemaConfig:
    return conftest.schema_of(("name", "categorical"), ("age", "numeric"), ("pay", "target"))


def test_null_and_empty_are_distinct(schema: models.SchemaConfig) -> None:
    """A cell missing from a short row is null, a present but blank cell is empty."""
    records = ingest.read_records(["name,age,pay", "ann,,10", "bob,3"], schema)
    assert records[0].cells == ("ann", "", "10")
    assert records[1].cells == ("bob", "3", None)
    assert [ingest.classify_cell(cell) for cell in records[1].cells] == ["value", "value", "null"]
    assert ingest.classify_cell("") == "empty"


def test_columns_reordered_to_schema(schema: models.SchemaConfig) -> None:
    records = ingest.read_records(["pay,name,age", "10,ann,4"], schema)
    assert records[0].cells == ("ann", "4", "10")


def test_row_ids_follow_file_order(schema: models.SchemaConfig) -> None:
    """Row ids count data rows from zero and blank lines are not rows."""
    records = ingest.read_records(["name,age,pay", "a,1,1", "", "b,2,2", "c,3,3"], schema)
    assert [record.row_id for record in records] == [0, 1, 2]
    assert records[1].cells[0] == "b"


def test_quoted_cells(schema: models.SchemaConfig) -> None:
    records = ingest.read_records(['name,age,pay', '"Smith, J",40,"1,000"'], schema)
    assert records[0].cells == ("Smith, J", "40", "1,000")


def test_other_delimiter(schema: models.SchemaConfig) -> None:
    records = ingest.read_records(["name\tage\tpay", "a\t1\t2"], schema, delimiter="\t")
    assert records[0].cells == ("a", "1", "2")


def test_header_only_is_empty(schema: models.SchemaConfig) -> None:
    assert ingest.read_records(["name,age,pay"], schema) == []


def test_long_row(schema: models.SchemaConfig) -> None:
    with pytest.raises(errors.RowTooLongError, match="row 1 has 4 cells") as excinfo:
        ingest.read_records(["name,age,pay", "a,1,2", "b,1,2,3"], schema)
    assert excinfo.value.row_id == 1


@pytest.mark.parametrize(
    "header,message",
    [
        ("name,age", "missing from header: pay"),
        ("name,age,pay,extra", "not in schema: extra"),
        ("name,age,pay,pay", "repeated in header: pay"),
    ],
)
def test_header_mismatch(schema: models.SchemaConfig, header: str, message: str) -> None:
    with pytest.raises(errors.IngestError, match=message):
        ingest.read_records([header, "a,1,2"], schema)


def test_empty_file(schema: models.SchemaConfig) -> None:
    with pytest.raises(errors.IngestError, match="header row is required"):
        ingest.read_records([], schema)


def test_load_dataset(tmp_path: pathlib.Path, schema: models.SchemaConfig) -> None:
    """Files are UTF-8 and a byte order mark is not part of the first column name."""
    path = tmp_path / "data.csv"
    path.write_bytes("\ufeffname,age,pay\r\nzoë,1,2\r\n".encode("utf-8"))
    records = ingest.load_dataset(str(path), schema)
    assert records == [models.RawRecord(0, ("zoë", "1", "2"))]


def test_load_dataset_errors(tmp_path: pathlib.Path, schema: models.SchemaConfig) -> None:
    with pytest.raises(errors.IngestError, match="cannot read"):
        ingest.load_dataset(str(tmp_path / "absent.csv"), schema)
    path = tmp_path / "latin1.csv"
    path.write_bytes("name,age,pay\nzo\xeb,1,2\n".encode("latin-1"))
    with pytest.raises(errors.IngestError, match="not valid UTF-8"):
        ingest.load_dataset(str(path), schema)


def test_salary_data(
    clean_salaries: conftest.SalaryData, salary_schema: models.SchemaConfig
) -> None:
    records = ingest.load_dataset(str(clean_salaries.path), salary_schema)
    assert len(records) == conftest.N_ROWS
    assert all(len(record.cells) == len(salary_schema.columns) for record in records)
