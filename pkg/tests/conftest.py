"""Test configuration and global fixtures."""
# nosec
import datetime as dt
import pathlib
import typing

import numpy as np
import pytest
import tomli

from outlier_profiler.profiler import config, encode, ingest, models

SCHEMA_TOML = """\
target = "annual_salary"
date_format = "%Y-%m-%d"
date_epoch = "1970-01-01"

[[columns]]
name = "employee_id"
role = "ignore"

[[columns]]
name = "agency"
role = "categorical"
nullable = false

[[columns]]
name = "pay_class"
role = "categorical"
allowed_values = ["FT", "PT", "SEASONAL"]

[[columns]]
name = "hire_date"
role = "date"

[[columns]]
name = "years"
role = "numeric"

[[columns]]
name = "annual_salary"
role = "target"
nullable = false
empty_allowed = false
"""

AGENCY_OFFSETS = {
    "DEPT OF PARKS AND TOURISM": 0.0,
    "DEPT OF TRANSPORTATION": 4000.0,
    "DEPT OF HEALTH": 6000.0,
    "DEPT OF EDUCATION": 1500.0,
    "DEPT OF REVENUE": 5000.0,
    "STATE POLICE": 3000.0,
    "DEPT OF CORRECTIONS": 2500.0,
    "DEPT OF AGRICULTURE": 1000.0,
}
PAY_CLASS_OFFSETS = {"FT": 0.0, "PT": -8000.0, "SEASONAL": -12000.0}
PLANTED_ROW_IDS = tuple(range(50, 2000, 100))
N_ROWS = 2000


class SalaryData(typing.NamedTuple):
    path: pathlib.Path
    schema_path: pathlib.Path
    planted: typing.Tuple[int, ...]


def salary_lines(
    n_rows: int = N_ROWS, planted: typing.Sequence[int] = (), seed: int = 2016
) -> typing.List[str]:
    """Synthetic salary file: salary grows with service years plus agency and pay class offsets.

    Planted rows have their salary scaled by 1e-5, the way a misplaced decimal point would.
    """
    rng = np.random.default_rng(seed)
    agencies = list(AGENCY_OFFSETS)
    classes = list(PAY_CLASS_OFFSETS)
    lines = ["employee_id,agency,pay_class,hire_date,years,annual_salary"]
    for row_id in range(n_rows):
        agency = agencies[int(rng.integers(len(agencies)))]
        pay_class = classes[int(rng.integers(len(classes)))]
        years = int(rng.integers(0, 30))
        hired = dt.date(2016, 1, 1) - dt.timedelta(days=365 * years + int(rng.integers(0, 365)))
        salary = (
            30000.0
            + 2000.0 * years
            + AGENCY_OFFSETS[agency]
            + PAY_CLASS_OFFSETS[pay_class]
            + float(rng.normal(0.0, 1000.0))
        )
        text = f"{salary * 1e-5:.6f}" if row_id in planted else f"{salary:.2f}"
        lines.append(f"E{row_id:05d},{agency},{pay_class},{hired.isoformat()},{years},{text}")
    return lines


def write_salary_data(
    path: pathlib.Path, n_rows: int = N_ROWS, planted: typing.Sequence[int] = ()
) -> SalaryData:
    path.mkdir(parents=True, exist_ok=True)
    data_path = path / "salaries.csv"
    data_path.write_text("\n".join(salary_lines(n_rows, planted)) + "\n", encoding="utf-8")
    schema_path = path / "schema.toml"
    schema_path.write_text(SCHEMA_TOML, encoding="utf-8")
    return SalaryData(data_path, schema_path, tuple(planted))


@pytest.fixture(scope="session")
def salary_schema() -> models.SchemaConfig:
    """Parsed schema of the synthetic salary data."""
    return config.parse_schema(tomli.loads(SCHEMA_TOML))


@pytest.fixture(scope="session")
def clean_salaries(tmp_path_factory: pytest.TempPathFactory) -> SalaryData:
    """Salary data without planted errors."""
    return write_salary_data(tmp_path_factory.mktemp("clean"))


@pytest.fixture(scope="session")
def planted_salaries(tmp_path_factory: pytest.TempPathFactory) -> SalaryData:
    """Salary data with 20 gross errors planted at known row ids."""
    return write_salary_data(tmp_path_factory.mktemp("planted"), planted=PLANTED_ROW_IDS)


@pytest.fixture(scope="session")
def encoded_salaries(
    clean_salaries: SalaryData, salary_schema: models.SchemaConfig
) -> typing.List[models.EncodedRow]:
    """Encoded rows of the clean salary data."""
    records = ingest.load_dataset(str(clean_salaries.path), salary_schema)
    rows, violations = encode.encode_dataset(records, salary_schema)
    assert not violations
    return rows


def schema_of(*columns: typing.Tuple[str, str], **kwargs: typing.Any) -> models.SchemaConfig:
    """Small schema from (name, role) pairs."""
    return config.parse_schema(
        {"columns": [{"name": name, "role": role} for name, role in columns], **kwargs}
    )
