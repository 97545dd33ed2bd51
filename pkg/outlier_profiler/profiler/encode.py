"""Turn raw cells into the numeric features and target used by the regressor."""
import datetime as dt
import logging
import math
import re
import typing

import numpy as np

from .. import constants
from . import errors, models

logger = logging.getLogger(__name__)

_DECIMAL = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_UINT32 = 0xFFFFFFFF


def string_hash(value: typing.Optional[str]) -> int:
    """Polynomial-31 hash over UTF-16 code units with 32-bit wrapping.

    None hashes to -1 and the empty string to 0 so missing values keep a recognisable code.
    """
    if value is None:
        return constants.NULL_SENTINEL
    if value == "":
        return constants.EMPTY_SENTINEL
    code_units = np.frombuffer(value.encode("utf-16-le", "surrogatepass"), dtype="<u2")
    h = 0
    for unit in code_units.tolist():
        h = (31 * h + unit) & _UINT32
    return h - (1 << 32) if h & 0x80000000 else h


def date_to_days(
    value: typing.Optional[str],
    date_format: str = constants.DEFAULT_DATE_FORMAT,
    epoch: dt.date = dt.date(1970, 1, 1),
) -> int:
    """Whole days from epoch to the date in value. Missing values get the hash sentinels."""
    if value is None:
        return constants.NULL_SENTINEL
    if value == "":
        return constants.EMPTY_SENTINEL
    try:
        parsed = dt.datetime.strptime(value, date_format).date()
    except ValueError as err:
        raise errors.DateError(f"{value!r} is not a valid date for format {date_format!r}") from err
    return (parsed - epoch).days


def parse_decimal(value: str) -> float:
    """Parse a plain decimal number, rejecting nan, inf and other float() extras."""
    text = value.strip()
    if not _DECIMAL.fullmatch(text):
        raise ValueError(f"{value!r} is not a decimal number")
    number = float(text)
    if not math.isfinite(number):
        raise ValueError(f"{value!r} is out of the floating point range")
    return number


def _encode_feature(
    column: models.ColumnSpec, cell: typing.Optional[str], schema: models.SchemaConfig
) -> typing.Tuple[float, int]:
    """Feature value and raw integer code of one cell. Raises ValueError on bad cells."""
    if column.role == "categorical":
        code = string_hash(cell)
        return float(code), code
    if column.role == "date":
        days = date_to_days(cell, schema.date_format, schema.date_epoch)
        return float(days), days
    # Numeric: missing cells take the sentinels, values are kept as parsed.
    if cell is None or cell == "":
        code = string_hash(cell)
        return float(code), code
    return parse_decimal(cell), string_hash(cell)


def encode_record(
    record: models.RawRecord, schema: models.SchemaConfig
) -> typing.Tuple[typing.Optional[models.EncodedRow], typing.List[models.RuleViolation]]:
    """Encode one record, or report why it cannot be encoded."""
    features = []
    raw_hashes = []
    violations = []
    target = 0.0
    for column, cell in zip(schema.columns, record.cells):
        if column.role == "ignore":
            continue
        if column.role == "target":
            try:
                if cell is None or cell == "":
                    raise ValueError("target is missing")
                target = parse_decimal(cell)
            except ValueError as err:
                violations.append(
                    models.RuleViolation(
                        record.row_id, column.name, constants.RULE_TARGET_NUMERIC, cell, str(err)
                    )
                )
            continue
        try:
            value, code = _encode_feature(column, cell, schema)
        except errors.DateError as err:
            violations.append(
                models.RuleViolation(
                    record.row_id, column.name, constants.RULE_DATE, cell, str(err)
                )
            )
            continue
        except ValueError as err:
            violations.append(
                models.RuleViolation(
                    record.row_id, column.name, constants.RULE_NUMERIC, cell, str(err)
                )
            )
            continue
        features.append(value)
        raw_hashes.append(code)

    if violations:
        return None, violations
    return models.EncodedRow(record.row_id, tuple(features), target, tuple(raw_hashes)), []


def encode_dataset(
    records: typing.Sequence[models.RawRecord], schema: models.SchemaConfig
) -> typing.Tuple[typing.List[models.EncodedRow], typing.List[models.RuleViolation]]:
    """Encode every record. Rows which cannot be encoded are dropped and reported."""
    rows = []
    violations = []
    for record in records:
        row, found = encode_record(record, schema)
        if row is None:
            violations.extend(found)
        else:
            rows.append(row)
    logger.info(
        "Encoded %s rows into %s features, excluded %s.",
        len(rows),
        len(schema.feature_columns),
        len(records) - len(rows),
    )
    return rows, violations


def feature_matrix(rows: typing.Sequence[models.EncodedRow]) -> models.FloatArray:
    return np.array([row.features for row in rows], dtype=np.float64).reshape(len(rows), -1)


def target_vector(rows: typing.Sequence[models.EncodedRow]) -> models.FloatArray:
    return np.array([row.target for row in rows], dtype=np.float64)


def fit_scaling(rows: typing.Sequence[models.EncodedRow]) -> models.ScalingParams:
    """Population mean and standard deviation of every feature and the target."""
    if len(rows) < 2:
        raise errors.TrainingError(f"scaling needs at least 2 rows, got {len(rows)}")
    features = feature_matrix(rows)
    targets = target_vector(rows)
    return models.ScalingParams(
        feature_mean=tuple(float(x) for x in features.mean(axis=0)),
        feature_std=tuple(float(x) for x in features.std(axis=0)),
        target_mean=float(targets.mean()),
        target_std=float(targets.std()),
    )


def _standardise(
    values: models.FloatArray, mean: models.FloatArray, std: models.FloatArray
) -> models.FloatArray:
    # Constant features carry no information and map to 0.
    safe = np.where(std > 0, std, 1.0)
    return np.where(std > 0, (values - mean) / safe, 0.0)


def scale_features(features: models.FloatArray, params: models.ScalingParams) -> models.FloatArray:
    """Standardise a feature vector or a matrix of feature rows."""
    if features.shape[-1] != params.arity:
        raise errors.ArityError(f"expected {params.arity} features, got {features.shape[-1]}")
    return _standardise(
        features, np.array(params.feature_mean), np.array(params.feature_std)
    )


def scale_target(values: typing.Any, params: models.ScalingParams) -> typing.Any:
    if params.target_std == 0:
        return np.zeros_like(values, dtype=np.float64) if np.ndim(values) else 0.0
    return (values - params.target_mean) / params.target_std


def invert_target(values: typing.Any, params: models.ScalingParams) -> typing.Any:
    """Map scaled predictions back to original target units."""
    if params.target_std == 0:
        return values * 0.0 + params.target_mean
    return values * params.target_std + params.target_mean


def apply_scaling(row: models.EncodedRow, params: models.ScalingParams) -> models.EncodedRow:
    """Standardise one row's features and target."""
    if len(row.features) != params.arity:
        raise errors.ArityError(f"expected {params.arity} features, got {len(row.features)}")
    scaled = scale_features(np.array(row.features, dtype=np.float64), params)
    return models.EncodedRow(
        row_id=row.row_id,
        features=tuple(float(x) for x in scaled),
        target=float(scale_target(row.target, params)),
        raw_hashes=row.raw_hashes,
    )
