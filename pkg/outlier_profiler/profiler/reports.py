"""Delimited text reports written and read by the pipeline.

Every file starts with a single '#' comment header line; readers skip comment lines.
Floats are written with repr so values read back bit-exact.
"""
import csv
import math
import typing

from .. import constants
from . import errors, models

PREDICTION_COLUMNS = ("row_id", "actual", "predicted", "split")


def _fmt(value: typing.Optional[float]) -> str:
    if value is None:
        return constants.UNDEFINED_MARKER
    return repr(float(value))


def _open_writer(path: str, header: str) -> typing.Tuple[typing.TextIO, typing.Any]:
    thefile = open(path, "w", encoding="utf-8", newline="")  # pylint: disable=consider-using-with
    if header:
        thefile.write(header.rstrip("\n") + "\n")
    return thefile, csv.writer(thefile, lineterminator="\n")


def write_rows(
    path: str,
    header: str,
    columns: typing.Sequence[str],
    rows: typing.Iterable[typing.Sequence[typing.Any]],
) -> None:
    """Write a header comment, a column row and data rows."""
    thefile, writer = _open_writer(path, header)
    with thefile:
        writer.writerow(columns)
        writer.writerows(rows)


def write_violations(
    path: str, header: str, violations: typing.Iterable[models.RuleViolation]
) -> None:
    write_rows(
        path,
        header,
        ("row_id", "column", "rule_id", "observed", "detail"),
        (
            (v.row_id, v.column, v.rule_id, "" if v.observed is None else v.observed, v.detail)
            for v in violations
        ),
    )


def write_outlier_report(
    path: str,
    header: str,
    records: typing.Iterable[models.OutlierRecord],
    target_name: str = "value",
) -> None:
    """Residual table in report order with the classification of each row."""
    write_rows(
        path,
        header,
        (
            "id",
            f"actual_{target_name}",
            f"predicted_{target_name}",
            "error",
            "difference_ratio",
            "classification",
        ),
        (
            (
                r.row_id,
                _fmt(r.actual),
                _fmt(r.predicted),
                _fmt(r.error),
                _fmt(r.difference_ratio),
                r.classification.value,
            )
            for r in records
        ),
    )


def write_chart_data(path: str, header: str, series: models.ChartSeries) -> None:
    """Plot data: one row per point, then one row per reference line."""
    rows: typing.List[typing.Sequence[typing.Any]] = [
        ("point", p.index, p.row_id, _fmt(p.ratio), "1" if p.outlier else "0")
        for p in series.points
    ]
    rows += [
        ("ucl", "", "", _fmt(series.ucl), ""),
        ("cl", "", "", _fmt(series.cl), ""),
        ("lcl", "", "", _fmt(series.lcl), ""),
    ]
    write_rows(path, header, ("series", "index", "row_id", "value", "outlier"), rows)


def _metric(value: typing.Optional[float], failed: bool) -> str:
    if failed:
        return "nan"
    if value is None:
        return constants.UNDEFINED_MARKER
    if math.isnan(value):
        return "nan"
    return repr(float(value))


def write_sweep_report(
    path: str,
    header: str,
    rows: typing.Sequence[models.SweepRow],
    best: typing.Optional[models.SweepRow] = None,
) -> None:
    """Architecture comparison table, one row per hidden-layer configuration."""
    table = []
    for row in rows:
        metrics = row.metrics
        failed = metrics is None
        table.append(
            (
                row.number,
                ",".join(str(size) for size in row.hidden_sizes),
                _metric(metrics.correlation_coefficient if metrics else None, failed),
                _metric(metrics.mean_absolute_error if metrics else None, failed),
                _metric(metrics.root_mean_squared_error if metrics else None, failed),
                row.error or "",
            )
        )
    thefile, writer = _open_writer(path, header)
    with thefile:
        writer.writerow(
            (
                "no",
                "hidden_layers",
                "correlation_coefficient",
                "mean_absolute_error",
                "root_mean_squared_error",
                "note",
            )
        )
        writer.writerows(table)
        if best is not None:
            thefile.write(
                f"# best: no={best.number} "
                f"hidden_layers={','.join(str(size) for size in best.hidden_sizes)}\n"
            )


def write_encoded(path: str, header: str, rows: typing.Sequence[models.EncodedRow]) -> None:
    """Encoded matrix before scaling: row_id, f0..f{k-1}, target."""
    arity = len(rows[0].features) if rows else 0
    write_rows(
        path,
        header,
        ("row_id", *(f"f{i}" for i in range(arity)), "target"),
        ((row.row_id, *(_fmt(x) for x in row.features), _fmt(row.target)) for row in rows),
    )


def write_predictions(
    path: str,
    header: str,
    rows: typing.Sequence[models.EncodedRow],
    predictions: typing.Sequence[float],
    test_ids: typing.Optional[typing.Collection[int]] = None,
) -> None:
    """Predictions with the split of each row, or "unknown" when test_ids is None."""

    def split_of(row_id: int) -> str:
        if test_ids is None:
            return "unknown"
        return "test" if row_id in test_ids else "train"

    write_rows(
        path,
        header,
        PREDICTION_COLUMNS,
        (
            (row.row_id, _fmt(row.target), _fmt(p), split_of(row.row_id))
            for row, p in zip(rows, predictions)
        ),
    )


def write_row_status(
    path: str, header: str, statuses: typing.Sequence[typing.Tuple[int, str, str]]
) -> None:
    write_rows(path, header, ("row_id", "status", "detail"), statuses)


def read_predictions(
    path: str,
) -> typing.Tuple[typing.List[int], typing.List[float], typing.List[float]]:
    """Row ids, actuals and predictions from a predictions file."""
    row_ids, actuals, predictions = [], [], []
    try:
        with open(path, "r", encoding="utf-8", newline="") as thefile:
            lines = (line for line in thefile if not line.startswith("#"))
            reader = csv.DictReader(lines)
            if reader.fieldnames is None or not {"row_id", "actual", "predicted"} <= set(
                reader.fieldnames
            ):
                raise errors.SpcError(f"{path} needs row_id, actual and predicted columns")
            for record in reader:
                row_ids.append(int(record["row_id"]))
                actuals.append(float(record["actual"]))
                predictions.append(float(record["predicted"]))
    except OSError as err:
        raise errors.SpcError(f"cannot read {path}: {err.strerror}") from err
    except (TypeError, ValueError) as err:
        raise errors.SpcError(f"invalid predictions file {path}: {err}") from err
    return row_ids, actuals, predictions
