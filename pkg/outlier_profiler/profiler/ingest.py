"""Read delimited datasets into raw records bound to a schema."""
import csv
import logging
import typing

from .. import constants
from . import errors, models

logger = logging.getLogger(__name__)


def _column_order(header: typing.Sequence[str], schema: models.SchemaConfig) -> typing.List[int]:
    """For each schema column, the position of that column in the file."""
    names = schema.names
    missing = [name for name in names if name not in header]
    unexpected = [name for name in header if name not in names]
    duplicated = sorted({name for name in header if header.count(name) > 1})
    if missing or unexpected or duplicated:
        problems = []
        if missing:
            problems.append(f"missing from header: {', '.join(missing)}")
        if unexpected:
            problems.append(f"not in schema: {', '.join(unexpected)}")
        if duplicated:
            problems.append(f"repeated in header: {', '.join(duplicated)}")
        raise errors.IngestError(f"header does not match schema ({'; '.join(problems)})")
    return [header.index(name) for name in names]


def read_records(
    lines: typing.Iterable[str],
    schema: models.SchemaConfig,
    delimiter: str = constants.DEFAULT_DELIMITER,
) -> typing.List[models.RawRecord]:
    """Parse the header and data lines of a delimited text source."""
    reader = csv.reader(lines, delimiter=delimiter, quotechar='"', strict=True)
    try:
        header = next(reader)
    except StopIteration as err:
        raise errors.IngestError("file is empty, a header row is required") from err
    order = _column_order([name.strip() for name in header], schema)
    width = len(order)

    records = []
    try:
        for cells in reader:
            # A blank line is not a record.
            if not cells:
                continue
            row_id = len(records)
            if len(cells) > width:
                raise errors.RowTooLongError(row_id, len(cells), width)
            # Cells past the end of a short row are absent, not empty.
            padded: typing.List[typing.Optional[str]] = list(cells) + [None] * (width - len(cells))
            records.append(models.RawRecord(row_id, tuple(padded[i] for i in order)))
    except csv.Error as err:
        raise errors.IngestError(f"line {reader.line_num}: {err}") from err
    return records


def load_dataset(
    path: str,
    schema: models.SchemaConfig,
    delimiter: str = constants.DEFAULT_DELIMITER,
) -> typing.List[models.RawRecord]:
    """Load a UTF-8 delimited file with a header row into RawRecords in file order."""
    try:
        with open(path, "r", encoding="utf-8-sig", newline="") as thefile:
            records = read_records(thefile, schema, delimiter)
    except OSError as err:
        if isinstance(err, errors.IngestError):
            raise
        raise errors.IngestError(f"cannot read {path}: {err.strerror}") from err
    except UnicodeDecodeError as err:
        raise errors.IngestError(f"{path} is not valid UTF-8: {err.reason}") from err
    logger.info("Loaded %s rows from %s.", len(records), path)
    return records


def classify_cell(cell: typing.Optional[str]) -> typing.Literal["null", "empty", "value"]:
    """Every cell is exactly one of null, empty or a value."""
    if cell is None:
        return "null"
    if cell == "":
        return "empty"
    return "value"
