"""Check Basic Quality Rules: element-level checks run before modelling."""
import logging
import typing

from .. import constants
from . import encode, errors, ingest, models

logger = logging.getLogger(__name__)

RuleCheck = typing.Callable[
    [models.ColumnSpec, typing.Optional[str], models.SchemaConfig], typing.Optional[str]
]
RULES: typing.Dict[str, RuleCheck] = {}


def register(rule_id: str) -> typing.Callable[[RuleCheck], RuleCheck]:
    """Add a per-cell check to the rule registry under rule_id.

    A check returns a human-readable detail when the cell breaks the rule, else None.
    """

    def decorator(check: RuleCheck) -> RuleCheck:
        RULES[rule_id] = check
        return check

    return decorator


@register(constants.RULE_NULL)
def _null_not_allowed(
    column: models.ColumnSpec, cell: typing.Optional[str], schema: models.SchemaConfig
) -> typing.Optional[str]:
    if ingest.classify_cell(cell) == "null" and not column.nullable:
        return f"{column.name} cannot be null"
    return None


@register(constants.RULE_EMPTY)
def _empty_not_allowed(
    column: models.ColumnSpec, cell: typing.Optional[str], schema: models.SchemaConfig
) -> typing.Optional[str]:
    if ingest.classify_cell(cell) == "empty" and not column.empty_allowed:
        return f"{column.name} cannot be empty"
    return None


@register(constants.RULE_DATE)
def _invalid_date(
    column: models.ColumnSpec, cell: typing.Optional[str], schema: models.SchemaConfig
) -> typing.Optional[str]:
    if column.role != "date" or ingest.classify_cell(cell) != "value":
        return None
    try:
        encode.date_to_days(cell, schema.date_format, schema.date_epoch)
    except errors.DateError as err:
        return str(err)
    return None


@register(constants.RULE_NUMERIC)
def _not_numeric(
    column: models.ColumnSpec, cell: typing.Optional[str], schema: models.SchemaConfig
) -> typing.Optional[str]:
    if column.role not in ("numeric", "target") or not cell:
        return None
    try:
        encode.parse_decimal(cell)
    except ValueError as err:
        return str(err)
    return None


@register(constants.RULE_DOMAIN)
def _value_not_in_domain(
    column: models.ColumnSpec, cell: typing.Optional[str], schema: models.SchemaConfig
) -> typing.Optional[str]:
    if column.allowed_values is None or ingest.classify_cell(cell) != "value":
        return None
    if cell not in column.allowed_values:
        return f"{cell!r} is not an allowed value of {column.name}"
    return None


def check_row(
    record: models.RawRecord, schema: models.SchemaConfig
) -> typing.List[models.RuleViolation]:
    """Run every registered rule over the non-ignored cells of one record."""
    violations = []
    for column, cell in zip(schema.columns, record.cells):
        if column.role == "ignore":
            continue
        for rule_id, check in RULES.items():
            detail = check(column, cell, schema)
            if detail is not None:
                violations.append(
                    models.RuleViolation(record.row_id, column.name, rule_id, cell, detail)
                )
    return violations


def run_cbqr(
    records: typing.Sequence[models.RawRecord], schema: models.SchemaConfig
) -> typing.Tuple[typing.List[models.RawRecord], typing.List[models.RuleViolation]]:
    """Split records into clean ones and the violations of the rest."""
    clean = []
    violations = []
    flagged = 0
    for record in records:
        found = check_row(record, schema)
        if found:
            violations.extend(found)
            flagged += 1
        else:
            clean.append(record)
    logger.info(
        "Rule check: %s clean rows, %s rows with %s violations.",
        len(clean),
        flagged,
        len(violations),
    )
    return clean, violations
