"""Schema and pipeline configuration loading and parsing."""
import dataclasses
import datetime as dt
import hashlib
import json
import os
import typing

import tomli
import tomli_w
import typeguard

from .. import constants
from . import errors, models


## The following classes setup the shape of the configuration files.
## They are used both for type checking AND AT RUNTIME to check if the config is valid.
class ColumnSchema(typing.TypedDict, total=False):
    """Schema for one column declaration."""

    name: typing.Required[str]
    role: typing.Required[str]
    nullable: bool
    empty_allowed: bool
    allowed_values: typing.List[str]


class DatasetSchema(typing.TypedDict, total=False):
    """Schema for the whole dataset schema file."""

    target: str
    date_format: str
    date_epoch: typing.Union[str, dt.date]
    columns: typing.Required[typing.List[ColumnSchema]]


class TrainSchema(typing.TypedDict, total=False):
    """Schema for the [train] table of a pipeline config file."""

    hidden_sizes: typing.List[int]
    learning_rate: float
    momentum: float
    epochs: int
    train_fraction: float
    seed: int
    shuffle: bool


class SpcSchema(typing.TypedDict, total=False):
    """Schema for the [spc] table of a pipeline config file."""

    mode: str
    sample_size: int
    seed: int


class OutputsSchema(typing.TypedDict, total=False):
    """Schema for the [outputs] table of a pipeline config file."""

    violations: str
    report: str
    chart: str
    chart_data: str
    sweep_report: str
    encoded_dump: str
    model: str
    predictions: str
    row_status: str


class PipelineFileSchema(typing.TypedDict, total=False):
    """Schema for the whole pipeline config file."""

    input: str
    schema: str
    delimiter: str
    train: TrainSchema
    spc: SpcSchema
    outputs: OutputsSchema
    logging_config: typing.Dict[str, typing.Any]


def _read_toml(path: str, error: typing.Type[errors.ConfigError]) -> typing.Dict[str, typing.Any]:
    try:
        with open(path, "rb") as thefile:
            return tomli.load(thefile)
    except OSError as err:
        raise error(f"cannot read {path}: {err.strerror}") from err
    except tomli.TOMLDecodeError as err:
        raise error(f"cannot parse {path}: {err}") from err


def parse_schema(toml_dict: typing.Dict[str, typing.Any]) -> models.SchemaConfig:
    """Build a SchemaConfig from a decoded schema document and check its invariants."""
    try:
        typeguard.check_type(toml_dict, DatasetSchema)
    except typeguard.TypeCheckError as err:
        raise errors.SchemaError(f"invalid schema document: {err}") from err
    schema_dict = typing.cast(DatasetSchema, toml_dict)

    columns = []
    seen: typing.Set[str] = set()
    for column in schema_dict["columns"]:
        name = column["name"]
        if not name:
            raise errors.SchemaError("column names must be non-empty")
        if name in seen:
            raise errors.SchemaError(f"duplicate column name {name!r}")
        seen.add(name)
        if column["role"] not in constants.ROLES:
            raise errors.SchemaError(
                f"column {name!r} has unknown role {column['role']!r}, "
                f"expected one of {', '.join(constants.ROLES)}"
            )
        allowed = column.get("allowed_values")
        columns.append(
            models.ColumnSpec(
                name=name,
                role=typing.cast(constants.Role, column["role"]),
                nullable=column.get("nullable", True),
                empty_allowed=column.get("empty_allowed", True),
                allowed_values=tuple(allowed) if allowed is not None else None,
            )
        )

    targets = [column.name for column in columns if column.role == "target"]
    if not targets:
        raise errors.SchemaError("no target column")
    if len(targets) > 1:
        raise errors.SchemaError(f"multiple targets: {', '.join(targets)}")
    target_name = schema_dict.get("target", targets[0])
    if target_name != targets[0]:
        raise errors.SchemaError(
            f"target {target_name!r} is not the target-role column {targets[0]!r}"
        )

    epoch = schema_dict.get("date_epoch", constants.DEFAULT_DATE_EPOCH)
    if isinstance(epoch, str):
        try:
            epoch = dt.date.fromisoformat(epoch)
        except ValueError as err:
            raise errors.SchemaError(f"invalid date_epoch {epoch!r}") from err

    return models.SchemaConfig(
        columns=tuple(columns),
        target_name=target_name,
        date_format=schema_dict.get("date_format", constants.DEFAULT_DATE_FORMAT),
        date_epoch=epoch,
    )


def load_schema(path: str) -> models.SchemaConfig:
    """Load a TOML schema file."""
    return parse_schema(_read_toml(path, errors.SchemaError))


def schema_to_dict(schema: models.SchemaConfig) -> DatasetSchema:
    """Express a SchemaConfig as a schema document with every default made explicit."""
    columns: typing.List[ColumnSchema] = []
    for column in schema.columns:
        entry = ColumnSchema(
            name=column.name,
            role=column.role,
            nullable=column.nullable,
            empty_allowed=column.empty_allowed,
        )
        if column.allowed_values is not None:
            entry["allowed_values"] = list(column.allowed_values)
        columns.append(entry)
    return DatasetSchema(
        target=schema.target_name,
        date_format=schema.date_format,
        date_epoch=schema.date_epoch.isoformat(),
        columns=columns,
    )


def dump_schema(schema: models.SchemaConfig) -> str:
    """Serialise a SchemaConfig to TOML text which load_schema reads back unchanged."""
    return tomli_w.dumps(typing.cast(typing.Dict[str, typing.Any], schema_to_dict(schema)))


def load_pipeline_file(path: str) -> PipelineFileSchema:
    """Load an optional pipeline configuration file and check it's validity."""
    toml_dict = _read_toml(path, errors.ConfigError)
    try:
        typeguard.check_type(toml_dict, PipelineFileSchema)
    except typeguard.TypeCheckError as err:
        raise errors.ConfigError(f"invalid pipeline config {path}: {err}") from err
    return typing.cast(PipelineFileSchema, toml_dict)


def validate_train_config(cfg: models.TrainConfig) -> None:
    """Check every TrainConfig field is within range."""
    if any(size < 1 for size in cfg.hidden_sizes):
        raise errors.ConfigError(f"hidden layer sizes must be positive: {cfg.hidden_sizes}")
    if not cfg.learning_rate > 0:
        raise errors.ConfigError(f"learning rate must be > 0, got {cfg.learning_rate}")
    if not 0 <= cfg.momentum < 1:
        raise errors.ConfigError(f"momentum must be in [0, 1), got {cfg.momentum}")
    if cfg.epochs < 0:
        raise errors.ConfigError(f"epochs must not be negative, got {cfg.epochs}")
    if not 0 < cfg.train_fraction < 1:
        raise errors.ConfigError(f"train fraction must be in (0, 1), got {cfg.train_fraction}")
    if not 0 <= cfg.seed < 2**64:
        raise errors.ConfigError(f"seed must be an unsigned 64-bit integer, got {cfg.seed}")


def validate_pipeline_config(cfg: models.PipelineConfig) -> None:
    """Check a PipelineConfig before any stage runs."""
    validate_train_config(cfg.train)
    if cfg.spc_mode not in constants.SPC_MODES:
        raise errors.ConfigError(f"unknown spc mode {cfg.spc_mode!r}")
    if not 0 <= cfg.spc_seed < 2**64:
        raise errors.ConfigError(f"spc seed must be an unsigned 64-bit integer, got {cfg.spc_seed}")
    if cfg.sample_size < 2:
        raise errors.ConfigError(f"sample size must be at least 2, got {cfg.sample_size}")
    if len(cfg.delimiter) != 1:
        raise errors.ConfigError(f"delimiter must be a single character, got {cfg.delimiter!r}")
    if cfg.jobs < 1:
        raise errors.ConfigError(f"jobs must be at least 1, got {cfg.jobs}")

    paths = [cfg.input_path] + [
        path
        for path in [cfg.schema_path, *cfg.outputs.as_dict().values()]
        if path is not None
    ]
    resolved = [os.path.abspath(path) for path in paths]
    duplicates = sorted({path for path in resolved if resolved.count(path) > 1})
    if duplicates:
        raise errors.ConfigError(f"paths must be distinct: {', '.join(duplicates)}")


def build_pipeline_config(
    input_path: typing.Optional[str],
    schema_path: typing.Optional[str],
    file_config: typing.Optional[PipelineFileSchema] = None,
    require_schema: bool = True,
    **overrides: typing.Any,
) -> models.PipelineConfig:
    """Combine a pipeline config file with command line overrides.

    Overrides which are None are treated as unset. Train, spc and output
    overrides use the field names of TrainConfig, PipelineConfig and OutputPaths.
    """
    file_config = file_config or PipelineFileSchema()
    given = {key: value for key, value in overrides.items() if value is not None}

    train_dict: typing.Dict[str, typing.Any] = dict(file_config.get("train", {}))
    if "hidden_sizes" in train_dict:
        train_dict["hidden_sizes"] = tuple(train_dict["hidden_sizes"])
    for field in dataclasses.fields(models.TrainConfig):
        if field.name in given:
            train_dict[field.name] = given.pop(field.name)
    train = models.TrainConfig(**train_dict)

    outputs_dict: typing.Dict[str, typing.Any] = dict(file_config.get("outputs", {}))
    for field in dataclasses.fields(models.OutputPaths):
        if field.name in given:
            outputs_dict[field.name] = given.pop(field.name)
    if outputs_dict.get("chart") and not outputs_dict.get("chart_data"):
        outputs_dict["chart_data"] = os.path.splitext(outputs_dict["chart"])[0] + ".csv"
    outputs = models.OutputPaths(**outputs_dict)

    spc = file_config.get("spc", {})
    input_path = input_path or file_config.get("input")
    schema_path = schema_path or file_config.get("schema")
    if not input_path:
        raise errors.ConfigError("an input file is required")
    if require_schema and not schema_path:
        raise errors.ConfigError("a schema file is required")

    cfg = models.PipelineConfig(
        input_path=input_path,
        schema_path=schema_path,
        train=train,
        spc_mode=given.pop("spc_mode", spc.get("mode", constants.DEFAULT_SPC_MODE)),
        sample_size=given.pop("sample_size", spc.get("sample_size", constants.DEFAULT_SAMPLE_SIZE)),
        spc_seed=given.pop("spc_seed", spc.get("seed", constants.DEFAULT_SEED)),
        delimiter=given.pop("delimiter", file_config.get("delimiter", constants.DEFAULT_DELIMITER)),
        outputs=outputs,
        logging_config=file_config.get("logging_config", {}),
        **given,
    )
    validate_pipeline_config(cfg)
    return cfg


def config_digest(cfg: models.PipelineConfig) -> str:
    """Short SHA-256 digest of the effective configuration.

    File locations are left out so the same run written to another directory
    carries the same digest.
    """
    as_dict = dataclasses.asdict(cfg)
    for key in ("input_path", "schema_path", "outputs"):
        as_dict.pop(key)
    as_dict.pop("logging_config", None)
    as_dict.pop("verbosity", None)
    as_dict.pop("jobs", None)
    canonical = json.dumps(as_dict, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
