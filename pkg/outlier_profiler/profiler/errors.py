"""Outlier Profiler Exception Subclasses."""
import typing

from .. import constants


class ProfilerError(Exception):
    """Base class for all errors which abort a pipeline stage."""

    stage = "profiler"
    exit_code = constants.EXIT_CONFIG


class ConfigError(ProfilerError, TypeError):
    """Raised if the pipeline configuration is unparseable or inconsistent."""

    stage = "config"
    exit_code = constants.EXIT_CONFIG


class SchemaError(ConfigError):
    """Raised if a schema file cannot be parsed or breaks a schema invariant.

    This covers unknown roles, duplicate column names and a target count other than one.
    """


class IngestError(ProfilerError, OSError):
    """Raised if a dataset cannot be read or does not match its schema."""

    stage = "ingest"
    exit_code = constants.EXIT_INGEST


class RowTooLongError(IngestError):
    """Raised when a data line has more cells than the schema has columns."""

    def __init__(self, row_id: int, found: int, expected: int) -> None:
        self.row_id = row_id
        super().__init__(f"row {row_id} has {found} cells, schema has {expected} columns")


class DateError(ValueError):
    """Raised when a date cell does not parse or names an impossible calendar date.

    Never aborts a run: the encoder and the rule engine turn it into a violation.
    """


class TrainingError(ProfilerError):
    """Base class for errors raised while fitting or using the regressor."""

    stage = "training"
    exit_code = constants.EXIT_TRAINING


class ArityError(TrainingError, ValueError):
    """Raised when a feature vector does not match the model or scaling arity."""


class SplitError(TrainingError):
    """Raised when the train/test split leaves one side empty."""


class DivergenceError(TrainingError):
    """Raised when the training loss stops being finite."""

    def __init__(self, epoch: int, loss: float) -> None:
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")


class ModelFileError(TrainingError):
    """Raised if a saved model file is unreadable or inconsistent."""


class SpcError(ProfilerError):
    """Base class for errors in the statistical quality control stage."""

    stage = "spc"
    exit_code = constants.EXIT_SPC


class InsufficientDataError(SpcError):
    """Raised if there are too few ratios to estimate control limits."""


class LengthMismatchError(SpcError):
    """Raised when actuals, predictions and row ids differ in length."""

    def __init__(self, lengths: typing.Sequence[int]) -> None:
        super().__init__(f"input lengths differ: {list(lengths)}")
