"""Data model shared by the profiler stages."""
import dataclasses
import datetime as dt
import enum
import typing

import numpy as np
import numpy.typing as npt

from .. import constants

FloatArray = npt.NDArray[np.float64]


@dataclasses.dataclass(frozen=True)
class ColumnSpec:
    """Declaration of one dataset column."""

    name: str
    role: constants.Role
    nullable: bool = True
    empty_allowed: bool = True
    allowed_values: typing.Optional[typing.Tuple[str, ...]] = None


@dataclasses.dataclass(frozen=True)
class SchemaConfig:
    """Per-column role declarations plus date handling for one dataset."""

    columns: typing.Tuple[ColumnSpec, ...]
    target_name: str
    date_format: str = constants.DEFAULT_DATE_FORMAT
    date_epoch: dt.date = dt.date.fromisoformat(constants.DEFAULT_DATE_EPOCH)

    @property
    def names(self) -> typing.List[str]:
        """Column names in schema order."""
        return [column.name for column in self.columns]

    @property
    def feature_columns(self) -> typing.List[ColumnSpec]:
        """Columns which become model inputs, in schema order."""
        return [column for column in self.columns if column.role not in ("target", "ignore")]

    @property
    def target_index(self) -> int:
        """Position of the target column."""
        return self.names.index(self.target_name)


@dataclasses.dataclass(frozen=True)
class RawRecord:
    """One data line. A cell is None when absent and "" when present but empty."""

    row_id: int
    cells: typing.Tuple[typing.Optional[str], ...]


@dataclasses.dataclass(frozen=True)
class EncodedRow:
    """Numeric feature vector and target for one row."""

    row_id: int
    features: typing.Tuple[float, ...]
    target: float
    raw_hashes: typing.Tuple[int, ...]


@dataclasses.dataclass(frozen=True)
class ScalingParams:
    """Z-score parameters fitted on the training split."""

    feature_mean: typing.Tuple[float, ...]
    feature_std: typing.Tuple[float, ...]
    target_mean: float
    target_std: float

    @property
    def arity(self) -> int:
        return len(self.feature_mean)


@dataclasses.dataclass(frozen=True)
class RuleViolation:
    """An element-level quality finding."""

    row_id: int
    column: str
    rule_id: str
    observed: typing.Optional[str]
    detail: str


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run."""

    hidden_sizes: typing.Tuple[int, ...] = constants.DEFAULT_HIDDEN_SIZES
    learning_rate: float = constants.DEFAULT_LEARNING_RATE
    momentum: float = constants.DEFAULT_MOMENTUM
    epochs: int = constants.DEFAULT_EPOCHS
    train_fraction: float = constants.DEFAULT_TRAIN_FRACTION
    seed: int = constants.DEFAULT_SEED
    shuffle: bool = True


@dataclasses.dataclass(frozen=True, eq=False)
class MlpModel:
    """A trained (or freshly initialised) feed-forward regressor.

    Layer k maps size_k inputs to size_{k+1} outputs with weights[k] of shape
    (size_k, size_{k+1}). Arrays are never mutated after training returns.
    """

    layer_sizes: typing.Tuple[int, ...]
    weights: typing.Tuple[FloatArray, ...]
    biases: typing.Tuple[FloatArray, ...]
    scaling: typing.Optional[ScalingParams]
    hyper: TrainConfig

    def same_parameters(self, other: "MlpModel") -> bool:
        """Bit-exact comparison of architecture, weights, biases and scaling."""
        return (
            self.layer_sizes == other.layer_sizes
            and self.scaling == other.scaling
            and self.hyper == other.hyper
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
            and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases))
        )


@dataclasses.dataclass(frozen=True)
class EvalMetrics:
    """Regression metrics over a test set, in original target units.

    correlation_coefficient is None when either sequence has zero variance.
    """

    correlation_coefficient: typing.Optional[float]
    mean_absolute_error: float
    root_mean_squared_error: float
    n_test: int


@dataclasses.dataclass(frozen=True)
class SweepRow:
    """One line of an architecture sweep report."""

    number: int
    hidden_sizes: typing.Tuple[int, ...]
    metrics: typing.Optional[EvalMetrics]
    error: typing.Optional[str] = None


class Classification(str, enum.Enum):
    """SPC classification of a residual row."""

    INLIER = "inlier"
    OUTLIER = "outlier"
    UNDEFINED_RATIO = "undefined-ratio"


@dataclasses.dataclass(frozen=True)
class ResidualRow:
    """Prediction residual. difference_ratio is None when actual is zero."""

    row_id: int
    actual: float
    predicted: float
    error: float
    difference_ratio: typing.Optional[float]


@dataclasses.dataclass(frozen=True)
class ControlLimits:
    """Estimated process parameters and the 3-sigma limits derived from them."""

    mu: float
    sigma: float
    ucl: float
    cl: float
    lcl: float
    mode: constants.SpcMode
    sample_size: int
    seed: int


@dataclasses.dataclass(frozen=True)
class OutlierRecord(ResidualRow):
    """Residual row with its SPC classification."""

    classification: Classification = Classification.INLIER


@dataclasses.dataclass(frozen=True)
class ChartPoint:
    index: int
    row_id: int
    ratio: float
    outlier: bool


@dataclasses.dataclass(frozen=True)
class ChartSeries:
    """Plot-ready control chart: ratio points plus the three reference lines."""

    points: typing.Tuple[ChartPoint, ...]
    ucl: float
    cl: float
    lcl: float


@dataclasses.dataclass(frozen=True)
class OutputPaths:
    """Where each artifact of a run is written. Unset paths are not written."""

    violations: typing.Optional[str] = None
    report: typing.Optional[str] = None
    chart: typing.Optional[str] = None
    chart_data: typing.Optional[str] = None
    sweep_report: typing.Optional[str] = None
    encoded_dump: typing.Optional[str] = None
    model: typing.Optional[str] = None
    predictions: typing.Optional[str] = None
    row_status: typing.Optional[str] = None

    def as_dict(self) -> typing.Dict[str, typing.Optional[str]]:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to reproduce one run of the pipeline."""

    input_path: str
    schema_path: typing.Optional[str]
    train: TrainConfig = TrainConfig()
    spc_mode: constants.SpcMode = constants.DEFAULT_SPC_MODE
    sample_size: int = constants.DEFAULT_SAMPLE_SIZE
    spc_seed: int = constants.DEFAULT_SEED
    delimiter: str = constants.DEFAULT_DELIMITER
    outputs: OutputPaths = OutputPaths()
    architectures: typing.Tuple[typing.Tuple[int, ...], ...] = tuple(
        constants.TABLE1_ARCHITECTURES
    )
    jobs: int = 1
    verbosity: int = 0
    logging_config: typing.Dict[str, typing.Any] = dataclasses.field(
        default_factory=dict, compare=False, hash=False
    )


@dataclasses.dataclass(frozen=True)
class PipelineSummary:
    """Row counts per stage and the SPC outcome of a profiling run."""

    rows_in: int
    rows_clean: int
    rows_violating: int
    rows_excluded_by_encoder: int
    rows_predicted: int
    rows_reported: int
    outliers: int
    undefined_ratios: int
    limits: ControlLimits
    metrics: EvalMetrics
