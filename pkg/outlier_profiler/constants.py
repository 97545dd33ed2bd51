"""Constants for the outlier profiler."""
import typing

Role = typing.Literal["categorical", "date", "numeric", "target", "ignore"]
ROLES: typing.Tuple[str, ...] = typing.get_args(Role)

SpcMode = typing.Literal["clt-sample", "direct"]
SPC_MODES: typing.Tuple[str, ...] = typing.get_args(SpcMode)

# Encodings given to missing cells before any scaling.
NULL_SENTINEL = -1
EMPTY_SENTINEL = 0

DEFAULT_DATE_FORMAT = "%Y-%m-%d"
DEFAULT_DATE_EPOCH = "1970-01-01"
DEFAULT_DELIMITER = ","

# Rule ids.
RULE_NULL = "null-not-allowed"
RULE_EMPTY = "empty-not-allowed"
RULE_DATE = "invalid-date"
RULE_NUMERIC = "not-numeric"
RULE_TARGET_NUMERIC = "target-not-numeric"
RULE_DOMAIN = "value-not-in-domain"

# Training defaults.
DEFAULT_HIDDEN_SIZES: typing.Tuple[int, ...] = (12, 18, 12, 10)
DEFAULT_LEARNING_RATE = 0.3
DEFAULT_MOMENTUM = 0.2
DEFAULT_EPOCHS = 500
DEFAULT_TRAIN_FRACTION = 0.66
DEFAULT_SEED = 1
INIT_WEIGHT_RANGE = 0.5

# SPC defaults.
DEFAULT_SPC_MODE: SpcMode = "clt-sample"
DEFAULT_SAMPLE_SIZE = 100
SIGMA_MULTIPLIER = 3.0

# Hidden layer configurations compared for the salary dataset.
TABLE1_ARCHITECTURES: typing.List[typing.Tuple[int, ...]] = [
    (12, 18, 12),
    (12, 18, 12, 10),
    (12, 18, 12, 10, 10),
    (12, 18, 12, 10, 8),
    (12, 18, 24, 10),
    (12, 18, 24),
    (12, 36, 24),
    (12, 36, 24, 10),
    (24, 18, 12, 10),
    (12, 18, 10, 10),
    (12, 18, 16, 10),
    (10, 18, 12, 10),
]

# Markers written to reports.
UNDEFINED_MARKER = "undefined"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INGEST = 2
EXIT_TRAINING = 3
EXIT_SPC = 4

DEFAULT_LOGGING_CONFIG = {
    "version": 1,
    "disable_existing_loggers": False,
    "root": {"level": "INFO", "handlers": ["console"]},
    "handlers": {"console": {"class": "logging.StreamHandler", "formatter": "plain"}},
    "formatters": {"plain": {"format": "%(levelname)s %(name)s: %(message)s"}},
}
