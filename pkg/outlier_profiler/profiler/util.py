import contextlib
import logging
import logging.config
import logging.handlers
import multiprocessing as mp
import os
import queue as queue_
import typing

from .. import __version__, constants
from . import config, errors, models


def setup_logging(log_config: dict[str, typing.Any], verbosity: int = 0) -> None:
    """Apply the default logging config merged with the user's, then adjust the root level."""
    logging.config.dictConfig(constants.DEFAULT_LOGGING_CONFIG | log_config)
    if verbosity > 0:
        logging.getLogger().setLevel(logging.DEBUG)
    elif verbosity < 0:
        logging.getLogger().setLevel(logging.WARNING)


class QueueLogger:
    """Own a queue which worker processes log into and forward it to the root handlers."""

    def __init__(self) -> None:
        self.queue: queue_.Queue[typing.Any] = mp.Queue()
        logger = logging.getLogger()
        self.listener = logging.handlers.QueueListener(
            self.queue, *logger.handlers, respect_handler_level=True
        )
        self.listener.start()

    def shutdown(self) -> None:
        self.listener.stop()


def getLogger(
    name: typing.Optional[str] = None, *, queue: queue_.Queue[typing.Any]
) -> logging.Logger:
    """Return a logger which will pass all items up to a QueueHandler."""
    queue_handler = logging.handlers.QueueHandler(queue)
    logger = logging.getLogger(name)
    logger.propagate = False
    if not any(isinstance(handler, logging.handlers.QueueHandler) for handler in logger.handlers):
        logger.addHandler(queue_handler)
    return logger


def output_header(cfg: typing.Optional[models.PipelineConfig]) -> str:
    """Comment line which starts every output file."""
    if cfg is None:
        return f"# outlier_profiler {__version__}"
    return (
        f"# outlier_profiler {__version__} train_seed={cfg.train.seed} "
        f"spc_seed={cfg.spc_seed} config_digest={config.config_digest(cfg)}"
    )


class OutputTracker:
    """Remember the files a run writes so they can be removed if a later stage fails."""

    def __init__(self) -> None:
        self.written: typing.List[str] = []

    def add(self, path: str) -> str:
        self.written.append(path)
        return path

    def remove_all(self) -> None:
        for path in self.written:
            with contextlib.suppress(FileNotFoundError):
                os.remove(path)
        self.written.clear()


@contextlib.contextmanager
def removing_partial_outputs() -> typing.Iterator[OutputTracker]:
    """Yield a tracker and delete everything it recorded if the block raises."""
    tracker = OutputTracker()
    try:
        yield tracker
    except BaseException:
        tracker.remove_all()
        raise


@contextlib.contextmanager
def writing_outputs(error: typing.Type[errors.ProfilerError]) -> typing.Iterator[None]:
    """Re-raise a failure to write an output file as the error of the stage writing it."""
    try:
        yield
    except errors.ProfilerError:
        raise
    except OSError as err:
        raise error(f"cannot write {err.filename}: {err.strerror}") from err
