"""Statistical quality control of prediction residuals.

The difference ratio (predicted - actual) / actual of every row is compared with
control limits mu +/- 3 sigma. In clt-sample mode mu and sigma are recovered from
a random sample the way the salary study did it: the sample mean stands in for mu
and sqrt(n) times the sample standard deviation stands in for sigma. In direct
mode both are computed over every ratio.
"""
import logging
import math
import typing

import numpy as np

from .. import constants
from . import errors, models

logger = logging.getLogger(__name__)


def residuals(
    actuals: typing.Sequence[float],
    predictions: typing.Sequence[float],
    row_ids: typing.Sequence[int],
) -> typing.List[models.ResidualRow]:
    """Error and difference ratio of every prediction. A zero actual has no ratio."""
    if not len(actuals) == len(predictions) == len(row_ids):
        raise errors.LengthMismatchError([len(actuals), len(predictions), len(row_ids)])
    rows = []
    for row_id, actual, predicted in zip(row_ids, actuals, predictions):
        actual = float(actual)
        predicted = float(predicted)
        if not math.isfinite(actual):
            raise errors.SpcError(f"row {row_id} has a non-finite actual value {actual!r}")
        error = predicted - actual
        ratio = error / actual if actual != 0 else None
        rows.append(models.ResidualRow(int(row_id), actual, predicted, error, ratio))
    return rows


def limits_from_estimates(
    mu: float,
    sigma: float,
    mode: constants.SpcMode = "direct",
    sample_size: int = 0,
    seed: int = 0,
) -> models.ControlLimits:
    """Control limits mu +/- 3 sigma with the centre line at mu."""
    spread = constants.SIGMA_MULTIPLIER * sigma
    return models.ControlLimits(
        mu=mu,
        sigma=sigma,
        ucl=mu + spread,
        cl=mu,
        lcl=mu - spread,
        mode=mode,
        sample_size=sample_size,
        seed=seed,
    )


def limits_from_sample_stats(
    sample_mean: float, sample_std: float, sample_size: int, seed: int = 0
) -> models.ControlLimits:
    """Invert sigma_xbar = sigma / sqrt(n) to estimate sigma, then build the limits."""
    return limits_from_estimates(
        sample_mean, math.sqrt(sample_size) * sample_std, "clt-sample", sample_size, seed
    )


def estimate_limits(
    ratios: typing.Sequence[float],
    mode: constants.SpcMode = constants.DEFAULT_SPC_MODE,
    sample_size: int = constants.DEFAULT_SAMPLE_SIZE,
    seed: int = constants.DEFAULT_SEED,
) -> models.ControlLimits:
    """Estimate mu and sigma of the difference ratios and derive the control limits."""
    values = np.asarray(ratios, dtype=np.float64)
    if mode == "clt-sample":
        if sample_size < 2:
            raise errors.InsufficientDataError(f"sample size must be at least 2, got {sample_size}")
        if len(values) < sample_size:
            raise errors.InsufficientDataError(
                f"need at least {sample_size} ratios to sample, got {len(values)}"
            )
        rng = np.random.default_rng(seed)
        sample = values[rng.choice(len(values), size=sample_size, replace=False)]
        limits = limits_from_sample_stats(
            float(sample.mean()), float(sample.std(ddof=1)), sample_size, seed
        )
    elif mode == "direct":
        if len(values) < 2:
            raise errors.InsufficientDataError(f"need at least 2 ratios, got {len(values)}")
        limits = limits_from_estimates(
            float(values.mean()), float(values.std(ddof=1)), "direct", len(values), seed
        )
    else:
        raise errors.SpcError(f"unknown estimation mode {mode!r}")
    logger.info(
        "Control limits (%s): mu=%.6g sigma=%.6g UCL=%.6g LCL=%.6g",
        mode,
        limits.mu,
        limits.sigma,
        limits.ucl,
        limits.lcl,
    )
    return limits


def classify_ratio(
    ratio: typing.Optional[float], limits: models.ControlLimits
) -> models.Classification:
    """Strict comparison: a ratio exactly on a limit is an inlier."""
    if ratio is None or math.isnan(ratio):
        return models.Classification.UNDEFINED_RATIO
    if ratio > limits.ucl or ratio < limits.lcl:
        return models.Classification.OUTLIER
    return models.Classification.INLIER


def _report_order(row: models.OutlierRecord) -> typing.Tuple[int, float, int]:
    if row.classification is models.Classification.UNDEFINED_RATIO or row.difference_ratio is None:
        return (1, 0.0, row.row_id)
    return (0, -abs(row.difference_ratio), row.row_id)


def classify(
    rows: typing.Sequence[models.ResidualRow], limits: models.ControlLimits
) -> typing.List[models.OutlierRecord]:
    """Classify every row, largest absolute ratio first and undefined ratios last."""
    records = [
        models.OutlierRecord(
            row_id=row.row_id,
            actual=row.actual,
            predicted=row.predicted,
            error=row.error,
            difference_ratio=row.difference_ratio,
            classification=classify_ratio(row.difference_ratio, limits),
        )
        for row in rows
    ]
    records.sort(key=_report_order)
    return records


def chart_points(
    rows: typing.Sequence[models.OutlierRecord], limits: models.ControlLimits
) -> models.ChartSeries:
    """Control chart series: ratios in row order plus the UCL, CL and LCL lines."""
    plotted = sorted(
        (row for row in rows if row.classification is not models.Classification.UNDEFINED_RATIO),
        key=lambda row: row.row_id,
    )
    points = tuple(
        models.ChartPoint(
            index=index,
            row_id=row.row_id,
            ratio=typing.cast(float, row.difference_ratio),
            outlier=row.classification is models.Classification.OUTLIER,
        )
        for index, row in enumerate(plotted)
    )
    return models.ChartSeries(points=points, ucl=limits.ucl, cl=limits.cl, lcl=limits.lcl)


def defined_ratios(rows: typing.Sequence[models.ResidualRow]) -> typing.List[float]:
    """Ratios usable for estimation: undefined and NaN ratios are left out."""
    return [
        row.difference_ratio
        for row in rows
        if row.difference_ratio is not None and not math.isnan(row.difference_ratio)
    ]
