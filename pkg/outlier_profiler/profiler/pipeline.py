"""Run the outlier profiling pipeline and its single-stage subcommands.

Data flows ingest -> basic quality rules -> encode -> split/train -> predict
every clean row -> control limits -> outlier report and chart.
"""
import argparse
import dataclasses
import logging
import sys
import typing

from .. import constants
from . import (
    chart,
    cli,
    config,
    encode,
    errors,
    ingest,
    mlp,
    models,
    reports,
    rules,
    spc,
    util,
)

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class PreparedData:
    """Output of the data preparation stages."""

    schema: models.SchemaConfig
    records: typing.List[models.RawRecord]
    rows: typing.List[models.EncodedRow]
    violations: typing.List[models.RuleViolation]
    rows_flagged_by_rules: int
    rows_excluded_by_encoder: int


def _violation_order(
    schema: models.SchemaConfig,
) -> typing.Callable[[models.RuleViolation], typing.Tuple[int, int]]:
    positions = {name: index for index, name in enumerate(schema.names)}
    return lambda violation: (violation.row_id, positions[violation.column])


def prepare(cfg: models.PipelineConfig, tracker: util.OutputTracker, header: str) -> PreparedData:
    """Load, check and encode the dataset, writing the violations and encoded dump."""
    if cfg.schema_path is None:
        raise errors.ConfigError("a schema file is required")
    schema = config.load_schema(cfg.schema_path)
    records = ingest.load_dataset(cfg.input_path, schema, cfg.delimiter)
    if not records:
        raise errors.IngestError("no data rows")

    clean, rule_violations = rules.run_cbqr(records, schema)
    rows, encode_violations = encode.encode_dataset(clean, schema)
    # Rows are either flagged by the rules or by the encoder, never both.
    violations = sorted(rule_violations + encode_violations, key=_violation_order(schema))

    with util.writing_outputs(errors.IngestError):
        if cfg.outputs.violations:
            reports.write_violations(tracker.add(cfg.outputs.violations), header, violations)
        if cfg.outputs.encoded_dump:
            reports.write_encoded(tracker.add(cfg.outputs.encoded_dump), header, rows)
    return PreparedData(
        schema=schema,
        records=records,
        rows=rows,
        violations=violations,
        rows_flagged_by_rules=len(records) - len(clean),
        rows_excluded_by_encoder=len(clean) - len(rows),
    )


def score(
    cfg: models.PipelineConfig,
    target_name: str,
    row_ids: typing.Sequence[int],
    actuals: typing.Sequence[float],
    predictions: typing.Sequence[float],
    tracker: util.OutputTracker,
    header: str,
) -> typing.Tuple[models.ControlLimits, typing.List[models.OutlierRecord]]:
    """Control limits and classification of residuals, writing the report and chart."""
    residual_rows = spc.residuals(actuals, predictions, row_ids)
    limits = spc.estimate_limits(
        spc.defined_ratios(residual_rows), cfg.spc_mode, cfg.sample_size, cfg.spc_seed
    )
    records = spc.classify(residual_rows, limits)

    series = spc.chart_points(records, limits)
    with util.writing_outputs(errors.SpcError):
        if cfg.outputs.report:
            reports.write_outlier_report(
                tracker.add(cfg.outputs.report), header, records, target_name
            )
        if cfg.outputs.chart_data:
            reports.write_chart_data(tracker.add(cfg.outputs.chart_data), header, series)
        if cfg.outputs.chart:
            chart.render_chart(series, tracker.add(cfg.outputs.chart), header)
    return limits, records


def row_statuses(
    records: typing.Sequence[models.RawRecord],
    violations: typing.Sequence[models.RuleViolation],
    outliers: typing.Sequence[models.OutlierRecord],
) -> typing.List[typing.Tuple[int, str, str]]:
    """Label every input row as error, risk or correct data."""
    problems: typing.Dict[int, typing.List[str]] = {}
    for violation in violations:
        problems.setdefault(violation.row_id, []).append(f"{violation.column}:{violation.rule_id}")
    risks = {
        record.row_id: record.classification.value
        for record in outliers
        if record.classification is not models.Classification.INLIER
    }
    statuses = []
    for record in records:
        if record.row_id in problems:
            statuses.append((record.row_id, "error", " ".join(problems[record.row_id])))
        elif record.row_id in risks:
            statuses.append((record.row_id, "risk", risks[record.row_id]))
        else:
            statuses.append((record.row_id, "correct", ""))
    return statuses


def format_summary(summary: models.PipelineSummary) -> str:
    r = summary.metrics.correlation_coefficient
    limits = summary.limits
    return "\n".join(
        [
            f"rows in:              {summary.rows_in}",
            f"rows clean:           {summary.rows_clean}",
            f"rows violating:       {summary.rows_violating}"
            f" ({summary.rows_excluded_by_encoder} excluded by the encoder)",
            f"rows predicted:       {summary.rows_predicted}",
            f"rows reported:        {summary.rows_reported}",
            f"test r / MAE / RMSE:  {constants.UNDEFINED_MARKER if r is None else f'{r:.4f}'}"
            f" / {summary.metrics.mean_absolute_error:.6g}"
            f" / {summary.metrics.root_mean_squared_error:.6g}",
            f"control limits ({limits.mode}): UCL={limits.ucl:.6g} CL={limits.cl:.6g}"
            f" LCL={limits.lcl:.6g}",
            f"outliers:             {summary.outliers}",
            f"undefined ratios:     {summary.undefined_ratios}",
        ]
    )


def _save_model(path: str, model: models.MlpModel, header: str) -> None:
    with util.writing_outputs(errors.TrainingError):
        with open(path, "w", encoding="utf-8") as thefile:
            thefile.write(mlp.dump_model(model, header))


def run_pipeline(cfg: models.PipelineConfig) -> models.PipelineSummary:
    """Run every stage in order. Outputs already written are removed if a stage fails."""
    header = util.output_header(cfg)
    with util.removing_partial_outputs() as tracker:
        data = prepare(cfg, tracker, header)
        model, metrics = mlp.train(data.rows, cfg.train)
        if cfg.outputs.model:
            _save_model(tracker.add(cfg.outputs.model), model, header)

        # Every clean row is scored, not only the test split.
        predictions = mlp.predict_many(model, data.rows)
        if cfg.outputs.predictions:
            _, test_rows = mlp.split(data.rows, cfg.train)
            with util.writing_outputs(errors.TrainingError):
                reports.write_predictions(
                    tracker.add(cfg.outputs.predictions),
                    header,
                    data.rows,
                    predictions,
                    {row.row_id for row in test_rows},
                )
        limits, records = score(
            cfg,
            data.schema.target_name,
            [row.row_id for row in data.rows],
            [row.target for row in data.rows],
            [float(p) for p in predictions],
            tracker,
            header,
        )
        if cfg.outputs.row_status:
            with util.writing_outputs(errors.SpcError):
                reports.write_row_status(
                    tracker.add(cfg.outputs.row_status),
                    header,
                    row_statuses(data.records, data.violations, records),
                )

    counts = {classification: 0 for classification in models.Classification}
    for record in records:
        counts[record.classification] += 1
    summary = models.PipelineSummary(
        rows_in=len(data.records),
        rows_clean=len(data.rows),
        rows_violating=data.rows_flagged_by_rules + data.rows_excluded_by_encoder,
        rows_excluded_by_encoder=data.rows_excluded_by_encoder,
        rows_predicted=len(predictions),
        rows_reported=len(records),
        outliers=counts[models.Classification.OUTLIER],
        undefined_ratios=counts[models.Classification.UNDEFINED_RATIO],
        limits=limits,
        metrics=metrics,
    )
    logger.info(
        "Profiled %s rows: %s outliers, %s undefined ratios.",
        summary.rows_in,
        summary.outliers,
        summary.undefined_ratios,
    )
    return summary


def run_sweep(
    cfg: models.PipelineConfig,
    architectures: typing.Optional[typing.Sequence[typing.Sequence[int]]] = None,
) -> typing.Tuple[typing.List[models.SweepRow], typing.Optional[models.SweepRow]]:
    """Compare hidden layer architectures on the clean rows and name the best one."""
    header = util.output_header(cfg)
    with util.removing_partial_outputs() as tracker:
        data = prepare(cfg, tracker, header)
        rows = mlp.sweep(data.rows, architectures or cfg.architectures, cfg.train, cfg.jobs)
        best = mlp.best_row(rows)
        if cfg.outputs.sweep_report:
            with util.writing_outputs(errors.TrainingError):
                reports.write_sweep_report(
                    tracker.add(cfg.outputs.sweep_report), header, rows, best
                )
    if best is None:
        logger.warning("No architecture produced a defined correlation coefficient.")
    else:
        logger.info(
            "Best architecture: no. %s (%s)",
            best.number,
            ",".join(str(size) for size in best.hidden_sizes),
        )
    return rows, best


def run_check(cfg: models.PipelineConfig) -> PreparedData:
    with util.removing_partial_outputs() as tracker:
        return prepare(cfg, tracker, util.output_header(cfg))


def run_train(cfg: models.PipelineConfig) -> typing.Tuple[models.MlpModel, models.EvalMetrics]:
    header = util.output_header(cfg)
    with util.removing_partial_outputs() as tracker:
        data = prepare(cfg, tracker, header)
        model, metrics = mlp.train(data.rows, cfg.train)
        if cfg.outputs.model:
            _save_model(tracker.add(cfg.outputs.model), model, header)
    return model, metrics


def run_predict(cfg: models.PipelineConfig) -> typing.List[float]:
    """Predict every clean row of the input with a saved model."""
    if not cfg.outputs.model:
        raise errors.ConfigError("predict needs a model file")
    header = util.output_header(cfg)
    model = mlp.load_model(cfg.outputs.model)
    with util.removing_partial_outputs() as tracker:
        data = prepare(cfg, tracker, header)
        predictions = [float(p) for p in mlp.predict_many(model, data.rows)]
        if cfg.outputs.predictions:
            with util.writing_outputs(errors.TrainingError):
                reports.write_predictions(
                    tracker.add(cfg.outputs.predictions), header, data.rows, predictions, None
                )
    return predictions


def run_spc(
    cfg: models.PipelineConfig,
) -> typing.Tuple[models.ControlLimits, typing.List[models.OutlierRecord]]:
    """Control limits and outliers for the predictions file in cfg.input_path."""
    target_name = "value"
    if cfg.schema_path:
        target_name = config.load_schema(cfg.schema_path).target_name
    row_ids, actuals, predictions = reports.read_predictions(cfg.input_path)
    header = util.output_header(cfg)
    with util.removing_partial_outputs() as tracker:
        return score(cfg, target_name, row_ids, actuals, predictions, tracker, header)


def _metrics_line(metrics: models.EvalMetrics) -> str:
    r = metrics.correlation_coefficient
    return (
        f"correlation_coefficient={constants.UNDEFINED_MARKER if r is None else r} "
        f"mean_absolute_error={metrics.mean_absolute_error} "
        f"root_mean_squared_error={metrics.root_mean_squared_error} n_test={metrics.n_test}"
    )


def config_from_args(args: argparse.Namespace) -> models.PipelineConfig:
    """Build the PipelineConfig of a parsed command line."""
    file_config = config.load_pipeline_file(args.config) if args.config else None
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "config", "verbose", "quiet", "input", "schema")
    }
    input_path = getattr(args, "input", None)
    if args.command == "spc":
        # The predictions file is this command's input, not an output.
        input_path = overrides.pop("predictions")
    verbosity = 1 if args.verbose else -1 if args.quiet else 0
    return config.build_pipeline_config(
        input_path,
        args.schema,
        file_config,
        require_schema=args.command != "spc",
        verbosity=verbosity,
        **overrides,
    )


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    """Outlier profiler.

    Parses the command line, runs the chosen subcommand and returns the exit code.
    """
    args = cli.parse_args(argv)
    util.setup_logging({}, 1 if args.verbose else -1 if args.quiet else 0)
    try:
        cfg = config_from_args(args)
        util.setup_logging(cfg.logging_config, cfg.verbosity)
        if args.command == "profile":
            print(format_summary(run_pipeline(cfg)))
        elif args.command == "check":
            data = run_check(cfg)
            print(f"{len(data.records)} rows, {len(data.violations)} violations")
        elif args.command == "encode":
            data = run_check(cfg)
            print(f"{len(data.rows)} rows encoded, {len(data.violations)} violations")
        elif args.command == "train":
            _, metrics = run_train(cfg)
            print(_metrics_line(metrics))
        elif args.command == "predict":
            print(f"{len(run_predict(cfg))} rows predicted")
        elif args.command == "sweep":
            _, best = run_sweep(cfg)
            print(
                "best: none"
                if best is None
                else f"best: no={best.number} {','.join(str(s) for s in best.hidden_sizes)}"
            )
        elif args.command == "spc":
            limits, records = run_spc(cfg)
            outliers = sum(r.classification is models.Classification.OUTLIER for r in records)
            print(f"UCL={limits.ucl} CL={limits.cl} LCL={limits.lcl} outliers={outliers}")
    except errors.ProfilerError as err:
        logger.error("%s: %s", err.stage, err)
        return err.exit_code
    return constants.EXIT_OK


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
