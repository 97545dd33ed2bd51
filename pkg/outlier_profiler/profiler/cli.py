"""Parse command line arguments for the outlier profiler."""

import argparse
import sys
import typing

from .. import constants


class ProfilerArgumentParser(argparse.ArgumentParser):
    """Argument parser which exits with the configuration exit code on usage errors."""

    def error(self, message: str) -> typing.NoReturn:
        self.print_usage(sys.stderr)
        self.exit(constants.EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_hidden(text: str) -> typing.Tuple[int, ...]:
    """Parse hidden layer sizes such as "12,18,12,10". An empty string means no hidden layer."""
    text = text.strip()
    if not text:
        return ()
    try:
        sizes = tuple(int(part) for part in text.split(","))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"invalid hidden layer sizes {text!r}") from err
    if any(size < 1 for size in sizes):
        raise argparse.ArgumentTypeError(f"hidden layer sizes must be positive: {text!r}")
    return sizes


def parse_architectures(text: str) -> typing.Tuple[typing.Tuple[int, ...], ...]:
    """Parse a ';'-separated list of hidden layer configurations."""
    return tuple(parse_hidden(part) for part in text.split(";"))


def _add_common(parser: argparse.ArgumentParser, dataset: bool = True) -> None:
    if dataset:
        parser.add_argument("--input", help="Delimited dataset with a header row.", type=str)
        parser.add_argument("--schema", help="TOML schema declaring column roles.", type=str)
        parser.add_argument(
            "--delimiter", help="Field delimiter of the dataset (default ',').", type=str
        )
    parser.add_argument("--config", help="Optional TOML pipeline configuration file.", type=str)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log debug messages.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Only log warnings.")


def _add_train(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("training")
    group.add_argument("--train-fraction", dest="train_fraction", type=float)
    group.add_argument(
        "--hidden",
        dest="hidden_sizes",
        type=parse_hidden,
        help="Hidden layer sizes, for example 12,18,12,10.",
    )
    group.add_argument("--lr", dest="learning_rate", type=float, help="Learning rate.")
    group.add_argument("--momentum", type=float)
    group.add_argument("--epochs", type=int)
    group.add_argument("--seed", type=int, help="Seed for splitting, initialisation and order.")
    group.add_argument(
        "--no-shuffle",
        dest="shuffle",
        action="store_const",
        const=False,
        help="Keep file order for the split and every epoch.",
    )


def _add_spc(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("statistical quality control")
    group.add_argument("--spc-mode", dest="spc_mode", choices=constants.SPC_MODES)
    group.add_argument("--sample-size", dest="sample_size", type=int)
    group.add_argument("--spc-seed", dest="spc_seed", type=int)
    group.add_argument("--report", help="Outlier report output path.", type=str)
    group.add_argument("--chart", help="SVG control chart output path.", type=str)
    group.add_argument(
        "--chart-data",
        dest="chart_data",
        help="Chart plot data path (default: chart path with a .csv suffix).",
        type=str,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = ProfilerArgumentParser(
        prog="outlier_profiler",
        description="Find outlier rows in a dataset with a neural regressor and control limits.",
    )
    commands = parser.add_subparsers(
        dest="command", required=True, parser_class=ProfilerArgumentParser
    )

    profile = commands.add_parser("profile", help="Run the whole pipeline.")
    _add_common(profile)
    _add_train(profile)
    _add_spc(profile)
    profile.add_argument("--violations", type=str, help="Rule violations output path.")
    profile.add_argument("--dump-encoded", dest="encoded_dump", type=str)
    profile.add_argument("--model", type=str, help="Save the trained model here.")
    profile.add_argument("--predictions", type=str, help="Write predictions of all clean rows.")
    profile.add_argument("--row-status", dest="row_status", type=str)

    check = commands.add_parser("check", help="Only run the basic quality rules.")
    _add_common(check)
    check.add_argument("--violations", type=str)

    encode = commands.add_parser("encode", help="Run the quality rules and encode the rows.")
    _add_common(encode)
    encode.add_argument("--violations", type=str)
    encode.add_argument("--dump-encoded", dest="encoded_dump", type=str)

    train = commands.add_parser("train", help="Train and evaluate a model.")
    _add_common(train)
    _add_train(train)
    train.add_argument("--model", type=str, help="Save the trained model here.")

    predict = commands.add_parser("predict", help="Predict every clean row with a saved model.")
    _add_common(predict)
    predict.add_argument("--model", type=str, required=True)
    predict.add_argument("--predictions", type=str, required=True)

    sweep = commands.add_parser("sweep", help="Compare hidden layer architectures.")
    _add_common(sweep)
    _add_train(sweep)
    sweep.add_argument(
        "--architectures",
        type=parse_architectures,
        help="';'-separated hidden layer sizes (default: the twelve reference architectures).",
    )
    sweep.add_argument("--jobs", type=int, help="Architectures trained in parallel.")
    sweep.add_argument("--sweep-report", dest="sweep_report", type=str)

    spc = commands.add_parser("spc", help="Control limits and outliers from a predictions file.")
    _add_common(spc, dataset=False)
    _add_spc(spc)
    spc.add_argument("--predictions", type=str, required=True, help="Predictions input file.")
    spc.add_argument("--schema", type=str, help="Schema, used to name the report columns.")
    return parser


def parse_args(argv: typing.Optional[typing.Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments for any subcommand."""
    return build_parser().parse_args(argv)
