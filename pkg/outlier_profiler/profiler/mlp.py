"""Feed-forward neural regressor trained by backpropagation.

Hidden layers use the logistic sigmoid and the single output node is linear.
Training is online stochastic gradient descent with momentum on the loss
0.5 * (prediction - target) ** 2, computed on z-score scaled features and target.
"""
import dataclasses
import logging
import math
import multiprocessing as mp
import queue as queue_
import typing

import numpy as np
import tomli
import tomli_w

from .. import constants
from . import config, encode, errors, models, util

logger = logging.getLogger(__name__)

MODEL_FORMAT = "outlier_profiler-mlp"
MODEL_FORMAT_VERSION = 1

Gradients = typing.Tuple[typing.List[models.FloatArray], typing.List[models.FloatArray]]


def _generators(seed: int) -> typing.Dict[str, np.random.Generator]:
    """Independent generators for splitting, initialisation and sample order."""
    split_seq, init_seq, order_seq = np.random.SeedSequence(seed).spawn(3)
    return {
        "split": np.random.default_rng(split_seq),
        "init": np.random.default_rng(init_seq),
        "order": np.random.default_rng(order_seq),
    }


def sigmoid(z: models.FloatArray) -> models.FloatArray:
    # exp(-log(1 + exp(-z))) does not overflow for large negative z.
    return typing.cast(models.FloatArray, np.exp(-np.logaddexp(0.0, -z)))


def split(
    rows: typing.Sequence[models.EncodedRow], cfg: models.TrainConfig
) -> typing.Tuple[typing.List[models.EncodedRow], typing.List[models.EncodedRow]]:
    """Seeded shuffle, then the first ceil(n * train_fraction) rows train and the rest test."""
    if not rows:
        raise errors.SplitError("cannot split an empty dataset")
    n_rows = len(rows)
    # Rounding first stops 100 * 0.07 from becoming 8 training rows.
    n_train = math.ceil(round(n_rows * cfg.train_fraction, 9))
    if cfg.shuffle:
        order = _generators(cfg.seed)["split"].permutation(n_rows)
    else:
        order = np.arange(n_rows)
    train = [rows[i] for i in order[:n_train]]
    test = [rows[i] for i in order[n_train:]]
    if not train or not test:
        raise errors.SplitError(
            f"split of {n_rows} rows at fraction {cfg.train_fraction} leaves "
            f"{len(train)} train and {len(test)} test rows"
        )
    return train, test


def init_model(feature_arity: int, cfg: models.TrainConfig) -> models.MlpModel:
    """Uniform weights in [-0.5, 0.5] from the seeded generator, zero biases."""
    if feature_arity < 1:
        raise errors.ArityError(f"feature arity must be at least 1, got {feature_arity}")
    rng = _generators(cfg.seed)["init"]
    sizes = (feature_arity, *cfg.hidden_sizes, 1)
    weights = tuple(
        rng.uniform(
            -constants.INIT_WEIGHT_RANGE, constants.INIT_WEIGHT_RANGE, size=(fan_in, fan_out)
        )
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:])
    )
    biases = tuple(np.zeros(fan_out) for fan_out in sizes[1:])
    return models.MlpModel(sizes, weights, biases, None, cfg)


def _activations(
    weights: typing.Sequence[models.FloatArray],
    biases: typing.Sequence[models.FloatArray],
    x: models.FloatArray,
) -> typing.List[models.FloatArray]:
    """Outputs of every layer, input first. Works on one vector or a matrix of rows."""
    outputs = [x]
    last = len(weights) - 1
    for k, (weight, bias) in enumerate(zip(weights, biases)):
        z = outputs[-1] @ weight + bias
        outputs.append(z if k == last else sigmoid(z))
    return outputs


def _backward(
    weights: typing.Sequence[models.FloatArray],
    outputs: typing.Sequence[models.FloatArray],
    target: float,
) -> typing.Tuple[float, Gradients]:
    """Loss and gradients for one sample, given its forward pass."""
    delta = outputs[-1] - target
    loss = 0.5 * float(delta[0] ** 2)
    grad_w: typing.List[models.FloatArray] = [np.empty(0)] * len(weights)
    grad_b: typing.List[models.FloatArray] = [np.empty(0)] * len(weights)
    for k in range(len(weights) - 1, -1, -1):
        grad_w[k] = np.outer(outputs[k], delta)
        grad_b[k] = delta
        if k > 0:
            activation = outputs[k]
            delta = (weights[k] @ delta) * activation * (1.0 - activation)
    return loss, (grad_w, grad_b)


def _check_arity(model: models.MlpModel, features: models.FloatArray) -> None:
    if features.shape[-1] != model.layer_sizes[0]:
        raise errors.ArityError(
            f"model takes {model.layer_sizes[0]} features, got {features.shape[-1]}"
        )


def forward(model: models.MlpModel, features: typing.Sequence[float]) -> float:
    """Scaled-space prediction for one already scaled feature vector."""
    x = np.asarray(features, dtype=np.float64)
    _check_arity(model, x)
    return float(_activations(model.weights, model.biases, x)[-1][0])


def loss(model: models.MlpModel, sample: models.EncodedRow) -> float:
    """Squared-error loss of one sample, taken as already scaled."""
    return 0.5 * (forward(model, sample.features) - sample.target) ** 2


def gradients(model: models.MlpModel, sample: models.EncodedRow) -> Gradients:
    """Backpropagated weight and bias gradients of the loss for one sample."""
    x = np.asarray(sample.features, dtype=np.float64)
    _check_arity(model, x)
    outputs = _activations(model.weights, model.biases, x)
    return _backward(model.weights, outputs, sample.target)[1]


def gradient_check(model: models.MlpModel, sample: models.EncodedRow, h: float = 1e-5) -> float:
    """Largest relative gap between analytic gradients and central finite differences."""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    grad_w, grad_b = gradients(model, sample)
    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    x = np.asarray(sample.features, dtype=np.float64)

    def sample_loss() -> float:
        prediction = _activations(weights, biases, x)[-1][0]
        return 0.5 * float((prediction - sample.target) ** 2)

    worst = 0.0
    for params, analytic_grads in ((weights, grad_w), (biases, grad_b)):
        for param, analytic_grad in zip(params, analytic_grads):
            for index in np.ndindex(param.shape):
                original = param[index]
                param[index] = original + h
                loss_plus = sample_loss()
                param[index] = original - h
                loss_minus = sample_loss()
                param[index] = original
                numeric = (loss_plus - loss_minus) / (2 * h)
                analytic = float(analytic_grad[index])
                denominator = max(abs(analytic), abs(numeric), 1e-8)
                worst = max(worst, abs(analytic - numeric) / denominator)
    return worst


def sgd_epochs(
    model: models.MlpModel,
    features: models.FloatArray,
    targets: models.FloatArray,
    cfg: models.TrainConfig,
    order_rng: typing.Optional[np.random.Generator] = None,
) -> models.MlpModel:
    """Run cfg.epochs passes of online gradient descent with momentum over scaled data."""
    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    velocity_w = [np.zeros_like(w) for w in weights]
    velocity_b = [np.zeros_like(b) for b in biases]
    n_rows = len(targets)
    log_every = max(1, cfg.epochs // 10)

    for epoch in range(1, cfg.epochs + 1):
        if cfg.shuffle and order_rng is not None:
            order = order_rng.permutation(n_rows)
        else:
            order = np.arange(n_rows)
        total = 0.0
        for i in order:
            outputs = _activations(weights, biases, features[i])
            sample_loss, (grad_w, grad_b) = _backward(weights, outputs, float(targets[i]))
            total += sample_loss
            for k in range(len(weights)):
                velocity_w[k] *= cfg.momentum
                velocity_w[k] -= cfg.learning_rate * grad_w[k]
                weights[k] += velocity_w[k]
                velocity_b[k] *= cfg.momentum
                velocity_b[k] -= cfg.learning_rate * grad_b[k]
                biases[k] += velocity_b[k]
        mean_loss = total / n_rows
        if not math.isfinite(mean_loss):
            raise errors.DivergenceError(epoch, mean_loss)
        if epoch % log_every == 0:
            logger.debug("Epoch %s/%s mean loss %.6g", epoch, cfg.epochs, mean_loss)

    return dataclasses.replace(model, weights=tuple(weights), biases=tuple(biases))


def predict_scaled(model: models.MlpModel, features: models.FloatArray) -> models.FloatArray:
    """Scaled-space predictions for a matrix of scaled feature rows."""
    _check_arity(model, features)
    return _activations(model.weights, model.biases, features)[-1][:, 0]


def predict_many(
    model: models.MlpModel, rows: typing.Sequence[models.EncodedRow]
) -> models.FloatArray:
    """Predictions in original target units for encoded (unscaled) rows."""
    if model.scaling is None:
        raise errors.TrainingError("model has no scaling parameters, it has not been trained")
    if not rows:
        return np.zeros(0)
    scaled = encode.scale_features(encode.feature_matrix(rows), model.scaling)
    return typing.cast(
        models.FloatArray, encode.invert_target(predict_scaled(model, scaled), model.scaling)
    )


def predict(model: models.MlpModel, row: models.EncodedRow) -> float:
    """Prediction in original target units for one encoded row."""
    return float(predict_many(model, [row])[0])


def compute_metrics(
    predictions: typing.Sequence[float], targets: typing.Sequence[float]
) -> models.EvalMetrics:
    """Correlation coefficient, mean absolute error and root mean squared error."""
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if len(p) == 0 or len(p) != len(t):
        raise ValueError(f"need equal non-empty sequences, got {len(p)} and {len(t)}")
    errors_ = p - t
    mae = float(np.mean(np.abs(errors_)))
    rmse = float(np.sqrt(np.mean(errors_**2)))
    p_dev = p - p.mean()
    t_dev = t - t.mean()
    p_ss = float(np.sum(p_dev**2))
    t_ss = float(np.sum(t_dev**2))
    r: typing.Optional[float]
    if not (math.isfinite(p_ss) and math.isfinite(t_ss)):
        r = math.nan
    elif p_ss == 0 or t_ss == 0:
        r = None
    else:
        r = float(np.clip(np.sum(p_dev * t_dev) / math.sqrt(p_ss * t_ss), -1.0, 1.0))
    return models.EvalMetrics(r, mae, rmse, len(p))


def evaluate(
    model: models.MlpModel, test: typing.Sequence[models.EncodedRow]
) -> models.EvalMetrics:
    """Metrics of the model's original-unit predictions over a test set."""
    if not test:
        raise errors.TrainingError("cannot evaluate on an empty test set")
    return compute_metrics(predict_many(model, test), encode.target_vector(test))


def train(
    rows: typing.Sequence[models.EncodedRow], cfg: models.TrainConfig
) -> typing.Tuple[models.MlpModel, models.EvalMetrics]:
    """Split, scale, fit and evaluate a model on the test split."""
    config.validate_train_config(cfg)
    if len(rows) < 2:
        raise errors.TrainingError(f"training needs at least 2 rows, got {len(rows)}")
    arity = len(rows[0].features)
    if any(len(row.features) != arity for row in rows):
        raise errors.ArityError("rows do not all have the same number of features")

    train_rows, test_rows = split(rows, cfg)
    scaling = encode.fit_scaling(train_rows)
    features = encode.scale_features(encode.feature_matrix(train_rows), scaling)
    targets = encode.scale_target(encode.target_vector(train_rows), scaling)

    logger.info(
        "Training %s on %s rows (%s test) for %s epochs.",
        "-".join(str(size) for size in (arity, *cfg.hidden_sizes, 1)),
        len(train_rows),
        len(test_rows),
        cfg.epochs,
    )
    model = init_model(arity, cfg)
    model = sgd_epochs(model, features, targets, cfg, _generators(cfg.seed)["order"])
    model = dataclasses.replace(model, scaling=scaling)
    metrics = evaluate(model, test_rows)
    r = metrics.correlation_coefficient
    logger.info(
        "Test metrics: r=%s mae=%.6g rmse=%.6g n=%s",
        constants.UNDEFINED_MARKER if r is None else f"{r:.4f}",
        metrics.mean_absolute_error,
        metrics.root_mean_squared_error,
        metrics.n_test,
    )
    return model, metrics


def _sweep_one(
    args: typing.Tuple[int, typing.Sequence[models.EncodedRow], models.TrainConfig]
) -> models.SweepRow:
    number, rows, cfg = args
    try:
        _, metrics = train(rows, cfg)
    except errors.TrainingError as err:
        logger.warning("Architecture %s failed: %s", cfg.hidden_sizes, err)
        return models.SweepRow(number, cfg.hidden_sizes, None, str(err))
    return models.SweepRow(number, cfg.hidden_sizes, metrics)


def _sweep_worker_init(log_q: queue_.Queue[typing.Any], level: int) -> None:
    package_logger = util.getLogger("outlier_profiler", queue=log_q)
    package_logger.setLevel(level)


def sweep(
    rows: typing.Sequence[models.EncodedRow],
    architectures: typing.Sequence[typing.Sequence[int]],
    cfg: models.TrainConfig,
    jobs: int = 1,
) -> typing.List[models.SweepRow]:
    """Train one model per hidden-layer architecture with the same seed and split."""
    if not architectures:
        raise errors.ConfigError("sweep needs at least one architecture")
    tasks = [
        (number, rows, dataclasses.replace(cfg, hidden_sizes=tuple(hidden)))
        for number, hidden in enumerate(architectures, start=1)
    ]
    if jobs <= 1:
        return [_sweep_one(task) for task in tasks]

    queue_log_handler = util.QueueLogger()
    try:
        with mp.Pool(  # pylint: disable=consider-using-with
            processes=jobs,
            initializer=_sweep_worker_init,
            initargs=(queue_log_handler.queue, logging.getLogger().getEffectiveLevel()),
        ) as pool:
            return pool.map(_sweep_one, tasks)
    finally:
        queue_log_handler.shutdown()


def _sweep_sort_key(row: models.SweepRow) -> typing.Tuple[int, float, int]:
    r = row.metrics.correlation_coefficient if row.metrics is not None else None
    if r is None or math.isnan(r):
        return (1, 0.0, row.number)
    return (0, -r, row.number)


def best_row(rows: typing.Sequence[models.SweepRow]) -> typing.Optional[models.SweepRow]:
    """Row with the largest correlation coefficient. Undefined coefficients rank last."""
    if not rows:
        return None
    best = min(rows, key=_sweep_sort_key)
    return best if _sweep_sort_key(best)[0] == 0 else None


def _hex(values: typing.Iterable[float]) -> typing.List[str]:
    return [float(value).hex() for value in values]


def _unhex(values: typing.Iterable[str]) -> typing.List[float]:
    return [float.fromhex(value) for value in values]


def model_to_dict(model: models.MlpModel) -> typing.Dict[str, typing.Any]:
    """Self-describing document of a model with every float as exact hex text."""
    hyper = model.hyper
    document: typing.Dict[str, typing.Any] = {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "layer_sizes": list(model.layer_sizes),
        "train": {
            "hidden_sizes": list(hyper.hidden_sizes),
            "learning_rate": float(hyper.learning_rate).hex(),
            "momentum": float(hyper.momentum).hex(),
            "epochs": hyper.epochs,
            "train_fraction": float(hyper.train_fraction).hex(),
            # TOML integers are signed 64-bit.
            "seed": str(hyper.seed),
            "shuffle": hyper.shuffle,
        },
        "layers": [
            {"weights": [_hex(row) for row in weight], "biases": _hex(bias)}
            for weight, bias in zip(model.weights, model.biases)
        ],
    }
    if model.scaling is not None:
        document["scaling"] = {
            "feature_mean": _hex(model.scaling.feature_mean),
            "feature_std": _hex(model.scaling.feature_std),
            "target_mean": float(model.scaling.target_mean).hex(),
            "target_std": float(model.scaling.target_std).hex(),
        }
    return document


def model_from_dict(document: typing.Dict[str, typing.Any]) -> models.MlpModel:
    """Rebuild a model from model_to_dict output, checking every shape."""
    try:
        if document["format"] != MODEL_FORMAT:
            raise errors.ModelFileError(f"not a model file: format {document['format']!r}")
        sizes = tuple(int(size) for size in document["layer_sizes"])
        train_table = document["train"]
        hyper = models.TrainConfig(
            hidden_sizes=tuple(int(size) for size in train_table["hidden_sizes"]),
            learning_rate=float.fromhex(train_table["learning_rate"]),
            momentum=float.fromhex(train_table["momentum"]),
            epochs=int(train_table["epochs"]),
            train_fraction=float.fromhex(train_table["train_fraction"]),
            seed=int(train_table["seed"]),
            shuffle=bool(train_table["shuffle"]),
        )
        weights = tuple(
            np.array([_unhex(row) for row in layer["weights"]], dtype=np.float64).reshape(
                len(layer["weights"]), -1
            )
            for layer in document["layers"]
        )
        biases = tuple(
            np.array(_unhex(layer["biases"]), dtype=np.float64) for layer in document["layers"]
        )
        scaling = None
        if "scaling" in document:
            table = document["scaling"]
            scaling = models.ScalingParams(
                feature_mean=tuple(_unhex(table["feature_mean"])),
                feature_std=tuple(_unhex(table["feature_std"])),
                target_mean=float.fromhex(table["target_mean"]),
                target_std=float.fromhex(table["target_std"]),
            )
    except (KeyError, TypeError, ValueError) as err:
        raise errors.ModelFileError(f"invalid model document: {err!r}") from err

    if sizes[-1] != 1 or len(weights) != len(sizes) - 1 or sizes[1:-1] != hyper.hidden_sizes:
        raise errors.ModelFileError(f"layer sizes {sizes} do not match the stored layers")
    for k, (weight, bias) in enumerate(zip(weights, biases)):
        if weight.shape != (sizes[k], sizes[k + 1]) or bias.shape != (sizes[k + 1],):
            raise errors.ModelFileError(f"layer {k} has shape {weight.shape}/{bias.shape}")
    if scaling is not None and scaling.arity != sizes[0]:
        raise errors.ModelFileError("scaling arity does not match the input layer")
    return models.MlpModel(sizes, weights, biases, scaling, hyper)


def dump_model(model: models.MlpModel, header: str = "") -> str:
    """TOML text of a model, optionally preceded by a comment header line."""
    body = tomli_w.dumps(model_to_dict(model))
    return f"{header}\n{body}" if header else body


def load_model(path: str) -> models.MlpModel:
    """Read a model file written by dump_model."""
    try:
        with open(path, "rb") as thefile:
            document = tomli.load(thefile)
    except OSError as err:
        raise errors.ModelFileError(f"cannot read {path}: {err.strerror}") from err
    except tomli.TOMLDecodeError as err:
        raise errors.ModelFileError(f"cannot parse {path}: {err}") from err
    return model_from_dict(document)
