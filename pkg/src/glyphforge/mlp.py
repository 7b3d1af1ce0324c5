"""Single-hidden-layer perceptron trained by online backpropagation with momentum.

Weights are float64 numpy arrays: w1 is hidden x input, w2 is output x hidden.
Inputs are min-max scaled to [0, 1] per feature with statistics frozen from
the training set and stored in the model file.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, ShapeError, TrainError


def sigmoid(t: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-t))


@dataclass
class MlpConfig:
    input_size: int
    hidden_size: int
    output_size: int
    learning_rate: float = 0.8
    momentum: float = 0.7
    max_epochs: int = 1000
    target_mse: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if min(self.input_size, self.hidden_size, self.output_size) < 1:
            raise ValueError("all layer sizes must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must be in [0, 1)")


@dataclass
class MlpModel:
    config: MlpConfig
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    labels: list
    extractor_id: str = ""
    feature_min: np.ndarray = None
    feature_max: np.ndarray = None
    extractor_flags: dict = field(default_factory=dict)


@dataclass
class TrainingReport:
    epochs_run: int
    mse_trace: list

    @property
    def final_mse(self) -> float:
        return self.mse_trace[-1]


def init_model(config: MlpConfig, labels=None, extractor_id: str = "") -> MlpModel:
    """Uniform [-r, r] init with r = sqrt(6 / (fan_in + fan_out)); zero biases."""
    if labels is None:
        labels = [str(i) for i in range(config.output_size)]
    if len(labels) != config.output_size:
        raise ShapeError("label table length must equal output_size")
    rng = np.random.default_rng(config.seed)
    r1 = np.sqrt(6.0 / (config.input_size + config.hidden_size))
    r2 = np.sqrt(6.0 / (config.hidden_size + config.output_size))
    w1 = rng.uniform(-r1, r1, size=(config.hidden_size, config.input_size))
    w2 = rng.uniform(-r2, r2, size=(config.output_size, config.hidden_size))
    return MlpModel(
        config=config,
        w1=w1,
        b1=np.zeros(config.hidden_size),
        w2=w2,
        b2=np.zeros(config.output_size),
        labels=list(labels),
    )


def scale_input(model: MlpModel, x: np.ndarray) -> np.ndarray:
    if model.feature_min is None:
        return np.asarray(x, dtype=np.float64)
    span = model.feature_max - model.feature_min
    safe = np.where(span > 0, span, 1.0)
    scaled = (np.asarray(x, dtype=np.float64) - model.feature_min) / safe
    return np.where(span > 0, scaled, 0.0)


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Per-class confidences in (0, 1): sigmoid hidden and output layers."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.config.input_size,):
        raise ShapeError(
            f"input length {x.shape} != ({model.config.input_size},)"
        )
    x = scale_input(model, x)
    hidden = sigmoid(model.w1 @ x + model.b1)
    return sigmoid(model.w2 @ hidden + model.b2)


def gradients(model: MlpModel, x: np.ndarray, target: np.ndarray):
    """Backprop gradients of loss = 0.5 * sum((target - output)^2).

    Returns (gw1, gb1, gw2, gb2, loss). Gradients are w.r.t. the raw
    weights; input scaling is applied exactly as in forward().
    """
    x = scale_input(model, np.asarray(x, dtype=np.float64))
    hidden = sigmoid(model.w1 @ x + model.b1)
    out = sigmoid(model.w2 @ hidden + model.b2)
    err = out - target
    loss = 0.5 * float(np.dot(err, err))
    delta_o = err * out * (1.0 - out)
    gw2 = np.outer(delta_o, hidden)
    gb2 = delta_o
    delta_h = (model.w2.T @ delta_o) * hidden * (1.0 - hidden)
    gw1 = np.outer(delta_h, x)
    gb1 = delta_h
    return gw1, gb1, gw2, gb2, loss


def train(model: MlpModel, dataset) -> TrainingReport:
    """Online backprop with momentum over a shuffled pass each epoch.

    dataset: sequence of (feature_vector, class_index). Sets the model's
    min-max scaling statistics from the dataset before the first epoch.
    Stops at max_epochs or when the epoch MSE (mean squared output error
    over all samples and output units) drops to target_mse.
    """
    if len(dataset) == 0:
        raise TrainError("cannot train on an empty dataset")
    cfg = model.config
    xs = np.array([np.asarray(x, dtype=np.float64) for x, _ in dataset])
    if xs.shape[1] != cfg.input_size:
        raise ShapeError(f"feature dim {xs.shape[1]} != input_size {cfg.input_size}")
    idxs = [int(c) for _, c in dataset]
    if max(idxs) >= cfg.output_size or min(idxs) < 0:
        raise TrainError("class index outside output layer range")
    if model.feature_min is None:
        model.feature_min = xs.min(axis=0)
        model.feature_max = xs.max(axis=0)
    targets = np.zeros((len(dataset), cfg.output_size))
    targets[np.arange(len(dataset)), idxs] = 1.0

    rng = np.random.default_rng(cfg.seed + 1)
    vel = [np.zeros_like(m) for m in (model.w1, model.b1, model.w2, model.b2)]
    trace = []
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(len(dataset))
        sq_err = 0.0
        for i in order:
            gw1, gb1, gw2, gb2, loss = gradients(model, xs[i], targets[i])
            sq_err += 2.0 * loss
            for mat, grad, v in zip(
                (model.w1, model.b1, model.w2, model.b2),
                (gw1, gb1, gw2, gb2),
                vel,
            ):
                delta = -cfg.learning_rate * grad + cfg.momentum * v
                mat += delta
                v[...] = delta
        mse = sq_err / (len(dataset) * cfg.output_size)
        trace.append(mse)
        if mse <= cfg.target_mse:
            break
    return TrainingReport(epochs_run=len(trace), mse_trace=trace)


def predict(model: MlpModel, x: np.ndarray):
    """Ranked (label, confidence), confidence descending, ties by class index."""
    conf = forward(model, x)
    order = sorted(range(len(conf)), key=lambda i: (-conf[i], i))
    return [(model.labels[i], float(conf[i])) for i in order]


# --- model file format -------------------------------------------------------
#
# Line-oriented text: "glyphforge-mlp v1" magic, "key value" header lines,
# then "@name rows cols" blocks of whitespace-separated float rows. Floats
# are written with repr() so the round trip is exact.

MAGIC = "glyphforge-mlp v1"


def _fmt_vec(v: np.ndarray) -> str:
    return " ".join(repr(float(x)) for x in v)


def save_model(model: MlpModel, path) -> None:
    cfg = model.config
    lines = [MAGIC]
    lines.append(f"extractor {model.extractor_id}")
    lines.append(f"input_size {cfg.input_size}")
    lines.append(f"hidden_size {cfg.hidden_size}")
    lines.append(f"output_size {cfg.output_size}")
    lines.append(f"learning_rate {cfg.learning_rate!r}")
    lines.append(f"momentum {cfg.momentum!r}")
    lines.append(f"max_epochs {cfg.max_epochs}")
    lines.append(f"target_mse {cfg.target_mse!r}")
    lines.append(f"seed {cfg.seed}")
    lines.append("labels " + ",".join(model.labels))
    flags = ",".join(f"{k}={int(bool(v))}" for k, v in sorted(model.extractor_flags.items()))
    lines.append(f"flags {flags}")
    if model.feature_min is not None:
        lines.append("feature_min " + _fmt_vec(model.feature_min))
        lines.append("feature_max " + _fmt_vec(model.feature_max))
    for name in ("w1", "b1", "w2", "b2"):
        arr = np.atleast_2d(getattr(model, name))
        lines.append(f"@{name} {arr.shape[0]} {arr.shape[1]}")
        for row in arr:
            lines.append(_fmt_vec(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> MlpModel:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != MAGIC:
        raise FormatError(f"{path}: not a {MAGIC} file")
    header = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("@"):
        key, _, value = lines[i].partition(" ")
        header[key] = value
        i += 1
    try:
        cfg = MlpConfig(
            input_size=int(header["input_size"]),
            hidden_size=int(header["hidden_size"]),
            output_size=int(header["output_size"]),
            learning_rate=float(header["learning_rate"]),
            momentum=float(header["momentum"]),
            max_epochs=int(header["max_epochs"]),
            target_mse=float(header["target_mse"]),
            seed=int(header["seed"]),
        )
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad header ({exc})") from exc
    labels = header.get("labels", "").split(",") if header.get("labels") else []
    flags = {}
    for item in header.get("flags", "").split(","):
        if item:
            k, _, v = item.partition("=")
            flags[k] = bool(int(v))
    mats = {}
    while i < len(lines):
        name, rows, cols = lines[i][1:].split()
        rows, cols = int(rows), int(cols)
        block = [
            [float(tok) for tok in lines[i + 1 + r].split()] for r in range(rows)
        ]
        mats[name] = np.array(block, dtype=np.float64).reshape(rows, cols)
        i += 1 + rows
    for name, shape in (
        ("w1", (cfg.hidden_size, cfg.input_size)),
        ("b1", (1, cfg.hidden_size)),
        ("w2", (cfg.output_size, cfg.hidden_size)),
        ("b2", (1, cfg.output_size)),
    ):
        if name not in mats or mats[name].shape != shape:
            raise FormatError(f"{path}: matrix {name} missing or wrong shape")
    fmin = fmax = None
    if "feature_min" in header:
        fmin = np.array([float(t) for t in header["feature_min"].split()])
        fmax = np.array([float(t) for t in header["feature_max"].split()])
        if fmin.shape != (cfg.input_size,):
            raise FormatError(f"{path}: feature_min length != input_size")
    model = MlpModel(
        config=cfg,
        w1=mats["w1"],
        b1=mats["b1"].ravel(),
        w2=mats["w2"],
        b2=mats["b2"].ravel(),
        labels=labels,
        extractor_id=header.get("extractor", ""),
        feature_min=fmin,
        feature_max=fmax,
        extractor_flags=flags,
    )
    if len(model.labels) != cfg.output_size:
        raise FormatError(f"{path}: label table length != output_size")
    return model
