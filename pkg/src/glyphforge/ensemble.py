"""Weighted-majority fusion of the two MLP classifiers.

Fusion weights are proportional to each member's measured success rate:
w_k = d_k / (d_1 + d_2). The fused score for class i is the convex
combination w1 * o1[i] + w2 * o2[i].
"""

import os
from dataclasses import dataclass

import numpy as np

from . import mlp
from .errors import DegenerateWeights, FormatError, ShapeError


@dataclass(frozen=True)
class FusionWeights:
    d1: float
    d2: float
    w1: float
    w2: float


def compute_weights(d1: float, d2: float) -> FusionWeights:
    if d1 < 0 or d2 < 0:
        raise ValueError("success rates must be nonnegative")
    total = d1 + d2
    if total == 0:
        raise DegenerateWeights("both success rates are zero")
    return FusionWeights(d1=d1, d2=d2, w1=d1 / total, w2=d2 / total)


def fuse(weights: FusionWeights, o1: np.ndarray, o2: np.ndarray):
    """Ranked (class_index, score), score descending, ties by class index."""
    o1 = np.asarray(o1, dtype=np.float64)
    o2 = np.asarray(o2, dtype=np.float64)
    if o1.shape != o2.shape:
        raise ShapeError(f"confidence lengths differ: {o1.shape} vs {o2.shape}")
    scores = weights.w1 * o1 + weights.w2 * o2
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return [(i, float(scores[i])) for i in order]


def calibrate(model1: mlp.MlpModel, model2: mlp.MlpModel, holdout) -> FusionWeights:
    """Weights from top-1 accuracies on a held-out calibration set.

    holdout: sequence of (features_for_model1, features_for_model2, class_index).
    """
    if len(holdout) == 0:
        raise DegenerateWeights("empty calibration set")
    hits1 = hits2 = 0
    for x1, x2, cls in holdout:
        if int(np.argmax(mlp.forward(model1, x1))) == cls:
            hits1 += 1
        if int(np.argmax(mlp.forward(model2, x2))) == cls:
            hits2 += 1
    return compute_weights(hits1 / len(holdout), hits2 / len(holdout))


@dataclass
class EnsembleModel:
    """Two member MLPs (chain-code first, moments second) plus fusion weights."""

    model1: mlp.MlpModel
    model2: mlp.MlpModel
    weights: FusionWeights

    def __post_init__(self):
        if self.model1.labels != self.model2.labels:
            raise ShapeError("member models disagree on the class table")

    @property
    def labels(self):
        return self.model1.labels

    def predict(self, x1: np.ndarray, x2: np.ndarray):
        """Ranked (label, fused score) for one sample's two feature vectors."""
        o1 = mlp.forward(self.model1, x1)
        o2 = mlp.forward(self.model2, x2)
        return [
            (self.labels[i], score) for i, score in fuse(self.weights, o1, o2)
        ]


ENSEMBLE_MAGIC = "glyphforge-ensemble v1"


def save_ensemble(ens: EnsembleModel, path, member_paths=None) -> None:
    """Write the ensemble file; members are stored as relative paths."""
    directory = os.path.dirname(os.path.abspath(path))
    if member_paths is None:
        stem = os.path.splitext(os.path.basename(path))[0]
        member_paths = (f"{stem}.chain.mlp", f"{stem}.moment.mlp")
        mlp.save_model(ens.model1, os.path.join(directory, member_paths[0]))
        mlp.save_model(ens.model2, os.path.join(directory, member_paths[1]))
    w = ens.weights
    lines = [
        ENSEMBLE_MAGIC,
        f"model1 {member_paths[0]}",
        f"model2 {member_paths[1]}",
        f"d1 {w.d1!r}",
        f"d2 {w.d2!r}",
        f"w1 {w.w1!r}",
        f"w2 {w.w2!r}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_ensemble(path) -> EnsembleModel:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != ENSEMBLE_MAGIC:
        raise FormatError(f"{path}: not a {ENSEMBLE_MAGIC} file")
    header = dict(ln.partition(" ")[::2] for ln in lines[1:] if ln)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        model1 = mlp.load_model(os.path.join(directory, header["model1"]))
        model2 = mlp.load_model(os.path.join(directory, header["model2"]))
        weights = FusionWeights(
            d1=float(header["d1"]),
            d2=float(header["d2"]),
            w1=float(header["w1"]),
            w2=float(header["w2"]),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from exc
    return EnsembleModel(model1=model1, model2=model2, weights=weights)
