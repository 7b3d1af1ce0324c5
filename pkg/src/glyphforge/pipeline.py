"""End-to-end glue: raw image -> features -> trained models -> rankings."""

import numpy as np

from . import chain_features, dataset_io, ensemble, image_prep, mlp, moment_features
from .errors import TrainError

DEFAULT_HIDDEN = {"chain200": 50, "moment63": 45}


def preprocess_stages(image: np.ndarray):
    """All intermediate binary stages for one grayscale glyph image."""
    binary = image_prep.binarize(image)
    scaled = image_prep.normalize_size(binary)
    return {
        "binary": binary,
        "scaled": scaled,
        "contour": image_prep.find_contour(scaled),
        "thinned": image_prep.thin(scaled),
    }


def extract_features(
    image: np.ndarray,
    extractor_id: str,
    normalize: bool = False,
    log_moments: bool = False,
) -> np.ndarray:
    """One glyph image to one feature vector (chain200 or moment63)."""
    binary = image_prep.binarize(image)
    scaled = image_prep.normalize_size(binary)
    if extractor_id == "chain200":
        contour = image_prep.find_contour(scaled)
        return chain_features.extract_chain_features(contour, normalize=normalize)
    if extractor_id == "moment63":
        thinned = image_prep.thin(scaled)
        return moment_features.moment_zone_features(thinned, log_scale=log_moments)
    raise ValueError(f"unknown extractor {extractor_id!r}")


def extract_table(
    samples, extractor_id: str, normalize: bool = False, log_moments: bool = False
) -> dataset_io.FeatureTable:
    rows = [
        (
            s.id,
            s.label,
            extract_features(s.image, extractor_id, normalize, log_moments),
        )
        for s in samples
    ]
    return dataset_io.FeatureTable(
        extractor_id=extractor_id,
        dim=dataset_io.EXTRACTOR_DIMS[extractor_id],
        rows=rows,
    )


def train_mlp_on_table(
    table: dataset_io.FeatureTable,
    labels,
    hidden_size: int = None,
    learning_rate: float = 0.8,
    momentum: float = 0.7,
    max_epochs: int = 1000,
    target_mse: float = 1e-3,
    seed: int = 0,
    extractor_flags: dict = None,
):
    """Train one MLP on a feature table; returns (model, report)."""
    if not table.rows:
        raise TrainError("feature table has no rows")
    labels = list(labels)
    label_pos = {lab: i for i, lab in enumerate(labels)}
    config = mlp.MlpConfig(
        input_size=table.dim,
        hidden_size=hidden_size or DEFAULT_HIDDEN.get(table.extractor_id, 50),
        output_size=len(labels),
        learning_rate=learning_rate,
        momentum=momentum,
        max_epochs=max_epochs,
        target_mse=target_mse,
        seed=seed,
    )
    model = mlp.init_model(config, labels, extractor_id=table.extractor_id)
    if extractor_flags:
        model.extractor_flags = dict(extractor_flags)
    dataset = [(vec, label_pos[lab]) for _, lab, vec in table.rows]
    report = mlp.train(model, dataset)
    return model, report


def train_ensemble_on_tables(
    table1: dataset_io.FeatureTable,
    table2: dataset_io.FeatureTable,
    labels,
    calibration_fraction: float = 0.2,
    seed: int = 0,
    **train_kwargs,
):
    """Train both member MLPs plus fusion weights from a calibration split.

    The calibration split is carved out of the training data (never the
    test set); both tables must list the same samples in the same order.
    Returns (EnsembleModel, report1, report2).
    """
    ids1 = [r[0] for r in table1.rows]
    ids2 = [r[0] for r in table2.rows]
    if ids1 != ids2:
        raise TrainError("feature tables do not cover the same samples")
    labels = list(labels)
    label_pos = {lab: i for i, lab in enumerate(labels)}
    n = len(table1.rows)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_cal = max(1, int(round(calibration_fraction * n)))
    cal_idx = set(int(i) for i in order[:n_cal])
    fit_idx = [i for i in range(n) if i not in cal_idx]
    if not fit_idx:
        raise TrainError("calibration split leaves no training samples")

    def subset(table, idxs):
        return dataset_io.FeatureTable(
            extractor_id=table.extractor_id,
            dim=table.dim,
            rows=[table.rows[i] for i in idxs],
        )

    model1, report1 = train_mlp_on_table(
        subset(table1, fit_idx), labels, seed=seed, **train_kwargs
    )
    model2, report2 = train_mlp_on_table(
        subset(table2, fit_idx), labels, seed=seed, **train_kwargs
    )
    holdout = [
        (table1.rows[i][2], table2.rows[i][2], label_pos[table1.rows[i][1]])
        for i in sorted(cal_idx)
    ]
    weights = ensemble.calibrate(model1, model2, holdout)
    return ensemble.EnsembleModel(model1, model2, weights), report1, report2
