"""Run complet par défaut (3043 fiches synthétiques, seed 42)."""

import numpy as np
import pytest

from asd_pipeline.classifiers import fit_decision_tree, predict_tree
from asd_pipeline.config import load_config
from asd_pipeline.persistence import load_model
from asd_pipeline.preprocessing import (
    SplitSpec,
    apply_encoders,
    apply_scaler,
    fit_label_encoders,
    fit_scaler,
    split_indices,
)
from asd_pipeline.rule_labeling import builtin_rules, label_dataset
from asd_pipeline.runner import run_pipeline
from asd_pipeline.synthetic import SynthSpec, generate

pytestmark = pytest.mark.slow

REPORT_FILES = ("report.txt", "report.json", "accuracy.csv", "f1.csv", "confusion_random_forest.csv")


def _accuracy(report, name):
    return report.entry(name).metrics.accuracy


def test_split_sizes(seed42_run):
    assert seed42_run.report.config["n_train"] == 2891
    assert seed42_run.report.config["n_test"] == 152
    assert len(seed42_run.test_set) == 152


def test_labels_are_learnable(seed42_run):
    report = seed42_run.report
    assert _accuracy(report, "Decision Tree") >= 0.98
    assert _accuracy(report, "Random Forest") >= 0.95


def test_accuracy_ordering(seed42_run):
    report = seed42_run.report
    knn = _accuracy(report, "KNN")
    assert _accuracy(report, "Decision Tree") > knn
    assert _accuracy(report, "Random Forest") > knn
    assert knn > _accuracy(report, "Naive Bayes")
    assert report.winner in ("Decision Tree", "Random Forest")


def test_stage_isolation_without_scaling(seed42_run, tmp_path):
    unscaled = run_pipeline(load_config(None, {"SEED": 42, "SCALE_COLUMNS": "none", "OUTPUT_DIR": str(tmp_path)}))
    tree = "decision_tree"

    assert unscaled.models[tree].scaler.std.tolist() == [1.0] * 17
    assert np.array_equal(
        unscaled.models[tree].predict_dataset(unscaled.test_set),
        seed42_run.models[tree].predict_dataset(seed42_run.test_set),
    )


def test_rerun_is_byte_identical(seed42_run, tmp_path):
    again = run_pipeline(load_config(None, {"SEED": 42, "OUTPUT_DIR": str(tmp_path)}))

    assert again.run_dir.name == seed42_run.run_dir.name
    for name in REPORT_FILES:
        assert (again.run_dir / name).read_bytes() == (seed42_run.run_dir / name).read_bytes()


def test_tree_ignores_standardization(seed42_run):
    dataset = label_dataset(generate(SynthSpec(n=3043, seed=42)), builtin_rules())
    y = np.array(dataset.labels())
    features = apply_encoders(dataset, fit_label_encoders(dataset))
    train_index, test_index = split_indices(len(dataset), SplitSpec(test_fraction=0.05, seed=42))
    train_x, test_x = features.take(train_index), features.take(test_index)
    scaler = fit_scaler(train_x)

    raw_tree = fit_decision_tree(train_x.values, y[train_index])
    scaled_tree = fit_decision_tree(apply_scaler(train_x, scaler).values, y[train_index])
    raw = predict_tree(raw_tree, test_x.values)
    scaled = predict_tree(scaled_tree, apply_scaler(test_x, scaler).values)

    assert np.array_equal(raw, scaled)
    assert np.array_equal(scaled, seed42_run.models["decision_tree"].predict_dataset(seed42_run.test_set))


def test_persisted_models_reproduce_predictions(seed42_run):
    for model_type, model in seed42_run.models.items():
        reloaded = load_model(seed42_run.run_dir / "models" / f"{model_type}.json")
        assert np.array_equal(
            reloaded.predict_dataset(seed42_run.test_set),
            model.predict_dataset(seed42_run.test_set),
        )
