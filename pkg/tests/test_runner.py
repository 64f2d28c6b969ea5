"""Orchestration: répertoire de run, réévaluation, échecs d'étape, prédiction."""

import json

import pytest

from asd_pipeline.classifiers import MODEL_TYPES
from asd_pipeline.errors import LoadError, StageError
from asd_pipeline.rule_labeling import METHOD_NAMES
from asd_pipeline.runner import (
    CONFIG_FILE,
    MANIFEST_FILE,
    TEST_SET_FILE,
    evaluate_run,
    load_run,
    predict_records,
    run_pipeline,
    train,
    unwrap,
)

from conftest import small_config


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    return run_pipeline(small_config(tmp_path_factory.mktemp("small")))


def test_run_directory_contents(small_run):
    run_dir = small_run.run_dir
    assert run_dir.name.startswith("run-")
    assert run_dir.name.endswith("-seed7")
    for name in (CONFIG_FILE, MANIFEST_FILE, TEST_SET_FILE, "report.txt", "report.json", "f1.csv"):
        assert (run_dir / name).is_file()
    for model_type in MODEL_TYPES:
        assert (run_dir / "models" / f"{model_type}.json").is_file()
    # pas de répertoire temporaire résiduel
    assert [p.name for p in run_dir.parent.iterdir()] == [run_dir.name]


def test_manifest_and_report_agree(small_run):
    manifest = json.loads((small_run.run_dir / MANIFEST_FILE).read_text(encoding="utf-8"))
    assert manifest["n_test"] == 60
    assert manifest["n_train"] == 240
    assert small_run.report.config["n_test"] == 60
    assert small_run.report.winner == small_run.report.ranking[0]
    assert len(small_run.report.entries) == 4


def test_evaluate_run_reproduces_reports(small_run):
    before = {
        name: (small_run.run_dir / name).read_bytes()
        for name in ("report.txt", "report.json", "accuracy.csv", "confusion_knn.csv")
    }
    report = evaluate_run(small_run.run_dir)

    assert report.winner == small_run.report.winner
    for name, content in before.items():
        assert (small_run.run_dir / name).read_bytes() == content
    assert not [p for p in small_run.run_dir.iterdir() if p.name.startswith(".")]


def test_load_run(small_run):
    outcome = load_run(small_run.run_dir)
    assert outcome.config.seed == 7
    assert outcome.config.synth.n == 300
    assert outcome.manifest["config_hash"] == small_run.report.config["config_hash"]
    assert len(outcome.test_set) == 60
    assert set(outcome.models) == set(MODEL_TYPES)


def test_train_writes_models_without_reports(tmp_path):
    run_dir = train(small_config(tmp_path, FOREST_N_TREES=3))
    assert (run_dir / "models" / "random_forest.json").is_file()
    assert not (run_dir / "report.txt").exists()


def test_stage_failure_leaves_nothing_behind(tmp_path):
    cfg = small_config(tmp_path, SOURCES=str(tmp_path / "missing.csv"), SYNTH_N=None, SYNTH_A_PREVALENCE=None)
    with pytest.raises(StageError) as info:
        run_pipeline(cfg)

    assert info.value.stage == "load"
    assert isinstance(unwrap(info.value), LoadError)
    assert not (tmp_path / "runs").exists() or not any((tmp_path / "runs").iterdir())


def test_predict_records_reports_bad_rows(small_run, make_row, to_csv):
    model = small_run.models["decision_tree"]
    csv = to_csv([
        make_row(1, a=(1, 0, 0, 0, 0, 1, 0, 0, 0, 0)),
        make_row(2, sex=""),
        make_row(3, ethnicity="Atlantean"),
        make_row(4, a=(0, 0, 0, 0, 1, 0, 0, 0, 1, 0)),
    ])
    predictions = predict_records(model, csv)

    assert [p.row for p in predictions] == [0, 1, 2, 3]
    assert [p.ok for p in predictions] == [True, False, False, True]
    assert "Sex" in predictions[1].error
    assert "Atlantean" in predictions[2].error
    first = predictions[0].to_dict()
    assert first["name"] == METHOD_NAMES[first["code"]]
    assert predictions[1].to_dict() == {"row": 1, "error": predictions[1].error}
