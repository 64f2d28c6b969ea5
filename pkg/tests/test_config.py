"""Chargement de la configuration dotenv et hash de run."""

import pytest

from asd_pipeline.config import (
    SourceSpec,
    config_hash,
    load_config,
    parse_sources,
    run_dir_name,
)
from asd_pipeline.errors import ConfigError
from asd_pipeline.preprocessing import INTEGER_ONLY_FEATURE_COLUMNS


def _write(tmp_path, text):
    path = tmp_path / "pipeline.env"
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults_with_only_a_seed():
    cfg = load_config(None, {"SEED": 42})

    assert cfg.seed == 42
    assert cfg.synth.n == 3043
    assert cfg.synth.seed == 42
    assert cfg.split.test_fraction == 0.05
    assert cfg.split.seed == 42
    assert cfg.forest.n_trees == 100
    assert cfg.forest.features_per_split is None
    assert cfg.knn.k == 5
    assert cfg.nb.epsilon_factor == 1e-9
    assert cfg.tree.max_depth is None
    assert cfg.averaging == "macro"
    assert cfg.scale_columns is None


def test_overrides_win_over_file(tmp_path):
    path = _write(tmp_path, "SEED=1\nKNN_K=7\nFOREST_N_TREES=20\n")
    cfg = load_config(path, {"SEED": 9, "FOREST_N_TREES": None})

    assert cfg.seed == 9
    assert cfg.knn.k == 7
    assert cfg.forest.n_trees == 20


def test_seed_is_mandatory(tmp_path):
    with pytest.raises(ConfigError, match="SEED"):
        load_config(_write(tmp_path, "KNN_K=3\n"))


def test_unknown_key(tmp_path):
    with pytest.raises(ConfigError, match="KNN_NEIGHBOURS"):
        load_config(_write(tmp_path, "SEED=1\nKNN_NEIGHBOURS=3\n"))


def test_sources_and_synthetic_keys_conflict():
    with pytest.raises(ConfigError):
        load_config(None, {"SEED": 1, "SOURCES": "a.csv", "SYNTH_N": 10})


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/pipeline.env")


@pytest.mark.parametrize(
    "key, value",
    [
        ("SEED", "-1"),
        ("KNN_K", "zero"),
        ("TEST_FRACTION", "1.5"),
        ("STRATIFIED", "maybe"),
        ("AVERAGING", "harmonic"),
        ("REPORT_FORMATS", "text,pdf"),
        ("TREE_MIN_SAMPLES_SPLIT", "1"),
        ("SYNTH_A_PREVALENCE", "0.5,0.5"),
    ],
)
def test_invalid_values(key, value):
    values = {"SEED": 1, key: value}
    with pytest.raises(ConfigError):
        load_config(None, values)


def test_presets_and_options():
    cfg = load_config(None, {
        "SEED": 3,
        "FEATURE_COLUMNS": "integer_only",
        "SCALE_COLUMNS": "none",
        "FOREST_FEATURES_PER_SPLIT": "4",
        "TREE_MAX_DEPTH": "6",
        "SYNTH_A_PREVALENCE": "0.3",
        "STRATIFIED": "yes",
    })

    assert cfg.feature_columns == INTEGER_ONLY_FEATURE_COLUMNS
    assert cfg.scale_columns == ()
    assert cfg.forest.features_per_split == 4
    assert cfg.tree.max_depth == 6
    assert cfg.forest.max_depth == 6
    assert cfg.synth.a_prevalence == (0.3,) * 10
    assert cfg.split.stratified


def test_parse_sources():
    sources = parse_sources("a.csv, b.csv;aliases=map.csv;age_unit=years")
    assert sources == (
        SourceSpec("a.csv"),
        SourceSpec("b.csv", aliases="map.csv", age_unit="years"),
    )
    with pytest.raises(ConfigError):
        parse_sources("a.csv;unit=years")
    with pytest.raises(ConfigError):
        parse_sources("a.csv;age_unit=days")


def test_env_text_reloads_to_the_same_config(tmp_path):
    cfg = load_config(None, {"SEED": 11, "SYNTH_N": 500, "KNN_K": 3, "TREE_MAX_DEPTH": 8})
    reloaded = load_config(_write(tmp_path, cfg.to_env_text()))
    assert reloaded == cfg


def test_sources_config_round_trip(tmp_path):
    cfg = load_config(None, {"SEED": 2, "SOURCES": "x.csv;age_unit=years"})
    assert cfg.synth is None
    assert load_config(_write(tmp_path, cfg.to_env_text())) == cfg


def test_hash_ignores_output_settings():
    base = load_config(None, {"SEED": 4})
    moved = load_config(None, {"SEED": 4, "OUTPUT_DIR": "/elsewhere", "REPORT_FORMATS": "json", "FOREST_N_JOBS": 4})
    other = load_config(None, {"SEED": 4, "KNN_K": 7})

    assert config_hash(base) == config_hash(moved)
    assert config_hash(base) != config_hash(other)
    assert len(config_hash(base)) == 64
    assert run_dir_name(base) == f"run-{config_hash(base)[:12]}-seed4"
