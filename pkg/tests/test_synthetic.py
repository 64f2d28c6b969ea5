"""Générateur de fiches synthétiques."""

import pytest

from asd_pipeline.data_model import dataset_to_csv, summarize, validate
from asd_pipeline.errors import ConfigError
from asd_pipeline.rule_labeling import builtin_rules, label_dataset
from asd_pipeline.synthetic import SynthSpec, generate


def test_generation_is_deterministic():
    a = generate(SynthSpec(n=200, seed=9))
    b = generate(SynthSpec(n=200, seed=9))
    c = generate(SynthSpec(n=200, seed=10))

    assert dataset_to_csv(a) == dataset_to_csv(b)
    assert dataset_to_csv(a) != dataset_to_csv(c)


def test_rows_are_consistent():
    ds = generate(SynthSpec(n=500, seed=1))
    for row in ds.rows:
        assert row.qchat_score == row.a.total()
        assert row.class_asd == ("Yes" if row.qchat_score >= 4 else "No")
        assert 12 <= row.age_months <= 36
    assert [row.case_no for row in ds.rows] == list(range(1, 501))


def test_generated_data_validates_cleanly():
    report = validate(generate(SynthSpec(n=400, seed=2)))
    assert report.ok
    assert report.row_errors == []
    assert report.warnings == []


@pytest.mark.parametrize("prevalence", [0.5, 0.75])
def test_default_size_covers_every_label(prevalence):
    ds = generate(SynthSpec(n=3043, seed=42, a_prevalence=(prevalence,) * 10))
    labeled = label_dataset(ds, builtin_rules())

    assert len(labeled) == 3043
    assert set(labeled.labels()) == set(range(7))
    assert validate(ds).warnings == []


def test_observed_prevalences_match_bernoulli_parameters():
    spec = SynthSpec(n=3043, seed=42)
    stats = summarize(generate(spec))

    assert spec.a_prevalence == (0.75,) * 10
    for observed, expected in zip(stats.a_prevalence, spec.a_prevalence):
        assert abs(observed - expected) <= 0.03


def test_prevalence_extremes():
    ds = generate(SynthSpec(n=50, seed=0, a_prevalence=(1.0,) * 5 + (0.0,) * 5))
    assert all(row.a.values == (1,) * 5 + (0,) * 5 for row in ds.rows)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 0},
        {"a_prevalence": (0.5,) * 9},
        {"a_prevalence": (1.5,) + (0.5,) * 9},
        {"age_range": (30, 12)},
        {"vocabularies": {}},
    ],
)
def test_invalid_spec(kwargs):
    with pytest.raises(ConfigError):
        SynthSpec(**kwargs)
