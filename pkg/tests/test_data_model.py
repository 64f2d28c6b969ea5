"""Chargement CSV, validation, fusion et résumé des fiches de dépistage."""

from collections import Counter
from dataclasses import replace

import pytest

from asd_pipeline.data_model import (
    AGE,
    LABEL_COLUMN,
    AVector,
    DatasetSchema,
    dataset_to_csv,
    load_dataset,
    merge_datasets,
    summarize,
    validate,
)
from asd_pipeline.errors import LoadError, MergeError, SchemaError
from asd_pipeline.rule_labeling import builtin_rules, label_dataset


def test_load_canonical_csv(sample_csv):
    ds, report = load_dataset(sample_csv)

    assert len(ds) == 4
    assert report.rows_accepted == 4
    assert report.rows_rejected == 0
    first = ds.rows[0]
    assert first.a.values == (1, 1, 0, 0, 0, 1, 1, 1, 1, 1)
    assert first.qchat_score == 7
    assert first.jaundice == "yes"
    assert first.class_asd == "Yes"
    assert ds.schema.age_unit == "months"
    assert not ds.schema.is_labeled


def test_load_accepts_bytes_with_bom(sample_csv):
    ds, _ = load_dataset(("\ufeff" + sample_csv).encode("utf-8"))
    assert len(ds) == 4


def test_rejected_rows_are_reported(make_row, to_csv):
    rows = [
        make_row(1),
        make_row(2, a=(2, 0, 0, 0, 0, 0, 0, 0, 0, 0)),
        make_row(3, sex=""),
        make_row(4, jaundice="maybe"),
        make_row(5, age="abc"),
    ]
    ds, report = load_dataset(to_csv(rows))

    assert len(ds) == 1
    assert report.rows_accepted == 1
    assert report.rows_rejected == 4
    messages = {(e.row, e.column, e.message) for e in report.row_errors}
    assert (1, "A1", "not binary") in messages
    assert (2, "Sex", "missing value") in messages
    assert (3, "Jaundice", "expected yes/no") in messages
    assert (4, AGE, "not an integer") in messages


def test_ages_in_years_are_converted_to_months(make_row, to_csv):
    csv = to_csv([make_row(1, age=3), make_row(2, age=11)])
    ds, _ = load_dataset(csv, DatasetSchema.canonical("years"))
    assert [row.age_months for row in ds.rows] == [36, 132]
    assert ds.schema.age_unit == "months"


def test_column_aliases_rename_source_columns(make_row, to_csv):
    row = make_row(1)
    row["Age"] = row.pop(AGE)
    row["Class/ASD Traits "] = row.pop("Class_ASD_Traits")
    aliases = {"Age": AGE, "Class/ASD Traits": "Class_ASD_Traits"}

    ds, report = load_dataset(to_csv([row]), column_aliases=aliases)

    assert report.rows_accepted == 1
    assert ds.rows[0].age_months == 24


def test_missing_mandatory_column_raises(make_row, to_csv):
    row = make_row(1)
    del row["Ethnicity"]
    with pytest.raises(LoadError, match="Ethnicity"):
        load_dataset(to_csv([row]))


def test_empty_input_raises():
    with pytest.raises(LoadError):
        load_dataset("")


def test_no_valid_rows_raises_with_report(make_row, to_csv):
    with pytest.raises(LoadError) as info:
        load_dataset(to_csv([make_row(1, sex="")]))
    assert info.value.report.rows_rejected == 1


def test_merge_renumbers_case_numbers(sample_csv):
    first, _ = load_dataset(sample_csv, source_name="a.csv")
    second, _ = load_dataset(sample_csv, source_name="b.csv")

    merged = merge_datasets([first, second])

    assert len(merged) == 8
    assert [row.case_no for row in merged.rows] == list(range(1, 9))
    assert merged.provenance == ("a.csv", "b.csv")


def test_merge_order_keeps_the_same_rows(sample_csv, make_row, to_csv):
    first, _ = load_dataset(sample_csv)
    second, _ = load_dataset(to_csv([make_row(1, a=(0, 1) * 5, age=30), make_row(2, age=18, sex="f")]))

    def _multiset(ds):
        return Counter(replace(row, case_no=0) for row in ds.rows)

    forward = merge_datasets([first, second])
    backward = merge_datasets([second, first])
    assert _multiset(forward) == _multiset(backward)
    assert [row.case_no for row in backward.rows] == list(range(1, 7))


def test_merge_rejects_different_column_sets(sample_csv):
    plain, _ = load_dataset(sample_csv)
    labeled = label_dataset(plain, builtin_rules())

    with pytest.raises(MergeError) as info:
        merge_datasets([plain, labeled])
    assert info.value.extra == (LABEL_COLUMN,)
    assert info.value.missing == ()


def test_merge_of_nothing_raises():
    with pytest.raises(MergeError):
        merge_datasets([])


def test_validate_flags_score_mismatch(make_row, to_csv):
    ds, _ = load_dataset(to_csv([make_row(1, a=(1,) * 10, score=3)]))
    report = validate(ds)

    assert report.ok
    assert report.rows_accepted == 1
    assert report.warnings == ["row 0: score/answer mismatch (qchat=3, sum=10)"]


def test_validate_clean_dataset(sample_csv):
    ds, _ = load_dataset(sample_csv)
    report = validate(ds)
    assert report.ok
    assert report.warnings == []


def test_labeled_csv_round_trip(sample_csv):
    ds, _ = load_dataset(sample_csv)
    labeled = label_dataset(ds, builtin_rules())

    reloaded, report = load_dataset(dataset_to_csv(labeled))

    assert report.rows_rejected == 0
    assert reloaded.schema.is_labeled
    assert reloaded.rows == labeled.rows


def test_summarize(sample_csv):
    ds, _ = load_dataset(sample_csv)
    stats = summarize(ds)

    assert stats.n_rows == 4
    assert stats.histograms["Sex"] == {"f": 2, "m": 2}
    assert stats.numeric[AGE]["min"] == 12.0
    assert stats.numeric[AGE]["max"] == 36.0
    assert stats.class_balance == pytest.approx(0.5)
    assert stats.a_prevalence[0] == pytest.approx(0.5)
    assert stats.label_counts is None


def test_avector_bits():
    a = AVector.from_bits(0b1000000001)
    assert a.item(1) == 1
    assert a.item(10) == 1
    assert a.total() == 2
    assert a.to_bits() == 0b1000000001


def test_avector_rejects_bad_values():
    with pytest.raises(SchemaError):
        AVector((0, 1, 2, 0, 0, 0, 0, 0, 0, 0))
    with pytest.raises(SchemaError):
        AVector((0, 1))


def test_schema_rejects_unknown_kind():
    with pytest.raises(SchemaError):
        DatasetSchema(columns=(("x", "float"),))
