"""Fixtures partagées: fiches CSV, jeux synthétiques et run seed 42."""

import pandas as pd
import pytest

from asd_pipeline.config import load_config
from asd_pipeline.data_model import A_COLUMNS, CANONICAL_COLUMNS
from asd_pipeline.rule_labeling import builtin_rules, label_dataset
from asd_pipeline.runner import run_pipeline
from asd_pipeline.synthetic import SynthSpec, generate

CANONICAL_NAMES = [name for name, _ in CANONICAL_COLUMNS]


@pytest.fixture
def make_row():
    """Fabrique une fiche canonique (dict colonne -> valeur)."""

    def _make(case_no=1, a=(0,) * 10, age=24, sex="m", ethnicity="asian", jaundice="no",
              family="no", who="family member", class_asd=None, score=None, **extra):
        row = {"Case_No": case_no}
        row.update(dict(zip(A_COLUMNS, a)))
        total = sum(a) if score is None else score
        row.update({
            "Age_Mons": age,
            "Qchat-10-Score": total,
            "Sex": sex,
            "Ethnicity": ethnicity,
            "Jaundice": jaundice,
            "Family_mem_with_ASD": family,
            "Who_completed_the_test": who,
            "Class_ASD_Traits": class_asd or ("Yes" if total > 3 else "No"),
        })
        row.update(extra)
        return row

    return _make


@pytest.fixture
def to_csv():
    def _to_csv(rows, columns=None):
        frame = pd.DataFrame(rows)
        if columns is None:
            columns = [c for c in CANONICAL_NAMES if c in frame.columns]
            columns += [c for c in frame.columns if c not in columns]
        return frame[columns].to_csv(index=False, lineterminator="\n")

    return _to_csv


@pytest.fixture
def sample_csv(make_row, to_csv):
    rows = [
        make_row(1, a=(1, 1, 0, 0, 0, 1, 1, 1, 1, 1), age=28, sex="f", ethnicity="middle eastern", jaundice="yes"),
        make_row(2, a=(1, 0, 0, 0, 1, 1, 0, 0, 1, 0), age=36, ethnicity="White European"),
        make_row(3, a=(0,) * 10, age=12, sex="f"),
        make_row(4, a=(0, 0, 0, 0, 0, 0, 1, 0, 0, 0), age=20, family="yes", who="Health Care Professional"),
    ]
    return to_csv(rows)


@pytest.fixture(scope="session")
def small_dataset():
    return label_dataset(generate(SynthSpec(n=300, seed=7, a_prevalence=(0.5,) * 10)), builtin_rules())


def small_config(tmp_path, **overrides):
    values = {
        "SEED": 7,
        "SYNTH_N": 300,
        "SYNTH_A_PREVALENCE": "0.5",
        "FOREST_N_TREES": 10,
        "TEST_FRACTION": 0.2,
        "OUTPUT_DIR": str(tmp_path / "runs"),
    }
    values.update(overrides)
    return load_config(None, values)


@pytest.fixture
def small_config_factory(tmp_path):
    return lambda **overrides: small_config(tmp_path, **overrides)


@pytest.fixture(scope="session")
def seed42_run(tmp_path_factory):
    """Run complet par défaut: n=3043, seed=42."""
    output = tmp_path_factory.mktemp("seed42")
    return run_pipeline(load_config(None, {"SEED": 42, "OUTPUT_DIR": str(output)}))
