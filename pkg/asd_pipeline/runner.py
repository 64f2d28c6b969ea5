# asd_pipeline/runner.py
"""
Orchestration du pipeline complet:

    load/merge (ou generate) -> validate -> label -> encode -> split
    -> scale (fit sur l'entraînement) -> fit des 4 modèles -> evaluate
    -> rank -> écriture des rapports et des modèles

Chaque étape qui échoue lève StageError(étape, cause). Les sorties sont
écrites dans un répertoire temporaire, renommé en run-<hash>-seed<seed>
uniquement en cas de succès.

Contenu d'un répertoire de run:
    config.env          configuration résolue (rechargeable)
    manifest.json       hash, seed, tailles train/test, provenance
    test_set.csv        lignes de test (étiquetées, non encodées)
    models/<type>.json  modèles persistés
    report.*, *.csv     rapports
"""

import json
import logging
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .classifiers import MODEL_DISPLAY_NAMES, MODEL_TYPES, fit_model
from .config import PipelineConfig, config_hash, load_config, run_dir_name
from .data_model import Dataset, dataset_to_csv, load_dataset, load_dataset_file, merge_datasets, validate
from .errors import DataError, LoadError, StageError, UnseenCategoryError
from .evaluation import EvaluationReport, build_report, evaluate_model
from .persistence import TrainedModel, load_model, save_model
from .preprocessing import apply_encoders, apply_scaler, fit_label_encoders, fit_scaler, split_indices
from .reports import write_reports
from .rule_labeling import METHOD_NAMES, label_dataset, resolve_rules
from .synthetic import generate

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.env"
MANIFEST_FILE = "manifest.json"
TEST_SET_FILE = "test_set.csv"
MODELS_DIR = "models"


@dataclass(frozen=True)
class TrainingOutcome:
    config: PipelineConfig
    models: Dict[str, TrainedModel]
    test_set: Dataset
    manifest: Dict[str, object]


@dataclass(frozen=True)
class PipelineResult:
    report: EvaluationReport
    run_dir: Path
    models: Dict[str, TrainedModel]
    test_set: Dataset


@contextmanager
def stage(name: str):
    """Convertit toute exception de l'étape en StageError(name, cause)."""
    logger.info(f"▶️ Étape: {name}")
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        logger.error(f"❌ Étape {name} en échec: {e}")
        raise StageError(name, e) from e


# =============================================================================
# ÉTAPES
# =============================================================================

def load_input(cfg: PipelineConfig) -> Dataset:
    if cfg.synth is not None:
        return generate(cfg.synth)
    parts = []
    for source in cfg.sources:
        dataset, report = load_dataset_file(source.path, source.age_unit, source.aliases)
        if report.rows_rejected:
            logger.warning(f"⚠️ {source.path}: {report.rows_rejected} ligne(s) rejetée(s)")
        parts.append(dataset)
    return merge_datasets(parts)


def _drop_invalid(ds: Dataset) -> Dataset:
    report = validate(ds)
    rejected = {error.row for error in report.row_errors}
    if not rejected:
        return ds
    logger.warning(f"⚠️ {len(rejected)} ligne(s) écartée(s) par la validation")
    kept = [i for i in range(len(ds)) if i not in rejected]
    if len(kept) < 2:
        raise DataError("Moins de 2 lignes valides après validation")
    return ds.subset(kept)


def train_models(cfg: PipelineConfig) -> TrainingOutcome:
    """Toutes les étapes jusqu'aux modèles entraînés (rien n'est écrit)."""
    with stage("load"):
        dataset = load_input(cfg)
    with stage("validate"):
        dataset = _drop_invalid(dataset)
    with stage("label"):
        dataset = label_dataset(dataset, resolve_rules(cfg.rules))
        y = np.array(dataset.labels(), dtype=int)
    with stage("encode"):
        encoders = fit_label_encoders(dataset)
        features = apply_encoders(dataset, encoders, cfg.feature_columns)
    with stage("split"):
        train_index, test_index = split_indices(features.n_rows, cfg.split, y)
        train_x, y_train = features.take(train_index), y[train_index]
    with stage("scale"):
        scaler = fit_scaler(train_x, cfg.scale_columns)
        scaled_train = apply_scaler(train_x, scaler)
    with stage("fit"):
        models = _fit_all(cfg, scaled_train, y_train, encoders, scaler, tuple(np.unique(y).tolist()))

    manifest = {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "n_train": int(len(train_index)),
        "n_test": int(len(test_index)),
        "provenance": list(dataset.provenance),
    }
    return TrainingOutcome(config=cfg, models=models, test_set=dataset.subset(test_index), manifest=manifest)


def _fit_all(cfg, scaled_train, y_train, encoders, scaler, labels) -> Dict[str, TrainedModel]:
    params = cfg.model_params()

    def _fit(model_type):
        logger.info(f"🤖 Entraînement: {MODEL_DISPLAY_NAMES[model_type]}")
        model = fit_model(model_type, scaled_train, y_train, params[model_type], seed=cfg.seed)
        return TrainedModel(
            model_type=model_type,
            model=model,
            encoders=encoders,
            scaler=scaler,
            feature_names=scaled_train.feature_names,
            labels=labels,
            params=params[model_type],
            seed=cfg.seed,
        )

    if cfg.parallel_models:
        with ThreadPoolExecutor(max_workers=len(MODEL_TYPES)) as pool:
            fitted = list(pool.map(_fit, MODEL_TYPES))
    else:
        fitted = [_fit(model_type) for model_type in MODEL_TYPES]
    return dict(zip(MODEL_TYPES, fitted))


def evaluate_models(
    models: Dict[str, TrainedModel],
    test_set: Dataset,
    manifest: Dict[str, object],
    cfg: PipelineConfig,
) -> EvaluationReport:
    with stage("evaluate"):
        y_test = np.array(test_set.labels(), dtype=int)
        evaluations = []
        for model_type in MODEL_TYPES:
            y_pred = models[model_type].predict_dataset(test_set)
            evaluations.append(
                evaluate_model(MODEL_DISPLAY_NAMES[model_type], model_type, y_test, y_pred, cfg.averaging)
            )
    with stage("rank"):
        echo = {
            "averaging": cfg.averaging,
            "config_hash": manifest["config_hash"],
            "feature_columns": list(cfg.feature_columns),
            "n_test": manifest["n_test"],
            "n_train": manifest["n_train"],
            "provenance": list(manifest["provenance"]),
            "seed": manifest["seed"],
        }
        return build_report(evaluations, echo)


# =============================================================================
# RÉPERTOIRE DE RUN
# =============================================================================

@contextmanager
def _staging(final_dir: Path):
    """Répertoire temporaire frère de final_dir, renommé en final_dir si tout réussit."""
    final_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{final_dir.name}.partial-", dir=final_dir.parent))
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if final_dir.exists():
        shutil.rmtree(final_dir)
    staging.rename(final_dir)


def _write_training(outcome: TrainingOutcome, directory: Path):
    with stage("write"):
        (directory / CONFIG_FILE).write_text(outcome.config.to_env_text(), encoding="utf-8")
        (directory / MANIFEST_FILE).write_text(
            json.dumps(outcome.manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        (directory / TEST_SET_FILE).write_text(dataset_to_csv(outcome.test_set), encoding="utf-8")
        models_dir = directory / MODELS_DIR
        models_dir.mkdir(exist_ok=True)
        for model_type, model in outcome.models.items():
            save_model(model, models_dir / f"{model_type}.json")


def run_directory(cfg: PipelineConfig) -> Path:
    return Path(cfg.output_dir) / run_dir_name(cfg)


def train(cfg: PipelineConfig) -> Path:
    """Entraîne et persiste modèles, config et jeu de test; retourne le répertoire de run."""
    final_dir = run_directory(cfg)
    outcome = train_models(cfg)
    with _staging(final_dir) as staging:
        _write_training(outcome, staging)
    logger.info(f"✅ Modèles écrits dans {final_dir}")
    return final_dir


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    final_dir = run_directory(cfg)
    outcome = train_models(cfg)
    report = evaluate_models(outcome.models, outcome.test_set, outcome.manifest, cfg)
    with _staging(final_dir) as staging:
        _write_training(outcome, staging)
        with stage("write"):
            write_reports(report, staging, cfg.report_formats)
    logger.info(f"✅ Run terminé: {final_dir} (gagnant: {report.winner})")
    return PipelineResult(report=report, run_dir=final_dir, models=outcome.models, test_set=outcome.test_set)


def load_run(run_dir) -> TrainingOutcome:
    """Relit un répertoire produit par train()/run_pipeline()."""
    run_dir = Path(run_dir)
    with stage("load"):
        if not (run_dir / CONFIG_FILE).exists():
            raise DataError(f"{run_dir} n'est pas un répertoire de run ({CONFIG_FILE} absent)")
        cfg = load_config(run_dir / CONFIG_FILE)
        manifest = json.loads((run_dir / MANIFEST_FILE).read_text(encoding="utf-8"))
        with open(run_dir / TEST_SET_FILE, "rb") as handle:
            test_set, report = load_dataset(handle, source_name=TEST_SET_FILE)
        if report.rows_rejected:
            raise DataError(f"{TEST_SET_FILE}: {report.rows_rejected} ligne(s) invalide(s)")
        models = {t: load_model(run_dir / MODELS_DIR / f"{t}.json") for t in MODEL_TYPES}
    return TrainingOutcome(config=cfg, models=models, test_set=test_set, manifest=manifest)


def evaluate_run(run_dir, formats: Optional[Sequence[str]] = None) -> EvaluationReport:
    """Évalue les modèles persistés d'un run et (ré)écrit ses rapports."""
    run_dir = Path(run_dir)
    outcome = load_run(run_dir)
    cfg = outcome.config
    report = evaluate_models(outcome.models, outcome.test_set, outcome.manifest, cfg)
    formats = tuple(formats) if formats else cfg.report_formats
    with stage("write"):
        staging = Path(tempfile.mkdtemp(prefix=".reports.partial-", dir=run_dir))
        try:
            written = write_reports(report, staging, formats)
            for path in written:
                path.replace(run_dir / path.name)
        finally:
            shutil.rmtree(staging, ignore_errors=True)
    return report


def unwrap(error: BaseException) -> BaseException:
    """Cause d'origine d'une StageError (pour choisir le code de sortie)."""
    while isinstance(error, StageError):
        error = error.cause
    return error



# =============================================================================
# PRÉDICTION
# =============================================================================

@dataclass(frozen=True)
class Prediction:
    row: Optional[int]
    code: Optional[int] = None
    name: Optional[str] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self):
        if self.ok:
            return {"row": self.row, "code": self.code, "name": self.name}
        return {"row": self.row, "error": self.error}


def predict_records(model: TrainedModel, source, source_name: str = "<records>") -> List[Prediction]:
    """
    Applique un modèle persisté à chaque fiche d'un CSV.

    Une fiche invalide ou portant une catégorie inconnue produit une
    Prediction en erreur; les autres fiches sont traitées normalement.
    """
    try:
        dataset, report = load_dataset(source, source_name=source_name)
    except LoadError as e:
        if e.report is None:
            raise
        dataset, report = None, e.report

    errors_by_row: Dict[Optional[int], List[str]] = {}
    for error in report.row_errors:
        errors_by_row.setdefault(error.row, []).append(f"{error.column}: {error.message}")

    results = [Prediction(row=None, error=message) for message in errors_by_row.pop(None, [])]
    rows = iter(dataset.rows if dataset is not None else ())
    for index in range(report.rows_accepted + len(errors_by_row)):
        if index in errors_by_row:
            results.append(Prediction(row=index, error="; ".join(errors_by_row[index])))
            continue
        record = next(rows)
        try:
            code = model.predict_record(record)
        except UnseenCategoryError as e:
            results.append(Prediction(row=index, error=str(e)))
            continue
        results.append(Prediction(row=index, code=code, name=METHOD_NAMES[code]))

    failed = sum(1 for p in results if not p.ok)
    if failed:
        logger.warning(f"⚠️ {failed} fiche(s) non prédite(s) sur {len(results)}")
    return results
