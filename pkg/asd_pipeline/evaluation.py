# asd_pipeline/evaluation.py
"""
Matrices de confusion, métriques (accuracy, precision, recall, F1) et
classement des modèles: accuracy d'abord, puis F1 pour départager.
"""

import logging
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn import metrics as sk_metrics

from .errors import DataError, DimensionError

logger = logging.getLogger(__name__)

AVERAGING_MODES = ("macro", "weighted", "micro")
ACCURACY_TIE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ConfusionMatrix:
    """Lignes = classe réelle, colonnes = classe prédite."""

    counts: np.ndarray
    classes: Tuple[int, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_dict(self):
        return {"classes": [int(c) for c in self.classes], "counts": self.counts.astype(int).tolist()}


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float
    averaging: str = "macro"
    per_class: Dict[int, Dict[str, float]] = field(default_factory=dict)
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("accuracy", "precision", "recall", "f1"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DataError(f"{name} hors [0,1]: {value}")

    def to_dict(self):
        return {
            "averaging": self.averaging,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_class": {str(c): dict(v) for c, v in self.per_class.items()},
            "warnings": list(self.warnings),
        }


def confusion_matrix(y_true, y_pred, classes: Optional[Sequence[int]] = None) -> ConfusionMatrix:
    y_true = np.asarray(y_true).astype(int)
    y_pred = np.asarray(y_pred).astype(int)
    if y_true.shape != y_pred.shape:
        raise DimensionError(f"Longueurs différentes: {len(y_true)} != {len(y_pred)}")
    if classes is None:
        classes = np.union1d(y_true, y_pred)
    classes = tuple(int(c) for c in classes)

    # sklearn ignorerait silencieusement les labels hors de `classes`
    unknown = sorted(set(np.union1d(y_true, y_pred).tolist()) - set(classes))
    if unknown:
        raise DataError(f"Labels inconnus {unknown} pour les classes {list(classes)}")
    if y_true.size == 0:
        return ConfusionMatrix(counts=np.zeros((len(classes), len(classes)), dtype=int), classes=classes)

    counts = sk_metrics.confusion_matrix(y_true, y_pred, labels=list(classes))
    return ConfusionMatrix(counts=counts.astype(int), classes=classes)


def _label_vectors(cm: ConfusionMatrix):
    """(y_true, y_pred) reconstruits à partir des cases de la matrice."""
    classes = np.asarray(cm.classes, dtype=int)
    k = len(classes)
    cells = cm.counts.ravel()
    return np.repeat(np.repeat(classes, k), cells), np.repeat(np.tile(classes, k), cells)


def _undefined(cm: ConfusionMatrix) -> List[str]:
    counts = cm.counts
    tp = np.diag(counts)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)
    warnings = []
    for i, c in enumerate(cm.classes):
        if predicted[i] == 0:
            warnings.append(f"precision undefined for class {c}")
        if support[i] == 0:
            warnings.append(f"recall undefined for class {c}")
        if tp[i] == 0:
            warnings.append(f"f1 undefined for class {c}")
    return warnings


def metrics(cm: ConfusionMatrix, averaging: str = "macro") -> MetricSet:
    """
    Precision/recall/F1 par classe (0 avec avertissement si dénominateur nul),
    puis moyenne macro (non pondérée), weighted (par support) ou micro
    (sommes des TP/FP/FN de toutes les classes).
    Le F1 macro est la moyenne des F1 par classe.
    """
    if averaging not in AVERAGING_MODES:
        raise DataError(f"Moyenne inconnue: {averaging}")
    total = cm.counts.sum()
    if total == 0:
        raise DataError("Matrice de confusion vide")

    accuracy = float(np.trace(cm.counts)) / float(total)
    y_true, y_pred = _label_vectors(cm)
    labels = list(cm.classes)

    precision, recall, f1, support = sk_metrics.precision_recall_fscore_support(
        y_true, y_pred, labels=labels, average=None, zero_division=0
    )
    per_class = {
        c: {"precision": float(precision[i]), "recall": float(recall[i]), "f1": float(f1[i]), "support": int(support[i])}
        for i, c in enumerate(cm.classes)
    }
    averaged = sk_metrics.precision_recall_fscore_support(
        y_true, y_pred, labels=labels, average=averaging, zero_division=0
    )

    warnings = _undefined(cm)
    for warning in warnings:
        logger.warning(f"⚠️ {warning}")

    return MetricSet(
        accuracy=accuracy,
        precision=min(1.0, float(averaged[0])),
        recall=min(1.0, float(averaged[1])),
        f1=min(1.0, float(averaged[2])),
        averaging=averaging,
        per_class=per_class,
        warnings=tuple(warnings),
    )


# =============================================================================
# CLASSEMENT
# =============================================================================

def _compare(a, b):
    (name_a, ma), (name_b, mb) = a, b
    if abs(ma.accuracy - mb.accuracy) > ACCURACY_TIE_TOLERANCE:
        return -1 if ma.accuracy > mb.accuracy else 1
    for attribute in ("f1", "precision"):
        va, vb = getattr(ma, attribute), getattr(mb, attribute)
        if va != vb:
            return -1 if va > vb else 1
    return (name_a > name_b) - (name_a < name_b)


@dataclass(frozen=True)
class Ranking:
    order: Tuple[str, ...]
    winner: str


def rank_models(entries: Sequence[Tuple[str, MetricSet]]) -> Ranking:
    """Accuracy décroissante; à 1e-6 près on départage par F1, precision puis nom."""
    entries = list(entries)
    if not entries:
        raise DataError("Aucun modèle à classer")
    ordered = sorted(entries, key=cmp_to_key(_compare))
    order = tuple(name for name, _ in ordered)
    return Ranking(order=order, winner=order[0])


# =============================================================================
# RAPPORT
# =============================================================================

@dataclass(frozen=True)
class ModelEvaluation:
    name: str
    model_type: str
    confusion: ConfusionMatrix
    metrics: MetricSet
    alternate: Optional[MetricSet] = None

    def to_dict(self):
        return {
            "name": self.name,
            "model_type": self.model_type,
            "confusion_matrix": self.confusion.to_dict(),
            "metrics": self.metrics.to_dict(),
            "alternate_metrics": self.alternate.to_dict() if self.alternate else None,
        }


@dataclass(frozen=True)
class EvaluationReport:
    entries: Tuple[ModelEvaluation, ...]
    ranking: Tuple[str, ...]
    winner: str
    config: Dict[str, object]

    def __post_init__(self):
        if self.winner not in {entry.name for entry in self.entries}:
            raise DataError(f"Gagnant inconnu: {self.winner}")

    def entry(self, name: str) -> ModelEvaluation:
        for entry in self.entries:
            if entry.name == name:
                return entry
        raise KeyError(name)

    def to_dict(self):
        return {
            "config": self.config,
            "models": [entry.to_dict() for entry in self.entries],
            "ranking": list(self.ranking),
            "winner": self.winner,
        }


def evaluate_model(name, model_type, y_true, y_pred, averaging="macro", classes=None) -> ModelEvaluation:
    cm = confusion_matrix(y_true, y_pred, classes)
    selected = metrics(cm, averaging)
    alternate_mode = "weighted" if averaging != "weighted" else "macro"
    return ModelEvaluation(
        name=name,
        model_type=model_type,
        confusion=cm,
        metrics=selected,
        alternate=metrics(cm, alternate_mode),
    )


def build_report(evaluations: Sequence[ModelEvaluation], config: Dict[str, object]) -> EvaluationReport:
    ranking = rank_models([(e.name, e.metrics) for e in evaluations])
    logger.info(f"🏆 Meilleur modèle: {ranking.winner}")
    return EvaluationReport(
        entries=tuple(evaluations),
        ranking=ranking.order,
        winner=ranking.winner,
        config=dict(config),
    )
