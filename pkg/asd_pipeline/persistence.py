# asd_pipeline/persistence.py
"""
Enveloppe TrainedModel (modèle + encodeurs + scaler + variables + labels)
et sérialisation JSON.

Champs du document (format_version 1):
    format_version, model_type, params, seed, feature_names,
    labels [{code, name}], encoders {columns, codes}, scaler {feature_names,
    mean, std}, payload (spécifique au modèle)

Les flottants sont écrits avec repr() (json standard): relecture exacte.
"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from .classifiers import (
    PARAM_TYPES,
    ForestModel,
    ForestParams,
    KNNModel,
    NBModel,
    TreeModel,
    TreeParams,
    predict,
)
from .data_model import Dataset, Record
from .errors import DimensionError, ModelFormatError
from .preprocessing import EncoderMap, FeatureMatrix, ScalerParams, apply_scaler, encode_record
from .rule_labeling import METHOD_NAMES

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainedModel:
    model_type: str
    model: object
    encoders: EncoderMap
    scaler: ScalerParams
    feature_names: Tuple[str, ...]
    labels: Tuple[int, ...]
    params: object
    seed: int = 0

    def predict_matrix(self, x: FeatureMatrix) -> np.ndarray:
        """x: matrice encodée NON standardisée, mêmes variables qu'à l'entraînement."""
        if tuple(x.feature_names) != tuple(self.feature_names):
            raise DimensionError(
                f"Variables incompatibles: {list(x.feature_names)} != {list(self.feature_names)}"
            )
        return predict(self.model, apply_scaler(x, self.scaler))

    def encode(self, ds: Dataset) -> FeatureMatrix:
        values = np.array([encode_record(row, self.encoders, self.feature_names) for row in ds.rows], dtype=float)
        return FeatureMatrix(values.reshape(len(ds.rows), len(self.feature_names)), self.feature_names)

    def predict_dataset(self, ds: Dataset) -> np.ndarray:
        return self.predict_matrix(self.encode(ds))

    def predict_record(self, record: Record) -> int:
        row = encode_record(record, self.encoders, self.feature_names)
        return int(self.predict_matrix(FeatureMatrix(row[None, :], self.feature_names))[0])


# =============================================================================
# PAYLOADS
# =============================================================================

def _tree_payload(tree: TreeModel) -> dict:
    return {
        "classes": tree.classes.tolist(),
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
        "n_features": tree.n_features,
        "params": asdict(tree.params),
    }


def _tree_from_payload(data: dict) -> TreeModel:
    return TreeModel(
        classes=np.array(data["classes"], dtype=int),
        feature=np.array(data["feature"], dtype=int),
        threshold=np.array(data["threshold"], dtype=float),
        left=np.array(data["left"], dtype=int),
        right=np.array(data["right"], dtype=int),
        value=np.array(data["value"], dtype=int),
        n_features=int(data["n_features"]),
        params=TreeParams(**data["params"]),
    )


def _payload(model) -> dict:
    if isinstance(model, NBModel):
        return {
            "classes": model.classes.tolist(),
            "priors": model.priors.tolist(),
            "means": model.means.tolist(),
            "variances": model.variances.tolist(),
            "epsilon": model.epsilon,
        }
    if isinstance(model, TreeModel):
        return _tree_payload(model)
    if isinstance(model, ForestModel):
        return {
            "classes": model.classes.tolist(),
            "n_features": model.n_features,
            "master_seed": model.master_seed,
            "params": asdict(model.params),
            "trees": [_tree_payload(tree) for tree in model.trees],
        }
    if isinstance(model, KNNModel):
        return {"x": model.stored_x.tolist(), "y": model.stored_y.tolist(), "k": model.k}
    raise ModelFormatError(f"Modèle non sérialisable: {type(model).__name__}")


def _model_from_payload(model_type: str, data: dict):
    if model_type == "naive_bayes":
        return NBModel(
            classes=np.array(data["classes"], dtype=int),
            priors=np.array(data["priors"], dtype=float),
            means=np.array(data["means"], dtype=float),
            variances=np.array(data["variances"], dtype=float),
            epsilon=float(data["epsilon"]),
        )
    if model_type == "decision_tree":
        return _tree_from_payload(data)
    if model_type == "random_forest":
        return ForestModel(
            trees=tuple(_tree_from_payload(tree) for tree in data["trees"]),
            classes=np.array(data["classes"], dtype=int),
            n_features=int(data["n_features"]),
            master_seed=int(data["master_seed"]),
            params=ForestParams(**data["params"]),
        )
    if model_type == "knn":
        x = np.array(data["x"], dtype=float)
        return KNNModel(stored_x=x.reshape(len(data["y"]), -1), stored_y=np.array(data["y"], dtype=int), k=int(data["k"]))
    raise ModelFormatError(f"Type de modèle inconnu: {model_type}")


# =============================================================================
# SAUVEGARDE / CHARGEMENT
# =============================================================================

def model_to_document(m: TrainedModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "model_type": m.model_type,
        "params": asdict(m.params),
        "seed": m.seed,
        "feature_names": list(m.feature_names),
        "labels": [{"code": int(code), "name": METHOD_NAMES[int(code)]} for code in m.labels],
        "encoders": m.encoders.to_dict(),
        "scaler": m.scaler.to_dict(),
        "payload": _payload(m.model),
    }


def model_to_json(m: TrainedModel) -> str:
    return json.dumps(model_to_document(m), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_model(m: TrainedModel, sink):
    """sink: chemin ou flux texte."""
    text = model_to_json(m)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        Path(sink).write_text(text, encoding="utf-8")
    logger.debug(f"💾 Modèle {m.model_type} sauvegardé")


def model_from_json(text: str) -> TrainedModel:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"Fichier modèle illisible: {e}") from e
    if not isinstance(document, dict):
        raise ModelFormatError("Document modèle invalide")

    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"format_version {version} non supporté (attendu {FORMAT_VERSION})")

    try:
        model_type = document["model_type"]
        if model_type not in PARAM_TYPES:
            raise ModelFormatError(f"Type de modèle inconnu: {model_type}")
        return TrainedModel(
            model_type=model_type,
            model=_model_from_payload(model_type, document["payload"]),
            encoders=EncoderMap.from_dict(document["encoders"]),
            scaler=ScalerParams.from_dict(document["scaler"]),
            feature_names=tuple(document["feature_names"]),
            labels=tuple(int(label["code"]) for label in document["labels"]),
            params=PARAM_TYPES[model_type](**document["params"]),
            seed=int(document["seed"]),
        )
    except (KeyError, TypeError, ValueError, DimensionError) as e:
        raise ModelFormatError(f"Fichier modèle malformé: {e}") from e


def load_model(source) -> TrainedModel:
    """source: chemin ou flux texte."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as e:
            raise ModelFormatError(f"Fichier modèle introuvable: {source} ({e})") from e
    return model_from_json(text)
