# tools/tool_predict_education.py
"""
Tool : Prédiction de la méthode d'enseignement
Applique un modèle persisté (models/<type>.json) à une ou plusieurs fiches.
"""

import logging

import pandas as pd

from asd_pipeline.data_model import CASE_NO
from asd_pipeline.errors import PipelineError
from asd_pipeline.persistence import load_model
from asd_pipeline.runner import predict_records

logger = logging.getLogger(__name__)


def get_tool_definition():
    return {
        "type": "function",
        "name": "predict_education",
        "description": "Prédit la méthode d'enseignement préférée (code 0-6 et nom) pour des fiches de dépistage, à partir d'un modèle entraîné.",
        "parameters": {
            "type": "object",
            "properties": {
                "model_path": {"type": "string", "description": "Chemin du fichier modèle JSON"},
                "records": {
                    "type": "array",
                    "description": "Fiches: objets avec les colonnes canoniques (A1..A10, Age_Mons, Qchat-10-Score, Sex, ...)",
                    "items": {"type": "object"},
                },
            },
            "required": ["model_path", "records"],
        },
    }


def _records_to_csv(records):
    frame = pd.DataFrame(list(records))
    if CASE_NO not in frame.columns:
        frame.insert(0, CASE_NO, range(1, len(frame) + 1))
    return frame.to_csv(index=False, lineterminator="\n")


def execute(arguments):
    model_path = arguments.get("model_path", "")
    records = arguments.get("records") or []

    if not model_path:
        return {"status": "error", "message": "model_path manquant"}
    if not records:
        return {"status": "error", "message": "Aucune fiche fournie"}

    logger.info(f"🔮 Prédiction de {len(records)} fiche(s) avec {model_path}")
    try:
        model = load_model(model_path)
        predictions = predict_records(model, _records_to_csv(records))
    except PipelineError as e:
        return {"status": "error", "message": str(e)}
    except Exception as e:
        logger.exception("Erreur predict_education")
        return {"status": "error", "message": f"Erreur interne: {e}"}

    failed = sum(1 for p in predictions if not p.ok)
    return {
        "status": "success" if not failed else "partial",
        "model_type": model.model_type,
        "predictions": [p.to_dict() for p in predictions],
        "failed": failed,
    }
