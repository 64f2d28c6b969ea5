# tools/tool_summarize_dataset.py
"""
Tool : Résumé d'un jeu de données
Charge un CSV de dépistage, le valide et retourne ses statistiques descriptives.
"""

import logging

from asd_pipeline.data_model import load_dataset_file, summarize, validate
from asd_pipeline.errors import LoadError, PipelineError

logger = logging.getLogger(__name__)


def get_tool_definition():
    return {
        "type": "function",
        "name": "summarize_dataset",
        "description": "Charge un CSV de dépistage TSA et retourne histogrammes, statistiques numériques, prévalence des réponses et rapport de validation.",
        "parameters": {
            "type": "object",
            "properties": {
                "path": {"type": "string", "description": "Chemin du fichier CSV"},
                "age_unit": {"type": "string", "description": "Unité de l'âge dans le fichier: 'months' (défaut) ou 'years'"},
                "aliases_path": {"type": "string", "description": "Table d'alias de colonnes (optionnelle)"},
            },
            "required": ["path"],
        },
    }


def execute(arguments):
    path = arguments.get("path", "")
    if not path:
        return {"status": "error", "message": "path manquant"}

    try:
        dataset, load_report = load_dataset_file(
            path, arguments.get("age_unit", "months"), arguments.get("aliases_path")
        )
        validation = validate(dataset)
        summary = summarize(dataset)
    except LoadError as e:
        result = {"status": "error", "message": str(e)}
        if e.report is not None:
            result["load_report"] = e.report.to_dict()
        return result
    except (PipelineError, OSError) as e:
        return {"status": "error", "message": str(e)}

    logger.info(f"📋 Résumé de {path}: {summary.n_rows} lignes")
    return {
        "status": "success",
        "summary": summary.to_dict(),
        "load_report": load_report.to_dict(),
        "validation": validation.to_dict(),
    }
