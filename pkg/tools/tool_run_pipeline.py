# tools/tool_run_pipeline.py
"""
Tool : Pipeline complet
Entraîne les quatre classifieurs sur un jeu (CSV ou synthétique),
les évalue et retourne le classement.
"""

import logging

from asd_pipeline.config import load_config
from asd_pipeline.errors import PipelineError
from asd_pipeline.runner import run_pipeline, unwrap

logger = logging.getLogger(__name__)


def get_tool_definition():
    """
    Définition du tool pour OpenAI function calling
    """
    return {
        "type": "function",
        "name": "run_pipeline",
        "description": "Exécute le pipeline complet (étiquetage, prétraitement, entraînement de Naive Bayes, arbre de décision, forêt aléatoire et KNN, évaluation) et retourne les métriques et le modèle gagnant.",
        "parameters": {
            "type": "object",
            "properties": {
                "seed": {"type": "integer", "description": "Graine aléatoire (obligatoire)"},
                "config_path": {"type": "string", "description": "Fichier de configuration KEY=VALUE (optionnel)"},
                "synth_n": {"type": "integer", "description": "Nombre de fiches synthétiques (si pas de SOURCES)"},
                "output_dir": {"type": "string", "description": "Répertoire racine des runs"},
            },
            "required": ["seed"],
        },
    }


def execute(arguments):
    """
    Exécute le pipeline

    Args:
        arguments: Dictionnaire contenant:
            - seed: graine
            - config_path, synth_n, output_dir: optionnels

    Returns:
        dict: statut, répertoire du run, classement et métriques
    """
    seed = arguments.get("seed")
    if seed is None:
        return {"status": "error", "message": "seed manquante"}

    logger.info(f"🚀 run_pipeline (seed={seed})")
    try:
        cfg = load_config(
            arguments.get("config_path"),
            {"SEED": seed, "SYNTH_N": arguments.get("synth_n"), "OUTPUT_DIR": arguments.get("output_dir")},
        )
        result = run_pipeline(cfg)
    except PipelineError as e:
        cause = unwrap(e)
        return {"status": "error", "message": str(e), "error_type": type(cause).__name__}
    except Exception as e:
        logger.exception("Erreur run_pipeline")
        return {"status": "error", "message": f"Erreur interne: {e}"}

    report = result.report
    return {
        "status": "success",
        "run_dir": str(result.run_dir),
        "winner": report.winner,
        "ranking": list(report.ranking),
        "n_train": report.config["n_train"],
        "n_test": report.config["n_test"],
        "metrics": {
            entry.name: {
                "accuracy": entry.metrics.accuracy,
                "precision": entry.metrics.precision,
                "recall": entry.metrics.recall,
                "f1": entry.metrics.f1,
            }
            for entry in report.entries
        },
    }
