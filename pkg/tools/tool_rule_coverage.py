# tools/tool_rule_coverage.py
"""
Tool : Couverture des règles
Compte, pour chaque méthode, les combinaisons de réponses A1..A10 qui y mènent.
"""

import logging

from asd_pipeline.errors import PipelineError
from asd_pipeline.rule_labeling import resolve_rules, rule_coverage

logger = logging.getLogger(__name__)


def get_tool_definition():
    return {
        "type": "function",
        "name": "rule_coverage",
        "description": "Énumère les combinaisons de réponses A1..A10 et compte le label produit par le jeu de règles (1024 combinaisons par défaut).",
        "parameters": {
            "type": "object",
            "properties": {
                "rules": {"type": "string", "description": "'builtin' (défaut) ou chemin d'un fichier de règles"},
                "free_items": {
                    "type": "array",
                    "items": {"type": "integer"},
                    "description": "Indices A libres (1-10); les autres sont fixés à 0",
                },
            },
            "required": [],
        },
    }


def execute(arguments):
    free_items = arguments.get("free_items")
    try:
        if free_items is not None:
            free_items = [int(i) for i in free_items]
            if any(not 1 <= i <= 10 for i in free_items):
                return {"status": "error", "message": f"Indices hors [1,10]: {free_items}"}
        table = rule_coverage(resolve_rules(arguments.get("rules", "builtin")), free_items)
    except (PipelineError, ValueError) as e:
        return {"status": "error", "message": str(e)}

    logger.info(f"📊 Couverture calculée sur {table.total} combinaisons")
    return {"status": "success", **table.to_dict()}
