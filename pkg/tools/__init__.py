# tools/__init__.py
"""
Orchestrateur des outils du pipeline TSA
Fournit les fonctions centrales:
- get_tools_definition(): Retourne toutes les définitions d'outils
- execute_tool(tool_name, arguments): Exécute un outil spécifique
"""

import importlib
import logging

logger = logging.getLogger(__name__)

# nom de l'outil -> module tools/<module>.py
TOOL_MODULES = {
    "run_pipeline": "tool_run_pipeline",
    "predict_education": "tool_predict_education",
    "rule_coverage": "tool_rule_coverage",
    "summarize_dataset": "tool_summarize_dataset",
}


def _load(module_name):
    # ⚡ Import lazy: numpy/pandas ne sont chargés qu'au premier appel
    return importlib.import_module(f"{__name__}.{module_name}")


def _to_function_format(tool):
    """Enveloppe une définition plate (name, description au niveau racine) au format OpenAI."""
    if "function" in tool:
        return tool
    return {
        "type": "function",
        "function": {
            "name": tool["name"],
            "description": tool["description"],
            "parameters": tool.get("parameters", {}),
        },
    }


def get_tools_definition():
    """
    Retourne la liste complète des définitions d'outils.

    Returns:
        list: Liste des définitions d'outils au format OpenAI function calling
    """
    return [_to_function_format(_load(module).get_tool_definition()) for module in TOOL_MODULES.values()]


def execute_tool(tool_name, arguments):
    """
    Exécute un outil spécifique avec les arguments fournis.

    Args:
        tool_name: Nom de l'outil à exécuter
        arguments: Dictionnaire des arguments pour l'outil

    Returns:
        dict: Résultat de l'exécution de l'outil
    """
    module = TOOL_MODULES.get(tool_name)
    if module is None:
        logger.warning(f"⚠️ Outil inconnu: {tool_name}")
        return {"status": "error", "message": f"Outil inconnu: {tool_name}"}

    logger.info(f"🔧 Exécution de l'outil: {tool_name}")
    try:
        return _load(module).execute(arguments or {})
    except Exception as e:
        logger.exception(f"Erreur lors de l'exécution de {tool_name}")
        return {"status": "error", "message": f"Erreur lors de l'exécution de {tool_name}: {e}"}
