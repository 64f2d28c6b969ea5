# asd_pipeline/errors.py
"""
Hiérarchie d'exceptions du pipeline.

Le CLI traduit ces classes en codes de sortie:
- ConfigError -> 1 (usage)
- DataError / ModelError -> 2 (données)
- tout le reste -> 3 (interne)
"""


class PipelineError(Exception):
    """Racine de toutes les erreurs levées par asd_pipeline."""


class ConfigError(PipelineError):
    """Configuration invalide ou incomplète (clé inconnue, seed absente...)."""


class DataError(PipelineError):
    """Erreur liée aux données d'entrée."""


class LoadError(DataError):
    """Fichier CSV illisible, vide ou sans colonne obligatoire."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MergeError(DataError):
    """Les jeux de données à fusionner n'ont pas le même ensemble de colonnes."""

    def __init__(self, message, missing=(), extra=()):
        super().__init__(message)
        self.missing = tuple(missing)
        self.extra = tuple(extra)


class SchemaError(DataError):
    """Colonne absente du schéma ou de type inattendu."""


class UnseenCategoryError(DataError):
    """Valeur catégorielle jamais vue lors du fit des encodeurs."""

    def __init__(self, column, value):
        super().__init__(f"Valeur inconnue '{value}' pour la colonne {column}")
        self.column = column
        self.value = value


class DimensionError(DataError):
    """Nombre de colonnes incompatible avec le modèle ou le scaler."""


class ModelError(PipelineError):
    """Erreur lors de l'entraînement ou de la prédiction d'un modèle."""


class ModelFormatError(ModelError):
    """Fichier modèle tronqué, malformé ou de version incompatible."""


class StageError(PipelineError):
    """Échec d'une étape du pipeline; conserve le nom de l'étape et la cause."""

    def __init__(self, stage, cause):
        super().__init__(f"Étape '{stage}' en échec: {cause}")
        self.stage = stage
        self.cause = cause
