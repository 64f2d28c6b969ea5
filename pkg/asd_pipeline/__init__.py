# asd_pipeline/__init__.py
"""
Pipeline de classification tabulaire pour le dépistage des TSA:
fusion des jeux de données, étiquetage "Preferred Education" par règles,
prétraitement, quatre classifieurs from scratch, évaluation et classement.
"""

from .config import PipelineConfig, load_config
from .errors import (
    ConfigError,
    DataError,
    ModelError,
    PipelineError,
    StageError,
)
from .runner import evaluate_run, run_pipeline, train

__version__ = "1.0.0"

__all__ = [
    "ConfigError",
    "DataError",
    "ModelError",
    "PipelineConfig",
    "PipelineError",
    "StageError",
    "evaluate_run",
    "load_config",
    "run_pipeline",
    "train",
]
