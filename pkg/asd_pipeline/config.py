# asd_pipeline/config.py
"""
Configuration du pipeline.

Fichier au format dotenv (KEY=VALUE), lu avec python-dotenv. Priorité:
valeurs par défaut < fichier < surcharges (options CLI).

Exemple:
    SEED=42
    SYNTH_N=3043
    FEATURE_COLUMNS=default
    TEST_FRACTION=0.05
    FOREST_N_TREES=100
"""

import hashlib
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from .classifiers import ForestParams, KNNParams, NBParams, TreeParams
from .errors import ConfigError
from .evaluation import AVERAGING_MODES
from .preprocessing import DEFAULT_FEATURE_COLUMNS, FEATURE_PRESETS, SplitSpec
from .synthetic import SynthSpec

load_dotenv()
logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = os.getenv("ASD_OUTPUT_DIR", "runs")
REPORT_FORMATS = ("text", "json", "csv", "docx")
DEFAULT_REPORT_FORMATS = ("text", "json", "csv")

KNOWN_KEYS = (
    "SEED",
    "SOURCES",
    "SYNTH_N",
    "SYNTH_SEED",
    "SYNTH_A_PREVALENCE",
    "SYNTH_AGE_MIN",
    "SYNTH_AGE_MAX",
    "SYNTH_CLASS_THRESHOLD",
    "FEATURE_COLUMNS",
    "SCALE_COLUMNS",
    "RULES",
    "TEST_FRACTION",
    "STRATIFIED",
    "NB_VAR_SMOOTHING",
    "TREE_MAX_DEPTH",
    "TREE_MIN_SAMPLES_SPLIT",
    "FOREST_N_TREES",
    "FOREST_FEATURES_PER_SPLIT",
    "FOREST_N_JOBS",
    "KNN_K",
    "AVERAGING",
    "OUTPUT_DIR",
    "REPORT_FORMATS",
    "PARALLEL_MODELS",
)

# Clés qui n'influencent pas les résultats (exclues du hash de configuration).
_NON_RESULT_KEYS = ("OUTPUT_DIR", "REPORT_FORMATS", "FOREST_N_JOBS", "PARALLEL_MODELS")


@dataclass(frozen=True)
class SourceSpec:
    path: str
    aliases: Optional[str] = None
    age_unit: str = "months"

    def to_text(self) -> str:
        parts = [self.path]
        if self.aliases:
            parts.append(f"aliases={self.aliases}")
        parts.append(f"age_unit={self.age_unit}")
        return ";".join(parts)


@dataclass(frozen=True)
class PipelineConfig:
    seed: int
    sources: Tuple[SourceSpec, ...] = ()
    synth: Optional[SynthSpec] = None
    feature_columns: Tuple[str, ...] = DEFAULT_FEATURE_COLUMNS
    scale_columns: Optional[Tuple[str, ...]] = None
    rules: str = "builtin"
    split: SplitSpec = field(default_factory=SplitSpec)
    nb: NBParams = field(default_factory=NBParams)
    tree: TreeParams = field(default_factory=TreeParams)
    forest: ForestParams = field(default_factory=ForestParams)
    knn: KNNParams = field(default_factory=KNNParams)
    averaging: str = "macro"
    output_dir: str = DEFAULT_OUTPUT_DIR
    report_formats: Tuple[str, ...] = DEFAULT_REPORT_FORMATS
    parallel_models: bool = False

    def __post_init__(self):
        if bool(self.sources) == (self.synth is not None):
            raise ConfigError("Exactement une origine de données: SOURCES ou la spécification synthétique")
        if self.averaging not in AVERAGING_MODES:
            raise ConfigError(f"AVERAGING inconnu: {self.averaging}")
        unknown = set(self.report_formats) - set(REPORT_FORMATS)
        if unknown:
            raise ConfigError(f"Formats de rapport inconnus: {sorted(unknown)}")

    def model_params(self) -> Dict[str, object]:
        return {
            "naive_bayes": self.nb,
            "decision_tree": self.tree,
            "random_forest": self.forest,
            "knn": self.knn,
        }

    def to_env(self) -> Dict[str, str]:
        env = {
            "SEED": str(self.seed),
            "FEATURE_COLUMNS": ",".join(self.feature_columns),
            "SCALE_COLUMNS": "all" if self.scale_columns is None else (",".join(self.scale_columns) or "none"),
            "RULES": self.rules,
            "TEST_FRACTION": repr(self.split.test_fraction),
            "STRATIFIED": _bool_text(self.split.stratified),
            "NB_VAR_SMOOTHING": repr(self.nb.epsilon_factor),
            "TREE_MAX_DEPTH": _optional_text(self.tree.max_depth),
            "TREE_MIN_SAMPLES_SPLIT": str(self.tree.min_samples_split),
            "FOREST_N_TREES": str(self.forest.n_trees),
            "FOREST_FEATURES_PER_SPLIT": _optional_text(self.forest.features_per_split, "sqrt"),
            "FOREST_N_JOBS": str(self.forest.n_jobs),
            "KNN_K": str(self.knn.k),
            "AVERAGING": self.averaging,
            "OUTPUT_DIR": self.output_dir,
            "REPORT_FORMATS": ",".join(self.report_formats),
            "PARALLEL_MODELS": _bool_text(self.parallel_models),
        }
        if self.sources:
            env["SOURCES"] = ",".join(source.to_text() for source in self.sources)
        else:
            env.update({
                "SYNTH_N": str(self.synth.n),
                "SYNTH_SEED": str(self.synth.seed),
                "SYNTH_A_PREVALENCE": ",".join(repr(p) for p in self.synth.a_prevalence),
                "SYNTH_AGE_MIN": str(self.synth.age_range[0]),
                "SYNTH_AGE_MAX": str(self.synth.age_range[1]),
                "SYNTH_CLASS_THRESHOLD": str(self.synth.class_rule_threshold),
            })
        return env

    def to_env_text(self) -> str:
        return "".join(f"{key}={value}\n" for key, value in sorted(self.to_env().items()))


def _bool_text(value: bool) -> str:
    return "true" if value else "false"


def _optional_text(value, none_text="none") -> str:
    return none_text if value is None else str(value)


def config_hash(cfg: PipelineConfig) -> str:
    """sha256 des clés qui déterminent les résultats."""
    env = cfg.to_env()
    canonical = "".join(f"{k}={v}\n" for k, v in sorted(env.items()) if k not in _NON_RESULT_KEYS)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def run_dir_name(cfg: PipelineConfig) -> str:
    return f"run-{config_hash(cfg)[:12]}-seed{cfg.seed}"


# =============================================================================
# PARSING
# =============================================================================

def _parse_int(key, value, minimum=None):
    try:
        number = int(str(value).strip())
    except ValueError:
        raise ConfigError(f"{key}: entier attendu, reçu '{value}'") from None
    if minimum is not None and number < minimum:
        raise ConfigError(f"{key}: valeur >= {minimum} attendue, reçu {number}")
    return number


def _parse_float(key, value):
    try:
        return float(str(value).strip())
    except ValueError:
        raise ConfigError(f"{key}: nombre attendu, reçu '{value}'") from None


def _parse_bool(key, value):
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: booléen attendu, reçu '{value}'")


def _parse_list(value) -> Tuple[str, ...]:
    return tuple(item.strip() for item in str(value).split(",") if item.strip())


def parse_sources(value) -> Tuple[SourceSpec, ...]:
    """`chemin[;aliases=FICHIER][;age_unit=months|years]`, séparés par des virgules."""
    sources = []
    for entry in _parse_list(value):
        path, *options = [part.strip() for part in entry.split(";")]
        settings = {"aliases": None, "age_unit": "months"}
        for option in options:
            name, _, setting = option.partition("=")
            if name not in settings or not setting:
                raise ConfigError(f"Option de source inconnue: '{option}'")
            settings[name] = setting
        if settings["age_unit"] not in ("months", "years"):
            raise ConfigError(f"age_unit invalide: {settings['age_unit']}")
        sources.append(SourceSpec(path=path, aliases=settings["aliases"], age_unit=settings["age_unit"]))
    return tuple(sources)


def _feature_columns(value) -> Tuple[str, ...]:
    text = str(value).strip()
    if text in FEATURE_PRESETS:
        return FEATURE_PRESETS[text]
    return _parse_list(text)


def _scale_columns(value) -> Optional[Tuple[str, ...]]:
    text = str(value).strip().lower()
    if text == "all":
        return None
    if text == "none":
        return ()
    return _parse_list(value)


def _optional_int(key, value, none_words=("none", "")):
    if str(value).strip().lower() in none_words:
        return None
    return _parse_int(key, value, minimum=0)


def load_config(path=None, overrides: Optional[Dict[str, object]] = None) -> PipelineConfig:
    """
    Construit la PipelineConfig.

    Args:
        path: fichier dotenv optionnel
        overrides: dict KEY -> valeur (options CLI); les None sont ignorés

    Returns:
        PipelineConfig validée
    """
    values: Dict[str, str] = {}
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"Fichier de configuration introuvable: {path}")
        values.update({k: v for k, v in dotenv_values(path).items() if v is not None})
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = str(value)

    unknown = sorted(set(values) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(f"Clés de configuration inconnues: {unknown}")
    if "SEED" not in values:
        raise ConfigError("SEED est obligatoire (aucune valeur par défaut)")

    seed = _parse_int("SEED", values["SEED"], minimum=0)
    synth_keys = sorted(k for k in values if k.startswith("SYNTH_"))

    sources: Tuple[SourceSpec, ...] = ()
    synth = None
    if "SOURCES" in values:
        if synth_keys:
            raise ConfigError(f"SOURCES incompatible avec {synth_keys}")
        sources = parse_sources(values["SOURCES"])
        if not sources:
            raise ConfigError("SOURCES est vide")
    else:
        defaults = SynthSpec()
        prevalence = defaults.a_prevalence
        if "SYNTH_A_PREVALENCE" in values:
            prevalence = tuple(_parse_float("SYNTH_A_PREVALENCE", p) for p in _parse_list(values["SYNTH_A_PREVALENCE"]))
            if len(prevalence) == 1:
                prevalence = prevalence * 10
        synth = SynthSpec(
            n=_parse_int("SYNTH_N", values.get("SYNTH_N", defaults.n), minimum=1),
            seed=_parse_int("SYNTH_SEED", values.get("SYNTH_SEED", seed), minimum=0),
            a_prevalence=prevalence,
            age_range=(
                _parse_int("SYNTH_AGE_MIN", values.get("SYNTH_AGE_MIN", defaults.age_range[0]), minimum=1),
                _parse_int("SYNTH_AGE_MAX", values.get("SYNTH_AGE_MAX", defaults.age_range[1]), minimum=1),
            ),
            class_rule_threshold=_parse_int(
                "SYNTH_CLASS_THRESHOLD", values.get("SYNTH_CLASS_THRESHOLD", defaults.class_rule_threshold)
            ),
        )

    features_per_split = values.get("FOREST_FEATURES_PER_SPLIT", "sqrt")
    try:
        cfg = PipelineConfig(
            seed=seed,
            sources=sources,
            synth=synth,
            feature_columns=_feature_columns(values.get("FEATURE_COLUMNS", "default")),
            scale_columns=_scale_columns(values.get("SCALE_COLUMNS", "all")),
            rules=values.get("RULES", "builtin").strip() or "builtin",
            split=SplitSpec(
                test_fraction=_parse_float("TEST_FRACTION", values.get("TEST_FRACTION", 0.05)),
                seed=seed,
                stratified=_parse_bool("STRATIFIED", values.get("STRATIFIED", "false")),
            ),
            nb=NBParams(epsilon_factor=_parse_float("NB_VAR_SMOOTHING", values.get("NB_VAR_SMOOTHING", 1e-9))),
            tree=TreeParams(
                min_samples_split=_parse_int("TREE_MIN_SAMPLES_SPLIT", values.get("TREE_MIN_SAMPLES_SPLIT", 2)),
                max_depth=_optional_int("TREE_MAX_DEPTH", values.get("TREE_MAX_DEPTH", "none")),
            ),
            forest=ForestParams(
                n_trees=_parse_int("FOREST_N_TREES", values.get("FOREST_N_TREES", 100)),
                features_per_split=_optional_int(
                    "FOREST_FEATURES_PER_SPLIT", features_per_split, none_words=("sqrt", "none", "")
                ),
                min_samples_split=_parse_int("TREE_MIN_SAMPLES_SPLIT", values.get("TREE_MIN_SAMPLES_SPLIT", 2)),
                max_depth=_optional_int("TREE_MAX_DEPTH", values.get("TREE_MAX_DEPTH", "none")),
                n_jobs=_parse_int("FOREST_N_JOBS", values.get("FOREST_N_JOBS", 1), minimum=1),
            ),
            knn=KNNParams(k=_parse_int("KNN_K", values.get("KNN_K", 5), minimum=1)),
            averaging=values.get("AVERAGING", "macro").strip(),
            output_dir=values.get("OUTPUT_DIR", DEFAULT_OUTPUT_DIR),
            report_formats=_parse_list(values.get("REPORT_FORMATS", ",".join(DEFAULT_REPORT_FORMATS))),
            parallel_models=_parse_bool("PARALLEL_MODELS", values.get("PARALLEL_MODELS", "false")),
        )
    except ConfigError:
        raise
    except Exception as e:
        raise ConfigError(f"Configuration invalide: {e}") from e

    logger.debug(f"⚙️ Configuration chargée (seed={cfg.seed}, hash={config_hash(cfg)[:12]})")
    return cfg
