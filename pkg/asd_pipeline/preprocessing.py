# asd_pipeline/preprocessing.py
"""
Prétraitement: label encoding des colonnes catégorielles, standardisation
z-score (fit sur l'entraînement uniquement) et découpage train/test seedé.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import LabelEncoder, StandardScaler

from .data_model import (
    A_COLUMNS,
    AGE,
    CATEGORICAL_COLUMNS,
    CLASS_ASD,
    ETHNICITY,
    FAMILY_ASD,
    JAUNDICE,
    QCHAT,
    SEX,
    Dataset,
    Record,
)
from .errors import ConfigError, DimensionError, SchemaError, UnseenCategoryError

logger = logging.getLogger(__name__)

# Les 17 variables explicatives x retenues pour l'entraînement.
DEFAULT_FEATURE_COLUMNS = A_COLUMNS + (QCHAT, AGE, SEX, ETHNICITY, JAUNDICE, FAMILY_ASD, CLASS_ASD)
# Première expérience, avant label encoding: uniquement les colonnes entières.
INTEGER_ONLY_FEATURE_COLUMNS = A_COLUMNS + (QCHAT,)

FEATURE_PRESETS = {
    "default": DEFAULT_FEATURE_COLUMNS,
    "integer_only": INTEGER_ONLY_FEATURE_COLUMNS,
}


@dataclass(frozen=True)
class EncoderMap:
    columns: Tuple[str, ...]
    codes: Dict[str, Dict[str, int]]

    def encode(self, column: str, value) -> int:
        try:
            return self.codes[column][str(value)]
        except KeyError:
            if column not in self.codes:
                raise SchemaError(f"Aucun encodeur pour la colonne {column}") from None
            raise UnseenCategoryError(column, value) from None

    def to_dict(self):
        return {"columns": list(self.columns), "codes": {c: dict(self.codes[c]) for c in self.columns}}

    @classmethod
    def from_dict(cls, data):
        columns = tuple(data["columns"])
        return cls(columns=columns, codes={c: {str(k): int(v) for k, v in data["codes"][c].items()} for c in columns})


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    feature_names: Tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DimensionError(f"Matrice 2D attendue, reçu {values.ndim}D")
        if values.shape[1] != len(self.feature_names):
            raise DimensionError(
                f"{values.shape[1]} colonnes pour {len(self.feature_names)} noms de variables"
            )
        if not np.all(np.isfinite(values)):
            raise DimensionError("La matrice contient des NaN/Inf")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def take(self, indices) -> "FeatureMatrix":
        return FeatureMatrix(self.values[np.asarray(indices, dtype=int)], self.feature_names)

    def select(self, names) -> "FeatureMatrix":
        positions = [self.feature_names.index(name) for name in names]
        return FeatureMatrix(self.values[:, positions], tuple(names))


@dataclass(frozen=True)
class ScalerParams:
    feature_names: Tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "std", np.asarray(self.std, dtype=float))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if self.mean.shape != (len(self.feature_names),) or self.std.shape != self.mean.shape:
            raise DimensionError("Un couple (moyenne, écart-type) par variable attendu")
        if np.any(self.std < 0):
            raise DimensionError("Écart-type négatif")

    @classmethod
    def identity(cls, feature_names):
        d = len(feature_names)
        return cls(tuple(feature_names), np.zeros(d), np.ones(d))

    def standard_scaler(self) -> StandardScaler:
        """StandardScaler déjà ajusté sur ces paramètres (écart-type nul remplacé par 1)."""
        scaler = StandardScaler()
        scaler.mean_ = self.mean.copy()
        scaler.var_ = self.std ** 2
        scaler.scale_ = np.where(self.std == 0, 1.0, self.std)
        scaler.n_features_in_ = len(self.feature_names)
        return scaler

    def to_dict(self):
        return {"feature_names": list(self.feature_names), "mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["feature_names"]), data["mean"], data["std"])


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.05
    seed: int = 0
    stratified: bool = False

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction doit être dans ]0,1[, reçu {self.test_fraction}")


# =============================================================================
# LABEL ENCODING
# =============================================================================

def fit_label_encoders(ds: Dataset, columns: Sequence[str] = CATEGORICAL_COLUMNS) -> EncoderMap:
    """Codes denses 0..k-1 attribués par LabelEncoder (ordre lexicographique des valeurs)."""
    codes = {}
    for column in columns:
        if ds.schema.kind(column) not in ("categorical", "class-flag"):
            raise SchemaError(f"La colonne {column} n'est pas catégorielle")
        encoder = LabelEncoder().fit([str(v) for v in ds.column(column)])
        codes[column] = {str(value): code for code, value in enumerate(encoder.classes_)}
    return EncoderMap(columns=tuple(columns), codes=codes)


def encode_record(record: Record, enc: EncoderMap, feature_columns: Sequence[str]) -> np.ndarray:
    row = np.empty(len(feature_columns), dtype=float)
    for position, column in enumerate(feature_columns):
        value = record.value(column)
        if column in CATEGORICAL_COLUMNS:
            row[position] = enc.encode(column, value)
        else:
            row[position] = float(value)
    return row


def apply_encoders(ds: Dataset, enc: EncoderMap, feature_columns: Sequence[str] = DEFAULT_FEATURE_COLUMNS) -> FeatureMatrix:
    """Colonnes binaires/entières inchangées; catégorielles remplacées par leur code."""
    feature_columns = tuple(feature_columns)
    for column in feature_columns:
        ds.schema.kind(column)
    values = np.array([encode_record(row, enc, feature_columns) for row in ds.rows], dtype=float)
    values = values.reshape(len(ds.rows), len(feature_columns))
    return FeatureMatrix(values, feature_columns)


# =============================================================================
# STANDARDISATION
# =============================================================================

def fit_scaler(train: FeatureMatrix, scale_columns: Optional[Sequence[str]] = None) -> ScalerParams:
    """
    Moyenne et écart-type (convention population, /n) sur les lignes d'entraînement,
    calculés par StandardScaler. Les colonnes non listées reçoivent (0, 1).
    scale_columns=None: toutes. Une colonne constante garde un écart-type de 0.
    """
    if train.n_rows == 0:
        raise DimensionError("Matrice d'entraînement vide")
    names = train.feature_names
    selected = set(names if scale_columns is None else scale_columns)
    unknown = selected - set(names)
    if unknown:
        raise SchemaError(f"Colonnes à standardiser inconnues: {sorted(unknown)}")

    mean = np.zeros(len(names))
    std = np.ones(len(names))
    positions = [position for position, name in enumerate(names) if name in selected]
    if positions:
        block = train.values[:, positions]
        scaler = StandardScaler().fit(block)
        mean[positions] = scaler.mean_
        std[positions] = np.where(np.ptp(block, axis=0) == 0, 0.0, np.sqrt(scaler.var_))
    return ScalerParams(names, mean, std)


def apply_scaler(m: FeatureMatrix, s: ScalerParams) -> FeatureMatrix:
    if len(m.feature_names) != len(s.feature_names):
        raise DimensionError(f"{len(m.feature_names)} colonnes pour un scaler de {len(s.feature_names)}")
    if m.feature_names != s.feature_names:
        raise DimensionError(f"Variables différentes: {m.feature_names} != {s.feature_names}")
    if m.n_rows == 0:
        return FeatureMatrix(m.values.copy(), m.feature_names)
    scaled = s.standard_scaler().transform(m.values)
    scaled[:, s.std == 0] = 0.0
    return FeatureMatrix(scaled, m.feature_names)


# =============================================================================
# DÉCOUPAGE TRAIN / TEST
# =============================================================================

def compute_test_size(n: int, test_fraction: float) -> int:
    """round(n * fraction), borné à [1, n-1]."""
    return int(min(max(1, np.floor(n * test_fraction + 0.5)), n - 1))


def split_indices(n: int, spec: SplitSpec, y=None) -> Tuple[np.ndarray, np.ndarray]:
    """Partition (train, test) des indices 0..n-1, fonction déterministe de la seed."""
    if n < 2:
        raise DimensionError(f"Au moins 2 lignes nécessaires pour découper, reçu {n}")
    rng = np.random.default_rng(spec.seed)
    t = compute_test_size(n, spec.test_fraction)

    if not spec.stratified:
        permutation = rng.permutation(n)
        return np.sort(permutation[t:]), np.sort(permutation[:t])

    if y is None:
        raise ConfigError("Le découpage stratifié nécessite les labels")
    y = np.asarray(y)
    classes = np.unique(y)
    members = [rng.permutation(np.flatnonzero(y == c)) for c in classes]
    quotas = np.array([len(m) * t / n for m in members])
    take = np.floor(quotas).astype(int)
    remainder = t - int(take.sum())
    # reste attribué aux plus grandes parties fractionnaires (classe la plus basse d'abord)
    order = sorted(range(len(classes)), key=lambda i: (-(quotas[i] - take[i]), i))
    for i in order[:remainder]:
        take[i] += 1

    test = np.concatenate([m[:k] for m, k in zip(members, take)])
    train = np.concatenate([m[k:] for m, k in zip(members, take)])
    return np.sort(train), np.sort(test)


def train_test_split(m: FeatureMatrix, y, spec: SplitSpec):
    y = np.asarray(y)
    if m.n_rows != len(y):
        raise DimensionError(f"{m.n_rows} lignes pour {len(y)} labels")
    train, test = split_indices(m.n_rows, spec, y)
    logger.info(f"✂️ Découpage: {len(train)} entraînement / {len(test)} test (seed={spec.seed})")
    return m.take(train), y[train], m.take(test), y[test]
