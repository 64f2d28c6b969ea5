# asd_pipeline/data_model.py
"""
Schéma canonique des fiches de dépistage, chargement CSV, validation,
fusion de plusieurs sources et statistiques descriptives.

Le schéma canonique reprend les 19 colonnes du jeu "toddler" (Q-CHAT-10).
Les autres sources s'y ramènent via une table d'alias (fichier KEY=VALUE,
colonne source = colonne canonique). Les âges sont toujours stockés en mois.
"""

import io
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import pandas as pd
from dotenv import dotenv_values

from .errors import LoadError, MergeError, SchemaError

logger = logging.getLogger(__name__)

COLUMN_KINDS = ("binary", "integer", "categorical", "class-flag")
AGE_UNITS = ("months", "years")

CASE_NO = "Case_No"
A_COLUMNS = tuple(f"A{i}" for i in range(1, 11))
AGE = "Age_Mons"
QCHAT = "Qchat-10-Score"
SEX = "Sex"
ETHNICITY = "Ethnicity"
JAUNDICE = "Jaundice"
FAMILY_ASD = "Family_mem_with_ASD"
WHO_COMPLETED = "Who_completed_the_test"
CLASS_ASD = "Class_ASD_Traits"
LABEL_COLUMN = "Preferred_Education"

CANONICAL_COLUMNS = (
    (CASE_NO, "integer"),
    *((name, "binary") for name in A_COLUMNS),
    (AGE, "integer"),
    (QCHAT, "integer"),
    (SEX, "categorical"),
    (ETHNICITY, "categorical"),
    (JAUNDICE, "categorical"),
    (FAMILY_ASD, "categorical"),
    (WHO_COMPLETED, "categorical"),
    (CLASS_ASD, "class-flag"),
)

CATEGORICAL_COLUMNS = (SEX, ETHNICITY, JAUNDICE, FAMILY_ASD, WHO_COMPLETED, CLASS_ASD)
YES_NO_COLUMNS = (JAUNDICE, FAMILY_ASD)
QCHAT_RANGE = (0, 10)
LABEL_RANGE = (0, 6)

# Recensement des types tel que décrit pour le jeu fusionné d'origine
# (12 colonnes entières dont Case_No, 7 colonnes "object").
SOURCE_CENSUS = (("integer", 12), ("object", 7))


@dataclass(frozen=True)
class DatasetSchema:
    columns: Tuple[Tuple[str, str], ...] = CANONICAL_COLUMNS
    age_unit: str = "months"
    source_census: Tuple[Tuple[str, int], ...] = SOURCE_CENSUS

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError(f"Noms de colonnes dupliqués: {names}")
        for name, kind in self.columns:
            if kind not in COLUMN_KINDS:
                raise SchemaError(f"Type de colonne inconnu '{kind}' pour {name}")
        if self.age_unit not in AGE_UNITS:
            raise SchemaError(f"Unité d'âge inconnue: {self.age_unit}")

    @classmethod
    def canonical(cls, age_unit="months"):
        return cls(columns=CANONICAL_COLUMNS, age_unit=age_unit)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.columns)

    @property
    def is_labeled(self) -> bool:
        return LABEL_COLUMN in self.names

    def kind(self, name: str) -> str:
        for column, kind in self.columns:
            if column == name:
                return kind
        raise SchemaError(f"Colonne absente du schéma: {name}")

    def with_age_unit(self, age_unit: str) -> "DatasetSchema":
        return replace(self, age_unit=age_unit)

    def with_label(self) -> "DatasetSchema":
        if self.is_labeled:
            return self
        return replace(self, columns=self.columns + ((LABEL_COLUMN, "integer"),))


@dataclass(frozen=True)
class AVector:
    """Les dix réponses binaires A1..A10 (index 1-based via item())."""

    values: Tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if len(values) != 10:
            raise SchemaError(f"AVector attend 10 valeurs, reçu {len(values)}")
        if any(v not in (0, 1) for v in values):
            raise SchemaError(f"AVector non binaire: {values}")
        object.__setattr__(self, "values", values)

    def item(self, index: int) -> int:
        return self.values[index - 1]

    def total(self) -> int:
        return sum(self.values)

    def __iter__(self):
        return iter(self.values)

    @classmethod
    def from_bits(cls, bits: int) -> "AVector":
        """Bit i-1 de `bits` donne A_i."""
        return cls(tuple((bits >> i) & 1 for i in range(10)))

    def to_bits(self) -> int:
        return sum(v << i for i, v in enumerate(self.values))


@dataclass(frozen=True)
class Record:
    case_no: int
    a: AVector
    qchat_score: int
    age_months: int
    sex: str
    ethnicity: str
    jaundice: str
    family_asd: str
    who_completed: str
    class_asd: str
    preferred_education: Optional[int] = None

    def value(self, column: str):
        """Valeur de la fiche pour un nom de colonne canonique."""
        if column in A_COLUMNS:
            return self.a.item(int(column[1:]))
        try:
            attribute = _COLUMN_ATTRIBUTES[column]
        except KeyError:
            raise SchemaError(f"Colonne inconnue: {column}") from None
        return getattr(self, attribute)

    def to_row(self, columns) -> Dict[str, object]:
        return {column: self.value(column) for column in columns}


_COLUMN_ATTRIBUTES = {
    CASE_NO: "case_no",
    AGE: "age_months",
    QCHAT: "qchat_score",
    SEX: "sex",
    ETHNICITY: "ethnicity",
    JAUNDICE: "jaundice",
    FAMILY_ASD: "family_asd",
    WHO_COMPLETED: "who_completed",
    CLASS_ASD: "class_asd",
    LABEL_COLUMN: "preferred_education",
}


@dataclass(frozen=True)
class Dataset:
    schema: DatasetSchema
    rows: Tuple[Record, ...]
    provenance: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "provenance", tuple(self.provenance))

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> List[object]:
        return [row.value(name) for row in self.rows]

    def vocabulary(self, name: str) -> Tuple[str, ...]:
        return tuple(sorted({str(v) for v in self.column(name)}))

    def labels(self) -> List[int]:
        if not self.schema.is_labeled:
            raise SchemaError(f"Le jeu de données n'a pas de colonne {LABEL_COLUMN}")
        return [row.preferred_education for row in self.rows]

    def subset(self, indices) -> "Dataset":
        return replace(self, rows=tuple(self.rows[int(i)] for i in indices))


@dataclass(frozen=True)
class RowError:
    row: Optional[int]
    column: str
    message: str


@dataclass
class ValidationReport:
    row_errors: List[RowError] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    rows_accepted: int = 0
    rows_rejected: int = 0

    @property
    def rows_inspected(self) -> int:
        return self.rows_accepted + self.rows_rejected

    @property
    def ok(self) -> bool:
        return not self.row_errors

    def to_dict(self):
        return {
            "rows_accepted": self.rows_accepted,
            "rows_rejected": self.rows_rejected,
            "row_errors": [
                {"row": e.row, "column": e.column, "message": e.message}
                for e in self.row_errors
            ],
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class SummaryStats:
    n_rows: int
    histograms: Dict[str, Dict[str, int]]
    numeric: Dict[str, Dict[str, float]]
    class_balance: float
    a_prevalence: Tuple[float, ...]
    label_counts: Optional[Dict[int, int]] = None

    def to_dict(self):
        return {
            "n_rows": self.n_rows,
            "histograms": self.histograms,
            "numeric": self.numeric,
            "class_balance": self.class_balance,
            "a_prevalence": list(self.a_prevalence),
            "label_counts": (
                {str(k): v for k, v in self.label_counts.items()}
                if self.label_counts is not None else None
            ),
        }


# =============================================================================
# CHARGEMENT CSV
# =============================================================================

def load_aliases(path) -> Dict[str, str]:
    """Lit une table d'alias (fichier KEY=VALUE: colonne source=colonne canonique)."""
    aliases = {k.strip(): (v or "").strip() for k, v in dotenv_values(path).items()}
    logger.debug(f"Alias chargés depuis {path}: {aliases}")
    return aliases


def _read_text(source) -> str:
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = source
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as e:
            raise LoadError(f"Le fichier n'est pas en UTF-8: {e}") from e
    return data


def _is_missing(value) -> bool:
    return value is None or (isinstance(value, float) and value != value) or str(value).strip() == ""


def _parse_int(value) -> int:
    text = str(value).strip()
    try:
        return int(text)
    except ValueError:
        number = float(text)
        if not number.is_integer():
            raise
        return int(number)


def _parse_row(raw, schema, index, errors):
    """Convertit une ligne brute (dict colonne -> texte) en Record, ou None si rejetée."""
    row_errors = []
    values = {}

    for name, kind in schema.columns:
        if name == LABEL_COLUMN:
            continue
        value = raw.get(name)
        if _is_missing(value):
            row_errors.append(RowError(index, name, "missing value"))
            continue
        text = str(value).strip()

        if kind == "binary":
            if text not in ("0", "1"):
                row_errors.append(RowError(index, name, "not binary"))
                continue
            values[name] = int(text)
        elif kind == "integer":
            if name == AGE and schema.age_unit == "years":
                try:
                    values[name] = int(round(float(text) * 12))
                except ValueError:
                    row_errors.append(RowError(index, name, "not a number"))
                continue
            try:
                values[name] = _parse_int(text)
            except ValueError:
                row_errors.append(RowError(index, name, "not an integer"))
        elif kind == "class-flag":
            flag = text.lower()
            if flag not in ("yes", "no"):
                row_errors.append(RowError(index, name, "expected Yes/No"))
                continue
            values[name] = flag.capitalize()
        else:
            if name in YES_NO_COLUMNS:
                if text.lower() not in ("yes", "no"):
                    row_errors.append(RowError(index, name, "expected yes/no"))
                    continue
                text = text.lower()
            values[name] = text

    if QCHAT in values and not QCHAT_RANGE[0] <= values[QCHAT] <= QCHAT_RANGE[1]:
        row_errors.append(RowError(index, QCHAT, "out of range"))
    if AGE in values and values[AGE] <= 0:
        row_errors.append(RowError(index, AGE, "out of range"))

    label = None
    if schema.is_labeled:
        value = raw.get(LABEL_COLUMN)
        try:
            label = _parse_int(value)
            if not LABEL_RANGE[0] <= label <= LABEL_RANGE[1]:
                raise ValueError(label)
        except (TypeError, ValueError):
            row_errors.append(RowError(index, LABEL_COLUMN, "invalid label"))

    if row_errors:
        errors.extend(row_errors)
        return None

    return Record(
        case_no=values[CASE_NO],
        a=AVector(tuple(values[name] for name in A_COLUMNS)),
        qchat_score=values[QCHAT],
        age_months=values[AGE],
        sex=values[SEX],
        ethnicity=values[ETHNICITY],
        jaundice=values[JAUNDICE],
        family_asd=values[FAMILY_ASD],
        who_completed=values[WHO_COMPLETED],
        class_asd=values[CLASS_ASD],
        preferred_education=label,
    )


def load_dataset(source, schema=None, column_aliases=None, source_name="<stream>"):
    """
    Charge un CSV UTF-8 (avec en-tête) et le valide ligne par ligne.

    Args:
        source: flux binaire, bytes ou texte du CSV
        schema: DatasetSchema (canonique en mois par défaut)
        column_aliases: dict colonne source -> colonne canonique
        source_name: nom enregistré dans la provenance

    Returns:
        tuple: (Dataset, ValidationReport). Les lignes rejetées sont
        comptées et détaillées dans le rapport, jamais ignorées en silence.
    """
    schema = schema or DatasetSchema.canonical()
    aliases = column_aliases or {}
    text = _read_text(source)
    if not text.strip():
        raise LoadError(f"Fichier vide: {source_name}")

    bad_lines = []

    def _on_bad_line(fields):
        bad_lines.append(fields)
        return None

    try:
        frame = pd.read_csv(
            io.StringIO(text),
            dtype=str,
            keep_default_na=False,
            engine="python",
            on_bad_lines=_on_bad_line,
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise LoadError(f"CSV illisible ({source_name}): {e}") from e

    frame.columns = [aliases.get(str(c).strip(), str(c).strip()) for c in frame.columns]
    if len(set(frame.columns)) != len(frame.columns):
        raise LoadError(f"Colonnes dupliquées après alias dans {source_name}: {list(frame.columns)}")

    if LABEL_COLUMN in frame.columns:
        schema = schema.with_label()
    for name in schema.names:
        if name not in frame.columns:
            raise LoadError(f"Colonne obligatoire absente: {name} ({source_name})")

    report = ValidationReport()
    extra = sorted(set(frame.columns) - set(schema.names))
    if extra:
        report.warnings.append(f"colonnes ignorées: {', '.join(extra)}")

    rows = []
    for index, raw in enumerate(frame.to_dict(orient="records")):
        record = _parse_row(raw, schema, index, report.row_errors)
        if record is None:
            report.rows_rejected += 1
        else:
            rows.append(record)
            report.rows_accepted += 1

    for fields in bad_lines:
        report.row_errors.append(
            RowError(None, "*", f"malformed line ({len(fields)} fields, expected {len(frame.columns)})")
        )
        report.rows_rejected += 1

    if report.rows_rejected:
        logger.warning(f"⚠️ {source_name}: {report.rows_rejected} ligne(s) rejetée(s)")

    if not rows:
        raise LoadError(f"Aucune ligne valide dans {source_name}", report=report)

    dataset = Dataset(schema=schema.with_age_unit("months"), rows=tuple(rows), provenance=(source_name,))
    logger.info(f"📥 {source_name}: {report.rows_accepted} lignes chargées")
    return dataset, report


def load_dataset_file(path, age_unit="months", aliases_path=None):
    """Raccourci: charge un CSV depuis le disque avec sa table d'alias éventuelle."""
    aliases = load_aliases(aliases_path) if aliases_path else None
    try:
        handle = open(path, "rb")
    except OSError as e:
        raise LoadError(f"Fichier illisible: {path} ({e})") from e
    with handle:
        return load_dataset(handle, DatasetSchema.canonical(age_unit), aliases, source_name=str(path))


def dataset_to_frame(ds: Dataset) -> pd.DataFrame:
    names = ds.schema.names
    return pd.DataFrame([row.to_row(names) for row in ds.rows], columns=list(names))


def dataset_to_csv(ds: Dataset) -> str:
    """Sérialise au format CSV canonique (âges en mois)."""
    return dataset_to_frame(ds).to_csv(index=False, lineterminator="\n")


# =============================================================================
# FUSION / VALIDATION / RÉSUMÉ
# =============================================================================

def merge_datasets(parts) -> Dataset:
    """Concatène les sources et renumérote Case_No à partir de 1."""
    parts = list(parts)
    if not parts:
        raise MergeError("Aucun jeu de données à fusionner")

    reference = set(parts[0].schema.names)
    for position, part in enumerate(parts[1:], start=1):
        names = set(part.schema.names)
        if names != reference:
            missing = sorted(reference - names)
            extra = sorted(names - reference)
            raise MergeError(
                f"Schéma différent pour la partie {position}: manquantes={missing}, en trop={extra}",
                missing=missing,
                extra=extra,
            )

    rows = []
    provenance = []
    for part in parts:
        rows.extend(part.rows)
        provenance.extend(part.provenance)
    rows = tuple(replace(row, case_no=i) for i, row in enumerate(rows, start=1))

    logger.info(f"🔗 Fusion de {len(parts)} source(s): {len(rows)} lignes")
    return Dataset(schema=parts[0].schema.with_age_unit("months"), rows=rows, provenance=tuple(provenance))


def validate(ds: Dataset) -> ValidationReport:
    """Contrôle de cohérence; ne lève jamais, tout va dans le rapport."""
    report = ValidationReport()
    for index, row in enumerate(ds.rows):
        errors = []
        if not QCHAT_RANGE[0] <= row.qchat_score <= QCHAT_RANGE[1]:
            errors.append(RowError(index, QCHAT, "out of range"))
        if row.age_months <= 0:
            errors.append(RowError(index, AGE, "out of range"))
        for column in YES_NO_COLUMNS:
            if row.value(column) not in ("yes", "no"):
                errors.append(RowError(index, column, "expected yes/no"))
        if row.class_asd not in ("Yes", "No"):
            errors.append(RowError(index, CLASS_ASD, "expected Yes/No"))
        for column in (SEX, ETHNICITY, WHO_COMPLETED):
            if not str(row.value(column)).strip():
                errors.append(RowError(index, column, "missing value"))
        if ds.schema.is_labeled:
            label = row.preferred_education
            if label is None or not LABEL_RANGE[0] <= label <= LABEL_RANGE[1]:
                errors.append(RowError(index, LABEL_COLUMN, "invalid label"))

        if errors:
            report.row_errors.extend(errors)
            report.rows_rejected += 1
        else:
            report.rows_accepted += 1

        if row.qchat_score != row.a.total():
            report.warnings.append(
                f"row {index}: score/answer mismatch (qchat={row.qchat_score}, sum={row.a.total()})"
            )

    if report.warnings:
        logger.warning(f"⚠️ {len(report.warnings)} incohérence(s) score/réponses")
    return report


def summarize(ds: Dataset) -> SummaryStats:
    frame = dataset_to_frame(ds)
    histograms = {
        column: {str(k): int(v) for k, v in frame[column].value_counts().sort_index().items()}
        for column in CATEGORICAL_COLUMNS
    }
    numeric = {}
    for column in (AGE, QCHAT):
        series = frame[column].astype(float)
        numeric[column] = {
            "count": int(series.count()),
            "min": float(series.min()),
            "max": float(series.max()),
            "mean": float(series.mean()),
        }

    n = len(frame)
    class_balance = float((frame[CLASS_ASD] == "Yes").sum() / n) if n else 0.0
    a_prevalence = tuple(float(frame[column].astype(int).mean()) if n else 0.0 for column in A_COLUMNS)

    label_counts = None
    if ds.schema.is_labeled:
        counts = frame[LABEL_COLUMN].astype(int).value_counts()
        label_counts = {code: int(counts.get(code, 0)) for code in range(LABEL_RANGE[0], LABEL_RANGE[1] + 1)}

    return SummaryStats(
        n_rows=n,
        histograms=histograms,
        numeric=numeric,
        class_balance=class_balance,
        a_prevalence=a_prevalence,
        label_counts=label_counts,
    )
