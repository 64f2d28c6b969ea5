# asd_pipeline/rule_labeling.py
"""
Synthèse de la cible "Preferred Education" (7 classes) à partir de A1..A10.

Les règles sont évaluées dans l'ordre (première règle satisfaite gagne);
si aucune ne s'applique le label vaut 0 (aucune méthode spécifique).

Format texte d'un RuleSet (une règle par ligne, ordre = priorité):

    # commentaire
    1: A5=1 A9=1 A10=0
    2: A6=1
"""

import logging
import re
from dataclasses import dataclass, replace
from itertools import product
from typing import Dict, Iterable, Optional, Tuple

from .data_model import AVector, Dataset
from .errors import ConfigError

logger = logging.getLogger(__name__)

METHOD_NAMES = (
    "None",
    "Technology-aided Instruction",
    "Antecedent-based Intervention",
    "Pivotal Response Training",
    "Peer-mediated Instruction and Intervention",
    "Picture Exchange Communication",
    "Task Analysis",
)


@dataclass(frozen=True)
class MethodLabel:
    code: int

    def __post_init__(self):
        if not 0 <= self.code < len(METHOD_NAMES):
            raise ValueError(f"Code de méthode invalide: {self.code}")

    @property
    def name(self) -> str:
        return METHOD_NAMES[self.code]


@dataclass(frozen=True)
class Rule:
    label: int
    conditions: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if not 1 <= self.label <= 6:
            raise ConfigError(f"Label de règle hors [1,6]: {self.label}")
        if not self.conditions:
            raise ConfigError(f"Règle {self.label} sans condition")
        indices = [index for index, _ in self.conditions]
        if len(set(indices)) != len(indices):
            raise ConfigError(f"Règle {self.label}: indices A répétés {indices}")
        for index, value in self.conditions:
            if not 1 <= index <= 10 or value not in (0, 1):
                raise ConfigError(f"Règle {self.label}: condition invalide A{index}={value}")

    def matches(self, a: AVector) -> bool:
        return all(a.item(index) == value for index, value in self.conditions)

    def to_text(self) -> str:
        clauses = " ".join(f"A{index}={value}" for index, value in self.conditions)
        return f"{self.label}: {clauses}"


@dataclass(frozen=True)
class RuleSet:
    rules: Tuple[Rule, ...]
    default_label: int = 0


# Tableau de correspondance méthode <-> conditions sur A1..A10, ordre des colonnes.
METHOD_RULES = (
    (1, ((5, 1), (9, 1), (10, 0))),
    (2, ((6, 1),)),
    (3, ((1, 1), (8, 1))),
    (4, ((5, 1), (4, 1), (3, 1))),
    (5, ((2, 1), (9, 1))),
    (6, ((7, 1),)),
)


def builtin_rules() -> RuleSet:
    return RuleSet(tuple(Rule(label, conditions) for label, conditions in METHOD_RULES))


_CLAUSE = re.compile(r"^A(\d+)=([01])$", re.IGNORECASE)


def load_rules(text: str) -> RuleSet:
    """Parse le format déclaratif `<label>: A<i>=<v> ...` (virgules tolérées)."""
    rules = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = [t for t in re.split(r"[\s,]+", line.replace(":", " ")) if t]
        try:
            label = int(tokens[0])
        except ValueError:
            raise ConfigError(f"Ligne {number}: label entier attendu, reçu '{tokens[0]}'") from None
        conditions = []
        for token in tokens[1:]:
            match = _CLAUSE.match(token)
            if not match:
                raise ConfigError(f"Ligne {number}: clause invalide '{token}'")
            conditions.append((int(match.group(1)), int(match.group(2))))
        rules.append(Rule(label, tuple(conditions)))
    if not rules:
        raise ConfigError("Fichier de règles vide")
    return RuleSet(tuple(rules))


def dump_rules(rs: RuleSet) -> str:
    return "".join(rule.to_text() + "\n" for rule in rs.rules)


def resolve_rules(spec: str) -> RuleSet:
    """'builtin' ou chemin vers un fichier de règles."""
    if spec in (None, "", "builtin"):
        return builtin_rules()
    try:
        with open(spec, encoding="utf-8") as handle:
            return load_rules(handle.read())
    except OSError as e:
        raise ConfigError(f"Fichier de règles illisible: {spec} ({e})") from e


# réponses A1..A10 prises telles que stockées (aucune inversion Yes/No)
def assign_label(a: AVector, rs: RuleSet) -> MethodLabel:
    for rule in rs.rules:
        if rule.matches(a):
            return MethodLabel(rule.label)
    return MethodLabel(rs.default_label)


def label_dataset(ds: Dataset, rs: RuleSet) -> Dataset:
    """Ajoute (ou remplace) la colonne Preferred_Education."""
    rows = tuple(replace(row, preferred_education=assign_label(row.a, rs).code) for row in ds.rows)
    logger.info(f"🏷️ {len(rows)} lignes étiquetées ({len(rs.rules)} règles)")
    return replace(ds, schema=ds.schema.with_label(), rows=rows)


@dataclass(frozen=True)
class CoverageTable:
    counts: Dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_dict(self):
        return {
            "total": self.total,
            "counts": {str(code): count for code, count in self.counts.items()},
            "names": {str(code): METHOD_NAMES[code] for code in self.counts},
        }


def rule_coverage(rs: RuleSet, free_items: Optional[Iterable[int]] = None) -> CoverageTable:
    """
    Énumère les AVectors et compte les labels produits.

    Args:
        rs: jeu de règles
        free_items: indices A libres (les autres fixés à 0); tous par défaut

    Returns:
        CoverageTable: un compteur par code 0..6 (2^len(free_items) au total)
    """
    free = sorted(set(free_items)) if free_items is not None else list(range(1, 11))
    outside = [index for index in free if not 1 <= index <= 10]
    if outside:
        raise ConfigError(f"Indices A hors [1,10]: {outside}")
    counts = {code: 0 for code in range(len(METHOD_NAMES))}
    for bits in product((0, 1), repeat=len(free)):
        values = [0] * 10
        for index, bit in zip(free, bits):
            values[index - 1] = bit
        counts[assign_label(AVector(tuple(values)), rs).code] += 1
    return CoverageTable(counts)
