# asd_pipeline/synthetic.py
"""
Générateur déterministe de fiches de dépistage conformes au schéma canonique.

Sert de remplaçant au jeu fusionné d'origine (non redistribuable):
- A_i ~ Bernoulli(a_prevalence[i]), 0.75 par défaut (population dépistée, majorité de "Yes")
- Qchat-10-Score = somme des A_i (toujours cohérent)
- Class_ASD_Traits = "Yes" ssi score >= class_rule_threshold (seuil Q-CHAT-10: 4)
- démographie tirée indépendamment selon des vocabulaires pondérés
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .data_model import AVector, Dataset, DatasetSchema, Record
from .errors import ConfigError

logger = logging.getLogger(__name__)

# Vocabulaires du jeu "toddler" Q-CHAT-10 (orthographe d'origine conservée).
DEFAULT_VOCABULARIES = {
    "sex": (("m", 0.7), ("f", 0.3)),
    "ethnicity": (
        ("White European", 0.32),
        ("asian", 0.28),
        ("middle eastern", 0.17),
        ("south asian", 0.06),
        ("black", 0.05),
        ("Hispanic", 0.04),
        ("Others", 0.03),
        ("Latino", 0.03),
        ("mixed", 0.01),
        ("Pacifica", 0.005),
        ("Native Indian", 0.005),
    ),
    "jaundice": (("no", 0.73), ("yes", 0.27)),
    "family_asd": (("no", 0.84), ("yes", 0.16)),
    "who_completed": (
        ("family member", 0.93),
        ("Health Care Professional", 0.03),
        ("Health care professional", 0.01),
        ("Self", 0.02),
        ("Others", 0.01),
    ),
}


@dataclass(frozen=True)
class SynthSpec:
    n: int = 3043
    seed: int = 0
    a_prevalence: Tuple[float, ...] = (0.75,) * 10
    age_range: Tuple[int, int] = (12, 36)
    vocabularies: Dict[str, Tuple[Tuple[str, float], ...]] = field(default_factory=lambda: dict(DEFAULT_VOCABULARIES))
    class_rule_threshold: int = 4

    def __post_init__(self):
        object.__setattr__(self, "a_prevalence", tuple(float(p) for p in self.a_prevalence))
        if self.n < 1:
            raise ConfigError(f"n doit être >= 1, reçu {self.n}")
        if len(self.a_prevalence) != 10:
            raise ConfigError(f"10 prévalences attendues, reçu {len(self.a_prevalence)}")
        if any(not 0.0 <= p <= 1.0 for p in self.a_prevalence):
            raise ConfigError(f"Prévalences hors [0,1]: {self.a_prevalence}")
        low, high = self.age_range
        if not 0 < low <= high:
            raise ConfigError(f"Plage d'âge invalide: {self.age_range}")
        for name in DEFAULT_VOCABULARIES:
            entries = self.vocabularies.get(name)
            if not entries:
                raise ConfigError(f"Vocabulaire manquant: {name}")
            if any(weight <= 0 for _, weight in entries):
                raise ConfigError(f"Poids non positifs dans le vocabulaire {name}")


def _draw(rng, entries, n):
    values = [value for value, _ in entries]
    weights = np.array([weight for _, weight in entries], dtype=float)
    picks = rng.choice(len(values), size=n, p=weights / weights.sum())
    return [values[i] for i in picks]


def generate(spec: SynthSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    answers = (rng.random((n, 10)) < np.array(spec.a_prevalence)[None, :]).astype(int)
    ages = rng.integers(spec.age_range[0], spec.age_range[1] + 1, size=n)
    columns = {name: _draw(rng, spec.vocabularies[name], n) for name in DEFAULT_VOCABULARIES}

    rows = []
    for i in range(n):
        a = AVector(tuple(answers[i].tolist()))
        score = a.total()
        rows.append(
            Record(
                case_no=i + 1,
                a=a,
                qchat_score=score,
                age_months=int(ages[i]),
                sex=columns["sex"][i],
                ethnicity=columns["ethnicity"][i],
                jaundice=columns["jaundice"][i],
                family_asd=columns["family_asd"][i],
                who_completed=columns["who_completed"][i],
                class_asd="Yes" if score >= spec.class_rule_threshold else "No",
            )
        )

    logger.info(f"🧪 {n} fiches synthétiques générées (seed={spec.seed})")
    return Dataset(schema=DatasetSchema.canonical(), rows=tuple(rows), provenance=(f"synthetic:seed={spec.seed}",))
