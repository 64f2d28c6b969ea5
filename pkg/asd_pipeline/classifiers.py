# asd_pipeline/classifiers.py
"""
Quatre classifieurs écrits from scratch (numpy) derrière un même contrat
fit / predict:

- naive_bayes: Gaussian Naive Bayes (lissage de variance type 1e-9)
- decision_tree: CART, critère de Gini, seuils aux milieux des valeurs
- random_forest: bagging de CART + sous-échantillonnage des variables
- knn: k plus proches voisins, distance euclidienne, recherche exhaustive

Tous les départages (scores, votes, distances) vont à l'indice / au code le
plus bas: deux exécutions avec les mêmes entrées donnent le même modèle.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionError, ModelError

logger = logging.getLogger(__name__)

# Tolérance relative (x nombre d'échantillons du noeud) sur les scores de Gini.
_SCORE_TOL = 1e-14
_MASK64 = (1 << 64) - 1


def _as_array(x) -> np.ndarray:
    values = getattr(x, "values", x)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise DimensionError(f"Matrice 2D attendue, reçu {values.ndim}D")
    return values


def _check_features(x: np.ndarray, n_features: int):
    if x.shape[1] != n_features:
        raise DimensionError(f"{x.shape[1]} variables reçues, le modèle en attend {n_features}")


def _prepare_training(x, y):
    x = _as_array(x)
    y = np.asarray(y).astype(int)
    if x.shape[0] == 0:
        raise ModelError("Jeu d'entraînement vide")
    if x.shape[0] != len(y):
        raise DimensionError(f"{x.shape[0]} lignes pour {len(y)} labels")
    return x, y


def _vote(class_index: np.ndarray, n_classes: int) -> np.ndarray:
    """Vote majoritaire ligne par ligne; égalité -> classe d'indice le plus bas."""
    counts = np.zeros((class_index.shape[0], n_classes), dtype=int)
    rows = np.repeat(np.arange(class_index.shape[0]), class_index.shape[1])
    np.add.at(counts, (rows, class_index.ravel()), 1)
    return counts.argmax(axis=1)


# =============================================================================
# NAIVE BAYES GAUSSIEN
# =============================================================================

@dataclass(frozen=True)
class NBParams:
    epsilon_factor: float = 1e-9


@dataclass(frozen=True)
class NBModel:
    classes: np.ndarray
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    epsilon: float

    @property
    def n_features(self) -> int:
        return self.means.shape[1]


def fit_gaussian_nb(x, y, epsilon_factor: float = 1e-9) -> NBModel:
    """
    Moyenne/variance gaussiennes par classe et par variable.

    Le plancher de variance vaut epsilon_factor x (plus grande variance d'une
    variable sur toutes les données); il est ajouté à chaque variance.
    """
    x, y = _prepare_training(x, y)
    if epsilon_factor <= 0:
        raise ModelError(f"epsilon_factor doit être > 0, reçu {epsilon_factor}")

    epsilon = float(epsilon_factor * x.var(axis=0).max())
    if epsilon <= 0:
        epsilon = float(epsilon_factor)

    classes, counts = np.unique(y, return_counts=True)
    means = np.empty((len(classes), x.shape[1]))
    variances = np.empty_like(means)
    for i, c in enumerate(classes):
        members = x[y == c]
        means[i] = members.mean(axis=0)
        variances[i] = members.var(axis=0) + epsilon

    return NBModel(
        classes=classes,
        priors=counts / counts.sum(),
        means=means,
        variances=variances,
        epsilon=epsilon,
    )


def nb_joint_log_likelihood(m: NBModel, x) -> np.ndarray:
    """log P(c) + somme des log densités gaussiennes, shape (n, classes)."""
    x = _as_array(x)
    _check_features(x, m.n_features)
    log_norm = -0.5 * np.log(2.0 * math.pi * m.variances).sum(axis=1)
    diff = x[:, None, :] - m.means[None, :, :]
    mahalanobis = -0.5 * (diff ** 2 / m.variances[None, :, :]).sum(axis=2)
    return np.log(m.priors)[None, :] + log_norm[None, :] + mahalanobis


def predict_nb(m: NBModel, x) -> np.ndarray:
    return m.classes[nb_joint_log_likelihood(m, x).argmax(axis=1)]


# =============================================================================
# ARBRE DE DÉCISION (CART)
# =============================================================================

@dataclass(frozen=True)
class TreeParams:
    criterion: str = "gini"
    min_samples_split: int = 2
    max_depth: Optional[int] = None

    def __post_init__(self):
        if self.criterion != "gini":
            raise ModelError(f"Critère non supporté: {self.criterion}")
        if self.min_samples_split < 2:
            raise ModelError("min_samples_split doit être >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ModelError("max_depth doit être >= 0")


@dataclass(frozen=True)
class TreeModel:
    """
    Arbre binaire à plat: feature[i] == -1 pour une feuille. Une ligne va à
    gauche si x[feature] <= threshold. value[i] porte le label majoritaire.
    """

    classes: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features: int
    params: TreeParams = TreeParams()

    @classmethod
    def constant(cls, label: int, n_features: int, classes=None) -> "TreeModel":
        classes = np.asarray(classes if classes is not None else [label])
        return cls(
            classes=classes,
            feature=np.array([-1]),
            threshold=np.array([0.0]),
            left=np.array([-1]),
            right=np.array([-1]),
            value=np.array([label]),
            n_features=n_features,
        )

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature < 0

    def root_split(self) -> Optional[Tuple[int, float]]:
        if self.feature[0] < 0:
            return None
        return int(self.feature[0]), float(self.threshold[0])

    def depth(self) -> int:
        depths = {0: 0}
        for node in range(self.node_count):
            if not self.is_leaf[node]:
                depths[int(self.left[node])] = depths[node] + 1
                depths[int(self.right[node])] = depths[node] + 1
        return max(depths.values())


class _TreeBuilder:
    def __init__(self, x, y_index, n_classes, params, features_per_split=None, rng=None):
        self.x = x
        self.y_index = y_index
        self.onehot = np.eye(n_classes, dtype=np.int64)[y_index]
        self.params = params
        self.n_features = x.shape[1]
        self.features_per_split = features_per_split
        self.rng = rng
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def build(self):
        self._grow(np.arange(self.x.shape[0]), 0)
        return (
            np.array(self.feature, dtype=int),
            np.array(self.threshold, dtype=float),
            np.array(self.left, dtype=int),
            np.array(self.right, dtype=int),
            np.array(self.value, dtype=int),
        )

    def _grow(self, samples, depth):
        node = len(self.feature)
        counts = self.onehot[samples].sum(axis=0)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(int(counts.argmax()))

        m = len(samples)
        if counts.max() == m or m < self.params.min_samples_split:
            return node
        if self.params.max_depth is not None and depth >= self.params.max_depth:
            return node

        split = self._best_split(samples, counts)
        if split is None:
            return node

        feature, threshold = split
        go_left = self.x[samples, feature] <= threshold
        self.feature[node] = feature
        self.threshold[node] = threshold
        self.left[node] = self._grow(samples[go_left], depth + 1)
        self.right[node] = self._grow(samples[~go_left], depth + 1)
        return node

    def _candidates(self) -> np.ndarray:
        d = self.n_features
        k = self.features_per_split
        if k is None or k >= d:
            return np.arange(d)
        return np.sort(self.rng.permutation(d)[:k])

    def _best_split(self, samples, counts):
        """Coupure sur les seules variables tirées; None (feuille) si aucune ne réduit le Gini."""
        m = len(samples)
        parent_score = float((counts ** 2).sum()) / m
        found = best_split_on(self.x[samples], self.onehot[samples], self._candidates())
        if found is None or found[2] <= parent_score + _SCORE_TOL * m:
            return None
        return found[0], found[1]


def best_split_on(x: np.ndarray, onehot: np.ndarray, features: np.ndarray):
    """
    Meilleur couple (variable, seuil) parmi `features` (triées par indice).

    Le score maximisé est sum(c_L^2)/n_L + sum(c_R^2)/n_R, ce qui revient à
    minimiser le Gini pondéré 1 - score/n. Égalités: variable d'indice le plus
    bas, puis plus petit seuil.

    Returns:
        tuple (feature, threshold, score) ou None si aucune coupure possible.
    """
    m = x.shape[0]
    if m < 2 or len(features) == 0:
        return None

    block = x[:, features]
    order = np.argsort(block, axis=0, kind="stable")
    sorted_values = np.take_along_axis(block, order, axis=0)
    cumulative = np.cumsum(onehot[order], axis=0)

    left = cumulative[:-1]
    right = cumulative[-1][None, :, :] - left
    n_left = np.arange(1, m)[:, None]
    score = (left ** 2).sum(axis=2) / n_left + (right ** 2).sum(axis=2) / (m - n_left)
    valid = sorted_values[:-1] < sorted_values[1:]
    if not valid.any():
        return None
    score = np.where(valid, score, -np.inf)

    best = score.max()
    ties = np.argwhere(score >= best - _SCORE_TOL * m)
    column = ties[:, 1].min()
    position = ties[ties[:, 1] == column, 0].min()

    low = sorted_values[position, column]
    high = sorted_values[position + 1, column]
    threshold = (low + high) / 2.0
    if threshold >= high:
        threshold = low
    return int(features[column]), float(threshold), float(score[position, column])


def _fit_tree(x, y, params, features_per_split=None, rng=None, classes=None) -> TreeModel:
    classes = np.unique(y) if classes is None else np.asarray(classes)
    y_index = np.searchsorted(classes, y)
    builder = _TreeBuilder(x, y_index, len(classes), params, features_per_split, rng)
    feature, threshold, left, right, value = builder.build()
    return TreeModel(
        classes=classes,
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        value=classes[value],
        n_features=x.shape[1],
        params=params,
    )


def fit_decision_tree(x, y, params: TreeParams = TreeParams()) -> TreeModel:
    x, y = _prepare_training(x, y)
    tree = _fit_tree(x, y, params)
    logger.debug(f"🌳 Arbre: {tree.node_count} noeuds, profondeur {tree.depth()}")
    return tree


def predict_tree(m: TreeModel, x) -> np.ndarray:
    x = _as_array(x)
    _check_features(x, m.n_features)
    node = np.zeros(x.shape[0], dtype=int)
    active = m.feature[node] >= 0
    while active.any():
        rows = np.flatnonzero(active)
        current = node[rows]
        go_left = x[rows, m.feature[current]] <= m.threshold[current]
        node[rows] = np.where(go_left, m.left[current], m.right[current])
        active = m.feature[node] >= 0
    return m.value[node]


# =============================================================================
# FORÊT ALÉATOIRE
# =============================================================================

@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    features_per_split: Optional[int] = None  # None -> floor(sqrt(d))
    bootstrap: bool = True
    max_samples: Optional[int] = None  # None -> n
    min_samples_split: int = 2
    max_depth: Optional[int] = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise ModelError(f"n_trees doit être >= 1, reçu {self.n_trees}")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ModelError("features_per_split doit être >= 1")

    def tree_params(self) -> TreeParams:
        return TreeParams(min_samples_split=self.min_samples_split, max_depth=self.max_depth)


@dataclass(frozen=True)
class ForestModel:
    trees: Tuple[TreeModel, ...]
    classes: np.ndarray
    n_features: int
    master_seed: int = 0
    params: ForestParams = ForestParams()

    @property
    def n_trees(self) -> int:
        return len(self.trees)


def tree_seed(master_seed: int, tree_index: int) -> int:
    """Mélange SplitMix64 de (master_seed, index de l'arbre)."""
    z = (int(master_seed) + (tree_index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def fit_random_forest(x, y, params: ForestParams = ForestParams(), master_seed: int = 0) -> ForestModel:
    """
    Chaque arbre t reçoit son propre générateur (seed = tree_seed(master_seed, t)):
    le résultat est identique en série ou en parallèle (n_jobs > 1).
    """
    x, y = _prepare_training(x, y)
    n, d = x.shape
    classes = np.unique(y)
    features_per_split = params.features_per_split or max(1, int(math.floor(math.sqrt(d))))
    sample_size = params.max_samples or n
    tree_params = params.tree_params()

    def _build(t):
        rng = np.random.default_rng(tree_seed(master_seed, t))
        if params.bootstrap:
            sample = rng.integers(0, n, size=sample_size)
        else:
            sample = np.arange(n)
        return _fit_tree(x[sample], y[sample], tree_params, features_per_split, rng, classes)

    if params.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=params.n_jobs) as pool:
            trees = tuple(pool.map(_build, range(params.n_trees)))
    else:
        trees = tuple(_build(t) for t in range(params.n_trees))

    logger.debug(f"🌲 Forêt: {len(trees)} arbres, {features_per_split} variables par noeud")
    return ForestModel(trees=trees, classes=classes, n_features=d, master_seed=master_seed, params=params)


def predict_forest(m: ForestModel, x) -> np.ndarray:
    x = _as_array(x)
    _check_features(x, m.n_features)
    votes = np.stack([predict_tree(tree, x) for tree in m.trees], axis=1)
    index = np.searchsorted(m.classes, votes)
    return m.classes[_vote(index, len(m.classes))]


# =============================================================================
# K PLUS PROCHES VOISINS
# =============================================================================

@dataclass(frozen=True)
class KNNParams:
    k: int = 5


@dataclass(frozen=True)
class KNNModel:
    stored_x: np.ndarray
    stored_y: np.ndarray
    k: int

    @property
    def n_features(self) -> int:
        return self.stored_x.shape[1]

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.stored_y)


def fit_knn(x, y, k: int = 5) -> KNNModel:
    """Apprenant paresseux: stocke (x, y, k) tels quels."""
    x, y = _prepare_training(x, y)
    if k < 1 or k > x.shape[0]:
        raise ModelError(f"k doit être dans [1, {x.shape[0]}], reçu {k}")
    return KNNModel(stored_x=x.copy(), stored_y=y.copy(), k=int(k))


def knn_neighbors(m: KNNModel, x, batch_size: int = 32) -> np.ndarray:
    """Indices des k voisins par ligne (distance croissante, égalité -> indice stocké le plus bas)."""
    x = _as_array(x)
    _check_features(x, m.n_features)
    neighbors = np.empty((x.shape[0], m.k), dtype=int)
    for start in range(0, x.shape[0], batch_size):
        queries = x[start:start + batch_size]
        # distance au carré: même ordre que la distance euclidienne
        squared = ((queries[:, None, :] - m.stored_x[None, :, :]) ** 2).sum(axis=2)
        neighbors[start:start + batch_size] = np.argsort(squared, axis=1, kind="stable")[:, :m.k]
    return neighbors


def predict_knn(m: KNNModel, x) -> np.ndarray:
    classes = m.classes
    labels = m.stored_y[knn_neighbors(m, x)]
    return classes[_vote(np.searchsorted(classes, labels), len(classes))]


# =============================================================================
# REGISTRE
# =============================================================================

MODEL_TYPES = ("naive_bayes", "decision_tree", "random_forest", "knn")

MODEL_DISPLAY_NAMES = {
    "naive_bayes": "Naive Bayes",
    "decision_tree": "Decision Tree",
    "random_forest": "Random Forest",
    "knn": "KNN",
}

PARAM_TYPES = {
    "naive_bayes": NBParams,
    "decision_tree": TreeParams,
    "random_forest": ForestParams,
    "knn": KNNParams,
}


def fit_model(model_type: str, x, y, params=None, seed: int = 0):
    """Point d'entrée commun: entraîne le modèle `model_type`."""
    params = params or PARAM_TYPES[model_type]()
    if model_type == "naive_bayes":
        return fit_gaussian_nb(x, y, params.epsilon_factor)
    if model_type == "decision_tree":
        return fit_decision_tree(x, y, params)
    if model_type == "random_forest":
        return fit_random_forest(x, y, params, master_seed=seed)
    if model_type == "knn":
        return fit_knn(x, y, params.k)
    raise ModelError(f"Type de modèle inconnu: {model_type}")


def predict(model, x) -> np.ndarray:
    if isinstance(model, NBModel):
        return predict_nb(model, x)
    if isinstance(model, TreeModel):
        return predict_tree(model, x)
    if isinstance(model, ForestModel):
        return predict_forest(model, x)
    if isinstance(model, KNNModel):
        return predict_knn(model, x)
    raise ModelError(f"Modèle non supporté: {type(model).__name__}")
