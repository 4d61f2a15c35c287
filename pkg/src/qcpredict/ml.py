"""From-scratch supervised classifiers: a CART decision tree, a seeded random
forest with gini feature importance, nearest-neighbor and Gaussian naive Bayes
baselines, stratified cross-validated grid search, and model persistence.

Labels are class indices into an ordered label space. Determinism contract:
all randomness flows from one seed through spawned counter-based generators,
and every tie (splits, votes, neighbors) breaks toward the lowest index.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from math import ceil, sqrt
from pathlib import Path

import numpy as np

from .features import FeatureSchema

MODEL_FORMAT = "qcpredict-forest"
MODEL_VERSION = 1

_MIN_DECREASE = 1e-12


class ModelFormatError(ValueError):
    """Model file is missing, corrupt, or from an unknown format version."""


@dataclass
class TreeNode:
    """Split node (feature >= 0) or leaf (feature == -1)."""

    n_samples: int
    impurity: float
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    label: int = -1
    histogram: tuple[int, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - (p * p).sum())


def _best_split(
    X: np.ndarray, onehot: np.ndarray, parent_gini: float, min_leaf: int, feature_indices: np.ndarray
) -> tuple[int, float] | None:
    """Scan candidate thresholds (midpoints between distinct sorted values).

    Minimizes the weighted child gini; ties keep the lowest feature index and
    then the lowest threshold. Returns None when no split improves impurity.
    """
    n = X.shape[0]
    if n < 2 * min_leaf:
        return None
    left_count = np.arange(1, n, dtype=np.float64)
    right_count = n - left_count
    size_ok = (left_count >= min_leaf) & (right_count >= min_leaf)

    best_score = np.inf
    best: tuple[int, float] | None = None
    for f in feature_indices:
        xs = X[:, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        if xs[0] == xs[-1]:
            continue
        valid = (xs[:-1] < xs[1:]) & size_ok
        if not valid.any():
            continue
        cum = np.cumsum(onehot[order], axis=0)
        left = cum[:-1]
        right = cum[-1] - left
        sumsq_left = np.einsum("ij,ij->i", left, left)
        sumsq_right = np.einsum("ij,ij->i", right, right)
        weighted = (left_count - sumsq_left / left_count + right_count - sumsq_right / right_count) / n
        weighted[~valid] = np.inf
        i = int(np.argmin(weighted))
        score = weighted[i]
        if score < best_score:
            best_score = score
            best = (int(f), float((xs[i] + xs[i + 1]) / 2.0))
    if best is None or parent_gini - best_score <= _MIN_DECREASE:
        return None
    return best


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int | None = None,
    min_samples_leaf: int = 1,
    rng: np.random.Generator | None = None,
    max_features: int | None = None,
) -> TreeNode:
    """Grow one CART tree. ``max_features`` with an rng samples a fresh feature
    subset at every node (forest mode); otherwise all features are candidates."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, f) with one label per row and n > 0")
    if n_classes < 1 or y.min() < 0 or y.max() >= n_classes:
        raise ValueError("labels must be indices into [0, n_classes)")
    n_features = X.shape[1]
    onehot = np.zeros((X.shape[0], n_classes), dtype=np.float64)
    onehot[np.arange(X.shape[0]), y] = 1.0

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        counts = onehot[idx].sum(axis=0)
        impurity = _gini(counts)
        node = TreeNode(n_samples=int(idx.shape[0]), impurity=impurity)
        split = None
        if impurity > 0.0 and (max_depth is None or depth < max_depth):
            if max_features is not None and rng is not None and max_features < n_features:
                candidates = np.sort(rng.choice(n_features, size=max_features, replace=False))
            else:
                candidates = np.arange(n_features)
            split = _best_split(X[idx], onehot[idx], impurity, min_samples_leaf, candidates)
        if split is None:
            node.label = int(np.argmax(counts))
            node.histogram = tuple(int(c) for c in counts)
            return node
        feature, threshold = split
        node.feature = feature
        node.threshold = threshold
        mask = X[idx, feature] <= threshold
        node.left = grow(idx[mask], depth + 1)
        node.right = grow(idx[~mask], depth + 1)
        return node

    return grow(np.arange(X.shape[0]), 0)


# all trees flattened into one node table so a batch of rows descends every
# tree at once (per-tree python loops are too slow for single-row prediction)
@dataclass
class _ForestTable:
    feature: np.ndarray  # (total_nodes,), -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    label: np.ndarray
    roots: np.ndarray  # (n_trees,) root node index per tree


def _merge_trees(trees: tuple[TreeNode, ...]) -> _ForestTable:
    nodes: list[TreeNode] = []
    roots = []

    def visit(node: TreeNode) -> int:
        index = len(nodes)
        nodes.append(node)
        if not node.is_leaf:
            visit(node.left)
            visit(node.right)
        return index

    for root in trees:
        roots.append(visit(root))
    index_of = {id(n): i for i, n in enumerate(nodes)}
    count = len(nodes)
    table = _ForestTable(
        feature=np.full(count, -1, dtype=np.int64),
        threshold=np.zeros(count, dtype=np.float64),
        left=np.zeros(count, dtype=np.int64),
        right=np.zeros(count, dtype=np.int64),
        label=np.zeros(count, dtype=np.int64),
        roots=np.array(roots, dtype=np.int64),
    )
    for i, node in enumerate(nodes):
        if node.is_leaf:
            table.label[i] = node.label
        else:
            table.feature[i] = node.feature
            table.threshold[i] = node.threshold
            table.left[i] = index_of[id(node.left)]
            table.right[i] = index_of[id(node.right)]
    return table


def _forest_leaf_labels(table: _ForestTable, X: np.ndarray) -> np.ndarray:
    """(n_rows, n_trees) leaf label matrix via lockstep descent."""
    n = X.shape[0]
    position = np.broadcast_to(table.roots, (n, table.roots.shape[0])).copy()
    rows = np.arange(n)[:, None]
    while True:
        feature = table.feature[position]
        active = feature >= 0
        if not active.any():
            return table.label[position]
        values = X[rows, np.where(active, feature, 0)]
        descend = np.where(values <= table.threshold[position], table.left[position], table.right[position])
        position = np.where(active, descend, position)


@dataclass
class ForestModel:
    trees: tuple[TreeNode, ...]
    n_trees: int
    max_depth: int | None
    min_samples_leaf: int
    bootstrap: bool
    max_features: str | None  # "sqrt" or None (all features)
    schema: FeatureSchema
    label_space: tuple[str, ...]
    seed: int
    table: _ForestTable | None = field(repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        if self.table is None:
            self.table = _merge_trees(self.trees)

    @property
    def n_classes(self) -> int:
        return len(self.label_space)


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    schema: FeatureSchema,
    label_space: tuple[str, ...] | list[str],
    n_trees: int = 500,
    max_depth: int | None = 20,
    min_samples_leaf: int = 2,
    seed: int = 0,
    bootstrap: bool = True,
    max_features: str | None = "sqrt",
) -> ForestModel:
    """Bagged CART ensemble; per-node feature subsets of ceil(sqrt(f))."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_trees < 1:
        raise ValueError("need at least one tree")
    if X.shape[1] != len(schema.retained):
        raise ValueError(f"X has {X.shape[1]} columns, schema retains {len(schema.retained)}")
    n_classes = len(label_space)
    subset = ceil(sqrt(X.shape[1])) if max_features == "sqrt" else None
    n = X.shape[0]

    trees = []
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.Generator(np.random.Philox(child))
        if bootstrap:
            sample = rng.integers(0, n, size=n)
            Xb, yb = X[sample], y[sample]
        else:
            Xb, yb = X, y
        trees.append(
            fit_tree(Xb, yb, n_classes, max_depth, min_samples_leaf, rng=rng, max_features=subset)
        )
    return ForestModel(
        tuple(trees), n_trees, max_depth, min_samples_leaf, bootstrap, max_features,
        schema, tuple(label_space), seed,
    )


def _vote_counts(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """(n_samples, n_classes) matrix of per-tree votes."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != len(model.schema.retained):
        raise ValueError(f"expected {len(model.schema.retained)} features, got {X.shape[1]}")
    labels = _forest_leaf_labels(model.table, X)
    votes = np.zeros((X.shape[0], model.n_classes), dtype=np.int64)
    np.add.at(votes, (np.arange(X.shape[0])[:, None], labels), 1)
    return votes


def predict_many(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Majority-vote class index per row; vote ties keep the lowest class."""
    return np.argmax(_vote_counts(model, X), axis=1)


def predict(model: ForestModel, x: np.ndarray) -> str:
    return model.label_space[int(predict_many(model, np.atleast_2d(x))[0])]


def predict_top_k(model: ForestModel, x: np.ndarray, k: int) -> list[tuple[str, float]]:
    """Top-k labels by vote share, ties toward the lower label index."""
    if not 1 <= k <= model.n_classes:
        raise ValueError(f"k must be in [1, {model.n_classes}]")
    votes = _vote_counts(model, np.atleast_2d(x))[0]
    order = sorted(range(model.n_classes), key=lambda c: (-votes[c], c))
    return [(model.label_space[c], votes[c] / model.n_trees) for c in order[:k]]


def feature_importance(model: ForestModel) -> tuple[np.ndarray, np.ndarray, bool]:
    """Mean and std over trees of per-tree normalized gini decrease.

    Means are renormalized to sum to one. The flag reports the degenerate
    all-leaf case, where importances are uniformly zero.
    """
    n_features = len(model.schema.retained)
    per_tree = np.zeros((len(model.trees), n_features))
    for t, root in enumerate(model.trees):
        stack = [root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                continue
            child_impurity = (
                node.left.n_samples * node.left.impurity + node.right.n_samples * node.right.impurity
            ) / node.n_samples
            per_tree[t, node.feature] += (node.n_samples / root.n_samples) * (node.impurity - child_impurity)
            stack.append(node.right)
            stack.append(node.left)
        total = per_tree[t].sum()
        if total > 0.0:
            per_tree[t] /= total
    mean = per_tree.mean(axis=0)
    std = per_tree.std(axis=0)
    grand = mean.sum()
    if grand == 0.0:
        return mean, std, True
    return mean / grand, std, False


def knn_fit_predict(X: np.ndarray, y: np.ndarray, x: np.ndarray, k: int, n_classes: int) -> int:
    """Euclidean k-nearest vote; neighbor ties by (distance, index), vote ties
    by lowest class index."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k must be in [1, {X.shape[0]}]")
    d2 = ((X - np.asarray(x, dtype=np.float64)) ** 2).sum(axis=1)
    nearest = np.lexsort((np.arange(X.shape[0]), d2))[:k]
    counts = np.bincount(y[nearest], minlength=n_classes)
    return int(np.argmax(counts))


def naive_bayes_fit_predict(X: np.ndarray, y: np.ndarray, x: np.ndarray, n_classes: int) -> int:
    """Gaussian class-conditional argmax with uniform-smoothed priors and a
    variance floor of 1e-9."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    x = np.asarray(x, dtype=np.float64)
    n = X.shape[0]
    present = np.unique(y)
    best_class = -1
    best_logp = -np.inf
    for c in present:
        rows = X[y == c]
        mean = rows.mean(axis=0)
        var = np.maximum(rows.var(axis=0), 1e-9)
        prior = (rows.shape[0] + 1.0) / (n + n_classes)
        logp = float(np.log(prior) - 0.5 * (np.log(2.0 * np.pi * var) + (x - mean) ** 2 / var).sum())
        if logp > best_logp:
            best_logp = logp
            best_class = int(c)
    return best_class


def _fold_assignment(y: np.ndarray, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Stratified round-robin folds; falls back to plain folds (with a warning)
    when some class has fewer samples than folds."""
    n = y.shape[0]
    fold_of = np.empty(n, dtype=np.int64)
    counts = np.bincount(y)
    if counts[counts > 0].min() < folds:
        warnings.warn("class smaller than fold count; using non-stratified folds", stacklevel=3)
        perm = rng.permutation(n)
        fold_of[perm] = np.arange(n) % folds
        return fold_of
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(idx.shape[0])]
        fold_of[idx] = np.arange(idx.shape[0]) % folds
    return fold_of


def grid_search_cv(
    X: np.ndarray,
    y: np.ndarray,
    schema: FeatureSchema,
    label_space: tuple[str, ...] | list[str],
    grid: list[dict],
    folds: int = 5,
    seed: int = 0,
) -> tuple[dict, list[tuple[dict, float]]]:
    """Mean CV accuracy per grid point; argmax with ties toward grid order."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if not grid:
        raise ValueError("empty grid")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    root = np.random.SeedSequence(seed)
    fold_ss, *fit_ss = root.spawn(folds + 1)
    rng = np.random.Generator(np.random.Philox(fold_ss))
    fold_of = _fold_assignment(y, folds, rng)
    fit_seeds = [int(s.generate_state(1)[0]) for s in fit_ss]

    results: list[tuple[dict, float]] = []
    for params in grid:
        accuracies = []
        for k in range(folds):
            train = fold_of != k
            model = fit_forest(
                X[train], y[train], schema, label_space,
                n_trees=params.get("n_trees", 500),
                max_depth=params.get("max_depth", 20),
                min_samples_leaf=params.get("min_samples_leaf", 2),
                seed=fit_seeds[k],
            )
            pred = predict_many(model, X[~train])
            accuracies.append(float(np.mean(pred == y[~train])))
        results.append((params, float(np.mean(accuracies))))
    best = max(range(len(results)), key=lambda i: (results[i][1], -i))
    return results[best][0], results


DEFAULT_GRID = [
    {"n_trees": t, "max_depth": d, "min_samples_leaf": m}
    for t in (100, 300, 500)
    for d in (10, 20, None)
    for m in (1, 2, 4)
]


# ---------------------------------------------------------------------------
# persistence

def _encode_tree(root: TreeNode) -> list[list]:
    """Preorder node records: split [feature, threshold, left, right, n, gini],
    leaf [-1, label, histogram, n, gini]."""
    nodes: list[list] = []

    def visit(node: TreeNode) -> int:
        index = len(nodes)
        if node.is_leaf:
            nodes.append([-1, node.label, list(node.histogram), node.n_samples, node.impurity])
        else:
            record = [node.feature, node.threshold, 0, 0, node.n_samples, node.impurity]
            nodes.append(record)
            record[2] = visit(node.left)
            record[3] = visit(node.right)
        return index

    visit(root)
    return nodes


def _decode_tree(nodes: list[list]) -> TreeNode:
    def build(index: int) -> TreeNode:
        record = nodes[index]
        if record[0] == -1:
            return TreeNode(
                n_samples=record[3], impurity=record[4], label=record[1], histogram=tuple(record[2])
            )
        return TreeNode(
            n_samples=record[4], impurity=record[5], feature=record[0], threshold=record[1],
            left=build(record[2]), right=build(record[3]),
        )

    return build(0)


def save_model(model: ForestModel, path: str | Path) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "n_trees": model.n_trees,
        "max_depth": model.max_depth,
        "min_samples_leaf": model.min_samples_leaf,
        "bootstrap": model.bootstrap,
        "max_features": model.max_features,
        "seed": model.seed,
        "schema": {"names": list(model.schema.names), "pruned": list(model.schema.pruned)},
        "label_space": list(model.label_space),
        "trees": [_encode_tree(t) for t in model.trees],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path: str | Path) -> ForestModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"unreadable model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path} is not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    try:
        trees = tuple(_decode_tree(t) for t in doc["trees"])
        schema = FeatureSchema(tuple(doc["schema"]["names"]), tuple(doc["schema"]["pruned"]))
        return ForestModel(
            trees, doc["n_trees"], doc["max_depth"], doc["min_samples_leaf"], doc["bootstrap"],
            doc["max_features"], schema, tuple(doc["label_space"]), doc["seed"],
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}") from exc
