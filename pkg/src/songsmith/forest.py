"""Random-forest classifier built from scratch on Gini-split CART trees.

Trees grow on bootstrap samples (n draws with replacement, one derived seed
per tree), drawing ``mtry`` candidate features without replacement at every
node.  Numeric features split on midpoints between consecutive distinct
values; categorical features try every proper subset when a node sees at
most ten categories and one-vs-rest otherwise.  Ties between equally good
splits resolve to the first feature in schema order, then the earliest
candidate, so training is bit-reproducible from (dataset, params, seed).

Prediction averages one majority vote per tree into a distribution over the
training labels.  Importance is the classic mean decrease in Gini: the
count-weighted impurity decrease of every split, summed per feature and
averaged over trees.

Models serialize to a small versioned binary container: magic ``MFRF``, a
big-endian u16 version, then three length-prefixed canonical-JSON blocks
(header, schema + labels, trees).
"""

from __future__ import annotations

import json
import logging
import math
import random
import struct
from dataclasses import dataclass

import numpy as np

from .features import Dataset

log = logging.getLogger(__name__)

MODEL_MAGIC = b"MFRF"
MODEL_VERSION = 1

_MIN_DECREASE = 1e-12
_EXHAUSTIVE_MAX_CATEGORIES = 10


class ModelFormatError(ValueError):
    """Raised for byte streams that are not a readable model container."""


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 500
    mtry: int | None = None  # None: floor(sqrt(feature count))
    min_leaf: int = 1


@dataclass
class ClassDistribution:
    """Probabilities over class labels; `labels` fixes the global tie order."""

    probabilities: dict
    labels: tuple

    def argmax(self) -> str:
        best = max(self.probabilities.values())
        for label in self.labels:
            if self.probabilities.get(label, 0.0) == best:
                return label
        raise ValueError("empty distribution")


@dataclass
class EvaluationReport:
    accuracy: float
    labels: list[str]
    confusion: list[list[int]]  # rows true, columns predicted
    per_class_error: dict


@dataclass
class RandomForestModel:
    feature_names: list[str]
    feature_kinds: list[str]
    categories: dict  # categorical feature -> ordered value list
    class_labels: list[str]
    params: ForestParams
    seed: int
    trees: list[dict]
    importance_scores: dict
    degenerate: bool = False
    target: str = ""

    def category_code(self, name: str, value) -> int:
        try:
            return self.categories[name].index(value)
        except ValueError:
            return -1


def gini(counts) -> float:
    """Gini impurity 1 - sum((c/total)^2) of a class-count vector."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise ValueError("gini of an empty count vector")
    p = counts / total
    return float(1.0 - np.dot(p, p))


def stratified_split(dataset: Dataset, train_fraction: float, seed: int):
    """Per-class split; round(fraction * count) rows to train, rest to test.

    Singleton classes go entirely to train.  Both halves keep the parent's
    label vocabulary so absent classes surface as NaN in evaluation.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be strictly between 0 and 1")
    if not dataset.rows:
        raise ValueError("cannot split an empty dataset")
    rng = random.Random(seed)
    by_class: dict[str, list[int]] = {label: [] for label in dataset.class_labels}
    for i, row in enumerate(dataset.rows):
        by_class.setdefault(row[dataset.target], []).append(i)
    train_idx, test_idx = [], []
    for label in sorted(by_class):
        indices = by_class[label]
        if len(indices) == 1:
            train_idx.extend(indices)
            continue
        shuffled = indices[:]
        rng.shuffle(shuffled)
        n_train = math.floor(train_fraction * len(indices) + 0.5)
        train_idx.extend(shuffled[:n_train])
        test_idx.extend(shuffled[n_train:])
    train_idx.sort()
    test_idx.sort()

    def subset(indices):
        return Dataset(
            schema=dataset.schema,
            rows=[dataset.rows[i] for i in indices],
            target=dataset.target,
            class_labels=list(dataset.class_labels),
        )

    return subset(train_idx), subset(test_idx)


# -- training ---------------------------------------------------------------


def _encode_dataset(dataset: Dataset):
    """Numeric matrix with categorical values as integer codes."""
    names = dataset.feature_names
    kinds = [k for _, k in dataset.schema]
    categories = {}
    for (name, kind) in dataset.schema:
        if kind == "cat":
            categories[name] = sorted({row[name] for row in dataset.rows}, key=repr)
    n, p = len(dataset.rows), len(names)
    X = np.empty((n, p), dtype=np.float64)
    for j, (name, kind) in enumerate(dataset.schema):
        if kind == "num":
            X[:, j] = [float(row[name]) for row in dataset.rows]
        else:
            code = {v: i for i, v in enumerate(categories[name])}
            X[:, j] = [code[row[name]] for row in dataset.rows]
    label_code = {label: i for i, label in enumerate(dataset.class_labels)}
    y = np.array([label_code[row[dataset.target]] for row in dataset.rows], dtype=np.int64)
    return X, y, categories, kinds


def _node_gini_terms(counts: np.ndarray) -> float:
    total = counts.sum()
    return float(total - (counts * counts).sum() / total) if total else 0.0


def _best_numeric_split(values, y_node, n_classes, min_leaf):
    order = np.argsort(values, kind="stable")
    v = values[order]
    if v[0] == v[-1]:
        return None
    onehot = np.zeros((len(v), n_classes))
    onehot[np.arange(len(v)), y_node[order]] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]
    total = onehot.sum(axis=0)
    right = total - left
    nl = left.sum(axis=1)
    nr = right.sum(axis=1)
    valid = (v[:-1] < v[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
    if not valid.any():
        return None
    with np.errstate(invalid="ignore", divide="ignore"):
        child_terms = (nl - (left * left).sum(axis=1) / np.maximum(nl, 1)) + (
            nr - (right * right).sum(axis=1) / np.maximum(nr, 1)
        )
    child_terms[~valid] = np.inf
    best = int(np.argmin(child_terms))
    parent_term = _node_gini_terms(total)
    decrease = parent_term - float(child_terms[best])
    threshold = float((v[best] + v[best + 1]) / 2.0)
    return decrease, ("num", threshold), values <= threshold


def _best_categorical_split(values, y_node, n_classes, min_leaf):
    codes = values.astype(np.int64)
    cats = np.unique(codes)
    k = len(cats)
    if k < 2:
        return None
    counts = np.zeros((k, n_classes))
    local = np.searchsorted(cats, codes)
    np.add.at(counts, (local, y_node), 1.0)
    total = counts.sum(axis=0)
    parent_term = _node_gini_terms(total)

    if k <= _EXHAUSTIVE_MAX_CATEGORIES:
        masks = [m for m in range(1, 2 ** k - 1) if m & 1]
    else:
        masks = [1 << i for i in range(k)]
    mask_matrix = np.array(
        [[(m >> i) & 1 for i in range(k)] for m in masks], dtype=np.float64
    )
    left = mask_matrix @ counts
    right = total - left
    nl = left.sum(axis=1)
    nr = right.sum(axis=1)
    valid = (nl >= min_leaf) & (nr >= min_leaf)
    if not valid.any():
        return None
    child_terms = (nl - (left * left).sum(axis=1) / np.maximum(nl, 1)) + (
        nr - (right * right).sum(axis=1) / np.maximum(nr, 1)
    )
    child_terms[~valid] = np.inf
    best = int(np.argmin(child_terms))
    decrease = parent_term - float(child_terms[best])
    chosen = [int(cats[i]) for i in range(k) if (masks[best] >> i) & 1]
    go_left = np.isin(codes, chosen)
    return decrease, ("cat", chosen), go_left


def _grow_tree(X, y, indices, kinds, n_classes, mtry, min_leaf, rng):
    counts = np.bincount(y[indices], minlength=n_classes)

    def leaf():
        return {"leaf": counts.tolist()}

    if len(indices) < 2 * min_leaf or counts.max() == counts.sum():
        return leaf()

    # Draw mtry candidates; if none of them yields a usable split, keep
    # drawing the remaining features (in the same permutation) until one
    # does, so impure nodes only become leaves when no feature can split.
    p = X.shape[1]
    permuted = rng.permutation(p)
    y_node = y[indices]
    best = None
    for rank, j in enumerate(permuted):
        if rank >= mtry and best is not None:
            break
        values = X[indices, j]
        if kinds[j] == "num":
            found = _best_numeric_split(values, y_node, n_classes, min_leaf)
        else:
            found = _best_categorical_split(values, y_node, n_classes, min_leaf)
        if found is None:
            continue
        decrease, rule, go_left = found
        if decrease > _MIN_DECREASE and (
            best is None
            or decrease > best[0]
            or (decrease == best[0] and int(j) < best[1])
        ):
            best = (decrease, int(j), rule, go_left)
    if best is None:
        return leaf()

    decrease, feature, rule, go_left = best
    left_idx = indices[go_left]
    right_idx = indices[~go_left]
    node = {
        "feature": feature,
        "n": int(len(indices)),
        "n_left": int(len(left_idx)),
        "n_right": int(len(right_idx)),
        "decrease": decrease,
        "left": _grow_tree(X, y, left_idx, kinds, n_classes, mtry, min_leaf, rng),
        "right": _grow_tree(X, y, right_idx, kinds, n_classes, mtry, min_leaf, rng),
    }
    if rule[0] == "num":
        node["threshold"] = rule[1]
    else:
        node["cats"] = rule[1]
    return node


def train_forest(dataset: Dataset, params: ForestParams = ForestParams(),
                 seed: int = 0) -> RandomForestModel:
    """Train a deterministic Gini random forest on a dataset."""
    if not dataset.rows:
        raise ValueError("cannot train on an empty dataset")
    if params.n_trees < 1:
        raise ValueError("need at least one tree")
    X, y, categories, kinds = _encode_dataset(dataset)
    n, p = X.shape
    mtry = params.mtry if params.mtry is not None else max(1, int(math.isqrt(p)))
    n_classes = len(dataset.class_labels)

    degenerate = n < 2
    if degenerate:
        log.warning("training set has a single row; returning a single-leaf forest")

    trees = []
    for t in range(params.n_trees):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(t,)))
        bootstrap = rng.integers(0, n, size=n)
        trees.append(_grow_tree(
            X, y, np.sort(bootstrap), kinds, n_classes, mtry, params.min_leaf, rng,
        ))

    importance = {name: 0.0 for name in dataset.feature_names}
    for tree in trees:
        _accumulate_importance(tree, dataset.feature_names, importance)
    importance = {k: v / params.n_trees for k, v in importance.items()}

    return RandomForestModel(
        feature_names=list(dataset.feature_names),
        feature_kinds=list(kinds),
        categories=categories,
        class_labels=list(dataset.class_labels),
        params=params,
        seed=seed,
        trees=trees,
        importance_scores=importance,
        degenerate=degenerate,
        target=dataset.target,
    )


def _accumulate_importance(node, names, importance):
    if "leaf" in node:
        return
    importance[names[node["feature"]]] += node["decrease"]
    _accumulate_importance(node["left"], names, importance)
    _accumulate_importance(node["right"], names, importance)


# -- prediction -------------------------------------------------------------


def _encode_row(model: RandomForestModel, row: dict) -> list[float]:
    encoded = []
    for name, kind in zip(model.feature_names, model.feature_kinds):
        if name not in row:
            raise ValueError(f"row is missing feature {name!r}")
        if kind == "num":
            encoded.append(float(row[name]))
        else:
            encoded.append(float(model.category_code(name, row[name])))
    return encoded


def _tree_vote(node, x) -> int:
    while "leaf" not in node:
        value = x[node["feature"]]
        if "threshold" in node:
            node = node["left"] if value <= node["threshold"] else node["right"]
        else:
            code = int(value)
            if code < 0:
                # Unseen category: follow the larger child.
                node = node["left"] if node["n_left"] >= node["n_right"] else node["right"]
            else:
                node = node["left"] if code in node["cats"] else node["right"]
    counts = node["leaf"]
    return max(range(len(counts)), key=lambda i: (counts[i], -i))


def predict_distribution(model: RandomForestModel, row: dict) -> ClassDistribution:
    """Fraction of trees voting each label, as a distribution."""
    x = _encode_row(model, row)
    votes = [0] * len(model.class_labels)
    for tree in model.trees:
        votes[_tree_vote(tree, x)] += 1
    n = len(model.trees)
    probs = {
        label: votes[i] / n
        for i, label in enumerate(model.class_labels)
        if votes[i] > 0
    }
    return ClassDistribution(probabilities=probs, labels=tuple(model.class_labels))


def evaluate(model: RandomForestModel, test: Dataset) -> EvaluationReport:
    """Argmax accuracy, confusion matrix and per-class error on a test set."""
    if not test.rows:
        raise ValueError("cannot evaluate on an empty test set")
    if test.feature_names != model.feature_names:
        raise ValueError("test schema does not match the model")
    labels = list(model.class_labels)
    extra = sorted({row[test.target] for row in test.rows} - set(labels))
    labels += extra
    index = {label: i for i, label in enumerate(labels)}
    matrix = [[0] * len(labels) for _ in labels]
    correct = 0
    for row in test.rows:
        predicted = predict_distribution(model, row).argmax()
        true = row[test.target]
        matrix[index[true]][index[predicted]] += 1
        if predicted == true:
            correct += 1
    per_class_error = {}
    for label in labels:
        i = index[label]
        row_total = sum(matrix[i])
        if row_total == 0:
            per_class_error[label] = float("nan")
        else:
            per_class_error[label] = 1.0 - matrix[i][i] / row_total
    return EvaluationReport(
        accuracy=correct / len(test.rows),
        labels=labels,
        confusion=matrix,
        per_class_error=per_class_error,
    )


def importance(model: RandomForestModel) -> list[tuple[str, float]]:
    """Mean-decrease-Gini scores, highest first; unused features score 0."""
    return sorted(model.importance_scores.items(), key=lambda kv: (-kv[1], kv[0]))


def report_to_text(report: EvaluationReport) -> str:
    """Confusion matrix as tab-separated text: rows true, columns predicted,
    final column the per-class error (NaN when a class is absent)."""
    lines = ["\t".join([""] + report.labels + ["class_error"])]
    for i, label in enumerate(report.labels):
        err = report.per_class_error[label]
        err_text = "NaN" if math.isnan(err) else f"{err:.4f}"
        lines.append("\t".join([label] + [str(c) for c in report.confusion[i]] + [err_text]))
    lines.append(f"accuracy\t{report.accuracy:.4f}")
    return "\n".join(lines) + "\n"


# -- serialization ----------------------------------------------------------


def _json_block(obj) -> bytes:
    data = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return struct.pack(">I", len(data)) + data


def serialize_model(model: RandomForestModel) -> bytes:
    header = {
        "n_trees": model.params.n_trees,
        "mtry": model.params.mtry,
        "min_leaf": model.params.min_leaf,
        "seed": model.seed,
        "degenerate": model.degenerate,
        "target": model.target,
        "importance": model.importance_scores,
    }
    schema = {
        "features": model.feature_names,
        "kinds": model.feature_kinds,
        "categories": model.categories,
        "labels": model.class_labels,
    }
    return (
        MODEL_MAGIC
        + struct.pack(">H", MODEL_VERSION)
        + _json_block(header)
        + _json_block(schema)
        + _json_block(model.trees)
    )


def deserialize_model(data: bytes) -> RandomForestModel:
    if len(data) < 6 or data[:4] != MODEL_MAGIC:
        raise ModelFormatError("not a model container (bad magic bytes)")
    (version,) = struct.unpack(">H", data[4:6])
    if version != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    pos = 6
    blocks = []
    for _ in range(3):
        if pos + 4 > len(data):
            raise ModelFormatError("truncated model container")
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        pos += 4
        if pos + length > len(data):
            raise ModelFormatError("truncated model container")
        try:
            blocks.append(json.loads(data[pos:pos + length]))
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"corrupt model block: {exc}") from exc
        pos += length
    header, schema, trees = blocks
    return RandomForestModel(
        feature_names=schema["features"],
        feature_kinds=schema["kinds"],
        categories=schema["categories"],
        class_labels=schema["labels"],
        params=ForestParams(
            n_trees=header["n_trees"], mtry=header["mtry"], min_leaf=header["min_leaf"],
        ),
        seed=header["seed"],
        trees=trees,
        importance_scores=header["importance"],
        degenerate=header["degenerate"],
        target=header["target"],
    )
