"""Random forest classifier: Gini CART trees grown to purity, bootstrap bagging.

Split search per node walks candidate features in a seeded random order and
keeps the first strictly-best weighted-Gini split, with thresholds at
midpoints between consecutive distinct values.  If the drawn candidates
cannot split an impure node, the remaining features are tried before giving
up, so trees only stop short of purity on identical-feature conflicts.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from ..pipeline import FeatureKind
from .nets import TrainedModel


@dataclass(frozen=True)
class RFConfig:
    n_estimators: int = 60
    bootstrap: bool = True
    max_features: int | str | None = "sqrt"  # "sqrt", an int, or None for all
    seed: int = 0


def _resolve_max_features(max_features, n_features: int) -> int:
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, int(np.floor(np.sqrt(n_features))))
    m = int(max_features)
    if not 1 <= m <= n_features:
        raise ValueError(f"max_features {m} outside [1, {n_features}]")
    return m


def _best_split_on_feature(col: np.ndarray, y: np.ndarray, n_classes: int):
    """Best (weighted_gini, threshold) on one feature, or None if unsplittable."""
    order = np.argsort(col, kind="stable")
    cs = col[order]
    ys = y[order]
    n = cs.shape[0]
    boundaries = np.flatnonzero(cs[1:] != cs[:-1]) + 1  # split before these positions
    if boundaries.size == 0:
        return None
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), ys] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]  # counts in first k samples, k = 1..n-1
    total = onehot.sum(axis=0)
    right = total - left
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    gini_left = 1.0 - ((left / n_left[:, None]) ** 2).sum(axis=1)
    gini_right = 1.0 - ((right / n_right[:, None]) ** 2).sum(axis=1)
    weighted = (n_left * gini_left + n_right * gini_right) / n
    cand = weighted[boundaries - 1]
    best = int(np.argmin(cand))  # first occurrence wins ties
    k = boundaries[best]
    threshold = (cs[k - 1] + cs[k]) / 2.0
    return float(cand[best]), float(threshold)


class DecisionTree:
    """CART tree stored as flat node arrays (feature -1 marks a leaf)."""

    def __init__(self, n_classes: int):
        self.n_classes = n_classes
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[int] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(-1)
        return len(self.feature) - 1

    def fit(self, X: np.ndarray, y: np.ndarray, max_features: int, rng: np.random.Generator):
        root = self._new_node()
        stack = [(root, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            ys = y[idx]
            counts = np.bincount(ys, minlength=self.n_classes)
            majority = int(np.argmax(counts))  # ties to the lowest class
            if counts.max() == idx.size:  # pure
                self.value[node] = majority
                continue
            split = self._search_split(X, ys, idx, max_features, rng)
            if split is None:
                self.value[node] = majority
                continue
            f, thr = split
            mask = X[idx, f] <= thr
            self.feature[node] = f
            self.threshold[node] = thr
            left = self._new_node()
            right = self._new_node()
            self.left[node] = left
            self.right[node] = right
            stack.append((right, idx[~mask]))
            stack.append((left, idx[mask]))
        return self

    def _search_split(self, X, ys, idx, max_features, rng):
        d = X.shape[1]
        order = np.arange(d) if max_features >= d else rng.permutation(d)
        best = None
        for tried, f in enumerate(order, start=1):
            found = _best_split_on_feature(X[idx, f], ys, self.n_classes)
            if found is not None:
                gini, thr = found
                if best is None or gini < best[0]:
                    best = (gini, f, thr)
            if tried >= max_features and best is not None:
                break
        if best is None:
            return None
        return best[1], best[2]

    def predict(self, X: np.ndarray) -> np.ndarray:
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        value = np.asarray(self.value)
        out = np.empty(X.shape[0], dtype=np.int64)
        for i in range(X.shape[0]):
            node = 0
            while feature[node] >= 0:
                node = left[node] if X[i, feature[node]] <= threshold[node] else right[node]
            out[i] = value[node]
        return out

    @property
    def depth(self) -> int:
        depths = {0: 0}
        best = 0
        for node in range(len(self.feature)):
            d = depths[node]
            best = max(best, d)
            if self.feature[node] >= 0:
                depths[self.left[node]] = d + 1
                depths[self.right[node]] = d + 1
        return best

    def to_arrays(self) -> dict[str, np.ndarray]:
        return {
            "feature": np.asarray(self.feature, dtype=np.int32),
            "threshold": np.asarray(self.threshold, dtype=np.float64),
            "left": np.asarray(self.left, dtype=np.int32),
            "right": np.asarray(self.right, dtype=np.int32),
            "value": np.asarray(self.value, dtype=np.int32),
        }

    @classmethod
    def from_arrays(cls, arrays: dict[str, np.ndarray], n_classes: int) -> "DecisionTree":
        tree = cls(n_classes)
        tree.feature = [int(v) for v in arrays["feature"]]
        tree.threshold = [float(v) for v in arrays["threshold"]]
        tree.left = [int(v) for v in arrays["left"]]
        tree.right = [int(v) for v in arrays["right"]]
        tree.value = [int(v) for v in arrays["value"]]
        return tree


class RandomForest:
    def __init__(self, config: RFConfig, n_classes: int = 6):
        self.config = config
        self.n_classes = n_classes
        self.trees: list[DecisionTree] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.size == 0 or X.shape[0] == 0:
            raise ValueError("empty feature matrix")
        if y.max() >= self.n_classes:
            raise ValueError(f"label {y.max()} outside {self.n_classes} classes")
        m = _resolve_max_features(self.config.max_features, X.shape[1])
        n = X.shape[0]
        self.trees = []
        for child in np.random.SeedSequence(self.config.seed).spawn(self.config.n_estimators):
            rng = np.random.default_rng(child)
            idx = rng.integers(0, n, n) if self.config.bootstrap else np.arange(n)
            tree = DecisionTree(self.n_classes)
            tree.fit(X[idx], y[idx], m, rng)
            self.trees.append(tree)
        return self

    def _votes(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        votes = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            preds = tree.predict(X)
            votes[np.arange(X.shape[0]), preds] += 1.0
        return votes

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self._votes(X).argmax(axis=1)  # ties to the lowest class

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self._votes(X) / len(self.trees)

    def state_arrays(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for i, tree in enumerate(self.trees):
            for name, arr in tree.to_arrays().items():
                out[f"tree{i:03d}.{name}"] = arr
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        self.trees = []
        for i in range(self.config.n_estimators):
            tree_arrays = {
                name: arrays[f"tree{i:03d}.{name}"]
                for name in ("feature", "threshold", "left", "right", "value")
            }
            self.trees.append(DecisionTree.from_arrays(tree_arrays, self.n_classes))


def train_rf(
    X: np.ndarray,
    y: np.ndarray,
    config: RFConfig | None = None,
    feature_kind: FeatureKind | None = None,
    n_classes: int = 6,
) -> TrainedModel:
    config = config or RFConfig()
    forest = RandomForest(config, n_classes=n_classes).fit(X, y)
    return TrainedModel("rf", feature_kind, forest, config, None)
