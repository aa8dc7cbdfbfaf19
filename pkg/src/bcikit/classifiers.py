"""Five small two-class classifier families behind one train/predict API.

All of them are written out directly (no ML library): L2 logistic regression
trained by gradient descent with Armijo backtracking, a linear soft-margin
SVM trained by deterministic full-batch subgradient descent, k-nearest
neighbours, shrinkage QDA, and a depth-limited Gini decision tree.  Features
are standardized inside ``train`` using statistics of the training rows only,
so predictions are invariant to per-feature affine rescaling of the inputs.

Model selection (``select_best``) scores each family by grouped
cross-validation with majority voting per group and breaks ties by the fixed
family order of ``FAMILY_ORDER``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import linalg as _sla

from .config import ClassifierConfig
from .core import Truth


class ModelFamily(str, Enum):
    LOGREG_L2 = "logreg_l2"
    LINEAR_SVM = "linear_svm"
    KNN = "knn"
    QDA = "qda"
    DECISION_TREE = "decision_tree"


#: deterministic tie-break order for model selection
FAMILY_ORDER: tuple[ModelFamily, ...] = (
    ModelFamily.LOGREG_L2,
    ModelFamily.LINEAR_SVM,
    ModelFamily.KNN,
    ModelFamily.QDA,
    ModelFamily.DECISION_TREE,
)


@dataclass(frozen=True)
class FeatureMatrix:
    """Feature rows with per-row labels and group ids (one group = one trial)."""

    rows: np.ndarray
    labels: tuple[Truth, ...]
    group_ids: tuple[int, ...]

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.float64)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", tuple(Truth(l) for l in self.labels))
        object.__setattr__(self, "group_ids", tuple(int(g) for g in self.group_ids))
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValueError("feature rows must be a non-empty 2-D array")
        if not np.isfinite(rows).all():
            raise ValueError("feature rows contain non-finite values")
        if len(self.labels) != rows.shape[0] or len(self.group_ids) != rows.shape[0]:
            raise ValueError("labels and group_ids must align with feature rows")

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.rows.shape[1])

    @property
    def y_signed(self) -> np.ndarray:
        """Labels as +1 (yes) / -1 (no)."""
        return np.where(np.array([l is Truth.YES for l in self.labels]), 1.0, -1.0)

    def groups(self) -> tuple[int, ...]:
        seen: list[int] = []
        for g in self.group_ids:
            if g not in seen:
                seen.append(g)
        return tuple(seen)

    def subset_by_groups(self, groups: Sequence[int]) -> "FeatureMatrix":
        wanted = set(int(g) for g in groups)
        idx = [i for i, g in enumerate(self.group_ids) if g in wanted]
        if not idx:
            raise ValueError("group subset selects no rows")
        return FeatureMatrix(
            rows=self.rows[idx],
            labels=tuple(self.labels[i] for i in idx),
            group_ids=tuple(self.group_ids[i] for i in idx),
        )


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, rows: np.ndarray) -> "Standardizer":
        mean = rows.mean(axis=0)
        std = rows.std(axis=0)
        std = np.where(std > 0, std, 1.0)  # constant features pass through as zeros
        return cls(mean=mean, std=std)

    def transform(self, rows: np.ndarray) -> np.ndarray:
        return (np.asarray(rows, dtype=np.float64) - self.mean) / self.std


@dataclass(frozen=True)
class TrainedModel:
    """A fitted classifier: family tag, input standardizer, family params.

    ``train_group_ids`` records which trial groups contributed training rows
    so that evaluation can refuse test rows from those groups.
    """

    family: ModelFamily
    standardizer: Standardizer
    params: dict
    train_group_ids: tuple[int, ...] = field(default_factory=tuple)


def logreg_loss_grad(
    w: np.ndarray, b: float, rows: np.ndarray, y: np.ndarray, lam: float
) -> tuple[float, np.ndarray, float]:
    """Regularized logistic loss and its exact gradient.

    loss = mean(log(1 + exp(-y (Xw + b)))) + (lam / 2) ||w||^2, bias excluded
    from the penalty.  Public so the gradient can be verified independently
    against finite differences.
    """
    margins = y * (rows @ w + b)
    loss = float(np.mean(np.logaddexp(0.0, -margins)) + 0.5 * lam * (w @ w))
    # d/dm log(1+exp(-m)) = -sigmoid(-m)
    sig = 1.0 / (1.0 + np.exp(np.clip(margins, -500, 500)))
    grad_w = -(rows.T @ (y * sig)) / rows.shape[0] + lam * w
    grad_b = float(-np.mean(y * sig))
    return loss, grad_w, grad_b


def _train_logreg(rows: np.ndarray, y: np.ndarray, hp: Mapping) -> dict:
    lam = float(hp.get("lam", 1.0))
    max_iter = int(hp.get("max_iter", 500))
    tol = float(hp.get("tol", 1e-8))
    if lam < 0:
        raise ValueError("lam must be >= 0")
    w = np.zeros(rows.shape[1])
    b = 0.0
    loss, grad_w, grad_b = logreg_loss_grad(w, b, rows, y, lam)
    loss_path = [loss]
    for _ in range(max_iter):
        gnorm2 = float(grad_w @ grad_w) + grad_b**2
        if math.sqrt(gnorm2) < tol:
            break
        step = 1.0
        while step > 1e-14:
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            loss_new, gw_new, gb_new = logreg_loss_grad(w_new, b_new, rows, y, lam)
            if loss_new <= loss - 1e-4 * step * gnorm2:  # Armijo sufficient decrease
                break
            step *= 0.5
        else:
            break
        w, b, loss, grad_w, grad_b = w_new, b_new, loss_new, gw_new, gb_new
        loss_path.append(loss)
    return {"w": w, "b": float(b), "lam": lam, "loss_path": loss_path}


def _train_svm(rows: np.ndarray, y: np.ndarray, hp: Mapping) -> dict:
    c = float(hp.get("c", 1.0))
    iters = int(hp.get("iters", 1000))
    if c <= 0:
        raise ValueError("c must be positive")
    lam = 1.0 / c
    n = rows.shape[0]
    w = np.zeros(rows.shape[1])
    b = 0.0

    def objective(w_: np.ndarray, b_: float) -> float:
        hinge = np.maximum(0.0, 1.0 - y * (rows @ w_ + b_))
        return 0.5 * lam * float(w_ @ w_) + float(hinge.mean())

    best = (objective(w, b), w.copy(), b)
    for t in range(1, iters + 1):
        margins = y * (rows @ w + b)
        active = margins < 1.0
        grad_w = lam * w - (rows[active].T @ y[active]) / n if active.any() else lam * w
        grad_b = -float(y[active].sum()) / n if active.any() else 0.0
        step = 1.0 / (lam * (t + 1))
        w = w - step * grad_w
        b = b - step * grad_b
        obj = objective(w, b)
        if obj < best[0]:
            best = (obj, w.copy(), b)
    _, w, b = best
    return {"w": w, "b": float(b), "c": c}


def _train_knn(rows: np.ndarray, labels: tuple[Truth, ...], hp: Mapping) -> dict:
    k = int(hp.get("k", 5))
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > rows.shape[0]:
        raise ValueError(f"k={k} exceeds the {rows.shape[0]} training rows")
    return {"k": k, "train_rows": rows, "train_labels": [l.value for l in labels]}


def _class_mean_cov(rows: np.ndarray, shrinkage: float) -> tuple[np.ndarray, np.ndarray]:
    if rows.shape[0] < 2:
        raise ValueError("qda needs at least 2 samples per class")
    mean = rows.mean(axis=0)
    centered = rows - mean
    cov = centered.T @ centered / (rows.shape[0] - 1)
    d = rows.shape[1]
    target = (np.trace(cov) / d) * np.eye(d)
    shrunk = (1.0 - shrinkage) * cov + shrinkage * target
    if not np.trace(shrunk) > 0:
        raise ValueError("qda covariance not computable: a class has zero variance")
    try:
        np.linalg.cholesky(shrunk)
    except np.linalg.LinAlgError:
        raise ValueError(
            "qda covariance not positive definite; increase shrinkage or add samples"
        ) from None
    return mean, shrunk


def _train_qda(rows: np.ndarray, labels: tuple[Truth, ...], hp: Mapping) -> dict:
    shrinkage = float(hp.get("shrinkage", 0.1))
    if not (0.0 <= shrinkage <= 1.0):
        raise ValueError("shrinkage must be in [0, 1]")
    yes_mask = np.array([l is Truth.YES for l in labels])
    mean_yes, cov_yes = _class_mean_cov(rows[yes_mask], shrinkage)
    mean_no, cov_no = _class_mean_cov(rows[~yes_mask], shrinkage)
    n = rows.shape[0]
    return {
        "mean_yes": mean_yes,
        "mean_no": mean_no,
        "cov_yes": cov_yes,
        "cov_no": cov_no,
        "log_prior_yes": float(np.log(yes_mask.sum() / n)),
        "log_prior_no": float(np.log((~yes_mask).sum() / n)),
        "shrinkage": shrinkage,
    }


def _gini(n_yes: np.ndarray, n_total: np.ndarray) -> np.ndarray:
    p = np.divide(n_yes, n_total, out=np.zeros_like(n_yes, dtype=float), where=n_total > 0)
    return 1.0 - p**2 - (1.0 - p) ** 2


def _build_tree(rows: np.ndarray, yes: np.ndarray, depth: int, max_depth: int) -> dict:
    n = rows.shape[0]
    n_yes = int(yes.sum())
    majority = "yes" if n_yes * 2 >= n else "no"
    parent_gini = float(_gini(np.array([n_yes]), np.array([n]))[0])
    if depth >= max_depth or n < 2 or n_yes == 0 or n_yes == n:
        return {"leaf": majority}

    best: tuple[float, int, float] | None = None  # (weighted gini, feature, threshold)
    for j in range(rows.shape[1]):
        order = np.argsort(rows[:, j], kind="stable")
        xs = rows[order, j]
        ys = yes[order].astype(float)
        cut = np.flatnonzero(xs[:-1] < xs[1:])  # boundaries between distinct values
        if cut.size == 0:
            continue
        yes_left = np.cumsum(ys)[cut]
        n_left = (cut + 1).astype(float)
        n_right = n - n_left
        yes_right = n_yes - yes_left
        weighted = (n_left * _gini(yes_left, n_left) + n_right * _gini(yes_right, n_right)) / n
        i = int(np.argmin(weighted))  # first minimum: smallest threshold wins ties
        cand = (float(weighted[i]), j, float((xs[cut[i]] + xs[cut[i] + 1]) / 2.0))
        if best is None or cand[0] < best[0]:
            best = cand
    if best is None or best[0] >= parent_gini:
        return {"leaf": majority}
    _, feature, threshold = best
    mask = rows[:, feature] <= threshold
    return {
        "feature": feature,
        "threshold": threshold,
        "left": _build_tree(rows[mask], yes[mask], depth + 1, max_depth),
        "right": _build_tree(rows[~mask], yes[~mask], depth + 1, max_depth),
    }


def _train_tree(rows: np.ndarray, labels: tuple[Truth, ...], hp: Mapping) -> dict:
    max_depth = int(hp.get("max_depth", 5))
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    yes = np.array([l is Truth.YES for l in labels])
    return {"max_depth": max_depth, "tree": _build_tree(rows, yes, 0, max_depth)}


def train(
    data: FeatureMatrix,
    family: ModelFamily,
    hyperparams: Mapping | None = None,
    seed: int = 0,
) -> TrainedModel:
    """Fit one classifier family on a feature matrix.

    Training is deterministic for a given (data, family, hyperparams, seed).
    Raises ValueError when the data holds a single class, or for family
    preconditions such as k exceeding the number of training rows.
    """
    family = ModelFamily(family)
    hp = dict(hyperparams or {})
    labels = data.labels
    if len(set(labels)) < 2:
        raise ValueError("training data must contain both classes")
    standardizer = Standardizer.fit(data.rows)
    rows = standardizer.transform(data.rows)
    y = data.y_signed
    if family is ModelFamily.LOGREG_L2:
        params = _train_logreg(rows, y, hp)
    elif family is ModelFamily.LINEAR_SVM:
        params = _train_svm(rows, y, hp)
    elif family is ModelFamily.KNN:
        params = _train_knn(rows, labels, hp)
    elif family is ModelFamily.QDA:
        params = _train_qda(rows, labels, hp)
    else:
        params = _train_tree(rows, labels, hp)
    return TrainedModel(
        family=family,
        standardizer=standardizer,
        params=params,
        train_group_ids=tuple(sorted(set(data.group_ids))),
    )


def _predict_tree(tree: dict, row: np.ndarray) -> Truth:
    node = tree
    while "leaf" not in node:
        node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
    return Truth(node["leaf"])


def _qda_discriminant(rows: np.ndarray, mean: np.ndarray, cov: np.ndarray, log_prior: float) -> np.ndarray:
    chol = np.linalg.cholesky(cov)
    diff = rows - mean
    z = _sla.solve_triangular(chol, diff.T, lower=True)
    maha = np.sum(z**2, axis=0)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return -0.5 * (logdet + maha) + log_prior


def predict(model: TrainedModel, rows: np.ndarray) -> list[Truth]:
    """Predict one label per row.  Rows must be finite with the trained width."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.shape[1] != model.standardizer.mean.shape[0]:
        raise ValueError(
            f"rows have {rows.shape[1]} features, model expects "
            f"{model.standardizer.mean.shape[0]}"
        )
    if not np.isfinite(rows).all():
        raise ValueError("prediction rows contain non-finite values")
    x = model.standardizer.transform(rows)
    p = model.params
    if model.family is ModelFamily.LOGREG_L2 or model.family is ModelFamily.LINEAR_SVM:
        scores = x @ np.asarray(p["w"], dtype=np.float64) + p["b"]
        return [Truth.YES if s >= 0 else Truth.NO for s in scores]
    if model.family is ModelFamily.KNN:
        train_rows = np.asarray(p["train_rows"], dtype=np.float64)
        train_yes = np.array([l == "yes" for l in p["train_labels"]])
        d2 = ((x[:, None, :] - train_rows[None, :, :]) ** 2).sum(axis=2)
        out: list[Truth] = []
        for drow in d2:
            nearest = np.argsort(drow, kind="stable")[: p["k"]]
            votes = int(train_yes[nearest].sum())
            out.append(Truth.YES if votes * 2 >= p["k"] else Truth.NO)
        return out
    if model.family is ModelFamily.QDA:
        d_yes = _qda_discriminant(
            x, np.asarray(p["mean_yes"]), np.asarray(p["cov_yes"]), p["log_prior_yes"]
        )
        d_no = _qda_discriminant(
            x, np.asarray(p["mean_no"]), np.asarray(p["cov_no"]), p["log_prior_no"]
        )
        return [Truth.YES if a >= b else Truth.NO for a, b in zip(d_yes, d_no)]
    return [_predict_tree(p["tree"], row) for row in x]


def group_majority_votes(preds: Sequence[Truth], group_ids: Sequence[int]) -> dict[int, Truth]:
    """Majority label per group; exact ties resolve to yes."""
    counts: dict[int, int] = {}
    totals: dict[int, int] = {}
    for pred, gid in zip(preds, group_ids):
        gid = int(gid)
        totals[gid] = totals.get(gid, 0) + 1
        counts[gid] = counts.get(gid, 0) + (1 if Truth(pred) is Truth.YES else 0)
    return {
        gid: Truth.YES if counts[gid] * 2 >= totals[gid] else Truth.NO for gid in totals
    }


def group_majority_accuracy(model: TrainedModel, data: FeatureMatrix) -> float:
    """Share of groups whose majority-voted prediction matches the group label."""
    preds = predict(model, data.rows)
    votes = group_majority_votes(preds, data.group_ids)
    truth_by_group: dict[int, Truth] = {}
    for label, gid in zip(data.labels, data.group_ids):
        truth_by_group.setdefault(gid, label)
    hits = sum(1 for gid, t in truth_by_group.items() if votes[gid] is t)
    return hits / len(truth_by_group)


def _default_hyperparams(config: ClassifierConfig) -> dict[ModelFamily, dict]:
    return {
        ModelFamily.LOGREG_L2: {"lam": config.logreg_lambda},
        ModelFamily.LINEAR_SVM: {"c": config.svm_c},
        ModelFamily.KNN: {"k": config.knn_k},
        ModelFamily.QDA: {"shrinkage": config.qda_shrinkage},
        ModelFamily.DECISION_TREE: {"max_depth": config.tree_max_depth},
    }


def select_best(
    data: FeatureMatrix,
    folds: Sequence[Sequence[int]],
    config: ClassifierConfig | None = None,
    seed: int = 0,
) -> tuple[ModelFamily, TrainedModel, float]:
    """Pick the family with the best grouped-CV accuracy and refit it on all data.

    Each fold is a held-out set of group ids; the model trains on the other
    groups and is scored by per-group majority vote.  Mean accuracy across
    folds ranks the families; ties go to the earliest entry in FAMILY_ORDER.
    Returns (family, refit model, winning mean CV accuracy).
    """
    config = config or ClassifierConfig()
    folds = [tuple(int(g) for g in fold) for fold in folds]
    if len(folds) < 2:
        raise ValueError("select_best needs at least 2 folds")
    all_groups = set(data.group_ids)
    for fold in folds:
        if not fold:
            raise ValueError("empty cross-validation fold")
        missing = set(fold) - all_groups
        if missing:
            raise ValueError(f"fold references unknown groups: {sorted(missing)}")
    hp = _default_hyperparams(config)
    splits: list[tuple[FeatureMatrix, FeatureMatrix]] = []
    for fold in folds:
        train_groups = sorted(all_groups - set(fold))
        train_fm = data.subset_by_groups(train_groups)
        if len(set(train_fm.labels)) < 2:
            raise ValueError("degenerate fold: training side holds a single class")
        splits.append((train_fm, data.subset_by_groups(fold)))

    best_family: ModelFamily | None = None
    best_acc = -1.0
    for family in FAMILY_ORDER:
        accs = [
            group_majority_accuracy(train(train_fm, family, hp[family], seed=seed), test_fm)
            for train_fm, test_fm in splits
        ]
        acc = float(np.mean(accs))
        if acc > best_acc:
            best_family, best_acc = family, acc
    assert best_family is not None
    final = train(data, best_family, hp[best_family], seed=seed)
    return best_family, final, best_acc


def _encode(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def save_model(model: TrainedModel, path: str | Path) -> None:
    """Serialize a trained model as versioned, canonical JSON."""
    doc = {
        "family": model.family.value,
        "format": "bcikit-model",
        "params": _encode(model.params),
        "standardizer": {
            "mean": model.standardizer.mean.tolist(),
            "std": model.standardizer.std.tolist(),
        },
        "train_group_ids": list(model.train_group_ids),
        "version": 1,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def load_model(path: str | Path) -> TrainedModel:
    """Load a model written by :func:`save_model`; predictions round-trip exactly."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != "bcikit-model" or doc.get("version") != 1:
        raise ValueError(f"{path}: not a model file (or unsupported version)")
    return TrainedModel(
        family=ModelFamily(doc["family"]),
        standardizer=Standardizer(
            mean=np.asarray(doc["standardizer"]["mean"], dtype=np.float64),
            std=np.asarray(doc["standardizer"]["std"], dtype=np.float64),
        ),
        params=doc["params"],
        train_group_ids=tuple(int(g) for g in doc.get("train_group_ids", ())),
    )
