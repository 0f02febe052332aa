"""Accuracy and fairness measures, and cross-validated fitness of a feature mask.

All five measures are "higher is better" ratios in [0, 1]:

* ``gm``          geometric mean of sensitivity and specificity
* ``dp``          1 - |P(pred=1 | s=0) - P(pred=1 | s=1)|
* ``consistency`` 1 - mean disagreement between a prediction and those of its k nearest neighbours
* ``fperbs``      1 - |FPR(s=0) - FPR(s=1)|
* ``fnerbs``      1 - |FNR(s=0) - FNR(s=1)|

A rate whose denominator is empty (e.g. no negatives in a group) is taken as 0
and the resulting :class:`FitnessVector` is marked ``degenerate``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import classifier
from .classifier import ForestParams
from .data import Dataset, FoldPlan

MEASURES = ("gm", "dp", "consistency", "fperbs", "fnerbs")
FAIRNESS_MEASURES = MEASURES[1:]


@dataclass(frozen=True)
class GroupConfusion:
    tp0: int
    fp0: int
    tn0: int
    fn0: int
    tp1: int
    fp1: int
    tn1: int
    fn1: int

    def pooled(self) -> tuple[int, int, int, int]:
        return (self.tp0 + self.tp1, self.fp0 + self.fp1,
                self.tn0 + self.tn1, self.fn0 + self.fn1)

    @property
    def total(self) -> int:
        return sum(self.pooled())


@dataclass(frozen=True)
class FitnessVector:
    gm: float
    dp: float
    consistency: float
    fperbs: float
    fnerbs: float
    degenerate: bool = False
    clamped: bool = False

    def __post_init__(self):
        for name in MEASURES:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def values(self) -> tuple[float, float, float, float, float]:
        return (self.gm, self.dp, self.consistency, self.fperbs, self.fnerbs)

    def fairness(self) -> tuple[float, float, float, float]:
        return (self.dp, self.consistency, self.fperbs, self.fnerbs)

    def mean_fairness(self) -> float:
        return math.fsum(self.fairness()) / 4.0

    def as_dict(self) -> dict:
        return {**dict(zip(MEASURES, self.values())),
                "degenerate": self.degenerate, "clamped": self.clamped}

    @classmethod
    def from_dict(cls, d: dict) -> "FitnessVector":
        return cls(*(float(d[m]) for m in MEASURES),
                   degenerate=bool(d.get("degenerate", False)),
                   clamped=bool(d.get("clamped", False)))


ZERO_FITNESS = FitnessVector(0.0, 0.0, 0.0, 0.0, 0.0)


def _check_lengths(*arrays):
    n = len(arrays[0])
    if any(len(a) != n for a in arrays):
        raise ValueError("input vectors differ in length")


def group_confusion(pred, actual, s) -> GroupConfusion:
    pred, actual, s = (np.asarray(a).astype(bool) for a in (pred, actual, s))
    _check_lengths(pred, actual, s)
    counts = []
    for g in (~s, s):
        p, a = pred[g], actual[g]
        counts += [int(np.sum(p & a)), int(np.sum(p & ~a)),
                   int(np.sum(~p & ~a)), int(np.sum(~p & a))]
    return GroupConfusion(*counts)


def _rate(num: int, den: int) -> tuple[float, bool]:
    if den == 0:
        return 0.0, True
    return num / den, False


def demographic_parity(pred, s) -> float:
    pred, s = np.asarray(pred), np.asarray(s).astype(bool)
    _check_lengths(pred, s)
    if s.all() or not s.any():
        raise ValueError("demographic parity needs both groups present")
    return 1.0 - abs(float(np.mean(pred[~s])) - float(np.mean(pred[s])))


def knn_indices(X: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest neighbours of every row (self excluded).

    Euclidean distance; ties are broken towards the lower row index.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < N, got k={k}, N={n}")
    out = np.empty((n, k), dtype=np.int64)
    chunk = max(1, 4_000_000 // max(1, n * X.shape[1]))
    for start in range(0, n, chunk):
        rows = np.arange(start, min(start + chunk, n))
        diff = X[rows, None, :] - X[None, :, :]
        d = np.einsum("ijk,ijk->ij", diff, diff)
        d[np.arange(len(rows)), rows] = np.inf
        part = np.argpartition(d, k - 1, axis=1)[:, :k]
        kth = np.take_along_axis(d, part, axis=1).max(axis=1)
        for r in range(len(rows)):
            row = d[r]
            below = np.flatnonzero(row < kth[r])
            tied = np.flatnonzero(row == kth[r])[: k - len(below)]
            out[rows[r]] = np.concatenate([below[np.argsort(row[below], kind="stable")], tied])
    return out


def consistency_raw(pred, X, k: int) -> float:
    """Unclamped consistency."""
    pred = np.asarray(pred, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    _check_lengths(pred, X)
    nn = knn_indices(X, k)
    n = len(pred)
    return 1.0 - float(np.abs(pred[:, None] - pred[nn]).sum()) / (n * k)


def consistency(pred, X, k: int = 5) -> float:
    return min(1.0, max(0.0, consistency_raw(pred, X, k)))


def fperbs(gc: GroupConfusion) -> float:
    r0, _ = _rate(gc.fp0, gc.fp0 + gc.tn0)
    r1, _ = _rate(gc.fp1, gc.fp1 + gc.tn1)
    return 1.0 - abs(r0 - r1)


def fnerbs(gc: GroupConfusion) -> float:
    r0, _ = _rate(gc.fn0, gc.fn0 + gc.tp0)
    r1, _ = _rate(gc.fn1, gc.fn1 + gc.tp1)
    return 1.0 - abs(r0 - r1)


def gm_sen_spec(gc: GroupConfusion) -> float:
    tp, fp, tn, fn = gc.pooled()
    sens, _ = _rate(tp, tp + fn)
    spec, _ = _rate(tn, tn + fp)
    return math.sqrt(sens * spec)


def is_degenerate(gc: GroupConfusion) -> bool:
    tp, fp, tn, fn = gc.pooled()
    dens = (gc.fp0 + gc.tn0, gc.fp1 + gc.tn1, gc.fn0 + gc.tp0, gc.fn1 + gc.tp1, tp + fn, tn + fp)
    return any(d == 0 for d in dens)


def fitness_from_predictions(pred, actual, s, X, k: int = 5) -> FitnessVector:
    """All five measures for one prediction vector.

    ``X`` is the representation used for the consistency neighbourhoods.
    """
    pred = np.asarray(pred).astype(np.int64)
    gc = group_confusion(pred, actual, s)
    raw_c = consistency_raw(pred, X, k)
    return FitnessVector(
        gm=gm_sen_spec(gc),
        dp=demographic_parity(pred, s),
        consistency=min(1.0, max(0.0, raw_c)),
        fperbs=fperbs(gc),
        fnerbs=fnerbs(gc),
        degenerate=is_degenerate(gc),
        clamped=not 0.0 <= raw_c <= 1.0,
    )


def out_of_fold_predictions(X: np.ndarray, y: np.ndarray, folds: FoldPlan,
                            params: ForestParams, workers: int = 1) -> np.ndarray:
    """One prediction per instance, each made by a forest that never saw it."""
    pred = np.empty(len(y), dtype=np.int64)
    full = np.ones(X.shape[1], dtype=bool)
    for f in range(folds.k):
        tr, te = folds.split(f)
        ytr = y[tr]
        if ytr.min() == ytr.max():
            pred[te] = ytr[0]
            continue
        model = classifier.fit(X[tr], ytr, params, full, workers=workers)
        pred[te] = classifier.predict(model, X[te])
    return pred


def evaluate_mask(mask, train: Dataset, folds: FoldPlan, params: ForestParams,
                  k: int = 5, workers: int = 1) -> FitnessVector:
    """Cross-validated fitness of a per-feature mask on the training set.

    Out-of-fold predictions are pooled and all measures computed once;
    consistency neighbourhoods use only the selected columns.
    """
    mask = np.asarray(mask, dtype=bool)
    cols = train.column_mask(mask)
    if not cols.any():
        return ZERO_FITNESS
    Xm = train.X[:, cols]
    pred = out_of_fold_predictions(Xm, train.y, folds, params, workers)
    return fitness_from_predictions(pred, train.y, train.s, Xm, k)
