"""Cross-validation, metrics and result tables."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng
from .pipeline import cube_delay, method_features
from .errors import EmptyInput, LengthMismatch, TooFewSamples
from .readout import TrainConfig, predict, train_ovr

N_CLASSES = 10


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def splits(self):
        for f in range(self.k):
            yield self.train_indices(f), self.test_indices(f)


def kfold_plan(labels: Sequence[int], k: int = 10, seed: int = 0,
               stratified: bool = True) -> FoldPlan:
    """Assign every example to one of ``k`` folds.

    Stratified: each class is shuffled and dealt round-robin; the dealing
    position carries over from one class to the next, which keeps fold
    sizes within one of each other.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if k < 2 or n < k:
        raise TooFewSamples(f"need at least k={k} >= 2 examples, got {n}")
    g = rng.generator(seed)
    assignments = np.empty(n, dtype=np.int64)
    if not stratified:
        assignments[g.permutation(n)] = np.arange(n) % k
        return FoldPlan(k, assignments)
    classes, counts = np.unique(labels, return_counts=True)
    if counts.min() < k:
        raise TooFewSamples(f"class {classes[counts.argmin()]} has {counts.min()} < {k} members")
    pos = 0
    for c in classes:
        members = g.permutation(np.flatnonzero(labels == c))
        assignments[members] = (pos + np.arange(len(members))) % k
        pos = (pos + len(members)) % k
    return FoldPlan(k, assignments)


def holdout_splits(labels: Sequence[int], n_splits: int = 10, test_fraction: float = 0.2,
                   seed: int = 0):
    """``n_splits`` independent stratified train/test splits."""
    labels = np.asarray(labels)
    splits = []
    for s in range(n_splits):
        g = rng.generator(rng.sample_seed(seed, s))
        test = []
        for c in np.unique(labels):
            members = g.permutation(np.flatnonzero(labels == c))
            take = int(round(test_fraction * len(members)))
            if len(members) > 1:
                take = min(max(take, 1), len(members) - 1)
            test.append(members[:take])
        test = np.sort(np.concatenate(test))
        train = np.setdiff1d(np.arange(len(labels)), test)
        splits.append((train, test))
    return splits


# --- metrics ---------------------------------------------------------------

def _pair(pred, truth):
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.shape} predictions vs {truth.shape} labels")
    if pred.size == 0:
        raise EmptyInput("no predictions")
    return pred, truth


def accuracy(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    return float(np.mean(pred == truth))


def macro_f1(pred, truth, average: str = "macro") -> float:
    """Per-class F1 averaged over the classes present in ``truth``.

    A class with no true positives gets F1 = 0. ``average="weighted"``
    weights each class by its support instead.
    """
    pred, truth = _pair(pred, truth)
    classes, support = np.unique(truth, return_counts=True)
    scores = []
    for c in classes:
        tp = np.sum((pred == c) & (truth == c))
        fp = np.sum((pred == c) & (truth != c))
        fn = np.sum((pred != c) & (truth == c))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    scores = np.asarray(scores, dtype=np.float64)
    if average == "macro":
        return float(scores.mean())
    if average == "weighted":
        return float(np.sum(scores * support) / support.sum())
    raise ValueError(f"unknown average {average!r}")


# --- aggregation -----------------------------------------------------------

@dataclass
class FoldStats:
    values: list[float]  # per fold, percent

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def std(self) -> float:
        return float(np.std(self.values, ddof=1)) if len(self.values) > 1 else 0.0

    def as_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "folds": list(self.values)}


@dataclass
class MethodResult:
    method: str
    accuracy: FoldStats
    f1: FoldStats
    iterations: list[int] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy.as_dict(), "f1": self.f1.as_dict(),
                "max_iterations_per_fold": self.iterations}


def cross_validate(features, labels, splits, train_cfg: TrainConfig = TrainConfig(),
                   method: str = "", f1_average: str = "macro") -> MethodResult:
    """Train on each split's training part and score the held-out part."""
    x = np.asarray(features)
    labels = np.asarray(labels)
    acc, f1, iters = [], [], []
    for train, test in splits:
        model = train_ovr(x[train], labels[train], train_cfg)
        pred = predict(model, x[test])
        acc.append(100.0 * accuracy(pred, labels[test]))
        f1.append(100.0 * macro_f1(pred, labels[test], f1_average))
        iters.append(int(model.iterations.max()))
    return MethodResult(method, FoldStats(acc), FoldStats(f1), iters)


def run_experiment(data, method: str, seed: int = 0, folds: int = 10,
                   train_cfg: TrainConfig = TrainConfig(), split_mode: str = "kfold",
                   sigma: float = 0.05, reservoir_overrides: dict | None = None,
                   trace_dir=None, f1_average: str = "macro", progress=None) -> MethodResult:
    """One report row: build ``method``'s features for ``data`` and cross-validate.

    Every method goes through the same split plan and the same readout; only
    the feature matrix differs.
    """
    if len(data) == 0:
        raise EmptyInput("dataset is empty")
    x = method_features(method, data, seed, sigma, reservoir_overrides, trace_dir, progress)
    return cross_validate(x, data.labels, make_splits(data.labels, seed, folds, split_mode),
                          train_cfg, method, f1_average)


def make_splits(labels, seed: int, folds: int = 10, split_mode: str = "kfold"):
    if split_mode == "kfold":
        return list(kfold_plan(labels, folds, rng.derive_seed(seed, rng.FOLDS)).splits())
    if split_mode == "repeated-holdout":
        return holdout_splits(labels, folds, 0.2, rng.derive_seed(seed, rng.HOLDOUT))
    raise ValueError(f"unknown split mode {split_mode!r}")


# --- report ----------------------------------------------------------------

GROUPS = (("A. Simulated reservoir", ("cube-5ns", "cube-10ns", "cube-20ns")),
          ("B. Readout-only baselines", ("direct", "summed", "noise")))

LABELS = {
    "cube-5ns": "Cube 5 ns", "cube-10ns": "Cube 10 ns", "cube-20ns": "Cube 20 ns",
    "direct": "Logistic regression",
    "summed": "Log. reg. w/ summed windowed input",
    "noise": "Log. reg. w/ Gaussian noise",
}


@dataclass
class ExperimentReport:
    rows: dict[str, MethodResult]
    metadata: dict

    def to_json(self) -> str:
        # metadata keys sorted for stable bytes; rows keep table order
        meta = json.loads(json.dumps(self.metadata, sort_keys=True))
        rec = {"metadata": meta, "rows": {m: r.as_dict() for m, r in self.ordered()}}
        return json.dumps(rec, indent=2) + "\n"

    def ordered_names(self) -> list[str]:
        known = [m for _, ms in GROUPS for m in ms]
        extra = sorted(set(self.rows) - set(known),
                       key=lambda m: (not m.startswith("cube-"), cube_delay(m) or 0.0, m))
        return [m for m in known if m in self.rows] + extra

    def ordered(self):
        return [(m, self.rows[m]) for m in self.ordered_names()]

    def to_text(self) -> str:
        meta = self.metadata
        lines = [f"{meta.get('dataset', '?')}: {meta.get('samples', '?')} samples, "
                 f"{meta.get('protocol', '?')}, seed {meta.get('seed', '?')}", ""]
        head = f"{'Method':<38}{'Test Accuracy (%)':>22}{'Test F1 (%)':>22}"
        lines += [head, "-" * len(head)]
        names = self.ordered_names()
        cube = [m for m in names if m.startswith("cube-")]
        for title, present in ((GROUPS[0][0], cube), (GROUPS[1][0], [m for m in names if m not in cube])):
            if not present:
                continue
            lines.append(title)
            for m in present:
                r = self.rows[m]
                lines.append(f"  {LABELS.get(m, m):<36}"
                             f"{r.accuracy.mean:>11.1f} (s={r.accuracy.std:.1f})"
                             f"{r.f1.mean:>11.1f} (s={r.f1.std:.1f})")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "fold", "accuracy_pct", "f1_pct"])
        for m, r in self.ordered():
            for i, (a, f) in enumerate(zip(r.accuracy.values, r.f1.values)):
                w.writerow([m, i, repr(a), repr(f)])
        return buf.getvalue()
