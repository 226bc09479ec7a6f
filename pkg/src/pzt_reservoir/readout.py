"""One-vs-rest logistic regression readout.

Each digit gets an independent binary logistic model minimising

    mean_i [ log(1 + exp(z_i)) - t_i z_i ] + (l2 / 2) * ||w||^2,   z = X w + beta

with ``t_i = 1`` for that digit and 0 otherwise; the bias is not penalised.
The ten problems are solved by limited-memory BFGS with an Armijo
backtracking line search. They advance in lockstep so every iteration costs
one ``X @ W`` product for all classes, but each class keeps its own
curvature history, step length and stopping decision, so the result equals
solving the ten problems one at a time.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DimensionMismatch, SingleClass

N_CLASSES = 10
MODEL_FORMAT = "pzt-reservoir-readout"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    max_iter: int = 1000
    grad_tol: float = 1e-6
    l2_lambda: float = 1e-4
    memory: int = 10
    standardize: bool = False
    seed: int = 0  # initialisation is all zeros; kept for config digests

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be >= 0")


@dataclass
class ReadoutModel:
    weights: np.ndarray            # (n_features, 10)
    bias: np.ndarray               # (10,)
    iterations: np.ndarray = field(default_factory=lambda: np.zeros(N_CLASSES, int))
    grad_norm: np.ndarray = field(default_factory=lambda: np.zeros(N_CLASSES))
    loss_history: list = field(default_factory=list, repr=False)
    shift: np.ndarray | None = None
    scale: np.ndarray | None = None

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def to_json(self) -> str:
        rec = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "n_features": self.n_features,
            "weights": self.weights.T.tolist(),
            "bias": self.bias.tolist(),
            "iterations": [int(i) for i in self.iterations],
            "grad_norm": [float(g) for g in self.grad_norm],
            "shift": None if self.shift is None else self.shift.tolist(),
            "scale": None if self.scale is None else self.scale.tolist(),
        }
        return json.dumps(rec)

    @classmethod
    def from_json(cls, text: str) -> "ReadoutModel":
        rec = json.loads(text)
        if rec.get("format") != MODEL_FORMAT:
            raise ValueError(f"not a readout model record: format={rec.get('format')!r}")
        if rec.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {rec.get('version')}")
        opt = lambda k: None if rec[k] is None else np.asarray(rec[k], dtype=np.float64)
        return cls(
            weights=np.asarray(rec["weights"], dtype=np.float64).T.copy(),
            bias=np.asarray(rec["bias"], dtype=np.float64),
            iterations=np.asarray(rec["iterations"], dtype=int),
            grad_norm=np.asarray(rec["grad_norm"], dtype=np.float64),
            shift=opt("shift"),
            scale=opt("scale"),
        )

    def save(self, path) -> None:
        with open(path, "w") as f:
            f.write(self.to_json())

    @classmethod
    def load(cls, path) -> "ReadoutModel":
        with open(path) as f:
            return cls.from_json(f.read())


def _sigmoid(z):
    # split by sign to stay finite for large |z|
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def binary_objective(w, beta, x, t, l2):
    """Loss and gradient of the per-class objective.

    ``w`` may be a vector or a ``(n_features, k)`` block of k independent
    problems (then ``beta`` and ``t`` carry a trailing k axis).
    Returns ``(loss, grad_w, grad_beta)``.
    """
    n = x.shape[0]
    z = x @ w + beta
    loss = np.mean(np.logaddexp(0.0, z) - t * z, axis=0) + 0.5 * l2 * np.sum(w * w, axis=0)
    r = _sigmoid(z) - t
    grad_w = x.T @ r / n + l2 * w
    grad_b = np.mean(r, axis=0)
    return loss, grad_w, grad_b


def _as_features(features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"features must be 2D (samples, dims), got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("features contain non-finite values")
    return x


def train_ovr(features, labels, cfg: TrainConfig = TrainConfig()) -> ReadoutModel:
    x = _as_features(features)
    labels = np.asarray(labels)
    if len(labels) != len(x):
        raise DimensionMismatch(f"{len(x)} feature rows but {len(labels)} labels")
    if len(np.unique(labels)) < 2:
        raise SingleClass("training labels contain a single class")

    shift = scale = None
    if cfg.standardize:
        shift = x.mean(axis=0)
        scale = x.std(axis=0)
        scale[scale == 0] = 1.0
        x = (x - shift) / scale

    n, d = x.shape
    targets = (labels[:, None] == np.arange(N_CLASSES)[None, :]).astype(np.float64)
    params = np.zeros((d + 1, N_CLASSES))
    history = [[] for _ in range(N_CLASSES)]

    def evaluate(p):
        loss, gw, gb = binary_objective(p[:d], p[d], x, targets, cfg.l2_lambda)
        return loss, np.vstack([gw, gb])

    loss, grad = evaluate(params)
    for c in range(N_CLASSES):
        history[c].append(float(loss[c]))
    iters = np.zeros(N_CLASSES, dtype=int)
    active = np.linalg.norm(grad, axis=0) > cfg.grad_tol
    s_hist, y_hist, rho_hist = [], [], []
    gamma = np.ones(N_CLASSES)

    for _ in range(cfg.max_iter):
        if not active.any():
            break
        # two-loop recursion, vectorised over classes
        q = -grad
        alphas = []
        for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
            a = rho * np.sum(s * q, axis=0)
            q = q - a * y
            alphas.append(a)
        q = gamma * q
        for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
            b = rho * np.sum(y * q, axis=0)
            q = q + (a - b) * s
        direction = q
        slope = np.sum(grad * direction, axis=0)
        uphill = slope >= 0
        if uphill.any():
            direction[:, uphill] = -grad[:, uphill]
            slope[uphill] = -np.sum(grad[:, uphill] ** 2, axis=0)
        direction[:, ~active] = 0.0

        # Armijo backtracking, each class with its own step
        step = np.where(active, 1.0, 0.0)
        pending = active.copy()
        new_loss, new_grad = loss.copy(), grad.copy()
        for _ls in range(60):
            if not pending.any():
                break
            trial = params + step * direction
            t_loss, t_grad = evaluate(trial)
            ok = pending & (t_loss <= loss + 1e-4 * step * slope)
            new_loss[ok] = t_loss[ok]
            new_grad[:, ok] = t_grad[:, ok]
            pending &= ~ok
            step[pending] *= 0.5
        stalled = pending  # no acceptable step: the class is at its numerical optimum
        step[stalled] = 0.0

        moved = active & ~stalled
        s_new = step * direction
        y_new = new_grad - grad
        sy = np.sum(s_new * y_new, axis=0)
        good = moved & (sy > 1e-12)
        rho_new = np.where(good, 1.0 / np.where(good, sy, 1.0), 0.0)
        s_hist.append(np.where(good, s_new, 0.0))
        y_hist.append(np.where(good, y_new, 0.0))
        rho_hist.append(rho_new)
        if len(s_hist) > cfg.memory:
            s_hist.pop(0), y_hist.pop(0), rho_hist.pop(0)
        yy = np.sum(y_new * y_new, axis=0)
        gamma = np.where(good, sy / np.where(good, yy, 1.0), gamma)

        params[:, moved] += s_new[:, moved]
        loss[moved] = new_loss[moved]
        grad[:, moved] = new_grad[:, moved]
        iters[moved] += 1
        for c in np.flatnonzero(moved):
            history[c].append(float(loss[c]))
        active = moved & (np.linalg.norm(grad, axis=0) > cfg.grad_tol)

    return ReadoutModel(
        weights=params[:d].copy(),
        bias=params[d].copy(),
        iterations=iters,
        grad_norm=np.linalg.norm(grad, axis=0),
        loss_history=history,
        shift=shift,
        scale=scale,
    )


def decision_scores(model: ReadoutModel, x) -> np.ndarray:
    """``w_c . x + beta_c`` for every class; ``x`` may be one vector or a batch."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features, got {x.shape[-1]}")
    if model.shift is not None:
        x = (x - model.shift) / model.scale
    return x @ model.weights + model.bias


def predict(model: ReadoutModel, x) -> np.ndarray | int:
    """Arg-max class; ``np.argmax`` picks the lowest index on ties."""
    scores = decision_scores(model, x)
    out = np.argmax(scores, axis=-1)
    return int(out) if np.ndim(out) == 0 else out
