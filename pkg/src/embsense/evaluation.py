"""Downstream evaluation: L2-regularized logistic regression, ROC AUC,
and the clean/effected train-test swap grid over desensitization methods.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .embedding import TrajectorySet
from .errors import DimensionMismatchError, InvalidInputError
from .projection import Projector, apply_projector, estimate

MAX_NEWTON_ITER = 500
GRAD_TOL = 1e-8


@dataclass
class LogisticModel:
    weights: np.ndarray          # d, in standardized feature space
    bias: float
    mean: np.ndarray             # per-feature standardization
    std: np.ndarray              # zero-variance features carry std 1, weight 0
    active: np.ndarray           # bool mask of features with nonzero variance
    lam: float
    n_iter: int
    grad_norm: float             # final infinity norm of the gradient


def _standardize(x: np.ndarray, mean: np.ndarray, std: np.ndarray,
                 active: np.ndarray) -> np.ndarray:
    z = (x - mean) / std
    z[:, ~active] = 0.0
    return z


def logistic_objective(z: np.ndarray, y01: np.ndarray, w: np.ndarray,
                       b: float, lam: float) -> tuple[float, np.ndarray]:
    """Mean log-loss plus (lam/2)||w||^2 and its gradient w.r.t. (w, b).
    The bias is unregularized."""
    n = z.shape[0]
    margin = z @ w + b
    # log(1 + exp(m)) - y*m, computed stably
    loss = float(np.mean(np.logaddexp(0.0, margin) - y01 * margin))
    loss += 0.5 * lam * float(w @ w)
    p = expit(margin)
    resid = (p - y01) / n
    grad = np.concatenate([z.T @ resid + lam * w, [resid.sum()]])
    return loss, grad


def train_logistic(x, labels, lam: float = 1.0) -> LogisticModel:
    """Fit by damped Newton iteration on the standardized features.

    Deterministic: fixed initialization, fixed iteration order. Stops when
    the gradient infinity norm drops below 1e-8 or after 500 iterations.
    """
    x = np.asarray(x, dtype=np.float64)
    y01 = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or y01.shape != (x.shape[0],):
        raise DimensionMismatchError("x must be N x d with N labels")
    if lam < 0:
        raise InvalidInputError("lambda must be non-negative")
    classes = np.unique(y01)
    if not np.array_equal(classes, [0.0, 1.0]):
        raise InvalidInputError("labels must contain both classes (0 and 1)")

    n, d = x.shape
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    active = std > 0
    std = np.where(active, std, 1.0)
    z = _standardize(x, mean, std, active)

    w = np.zeros(d)
    pos_rate = float(y01.mean())
    b = float(np.log(pos_rate / (1.0 - pos_rate)))
    loss, grad = logistic_objective(z, y01, w, b, lam)
    n_iter = 0
    while np.abs(grad).max() >= GRAD_TOL and n_iter < MAX_NEWTON_ITER:
        margin = z @ w + b
        p = expit(margin)
        h_diag = p * (1.0 - p) / n
        zh = z * h_diag[:, None]
        hess = np.empty((d + 1, d + 1))
        hess[:d, :d] = z.T @ zh
        hess[:d, :d][np.diag_indices(d)] += lam
        hess[:d, d] = zh.sum(axis=0)
        hess[d, :d] = hess[:d, d]
        hess[d, d] = h_diag.sum()
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(hess, -grad, rcond=None)
        # backtracking line search (Armijo)
        t = 1.0
        for _ in range(50):
            w_new = w + t * step[:d]
            b_new = b + t * step[d]
            loss_new, grad_new = logistic_objective(z, y01, w_new, b_new, lam)
            if loss_new <= loss + 1e-4 * t * float(grad @ step):
                break
            t *= 0.5
        if not np.isfinite(loss_new):
            break
        w, b, loss, grad = w_new, float(b_new), loss_new, grad_new
        n_iter += 1

    # inactive features never influence predictions
    w = np.where(active, w, 0.0)
    return LogisticModel(weights=w, bias=float(b), mean=mean, std=std,
                         active=active, lam=lam, n_iter=n_iter,
                         grad_norm=float(np.abs(grad).max()))


def predict_scores(model: LogisticModel, x) -> np.ndarray:
    """Sigmoid scores in (0, 1) using the model's stored standardization."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.weights.size:
        raise DimensionMismatchError("x width must match the model dimension")
    z = _standardize(x, model.mean, model.std, model.active)
    # per-row pairwise reduction: batch scoring is bit-identical to scoring
    # rows one at a time (a BLAS gemv would order the sums differently)
    margin = (z * model.weights).sum(axis=1) + model.bias
    return expit(margin)


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie), computed
    from average ranks in O(n log n). Exact ties only."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise DimensionMismatchError("scores and labels must be equal-length 1-D")
    pos = y == 1
    n1 = int(pos.sum())
    n0 = s.size - n1
    if n1 == 0 or n0 == 0:
        raise InvalidInputError("both classes must be present")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(s.size, dtype=np.float64)
    sorted_s = s[order]
    start = 0
    for i in range(1, s.size + 1):
        if i == s.size or sorted_s[i] != sorted_s[i - 1]:
            ranks[order[start:i]] = 0.5 * (start + i - 1) + 1.0
            start = i
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n1 * (n1 + 1) / 2.0) / (n1 * n0)


# ---------------------------------------------------------------------------
# Experiment grid


@dataclass
class ExperimentCell:
    effect: str
    parameter: float
    class_label: str
    method: str                  # "none" or a projector label
    train_condition: str         # "clean" or "effected"
    auc: float | None
    status: str = "ok"

    def to_row(self) -> dict:
        return {
            "effect": self.effect,
            "parameter": repr(float(self.parameter)),
            "class": self.class_label,
            "method": self.method,
            "train_condition": self.train_condition,
            "auc": "" if self.auc is None else repr(self.auc),
            "status": self.status,
        }


@dataclass
class ExperimentReport:
    cells: list[ExperimentCell]
    lam: float
    projector_provenance: dict = field(default_factory=dict)

    @property
    def n_failed(self) -> int:
        return sum(1 for c in self.cells if c.status != "ok")

    def to_csv(self, run_id: str = "") -> str:
        buf = io.StringIO()
        if run_id:
            buf.write(f"# run-id: {run_id}\n")
        writer = csv.DictWriter(
            buf,
            fieldnames=["effect", "parameter", "class", "method",
                        "train_condition", "auc", "status"],
            lineterminator="\n",
        )
        writer.writeheader()
        for cell in self.cells:
            writer.writerow(cell.to_row())
        return buf.getvalue()

    def to_json(self, run_id: str = "") -> str:
        payload = {
            "run_id": run_id,
            "lambda": self.lam,
            "projectors": self.projector_provenance,
            "cells": [c.to_row() for c in self.cells],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class MethodSpec:
    """A desensitization method entry for the grid: a name from
    projection.ALL_METHODS, or "none" for the unprojected baseline."""

    name: str
    threshold: float | None = None

    def label(self) -> str:
        if self.name == "samplewise_svd" and self.threshold is not None:
            return f"{self.name}(t={self.threshold:g})"
        return self.name


def run_experiment_grid(
    traj_by_effect: dict[str, TrajectorySet],
    methods: list[MethodSpec],
    lam: float = 1.0,
    ridge: float = 0.0,
) -> ExperimentReport:
    """One-vs-rest logistic evaluation over every (effect, parameter,
    class, method) cell, in both swap directions.

    Direction "clean" trains on clean embeddings and tests on the
    effected matrix at the parameter; "effected" swaps them. Projectors
    are estimated once per (effect, class, method) from the dataset's
    trajectories and applied to both sides before fitting. Failing cells
    are recorded and skipped, never fatal.
    """
    cells: list[ExperimentCell] = []
    provenance: dict[str, dict] = {}
    for effect_name in sorted(traj_by_effect):
        traj = traj_by_effect[effect_name]
        labels_all = traj.clean.class_labels
        class_labels = sorted(set(labels_all))
        if len(class_labels) < 2:
            raise InvalidInputError("need at least 2 classes for one-vs-rest evaluation")

        projectors: dict[tuple[str, str], Projector | None] = {}
        proj_errors: dict[tuple[str, str], str] = {}
        for class_label in class_labels:
            for spec in methods:
                key = (class_label, spec.label())
                if spec.name == "none":
                    projectors[key] = None
                    continue
                try:
                    proj = estimate(spec.name, traj, class_label,
                                    threshold=spec.threshold if spec.threshold is not None else 0.4,
                                    ridge=ridge)
                    projectors[key] = proj
                    provenance[f"{effect_name}/{class_label}/{spec.label()}"] = proj.provenance
                except Exception as exc:  # noqa: BLE001 - recorded per cell
                    proj_errors[key] = f"projector: {type(exc).__name__}: {exc}"

        for p_idx, param in enumerate(traj.sweep.params):
            effected = traj.effected[p_idx]
            for class_label in class_labels:
                y = np.array([1 if lbl == class_label else 0 for lbl in labels_all])
                for spec in methods:
                    key = (class_label, spec.label())
                    for train_condition in ("clean", "effected"):
                        if key in proj_errors:
                            cells.append(ExperimentCell(
                                effect=effect_name, parameter=float(param),
                                class_label=class_label, method=spec.label(),
                                train_condition=train_condition, auc=None,
                                status=proj_errors[key]))
                            continue
                        proj = projectors[key]
                        try:
                            train_m = traj.clean if train_condition == "clean" else effected
                            test_m = effected if train_condition == "clean" else traj.clean
                            if proj is not None:
                                train_m = apply_projector(proj, train_m)
                                test_m = apply_projector(proj, test_m)
                            model = train_logistic(train_m.data.astype(np.float64), y, lam=lam)
                            scores = predict_scores(model, test_m.data.astype(np.float64))
                            auc = roc_auc(scores, y)
                            cells.append(ExperimentCell(
                                effect=effect_name, parameter=float(param),
                                class_label=class_label, method=spec.label(),
                                train_condition=train_condition, auc=auc))
                        except Exception as exc:  # noqa: BLE001 - recorded per cell
                            cells.append(ExperimentCell(
                                effect=effect_name, parameter=float(param),
                                class_label=class_label, method=spec.label(),
                                train_condition=train_condition, auc=None,
                                status=f"{type(exc).__name__}: {exc}"))
    return ExperimentReport(cells=cells, lam=lam, projector_provenance=provenance)
