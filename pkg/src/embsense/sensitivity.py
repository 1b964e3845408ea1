"""Sensitivity quantification: global and sample-wise CCA against
effect-strength ranks, the singular-spectrum dimensionality comparison,
and table aggregation of per-class results.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .embedding import TrajectorySet
from .errors import InvalidInputError
from .numstats import SpectrumReport, cca_single_target, pca, spearman, svd


@dataclass
class SensitivityReport:
    scope: str            # "global" or a sample_id
    class_label: str
    effect: str
    direction: np.ndarray
    rho: float
    r2: float
    scatter: list[tuple[float, float]]  # (u.x, y) pairs

    def to_row(self) -> dict:
        return {
            "scope": self.scope,
            "class": self.class_label,
            "effect": self.effect,
            "rho": repr(self.rho),
            "r2": repr(self.r2),
        }


@dataclass
class DimensionalityReport:
    cca_spectrum: SpectrumReport       # SVD of stacked sample-wise CCA directions
    baseline_spectrum: SpectrumReport  # sqrt of clean-embedding PCA variances
    effective_dims: tuple[int, int] = field(init=False)  # (k90_cca, k90_baseline)

    def __post_init__(self):
        self.effective_dims = (
            self.cca_spectrum.effective_dim(0.9),
            self.baseline_spectrum.effective_dim(0.9),
        )


def _stacked_class_data(traj: TrajectorySet, class_label: str):
    """Non-neutral effected rows of one class stacked with their ranks."""
    sub = traj.filter_class(class_label)
    indices = sub.sweep.non_neutral_indices()
    if len(indices) < 3:
        raise InvalidInputError("need at least 3 non-neutral sweep parameters")
    blocks = [sub.effected[j].data.astype(np.float64) for j in indices]
    x = np.vstack(blocks)
    y = np.concatenate([
        np.full(sub.n, sub.sweep.ranks[j], dtype=float) for j in indices
    ])
    return sub, x, y


def global_cca(traj: TrajectorySet, class_label: str, ridge: float = 0.0) -> SensitivityReport:
    """CCA over all (sample, parameter) points of one class pooled.

    The neutral-parameter condition (when the sweep has one) is excluded
    so the target stays strictly graded; clean rows are never stacked.
    """
    sub, x, y = _stacked_class_data(traj, class_label)
    if sub.n < 2:
        raise InvalidInputError("global CCA needs at least 2 samples in the class")
    res = cca_single_target(x, y, ridge=ridge)
    proj = x @ res.direction
    return SensitivityReport(
        scope="global",
        class_label=class_label,
        effect=sub.sweep.effect.value,
        direction=res.direction,
        rho=res.rho,
        r2=res.r2,
        scatter=list(zip(proj.tolist(), y.tolist())),
    )


def samplewise_cca(traj: TrajectorySet, sample_id: str, ridge: float = 0.0) -> SensitivityReport:
    """CCA along one sample's trajectory across the full sweep."""
    try:
        row = traj.clean.sample_ids.index(sample_id)
    except ValueError:
        raise InvalidInputError(f"unknown sample_id {sample_id!r}") from None
    if len(traj.sweep) < 3:
        raise InvalidInputError("need at least 3 sweep parameters")
    x = np.stack([m.data[row].astype(np.float64) for m in traj.effected])
    y = np.asarray(traj.sweep.ranks, dtype=float)
    res = cca_single_target(x, y, ridge=ridge)
    proj = x @ res.direction
    return SensitivityReport(
        scope=sample_id,
        class_label=traj.clean.class_labels[row],
        effect=traj.sweep.effect.value,
        direction=res.direction,
        rho=res.rho,
        r2=res.r2,
        scatter=list(zip(proj.tolist(), y.tolist())),
    )


def samplewise_directions(traj: TrajectorySet, class_label: str,
                          ridge: float = 0.0) -> np.ndarray:
    """Unit sample-wise CCA directions of one class, stacked as rows and
    sign-aligned so each has non-negative inner product with the first."""
    sub = traj.filter_class(class_label)
    if sub.n < 2:
        raise InvalidInputError("need at least 2 samples in the class")
    dirs = np.stack([
        samplewise_cca(sub, sid, ridge=ridge).direction for sid in sub.clean.sample_ids
    ])
    for i in range(1, dirs.shape[0]):
        if dirs[i] @ dirs[0] < 0:
            dirs[i] *= -1.0
    return dirs


def samplewise_direction_spectrum(traj: TrajectorySet, class_label: str,
                                  ridge: float = 0.0) -> DimensionalityReport:
    """Compare the spectrum of the stacked sample-wise CCA directions with
    the clean embeddings' own spectrum (square roots of PCA variances)."""
    dirs = samplewise_directions(traj, class_label, ridge=ridge)
    _, cca_spectrum, _ = svd(dirs)
    sub = traj.filter_class(class_label)
    _, variances = pca(sub.clean.data.astype(np.float64))
    baseline = SpectrumReport(np.sqrt(variances.values))
    return DimensionalityReport(cca_spectrum=cca_spectrum, baseline_spectrum=baseline)


def aggregate_table(reports_by_cell: dict[tuple[str, str], list[SensitivityReport]]) -> dict:
    """Mean and population std of r2 over classes per (embedding, effect)
    cell, scaled by 100 for display."""
    table = {}
    for (embedding, effect), reports in reports_by_cell.items():
        if not reports:
            raise InvalidInputError(f"empty cell ({embedding}, {effect})")
        values = np.array([r.r2 for r in reports], dtype=float)
        mean = float(values.mean()) * 100.0
        std = float(values.std()) * 100.0
        table[(embedding, effect)] = {
            "mean": mean,
            "std": std,
            "display": f"{mean:.2f} ± {std:.2f}",
            "n_classes": len(reports),
        }
    return table


def trajectory_projection_2d(traj: TrajectorySet, sample_ids: list[str]) -> list[np.ndarray]:
    """Deterministic 2-D projection of selected deformation trajectories.

    A PCA is fit on the union of the selected samples' clean and effected
    rows; each sample's condition-ordered rows (clean first, then the
    sweep) are projected onto the top two components. Returns one
    (1 + P) x 2 polyline per requested sample.
    """
    if len(sample_ids) < 2:
        raise InvalidInputError("select at least 2 samples")
    rows = []
    for sid in sample_ids:
        try:
            i = traj.clean.sample_ids.index(sid)
        except ValueError:
            raise InvalidInputError(f"unknown sample_id {sid!r}") from None
        rows.append(traj.clean.data[i])
        rows.extend(m.data[i] for m in traj.effected)
    stacked = np.asarray(rows, dtype=np.float64)
    components, _ = pca(stacked)
    top2 = components[:2]
    if top2.shape[0] < 2:  # rank-1 data: pad with an arbitrary orthogonal axis
        pad = np.zeros((2 - top2.shape[0], stacked.shape[1]))
        top2 = np.vstack([top2, pad])
    centered = stacked - stacked.mean(axis=0)
    coords = centered @ top2.T
    step = 1 + len(traj.effected)
    return [coords[k * step:(k + 1) * step] for k in range(len(sample_ids))]


# ---------------------------------------------------------------------------
# Serialization


def reports_to_csv(reports: list[SensitivityReport], run_id: str = "") -> str:
    buf = io.StringIO()
    if run_id:
        buf.write(f"# run-id: {run_id}\n")
    writer = csv.DictWriter(buf, fieldnames=["scope", "class", "effect", "rho", "r2"],
                            lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.to_row())
    return buf.getvalue()


def report_to_json_obj(report: SensitivityReport) -> dict:
    return {
        "scope": report.scope,
        "class": report.class_label,
        "effect": report.effect,
        "rho": report.rho,
        "r2": report.r2,
        "direction": [float(v) for v in report.direction],
        "scatter": [[float(a), float(b)] for a, b in report.scatter],
    }


def dimensionality_to_json_obj(report: DimensionalityReport) -> dict:
    return {
        "cca_spectrum": [float(v) for v in report.cca_spectrum.normalized],
        "baseline_spectrum": [float(v) for v in report.baseline_spectrum.normalized],
        "k90_cca": report.effective_dims[0],
        "k90_baseline": report.effective_dims[1],
    }


def table_to_csv(table: dict, run_id: str = "") -> str:
    buf = io.StringIO()
    if run_id:
        buf.write(f"# run-id: {run_id}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["embedding", "effect", "mean_x100", "std_x100", "display", "n_classes"])
    for (embedding, effect) in sorted(table):
        cell = table[(embedding, effect)]
        writer.writerow([embedding, effect, repr(cell["mean"]), repr(cell["std"]),
                         cell["display"], cell["n_classes"]])
    return buf.getvalue()


def reports_to_json(reports: list[SensitivityReport],
                    spectra: dict[str, DimensionalityReport],
                    run_id: str = "") -> str:
    payload = {
        "run_id": run_id,
        "reports": [report_to_json_obj(r) for r in reports],
        "spectra": {k: dimensionality_to_json_obj(v) for k, v in sorted(spectra.items())},
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
