"""Deformation-direction estimators and the projectors they produce.

Each estimator consumes a TrajectorySet restricted to one class and
returns a Projector whose orthonormal basis spans the directions the
effect is estimated to deform. Applying a projector removes those
components from an embedding matrix.

Displacements are always measured against the clean embedding of the
same sample; "non-neutral" means every grid parameter when the sweep has
no in-grid neutral (low-pass, reverb, bitcrush).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import emb1
from .embedding import Condition, EmbeddingMatrix, TrajectorySet
from .errors import DimensionMismatchError, InvalidInputError, InvalidParameterError
from .numstats import lda_two_class, pca, project_out, svd
from .sensitivity import global_cca, samplewise_directions

log = logging.getLogger(__name__)

METHOD_GLOBAL_CCA = "global_cca"
METHOD_SAMPLEWISE_SVD = "samplewise_svd"
METHOD_PCA_ABSOLUTE = "pca_absolute"
METHOD_PCA_RELATIVE = "pca_relative"
METHOD_AVG_DISPLACEMENT = "avg_displacement"
METHOD_LDA = "lda"

ALL_METHODS = (
    METHOD_GLOBAL_CCA,
    METHOD_SAMPLEWISE_SVD,
    METHOD_PCA_ABSOLUTE,
    METHOD_PCA_RELATIVE,
    METHOD_AVG_DISPLACEMENT,
    METHOD_LDA,
)


@dataclass
class Projector:
    basis: np.ndarray          # (k, d) orthonormal rows; k may be 0
    method: str
    threshold: float | None = None   # samplewise_svd retention threshold
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.float64)
        if basis.ndim != 2:
            raise InvalidInputError("basis must be a 2-D array (possibly 0 x d)")
        if basis.shape[0] > 0:
            norms = np.linalg.norm(basis, axis=1)
            if np.abs(norms - 1.0).max() > 1e-9:
                raise InvalidInputError("basis rows must be unit length")
            gram = basis @ basis.T
            if np.abs(gram - np.eye(basis.shape[0])).max() > 1e-8:
                raise InvalidInputError("basis rows must be orthonormal")
        self.basis = basis

    @property
    def size(self) -> int:
        return self.basis.shape[0]

    def label(self) -> str:
        if self.method == METHOD_SAMPLEWISE_SVD and self.threshold is not None:
            return f"{self.method}(t={self.threshold:g})"
        return self.method


def _displacements(traj: TrajectorySet, class_label: str) -> tuple[TrajectorySet, np.ndarray]:
    sub = traj.filter_class(class_label)
    indices = sub.sweep.non_neutral_indices()
    if not indices:
        raise InvalidInputError("sweep has no non-neutral parameters")
    clean = sub.clean.data.astype(np.float64)
    disp = np.vstack([sub.effected[j].data.astype(np.float64) - clean for j in indices])
    return sub, disp


def _provenance(traj: TrajectorySet, class_label: str, **extra) -> dict:
    sub = traj.filter_class(class_label)
    prov = {
        "effect": traj.sweep.effect.value,
        "class_label": class_label,
        "n_samples": sub.n,
        "n_params": len(traj.sweep),
        "fit_on": "trajectories",
    }
    prov.update(extra)
    return prov


def estimate_global_cca(traj: TrajectorySet, class_label: str,
                        ridge: float = 0.0) -> Projector:
    """Single direction: the global CCA direction for the class."""
    report = global_cca(traj, class_label, ridge=ridge)
    return Projector(
        basis=report.direction[None, :],
        method=METHOD_GLOBAL_CCA,
        provenance=_provenance(traj, class_label, rho=report.rho, r2=report.r2),
    )


def estimate_samplewise_cca_svd(traj: TrajectorySet, class_label: str,
                                t: float, ridge: float = 0.0) -> Projector:
    """Right singular vectors of the sign-aligned sample-wise CCA
    directions whose singular values satisfy s_k >= t * s_1."""
    if not (0.0 <= t <= 1.0):
        raise InvalidParameterError("threshold t must lie in [0, 1]")
    dirs = samplewise_directions(traj, class_label, ridge=ridge)
    _, spectrum, v = svd(dirs)
    s = spectrum.values
    rank_tol = max(dirs.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    keep = [k for k in range(s.size) if s[k] > rank_tol and (k == 0 or s[k] >= t * s[0])]
    basis = v.T[keep] if keep else np.empty((0, traj.dim))
    return Projector(
        basis=basis,
        method=METHOD_SAMPLEWISE_SVD,
        threshold=t,
        provenance=_provenance(traj, class_label,
                               spectrum=[float(x) for x in spectrum.normalized]),
    )


def estimate_pca_displacement(traj: TrajectorySet, class_label: str,
                              mode: str = "absolute") -> Projector:
    """Top displacement principal component, either by absolute explained
    variance or by the variance ratio against the clean embeddings.

    In relative mode the j-th displacement variance is paired with the
    j-th clean-PCA variance; indices whose clean variance is numerically
    zero are excluded, since the ratio is undefined there.
    """
    if mode not in ("absolute", "relative"):
        raise InvalidParameterError("mode must be 'absolute' or 'relative'")
    method = METHOD_PCA_ABSOLUTE if mode == "absolute" else METHOD_PCA_RELATIVE
    sub, disp = _displacements(traj, class_label)
    if disp.shape[0] < 2 or not np.any(disp):
        warnings.warn(f"{method}: displacements are all zero; empty basis")
        return Projector(basis=np.empty((0, traj.dim)), method=method,
                         provenance=_provenance(traj, class_label))
    components, variances = pca(disp)
    sigma2 = variances.values
    if sigma2[0] <= 0:
        warnings.warn(f"{method}: displacement variance vanishes; empty basis")
        return Projector(basis=np.empty((0, traj.dim)), method=method,
                         provenance=_provenance(traj, class_label))
    if mode == "absolute":
        chosen = 0
    else:
        _, clean_var = pca(sub.clean.data.astype(np.float64))
        tau2 = clean_var.values
        valid = np.where(tau2 > 1e-12 * tau2.sum())[0]
        valid = valid[valid < sigma2.size]
        if valid.size == 0:
            warnings.warn(f"{method}: no usable variance ratio; empty basis")
            return Projector(basis=np.empty((0, traj.dim)), method=method,
                             provenance=_provenance(traj, class_label))
        ratios = sigma2[valid] / tau2[valid]
        chosen = int(valid[np.argmax(ratios)])
    return Projector(
        basis=components[chosen][None, :],
        method=method,
        provenance=_provenance(traj, class_label, component_index=chosen),
    )


def estimate_avg_displacement(traj: TrajectorySet, class_label: str) -> Projector:
    """Mean displacement over all samples and non-neutral parameters,
    normalized to unit length."""
    _, disp = _displacements(traj, class_label)
    mean = disp.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    scale = float(np.abs(disp).mean())
    if norm <= 1e-12 * max(scale, 1e-300):
        warnings.warn("avg_displacement: mean displacement vanishes; empty basis")
        return Projector(basis=np.empty((0, traj.dim)), method=METHOD_AVG_DISPLACEMENT,
                         provenance=_provenance(traj, class_label))
    return Projector(
        basis=(mean / norm)[None, :],
        method=METHOD_AVG_DISPLACEMENT,
        provenance=_provenance(traj, class_label),
    )


def estimate_lda(traj: TrajectorySet, class_label: str) -> Projector:
    """LDA discriminant between clean rows and all non-neutral effected
    rows of the class."""
    sub = traj.filter_class(class_label)
    indices = sub.sweep.non_neutral_indices()
    if not indices:
        raise InvalidInputError("sweep has no non-neutral parameters")
    clean = sub.clean.data.astype(np.float64)
    effected = np.vstack([sub.effected[j].data.astype(np.float64) for j in indices])
    w, c = lda_two_class(clean, effected)
    return Projector(
        basis=w[None, :],
        method=METHOD_LDA,
        provenance=_provenance(traj, class_label, lda_threshold=c),
    )


def estimate(method: str, traj: TrajectorySet, class_label: str,
             threshold: float = 0.4, ridge: float = 0.0) -> Projector:
    """Dispatch by method name (see ALL_METHODS)."""
    if method == METHOD_GLOBAL_CCA:
        return estimate_global_cca(traj, class_label, ridge=ridge)
    if method == METHOD_SAMPLEWISE_SVD:
        return estimate_samplewise_cca_svd(traj, class_label, threshold, ridge=ridge)
    if method == METHOD_PCA_ABSOLUTE:
        return estimate_pca_displacement(traj, class_label, mode="absolute")
    if method == METHOD_PCA_RELATIVE:
        return estimate_pca_displacement(traj, class_label, mode="relative")
    if method == METHOD_AVG_DISPLACEMENT:
        return estimate_avg_displacement(traj, class_label)
    if method == METHOD_LDA:
        return estimate_lda(traj, class_label)
    raise InvalidParameterError(f"unknown estimator method {method!r}")


def apply_projector(proj: Projector, matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Project the basis out of every row. The result keeps float64
    precision in memory; serialization casts back to float32."""
    if proj.size and proj.basis.shape[1] != matrix.dim:
        raise DimensionMismatchError(
            f"projector dimension {proj.basis.shape[1]} != matrix dimension {matrix.dim}"
        )
    data = matrix.data.astype(np.float64)
    projected = project_out(data, proj.basis) if proj.size else data.copy()
    metadata = dict(matrix.metadata)
    metadata["projector"] = {
        "method": proj.label(),
        "basis_size": proj.size,
        "provenance": proj.provenance,
    }
    return EmbeddingMatrix(
        data=projected,
        sample_ids=list(matrix.sample_ids),
        class_labels=list(matrix.class_labels),
        condition=matrix.condition,
        metadata=metadata,
    )


def apply_to_trajectories(proj: Projector, traj: TrajectorySet) -> TrajectorySet:
    return TrajectorySet(
        clean=apply_projector(proj, traj.clean),
        effected=[apply_projector(proj, m) for m in traj.effected],
        sweep=traj.sweep,
    )


def save_projector(proj: Projector, path) -> None:
    """Serialize as an EMB1 file: basis rows as payload, method and
    provenance in the trailer. An empty basis stores one zero row plus an
    ``empty`` flag, since the format requires at least one row."""
    empty = proj.size == 0
    dim = proj.basis.shape[1] if not empty else max(2, proj.basis.shape[1])
    data = proj.basis if not empty else np.zeros((1, dim))
    matrix = EmbeddingMatrix(
        data=data.astype(np.float32),
        sample_ids=[f"dir{k}" for k in range(data.shape[0])],
        class_labels=[proj.method] * data.shape[0],
        condition=Condition(effect="projector", param=None),
        metadata={
            "method": proj.method,
            "threshold": proj.threshold,
            "empty": empty,
            "provenance": proj.provenance,
        },
    )
    emb1.write_embeddings(matrix, path)


def load_projector(path) -> Projector:
    matrix = emb1.read_embeddings(path)
    meta = matrix.metadata
    if meta.get("empty"):
        basis = np.empty((0, matrix.dim))
    else:
        # float32 storage perturbs orthonormality; re-tighten.
        from .numstats import orthonormalize

        basis = orthonormalize(matrix.data.astype(np.float64))
    return Projector(
        basis=basis,
        method=meta["method"],
        threshold=meta.get("threshold"),
        provenance=meta.get("provenance", {}),
    )
