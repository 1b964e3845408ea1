"""Constructed trajectory sets with known ground truth, shared by the
sensitivity, projection, and acceptance tests."""

import numpy as np

from embsense.effects import Effect, EffectSweep
from embsense.embedding import Condition, EmbeddingMatrix, TrajectorySet


def make_sweep(p: int, effect: Effect = Effect.REVERB) -> EffectSweep:
    return EffectSweep(
        effect=effect,
        params=list(np.linspace(0.1, 1.0, p)),
        ranks=[float(i + 1) for i in range(p)],
    )


def traj_from_arrays(base: np.ndarray, effected_arrays: list[np.ndarray],
                     labels=None, sweep: EffectSweep | None = None) -> TrajectorySet:
    n = base.shape[0]
    ids = [f"s{i:02d}" for i in range(n)]
    labels = labels if labels is not None else ["cls"] * n
    sweep = sweep if sweep is not None else make_sweep(len(effected_arrays))
    clean = EmbeddingMatrix(data=base, sample_ids=ids, class_labels=labels)
    effected = [
        EmbeddingMatrix(data=arr, sample_ids=ids, class_labels=labels,
                        condition=Condition(sweep.effect.value, float(sweep.params[j])))
        for j, arr in enumerate(effected_arrays)
    ]
    return TrajectorySet(clean=clean, effected=effected, sweep=sweep)


def shared_linear_traj(n=40, d=128, p=12, seed=7):
    """Every sample moves along one shared unit direction v, by its
    strength rank. v is orthogonal to the samples' own scatter (the
    samples occupy the first d/2 coordinates, v the last d/2), so every
    estimator can recover v exactly.
    """
    rng = np.random.default_rng(seed)
    base = np.zeros((n, d))
    base[:, : d // 2] = rng.standard_normal((n, d // 2))
    v = np.zeros(d)
    vv = rng.standard_normal(d // 2)
    v[d // 2:] = vv / np.linalg.norm(vv)
    sweep = make_sweep(p)
    effected = [base + r * v for r in sweep.ranks]
    return traj_from_arrays(base, effected, sweep=sweep), v


def orthogonal_directions_traj(n=8, d=128, p=12, seed=3):
    """Each sample moves along its own direction; the directions are
    mutually orthonormal, so the sample-wise direction spectrum is flat."""
    rng = np.random.default_rng(seed)
    base = rng.standard_normal((n, d))
    q, _ = np.linalg.qr(rng.standard_normal((d, n)))
    dirs = q.T
    sweep = make_sweep(p)
    effected = [base + r * dirs for r in sweep.ranks]
    return traj_from_arrays(base, effected, sweep=sweep), dirs
