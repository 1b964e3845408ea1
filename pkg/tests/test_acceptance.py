"""Acceptance suite. Each test covers one exit criterion and prints a
[PASS] line on success (run with `pytest -s tests/test_acceptance.py` to
see them). Tolerances and runtime budgets are pinned here, not tuned at
runtime.
"""

import hashlib
import json
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import signal, stats

from embsense.audio import AudioClip
from embsense.effects import apply_bitcrush, apply_gain, apply_reverb, design_cheby2_lowpass
from embsense.errors import DegenerateGeometryError
from embsense.evaluation import logistic_objective, roc_auc, train_logistic
from embsense.numstats import cca_single_target, pca, spearman
from embsense.pipeline import PipelineConfig, cmd_full, load_trajectory_sets
from embsense.projection import ALL_METHODS, apply_to_trajectories, estimate
from embsense.sensitivity import global_cca, samplewise_cca, samplewise_direction_spectrum
from synthcases import orthogonal_directions_traj, shared_linear_traj

GOLDEN_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "golden.json"


def report(name: str, elapsed: float | None = None):
    suffix = f" ({elapsed:.1f}s)" if elapsed is not None else ""
    print(f"\n[PASS] {name}{suffix}")


def test_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)

    # spearman vs rank-then-Pearson, 200 random cases, 1e-12
    for _ in range(200):
        n = int(rng.integers(4, 60))
        a = rng.standard_normal(n)
        b = rng.standard_normal(n)
        oracle = np.corrcoef(stats.rankdata(a), stats.rankdata(b))[0, 1]
        assert spearman(a, b) == pytest.approx(oracle, abs=1e-12)

    # roc_auc vs O(n^2) pair counting, 200 random cases, 1e-12
    for _ in range(200):
        n = int(rng.integers(5, 60))
        scores = np.round(rng.standard_normal(n), 1)  # provoke ties
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        pos = scores[labels == 1]
        neg = scores[labels == 0]
        wins = sum((sp > sn) + 0.5 * (sp == sn) for sp in pos for sn in neg)
        oracle = wins / (len(pos) * len(neg))
        assert roc_auc(scores, labels) == pytest.approx(oracle, abs=1e-12)

    # 2-D CCA vs angle grid search (1e-4 rad), 50 cases, 1e-6
    thetas = np.arange(0.0, np.pi, 1e-4)
    dirs = np.stack([np.cos(thetas), np.sin(thetas)])
    for _ in range(50):
        x = rng.standard_normal((25, 2))
        y = rng.standard_normal(25)
        proj = x @ dirs
        pc = proj - proj.mean(axis=0)
        yc = y - y.mean()
        corr = (pc.T @ yc) / np.sqrt((pc**2).sum(axis=0) * (yc @ yc))
        grid_rho = float(np.abs(corr).max())
        assert cca_single_target(x, y).rho == pytest.approx(grid_rho, abs=1e-6)

    # displacement-PCA top component vs Gram eigensolver, cosine 1e-6
    for _ in range(20):
        n, d = 40, 24
        shared = rng.standard_normal(d)
        shared /= np.linalg.norm(shared)
        disp = 2.0 * rng.standard_normal((n, 1)) * shared + 0.4 * rng.standard_normal((n, d))
        components, _ = pca(disp)
        centered = disp - disp.mean(axis=0)
        eigvals, eigvecs = np.linalg.eigh(centered.T @ centered)
        oracle = eigvecs[:, -1]
        assert 1.0 - abs(components[0] @ oracle) < 1e-6

    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    report("oracle equivalence (spearman, roc_auc, 2-D CCA, displacement PCA)", elapsed)


def test_linear_deformation_recovery():
    t0 = time.perf_counter()
    traj, v = shared_linear_traj(n=40, d=128, p=12, seed=7)

    greport = global_cca(traj, "cls")
    assert abs(greport.r2 - 1.0) < 1e-6

    for method in ALL_METHODS:
        proj = estimate(method, traj, "cls", threshold=0.4)
        assert proj.size >= 1, method
        assert max(abs(proj.basis @ v)) > 0.999, method

    spectrum = samplewise_direction_spectrum(traj, "cls")
    assert spectrum.effective_dims[0] == 1

    projector = estimate("global_cca", traj, "cls")
    cleaned = apply_to_trajectories(projector, traj)
    assert global_cca(cleaned, "cls").rho < 0.1

    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    report("linear-deformation recovery (r2=1, five estimators, k90=1, "
           "post-projection rho<0.1)", elapsed)


def test_high_dimensional_deformation_detection():
    t0 = time.perf_counter()
    n = 8  # the flat spectrum makes k90 equal the sample count for n <= 9
    traj, _ = orthogonal_directions_traj(n=n, d=128, p=12, seed=3)

    spectrum = samplewise_direction_spectrum(traj, "cls")
    assert np.abs(spectrum.cca_spectrum.normalized - 1.0).max() < 1e-6
    assert spectrum.effective_dims[0] == n

    for sid in traj.clean.sample_ids:
        assert abs(samplewise_cca(traj, sid).r2 - 1.0) < 1e-6

    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    report("high-dimensional deformation detection (flat spectrum, k90=N, "
           "sample-wise r2=1)", elapsed)


def test_samplewise_rho_one_regime():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    for _ in range(100):
        p = int(rng.integers(4, 17))
        d = int(rng.integers(p - 1, 65))
        x = rng.standard_normal((p, d))
        y = np.arange(1.0, p + 1.0)
        res = cca_single_target(x, y)
        assert abs(res.rho - 1.0) < 1e-6
    elapsed = time.perf_counter() - t0
    report("sample-wise rho=1 regime (100 random trajectories, P-1 <= d)", elapsed)


def test_dsp_contracts():
    t0 = time.perf_counter()

    # Chebyshev II stopband on a 1 Hz grid
    for cutoff in (1600.0, 5000.0, 18333.0):
        sos = design_cheby2_lowpass(cutoff, 44100, order=8, stop_atten_db=60.0)
        freqs = np.arange(cutoff, 22050.0 + 0.5, 1.0)
        _, h = signal.sosfreqz(sos, worN=freqs, fs=44100)
        mag_db = 20 * np.log10(np.maximum(np.abs(h), 1e-300))
        assert mag_db.max() <= -59.5, f"cutoff {cutoff}"

    # gain composition within 1e-6 relative
    rng = np.random.default_rng(303)
    clip = AudioClip(samples=rng.uniform(-0.9, 0.9, 30000), sample_rate=44100)
    stacked = apply_gain(apply_gain(clip, -13.0), 4.0).samples
    direct = apply_gain(clip, -9.0).samples
    assert np.max(np.abs(stacked - direct) / np.abs(direct)) < 1e-6

    # bitcrush idempotence, bit exact
    for depth in (4, 8, 15):
        once = apply_bitcrush(clip, depth)
        assert np.array_equal(apply_bitcrush(once, depth).samples, once.samples)

    # reverb tail energy monotone over room sizes
    sr = 22050
    padded = np.zeros(2 * sr)
    padded[0] = 1.0
    impulse = AudioClip(samples=padded, sample_rate=sr)
    energies = [float(np.sum(apply_reverb(impulse, r).samples[1:] ** 2))
                for r in (0.01, 0.5, 1.0)]
    assert energies[0] < energies[1] < energies[2]

    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    report("DSP contracts (Chebyshev stopband, gain composition, bitcrush "
           "idempotence, reverb tail)", elapsed)


def _tree_digest(root: Path, exclude=("run.log",)) -> str:
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name not in exclude:
            h.update(str(p.relative_to(root)).encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def test_end_to_end_pipeline(tmp_path):
    raw = json.loads(GOLDEN_CONFIG.read_text())

    def run(name, workers):
        cfg = dict(raw)
        cfg["output_dir"] = str(tmp_path / name)
        cfg["workers"] = workers
        config = PipelineConfig.from_dict(cfg)
        t0 = time.perf_counter()
        failures = cmd_full(config)
        elapsed = time.perf_counter() - t0
        assert failures == 0
        return config, elapsed

    config, elapsed_first = run("run1", workers=1)
    assert elapsed_first < 300.0, "single-threaded run must finish in under 5 minutes"
    run("run2", workers=1)
    run("run4", workers=4)

    d1 = _tree_digest(tmp_path / "run1")
    assert d1 == _tree_digest(tmp_path / "run2"), "reruns must be byte-identical"
    assert d1 == _tree_digest(tmp_path / "run4"), "worker count must not change outputs"

    # gain-sweep global CCA r2 with the toy embedder (golden-config threshold)
    trajs = load_trajectory_sets(config, tmp_path / "run1")
    for class_label in trajs["gain"].class_labels():
        assert global_cca(trajs["gain"], class_label).r2 > 0.95

    report("end-to-end desk-scale pipeline (determinism across runs and "
           f"workers, gain r2>0.95)", elapsed_first)


def test_logistic_training():
    t0 = time.perf_counter()
    rng = np.random.default_rng(404)
    for _ in range(20):
        n = int(rng.integers(20, 60))
        d = int(rng.integers(2, 12))
        x = rng.standard_normal((n, d))
        y = rng.integers(0, 2, n)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        lam = float(rng.uniform(0.1, 2.0))
        model = train_logistic(x, y, lam=lam)
        assert model.grad_norm < 1e-6

        # analytic gradient vs central finite differences, 1e-4 relative
        z = (x - model.mean) / model.std
        w = rng.standard_normal(d) * 0.5
        b = float(rng.standard_normal()) * 0.2
        _, grad = logistic_objective(z, y.astype(float), w, b, lam)
        eps = 1e-6
        fd = np.empty(d + 1)
        for k in range(d):
            dw = np.zeros(d)
            dw[k] = eps
            up, _ = logistic_objective(z, y.astype(float), w + dw, b, lam)
            dn, _ = logistic_objective(z, y.astype(float), w - dw, b, lam)
            fd[k] = (up - dn) / (2 * eps)
        up, _ = logistic_objective(z, y.astype(float), w, b + eps, lam)
        dn, _ = logistic_objective(z, y.astype(float), w, b - eps, lam)
        fd[d] = (up - dn) / (2 * eps)
        rel = np.abs(grad - fd).max() / max(np.abs(fd).max(), 1e-12)
        assert rel < 1e-4

    elapsed = time.perf_counter() - t0
    report("logistic training (converged gradient, finite-difference agreement)",
           elapsed)
