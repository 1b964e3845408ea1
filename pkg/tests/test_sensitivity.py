import numpy as np
import pytest

from embsense.effects import Effect, EffectSweep
from embsense.errors import InvalidInputError
from embsense.numstats import orthonormalize
from embsense.sensitivity import (
    aggregate_table,
    global_cca,
    samplewise_cca,
    samplewise_direction_spectrum,
    samplewise_directions,
    trajectory_projection_2d,
)
from synthcases import make_sweep, orthogonal_directions_traj, shared_linear_traj, traj_from_arrays


class TestGlobalCca:
    def test_shared_linear_deformation(self):
        traj, v = shared_linear_traj()
        report = global_cca(traj, "cls")
        assert report.r2 == pytest.approx(1.0, abs=1e-9)
        assert abs(report.direction @ v) > 0.999
        assert report.scope == "global"
        assert len(report.scatter) == traj.n * len(traj.sweep)

    def test_per_sample_directions_break_global_fit(self):
        # orthogonal per-sample directions, monotone magnitudes; d is kept
        # below the 2n-1 constraints so no single direction fits all
        rng = np.random.default_rng(2)
        n, d, p = 8, 8, 12
        base = rng.standard_normal((n, d))
        q, _ = np.linalg.qr(rng.standard_normal((d, n)))
        sweep = make_sweep(p)
        effected = [base + r * q.T for r in sweep.ranks]
        traj = traj_from_arrays(base, effected, sweep=sweep)
        report = global_cca(traj, "cls")
        assert report.r2 < 1.0 - 1e-6

    def test_single_sample_class_rejected(self):
        rng = np.random.default_rng(0)
        base = rng.standard_normal((3, 8))
        labels = ["a", "b", "b"]
        sweep = make_sweep(4)
        traj = traj_from_arrays(base, [base + r for r in sweep.ranks],
                                labels=labels, sweep=sweep)
        with pytest.raises(InvalidInputError):
            global_cca(traj, "a")

    def test_neutral_condition_excluded(self):
        rng = np.random.default_rng(1)
        base = rng.standard_normal((6, 10))
        v = np.zeros(10)
        v[-1] = 1.0
        sweep = EffectSweep(effect=Effect.GAIN, params=[-10.0, 0.0, 10.0, 20.0],
                            ranks=[4.0, 3.0, 2.0, 1.0], neutral_index=1)
        # the neutral condition carries garbage that would wreck the fit if stacked
        effected = [base + r * v for r in sweep.ranks]
        effected[1] = np.full_like(base, 1e6)
        traj = traj_from_arrays(base, effected, sweep=sweep)
        report = global_cca(traj, "cls")
        assert report.rho == pytest.approx(1.0, abs=1e-6)
        assert len(report.scatter) == 6 * 3

    def test_rank_invariance_to_parameterization(self):
        # params never enter the fit, only ranks do
        rng = np.random.default_rng(3)
        base = rng.standard_normal((5, 8))
        effected = [base + r * np.eye(8)[0] + 0.01 * rng.standard_normal((5, 8))
                    for r in range(1, 5)]
        params = [1.0, 2.0, 3.0, 4.0]
        sweep_a = EffectSweep(effect=Effect.REVERB, params=params,
                              ranks=[1.0, 2.0, 3.0, 4.0])
        sweep_b = EffectSweep(effect=Effect.REVERB, params=[p**3 for p in params],
                              ranks=[1.0, 2.0, 3.0, 4.0])
        ra = global_cca(traj_from_arrays(base, effected, sweep=sweep_a), "cls")
        rb = global_cca(traj_from_arrays(base, effected, sweep=sweep_b), "cls")
        assert ra.r2 == rb.r2 and ra.rho == rb.rho

    def test_scatter_consistent_with_r2(self):
        from embsense.numstats import spearman

        traj, _ = shared_linear_traj(n=6, d=16, p=5)
        report = global_cca(traj, "cls")
        a = np.array([p[0] for p in report.scatter])
        b = np.array([p[1] for p in report.scatter])
        assert report.r2 == pytest.approx(spearman(a, b) ** 2, abs=1e-12)


class TestSamplewiseCca:
    def test_straight_line_trajectory(self):
        traj, _ = shared_linear_traj(n=4, d=16, p=6)
        report = samplewise_cca(traj, "s01")
        assert report.scope == "s01"
        assert report.r2 == pytest.approx(1.0, abs=1e-12)

    def test_generic_position_rho_one(self):
        rng = np.random.default_rng(4)
        base = rng.standard_normal((3, 20))
        effected = [base + rng.standard_normal((3, 20)) for _ in range(8)]
        traj = traj_from_arrays(base, effected)  # P - 1 = 7 <= d = 20
        for sid in traj.clean.sample_ids:
            assert samplewise_cca(traj, sid).rho == pytest.approx(1.0, abs=1e-6)

    def test_tied_ranks_allowed(self):
        rng = np.random.default_rng(5)
        base = rng.standard_normal((3, 10))
        sweep = EffectSweep(effect=Effect.REVERB, params=[0.1, 0.2, 0.3, 0.4],
                            ranks=[1.0, 2.0, 2.0, 3.0])
        effected = [base + r * np.eye(10)[0] for r in sweep.ranks]
        traj = traj_from_arrays(base, effected, sweep=sweep)
        report = samplewise_cca(traj, "s00")
        assert 0 <= report.r2 <= 1

    def test_unknown_sample_rejected(self):
        traj, _ = shared_linear_traj(n=4, d=16, p=6)
        with pytest.raises(InvalidInputError):
            samplewise_cca(traj, "nope")


class TestDirectionSpectrum:
    def test_identical_directions(self):
        traj, _ = shared_linear_traj(n=10, d=32, p=8)
        report = samplewise_direction_spectrum(traj, "cls")
        assert report.effective_dims[0] == 1
        assert report.cca_spectrum.normalized[0] == 1.0
        assert report.cca_spectrum.normalized[1] < 1e-9

    def test_orthogonal_directions_flat_spectrum(self):
        traj, _ = orthogonal_directions_traj(n=5, d=8, p=6)
        report = samplewise_direction_spectrum(traj, "cls")
        values = report.cca_spectrum.normalized
        assert np.abs(values - 1.0).max() < 1e-6
        assert report.effective_dims[0] == 5

    def test_mixture_needs_few_components(self):
        # dominant shared direction plus per-sample wobble confined to a
        # 4-dim subspace: more than one component, but not many
        rng = np.random.default_rng(6)
        n, d, p = 20, 64, 10
        base = rng.standard_normal((n, d))
        shared = rng.standard_normal(d)
        shared /= np.linalg.norm(shared)
        noise_basis = orthonormalize(
            np.vstack([shared, rng.standard_normal((4, d))]))[1:]
        coeffs = rng.standard_normal((n, 4))
        dirs = 0.9 * shared + 0.3 * (coeffs @ noise_basis)
        sweep = make_sweep(p)
        effected = [base + r * dirs for r in sweep.ranks]
        traj = traj_from_arrays(base, effected, sweep=sweep)
        report = samplewise_direction_spectrum(traj, "cls")
        assert 1 < report.effective_dims[0] <= 5

    def test_invariance_to_order_and_sign(self):
        traj, _ = orthogonal_directions_traj(n=5, d=16, p=6)
        base_values = samplewise_direction_spectrum(traj, "cls").cca_spectrum.values
        # permute samples
        perm = [3, 1, 4, 0, 2]
        shuffled = traj_from_arrays(
            traj.clean.data[perm],
            [m.data[perm] for m in traj.effected],
            labels=[traj.clean.class_labels[i] for i in perm],
            sweep=traj.sweep,
        )
        values = samplewise_direction_spectrum(shuffled, "cls").cca_spectrum.values
        assert np.allclose(values, base_values, atol=1e-9)

    def test_subspace_dimension_bound(self):
        # displacements confined to a fixed k-dim subspace: k90 <= k
        rng = np.random.default_rng(7)
        n, d, k, p = 12, 32, 3, 8
        base = rng.standard_normal((n, d))
        basis = orthonormalize(rng.standard_normal((k, d)))
        coeffs = rng.standard_normal((n, k))
        dirs = coeffs @ basis
        sweep = make_sweep(p)
        effected = [base + r * dirs for r in sweep.ranks]
        traj = traj_from_arrays(base, effected, sweep=sweep)
        report = samplewise_direction_spectrum(traj, "cls")
        assert report.effective_dims[0] <= k

    def test_sign_alignment(self):
        traj, _ = shared_linear_traj(n=6, d=16, p=5)
        dirs = samplewise_directions(traj, "cls")
        assert np.all(dirs @ dirs[0] >= 0)


class TestAggregateTable:
    def test_display_formats(self):
        def fake(r2):
            traj, _ = shared_linear_traj(n=3, d=8, p=4)
            rep = global_cca(traj, "cls")
            rep.r2 = r2
            return rep

        table = aggregate_table({("emb", "gain"): [fake(1.0), fake(1.0)]})
        assert table[("emb", "gain")]["display"] == "100.00 ± 0.00"
        table = aggregate_table({("emb", "gain"): [fake(0.8), fake(1.0)]})
        assert table[("emb", "gain")]["display"] == "90.00 ± 10.00"
        table = aggregate_table({("emb", "lowpass"): [fake(0.9942)]})
        assert table[("emb", "lowpass")]["display"] == "99.42 ± 0.00"

    def test_mean_within_bounds(self):
        def fake(r2):
            traj, _ = shared_linear_traj(n=3, d=8, p=4)
            rep = global_cca(traj, "cls")
            rep.r2 = r2
            return rep

        values = [0.5, 0.7, 0.95]
        table = aggregate_table({("emb", "reverb"): [fake(v) for v in values]})
        cell = table[("emb", "reverb")]
        assert min(values) * 100 <= cell["mean"] <= max(values) * 100


class TestTrajectoryProjection:
    def test_collinear_trajectories_flatten(self):
        rng = np.random.default_rng(8)
        d, p = 16, 6
        v = rng.standard_normal(d)
        offsets = np.outer(np.arange(4.0), v)  # samples spaced along v
        base = offsets.copy()
        sweep = make_sweep(p)
        effected = [base + r * v for r in sweep.ranks]
        traj = traj_from_arrays(base, effected, sweep=sweep)
        lines = trajectory_projection_2d(traj, traj.clean.sample_ids)
        coords = np.vstack(lines)
        assert coords[:, 1].var() < 1e-6 * coords[:, 0].var()

    def test_counts(self):
        traj, _ = shared_linear_traj(n=6, d=16, p=5)
        ids = traj.clean.sample_ids[:3]
        lines = trajectory_projection_2d(traj, ids)
        assert len(lines) == 3
        assert all(line.shape == (1 + 5, 2) for line in lines)

    def test_planar_data_preserves_distances(self):
        rng = np.random.default_rng(9)
        d, p, n = 24, 4, 5
        plane = orthonormalize(rng.standard_normal((2, d)))
        base2d = rng.standard_normal((n, 2))
        base = base2d @ plane
        steps2d = rng.standard_normal((p, 2))
        sweep = make_sweep(p)
        effected = [base + (steps2d[j] @ plane) for j in range(p)]
        traj = traj_from_arrays(base, effected, sweep=sweep)
        lines = trajectory_projection_2d(traj, traj.clean.sample_ids)
        flat = np.vstack(lines)
        orig = []
        for i in range(n):
            orig.append(base[i])
            orig.extend(base[i] + (steps2d[j] @ plane) for j in range(p))
        orig = np.asarray(orig)
        for i in range(0, len(flat), 7):
            for j in range(i + 1, len(flat), 5):
                d_orig = np.linalg.norm(orig[i] - orig[j])
                d_flat = np.linalg.norm(flat[i] - flat[j])
                assert d_flat == pytest.approx(d_orig, rel=1e-6, abs=1e-9)

    def test_requires_two_samples(self):
        traj, _ = shared_linear_traj(n=4, d=16, p=4)
        with pytest.raises(InvalidInputError):
            trajectory_projection_2d(traj, ["s00"])
