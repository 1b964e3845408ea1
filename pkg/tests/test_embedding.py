import numpy as np
import pytest

from embsense.audio import AudioClip, save_wav
from embsense.effects import Effect, apply_gain, build_parameter_grid
from embsense.embedding import (
    DatasetManifest,
    LogMelConfig,
    SynthSpec,
    build_trajectories,
    embed_logmel_stats,
    mel_filterbank,
    synth_dataset,
)
from embsense.errors import InvalidInputError, InvalidParameterError
from embsense.evaluation import predict_scores, roc_auc, train_logistic


class TestLogMelEmbedder:
    def test_silence_embeds_to_zero(self):
        clip = AudioClip(samples=np.zeros(4096), sample_rate=22050)
        vec = embed_logmel_stats(clip)
        assert vec.shape == (128,)
        assert np.array_equal(vec, np.zeros(128, dtype=np.float32))

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        clip = AudioClip(samples=0.2 * rng.standard_normal(22050), sample_rate=22050)
        assert np.array_equal(embed_logmel_stats(clip), embed_logmel_stats(clip))

    def test_pure_tone_peaks_in_expected_band(self):
        sr = 22050
        config = LogMelConfig()
        t = np.arange(2 * sr) / sr
        clip = AudioClip(samples=0.5 * np.sin(2 * np.pi * 440.0 * t), sample_rate=sr)
        vec = embed_logmel_stats(clip, config)
        # oracle: the band whose triangle weight at 440 Hz is largest
        weights, _ = mel_filterbank(config.n_mels, config.n_fft, sr)
        freqs = np.arange(config.n_fft // 2 + 1) * sr / config.n_fft
        bin_440 = int(np.argmin(np.abs(freqs - 440.0)))
        expected_band = int(np.argmax(weights[:, bin_440]))
        assert int(np.argmax(vec[:config.n_mels])) == expected_band

    def test_scale_sensitive(self):
        rng = np.random.default_rng(1)
        clip = AudioClip(samples=0.5 * rng.standard_normal(22050), sample_rate=22050)
        attenuated = apply_gain(clip, -20.0)
        assert not np.array_equal(embed_logmel_stats(clip), embed_logmel_stats(attenuated))

    def test_short_clip_rejected(self):
        clip = AudioClip(samples=np.zeros(100), sample_rate=22050)
        with pytest.raises(InvalidInputError):
            embed_logmel_stats(clip)

    def test_l2_normalize_flag(self):
        rng = np.random.default_rng(2)
        clip = AudioClip(samples=0.5 * rng.standard_normal(22050), sample_rate=22050)
        vec = embed_logmel_stats(clip, LogMelConfig(l2_normalize=True))
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-6)


class TestSynthDataset:
    def test_seeded_determinism(self):
        spec = SynthSpec(n_classes=2, n_per_class=4, duration_s=0.5)
        clips_a, _ = synth_dataset(spec, 77)
        clips_b, _ = synth_dataset(spec, 77)
        for a, b in zip(clips_a, clips_b):
            assert np.array_equal(a.samples, b.samples)
        clips_c, _ = synth_dataset(spec, 78)
        assert not np.array_equal(clips_a[0].samples, clips_c[0].samples)

    def test_manifest_counts(self):
        _, manifest = synth_dataset(SynthSpec(2, 10, 3.0, 22050), 0)
        assert len(manifest.entries) == 20
        for label in ("class0", "class1"):
            assert sum(e.class_label == label for e in manifest.entries) == 10

    def test_classes_linearly_separable(self):
        clips, manifest = synth_dataset(SynthSpec(), 1234)
        rows = np.stack([embed_logmel_stats(c) for c in clips]).astype(np.float64)
        y = np.array([1 if e.class_label == "class1" else 0 for e in manifest.entries])
        model = train_logistic(rows, y, lam=1.0)
        assert roc_auc(predict_scores(model, rows), y) == 1.0

    def test_preconditions(self):
        with pytest.raises(InvalidParameterError):
            synth_dataset(SynthSpec(n_classes=1), 0)
        with pytest.raises(InvalidParameterError):
            synth_dataset(SynthSpec(n_per_class=3), 0)


def _write_dataset(tmp_path, spec, seed=5):
    clips, manifest = synth_dataset(spec, seed)
    for clip, entry in zip(clips, manifest.entries):
        save_wav(tmp_path / entry.path, clip)
    return manifest


class TestBuildTrajectories:
    def test_counts_and_alignment(self, tmp_path):
        manifest = _write_dataset(tmp_path, SynthSpec(2, 4, 0.5))
        sweep = build_parameter_grid(Effect.BITCRUSH)
        traj = build_trajectories(manifest, sweep, base_dir=tmp_path)
        assert traj.clean.data.shape == (8, 128)
        assert len(traj.effected) == 12
        assert all(m.sample_ids == traj.clean.sample_ids for m in traj.effected)

    def test_neutral_gain_condition_equals_clean(self, tmp_path):
        manifest = _write_dataset(tmp_path, SynthSpec(2, 4, 0.5))
        sweep = build_parameter_grid(Effect.GAIN, steps=10)
        traj = build_trajectories(manifest, sweep, base_dir=tmp_path)
        neutral = traj.effected[sweep.neutral_index]
        assert np.array_equal(neutral.data, traj.clean.data)

    def test_bitcrush_distance_monotone(self, tmp_path):
        manifest = _write_dataset(tmp_path, SynthSpec(2, 4, 0.5))
        sweep = build_parameter_grid(Effect.BITCRUSH)
        traj = build_trajectories(manifest, sweep, base_dir=tmp_path)
        def mean_dist(j):
            return float(np.linalg.norm(
                traj.effected[j].data.astype(np.float64)
                - traj.clean.data.astype(np.float64), axis=1).mean())
        assert mean_dist(sweep.params.index(15.0)) < mean_dist(sweep.params.index(4.0))

    def test_order_independence(self, tmp_path):
        manifest = _write_dataset(tmp_path, SynthSpec(2, 4, 0.5))
        sweep = build_parameter_grid(Effect.REVERB, steps=3)
        traj = build_trajectories(manifest, sweep, base_dir=tmp_path)
        reversed_manifest = DatasetManifest(entries=list(reversed(manifest.entries)))
        rtraj = build_trajectories(reversed_manifest, sweep, base_dir=tmp_path)
        assert rtraj.clean.sample_ids == list(reversed(traj.clean.sample_ids))
        assert np.array_equal(rtraj.clean.data, traj.clean.data[::-1])
        for m, rm in zip(traj.effected, rtraj.effected):
            assert np.array_equal(rm.data, m.data[::-1])

    def test_worker_count_does_not_change_output(self, tmp_path):
        manifest = _write_dataset(tmp_path, SynthSpec(2, 4, 0.5))
        sweep = build_parameter_grid(Effect.GAIN, steps=3)
        serial = build_trajectories(manifest, sweep, base_dir=tmp_path, workers=1)
        parallel = build_trajectories(manifest, sweep, base_dir=tmp_path, workers=3)
        assert np.array_equal(serial.clean.data, parallel.clean.data)
        for a, b in zip(serial.effected, parallel.effected):
            assert np.array_equal(a.data, b.data)

    def test_missing_file_reports_sample_id(self, tmp_path):
        manifest = _write_dataset(tmp_path, SynthSpec(2, 4, 0.5))
        (tmp_path / manifest.entries[2].path).unlink()
        sweep = build_parameter_grid(Effect.GAIN, steps=3)
        with pytest.raises(InvalidInputError, match=manifest.entries[2].sample_id):
            build_trajectories(manifest, sweep, base_dir=tmp_path)

    def test_manifest_round_trip(self, tmp_path):
        manifest = _write_dataset(tmp_path, SynthSpec(2, 4, 0.5))
        manifest.save(tmp_path / "manifest.json")
        loaded = DatasetManifest.load(tmp_path / "manifest.json")
        assert loaded == manifest
