"""Embedding containers, the deterministic log-mel toy embedder, a
synthetic labeled-audio generator, and trajectory construction.

An embedding matrix row is one analysis sample. The toy embedder emits
one row per clip; externally produced matrices may use any granularity
as long as rows stay aligned by ``sample_ids`` across conditions.
"""

from __future__ import annotations

import concurrent.futures
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import AudioClip, load_wav
from .effects import EffectSweep, apply_effect
from .errors import DimensionMismatchError, InvalidInputError, InvalidParameterError


@dataclass(frozen=True)
class Condition:
    """Which processing state a matrix's rows were embedded under:
    ("clean", None) or (effect name, parameter value)."""

    effect: str = "clean"
    param: float | None = None

    def key(self) -> str:
        return "clean" if self.effect == "clean" else f"{self.effect}@{self.param!r}"


CLEAN = Condition()


@dataclass
class EmbeddingMatrix:
    data: np.ndarray                 # N x d, float32 on disk; float64 allowed in memory
    sample_ids: list[str]
    class_labels: list[str]
    condition: Condition = CLEAN
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 2:
            raise InvalidInputError("data must be N x d with N >= 1, d >= 2")
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("embedding data contains non-finite values")
        if len(self.sample_ids) != data.shape[0] or len(self.class_labels) != data.shape[0]:
            raise DimensionMismatchError("sample_ids/class_labels must match row count")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise InvalidInputError("sample_ids must be unique")
        self.data = data
        self.sample_ids = [str(s) for s in self.sample_ids]
        self.class_labels = [str(c) for c in self.class_labels]

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def class_indices(self, label: str) -> np.ndarray:
        return np.array([i for i, c in enumerate(self.class_labels) if c == label], dtype=int)

    def take(self, indices: np.ndarray, condition: Condition | None = None) -> "EmbeddingMatrix":
        return EmbeddingMatrix(
            data=self.data[indices],
            sample_ids=[self.sample_ids[i] for i in indices],
            class_labels=[self.class_labels[i] for i in indices],
            condition=self.condition if condition is None else condition,
            metadata=dict(self.metadata),
        )


@dataclass
class TrajectorySet:
    """Row-aligned embeddings of the same samples under a clean condition
    and every parameter of one effect sweep."""

    clean: EmbeddingMatrix
    effected: list[EmbeddingMatrix]
    sweep: EffectSweep

    def __post_init__(self):
        if len(self.effected) != len(self.sweep.params):
            raise DimensionMismatchError("one effected matrix per sweep parameter required")
        for m in self.effected:
            if m.dim != self.clean.dim:
                raise DimensionMismatchError("all matrices must share dimensionality")
            if m.sample_ids != self.clean.sample_ids:
                raise InvalidInputError("effected rows must align with clean sample_ids")

    @property
    def n(self) -> int:
        return self.clean.n

    @property
    def dim(self) -> int:
        return self.clean.dim

    def class_labels(self) -> list[str]:
        return sorted(set(self.clean.class_labels))

    def filter_class(self, label: str) -> "TrajectorySet":
        idx = self.clean.class_indices(label)
        if idx.size == 0:
            raise InvalidInputError(f"no samples with class label {label!r}")
        return TrajectorySet(
            clean=self.clean.take(idx),
            effected=[m.take(idx) for m in self.effected],
            sweep=self.sweep,
        )


@dataclass
class ManifestEntry:
    sample_id: str
    path: str
    class_label: str
    duration_s: float
    sample_rate: int


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]

    def __post_init__(self):
        ids = [e.sample_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("manifest sample_ids must be unique")

    def save(self, path) -> None:
        payload = [
            {
                "sample_id": e.sample_id,
                "path": e.path,
                "class_label": e.class_label,
                "duration_s": e.duration_s,
                "sample_rate": e.sample_rate,
            }
            for e in self.entries
        ]
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        raw = json.loads(Path(path).read_text())
        entries = [ManifestEntry(**{k: e[k] for k in
                                    ("sample_id", "path", "class_label",
                                     "duration_s", "sample_rate")})
                   for e in raw]
        return cls(entries=entries)


# ---------------------------------------------------------------------------
# Toy log-mel embedder


@dataclass(frozen=True)
class LogMelConfig:
    n_fft: int = 1024
    hop: int = 512
    n_mels: int = 64
    l2_normalize: bool = False

    @property
    def dim(self) -> int:
        return 2 * self.n_mels


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, sample_rate: int) -> tuple[np.ndarray, np.ndarray]:
    """HTK-style triangular mel filterbank (peak height 1).

    Returns (weights, centers_hz) where weights has shape
    (n_mels, n_fft//2 + 1).
    """
    nyquist = sample_rate / 2.0
    mel_pts = np.linspace(hz_to_mel(0.0), hz_to_mel(nyquist), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    weights = np.zeros((n_mels, freqs.size))
    for k in range(n_mels):
        lo, center, hi = hz_pts[k], hz_pts[k + 1], hz_pts[k + 2]
        up = (freqs - lo) / (center - lo)
        down = (hi - freqs) / (hi - center)
        weights[k] = np.clip(np.minimum(up, down), 0.0, 1.0)
    return weights, hz_pts[1:-1]


def embed_logmel_stats(clip: AudioClip, config: LogMelConfig = LogMelConfig()) -> np.ndarray:
    """Per-band mean and standard deviation of log(1 + mel magnitude).

    Magnitude STFT with a periodic Hann window (no padding; the tail that
    does not fill a frame is dropped), HTK mel filterbank, log1p, then
    mean and population std over frames, concatenated. Returns float32.
    """
    x = clip.samples
    if x.size < config.n_fft:
        raise InvalidInputError(
            f"clip has {x.size} samples; needs at least n_fft={config.n_fft}"
        )
    n_frames = 1 + (x.size - config.n_fft) // config.hop
    idx = np.arange(config.n_fft)[None, :] + config.hop * np.arange(n_frames)[:, None]
    window = np.hanning(config.n_fft + 1)[:-1]  # periodic Hann
    frames = x[idx] * window
    mag = np.abs(np.fft.rfft(frames, axis=1))
    fb, _ = mel_filterbank(config.n_mels, config.n_fft, clip.sample_rate)
    logmel = np.log1p(mag @ fb.T)  # (n_frames, n_mels)
    vec = np.concatenate([logmel.mean(axis=0), logmel.std(axis=0)])
    if config.l2_normalize:
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec = vec / norm
    return vec.astype(np.float32)


# ---------------------------------------------------------------------------
# Synthetic dataset


@dataclass(frozen=True)
class SynthSpec:
    n_classes: int = 2
    n_per_class: int = 10
    duration_s: float = 3.0
    sample_rate: int = 22050


def synth_dataset(spec: SynthSpec, seed: int) -> tuple[list[AudioClip], DatasetManifest]:
    """Generate labeled harmonic tone complexes, one class per timbre.

    Class k draws fundamentals from its own narrow range and uses a
    class-specific harmonic decay, plus low-level noise. Output is fully
    determined by (spec, seed). Manifest paths are filled in by the
    caller when clips are written to disk.
    """
    if spec.n_classes < 2:
        raise InvalidParameterError("n_classes must be >= 2")
    if spec.n_per_class < 4:
        raise InvalidParameterError("n_per_class must be >= 4")
    rng = np.random.default_rng(seed)
    n_samples = int(round(spec.duration_s * spec.sample_rate))
    t = np.arange(n_samples) / spec.sample_rate
    clips: list[AudioClip] = []
    entries: list[ManifestEntry] = []
    for k in range(spec.n_classes):
        f0_lo = min(110.0 * (1.9**k), spec.sample_rate / 8.0)  # keep harmonics audible
        decay = 0.6 + 0.5 * k
        n_harmonics = max(3, int(spec.sample_rate / 2 / (f0_lo * 1.1) * 0.6))
        n_harmonics = min(n_harmonics, 24)
        for j in range(spec.n_per_class):
            f0 = f0_lo * (1.0 + 0.1 * rng.random())
            phases = rng.uniform(0, 2 * np.pi, n_harmonics)
            amp = 0.25 * (1.0 + 0.2 * rng.random())
            x = np.zeros(n_samples)
            for h in range(1, n_harmonics + 1):
                if h * f0 >= spec.sample_rate / 2:
                    break
                x += np.sin(2 * np.pi * h * f0 * t + phases[h - 1]) / h**decay
            x *= amp / np.max(np.abs(x))
            x += 0.002 * rng.standard_normal(n_samples)
            sample_id = f"c{k}s{j:03d}"
            clips.append(AudioClip(samples=x, sample_rate=spec.sample_rate))
            entries.append(
                ManifestEntry(
                    sample_id=sample_id,
                    path=f"{sample_id}.wav",
                    class_label=f"class{k}",
                    duration_s=spec.duration_s,
                    sample_rate=spec.sample_rate,
                )
            )
    return clips, DatasetManifest(entries=entries)


# ---------------------------------------------------------------------------
# Trajectory construction


def _embed_entry(args):
    entry_sample_id, path, sweeps, embedder = args
    try:
        clip = load_wav(path)
        clean_row = embedder(clip)
        rows = []
        for sweep in sweeps:
            for param in sweep.params:
                out = apply_effect(sweep.effect, param, clip)
                # The WAV interchange is float32; quantize processed audio
                # so on-disk and in-memory effect paths agree.
                out = out.with_samples(out.samples.astype(np.float32).astype(np.float64))
                rows.append(embedder(out))
        return entry_sample_id, clean_row, rows, None
    except Exception as exc:  # noqa: BLE001 - reported per entry
        return entry_sample_id, None, None, f"{type(exc).__name__}: {exc}"


def build_trajectory_sets(
    manifest: DatasetManifest,
    sweeps: list[EffectSweep],
    embedder=embed_logmel_stats,
    base_dir=None,
    workers: int = 1,
) -> dict[str, TrajectorySet]:
    """Embed every manifest clip clean and under each parameter of each
    sweep, loading each clip once.

    Rows follow manifest order in every condition. Work parallelizes over
    clips; results are assembled in manifest order so the output does not
    depend on the worker count. Any per-entry failure aborts with a report
    naming the failing sample_ids.
    """
    base = Path(base_dir) if base_dir is not None else Path(".")
    tasks = [
        (e.sample_id, str(base / e.path), sweeps, embedder) for e in manifest.entries
    ]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_embed_entry, tasks, chunksize=1))
    else:
        results = [_embed_entry(t) for t in tasks]

    failures = [(sid, err) for sid, _, _, err in results if err is not None]
    if failures:
        detail = "; ".join(f"{sid}: {err}" for sid, err in failures)
        raise InvalidInputError(
            f"{len(failures)}/{len(results)} entries failed to embed: {detail}"
        )

    ids = [e.sample_id for e in manifest.entries]
    labels = [e.class_label for e in manifest.entries]
    clean = EmbeddingMatrix(
        data=np.stack([r[1] for r in results]),
        sample_ids=ids,
        class_labels=labels,
        condition=CLEAN,
    )
    out: dict[str, TrajectorySet] = {}
    offset = 0
    for sweep in sweeps:
        effected = []
        for j, param in enumerate(sweep.params):
            effected.append(
                EmbeddingMatrix(
                    data=np.stack([r[2][offset + j] for r in results]),
                    sample_ids=ids,
                    class_labels=labels,
                    condition=Condition(effect=sweep.effect.value, param=float(param)),
                )
            )
        offset += len(sweep.params)
        out[sweep.effect.value] = TrajectorySet(clean=clean, effected=effected, sweep=sweep)
    return out


def build_trajectories(
    manifest: DatasetManifest,
    sweep: EffectSweep,
    embedder=embed_logmel_stats,
    base_dir=None,
    workers: int = 1,
) -> TrajectorySet:
    """Single-sweep convenience wrapper around build_trajectory_sets."""
    sets = build_trajectory_sets(manifest, [sweep], embedder=embedder,
                                 base_dir=base_dir, workers=workers)
    return sets[sweep.effect.value]
