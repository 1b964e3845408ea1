"""End-to-end orchestration: dataset synthesis, effect sweeps, embedding,
sensitivity analysis, projection, evaluation, and report emission.

Stages run sequentially and cache their outputs under <out>/cache keyed
by a content hash of the stage's inputs and config subsection, so reruns
skip completed work. Fixed (config, seed) gives a byte-identical output
tree; wall-clock timestamps are confined to run.log.
"""

from __future__ import annotations

import functools
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import emb1
from .audio import load_wav, save_wav
from .effects import Effect, EffectSweep, apply_effect, build_parameter_grid
from .embedding import (
    DatasetManifest,
    LogMelConfig,
    SynthSpec,
    TrajectorySet,
    build_trajectory_sets,
    embed_logmel_stats,
    synth_dataset,
)
from .errors import ConfigError
from .evaluation import MethodSpec, run_experiment_grid
from .plotting import (
    PALETTE,
    Chart,
    Series,
    polyline_chart,
    render_chart,
    scatter_chart,
    spectrum_chart,
)
from .projection import ALL_METHODS
from .sensitivity import (
    aggregate_table,
    global_cca,
    reports_to_csv,
    reports_to_json,
    samplewise_cca,
    samplewise_direction_spectrum,
    table_to_csv,
    trajectory_projection_2d,
)

log = logging.getLogger("embsense")

EFFECT_NAMES = tuple(e.value for e in Effect)


def _require_keys(section: dict, allowed: set[str], context: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {context}")


@dataclass
class EffectConfig:
    effect: str
    steps: int = 16
    low: float | None = None   # optional grid-range overrides
    high: float | None = None

    def sweep(self) -> EffectSweep:
        sweep = build_parameter_grid(self.effect, self.steps)
        if self.low is None and self.high is None:
            return sweep
        lo = self.low if self.low is not None else min(sweep.params)
        hi = self.high if self.high is not None else max(sweep.params)
        if self.effect == "lowpass":
            params = list(np.geomspace(lo, hi, self.steps))
            ranks = [float(self.steps - i) for i in range(self.steps)]
            return EffectSweep(effect=self.effect, params=params, ranks=ranks)
        if self.effect in ("gain", "reverb"):
            params = list(np.linspace(lo, hi, self.steps))
            neutral = None
            if self.effect == "gain":
                if 0.0 not in params:
                    params = sorted(params + [0.0])
                neutral = params.index(0.0)
                ranks = [float(len(params) - i) for i in range(len(params))]
            else:
                ranks = [float(i + 1) for i in range(len(params))]
            return EffectSweep(effect=self.effect, params=params, ranks=ranks,
                               neutral_index=neutral)
        raise ConfigError("grid overrides are not supported for bitcrush")


@dataclass
class PipelineConfig:
    seed: int = 1234
    output_dir: str = "embsense_out"
    workers: int = 1
    synthetic: SynthSpec | None = field(default_factory=SynthSpec)
    manifest_path: str | None = None
    embeddings_dir: str | None = None
    effects: list[EffectConfig] = field(
        default_factory=lambda: [EffectConfig(e) for e in EFFECT_NAMES])
    embedder: LogMelConfig = field(default_factory=LogMelConfig)
    analysis_ridge: float = 0.0
    thresholds: list[float] = field(default_factory=lambda: [0.3, 0.4, 0.5])
    trajectory_samples: int = 6
    eval_lambda: float = 1.0
    methods: list[str] = field(
        default_factory=lambda: ["none", *ALL_METHODS])

    def __post_init__(self):
        if any(t < 0 or t > 1 for t in self.thresholds):
            raise ConfigError("analysis.thresholds must lie in [0, 1]")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.eval_lambda < 0:
            raise ConfigError("eval.lambda must be >= 0")
        seen = set()
        for e in self.effects:
            if e.effect not in EFFECT_NAMES:
                raise ConfigError(f"unknown effect {e.effect!r}")
            if e.effect in seen:
                raise ConfigError(f"duplicate effect {e.effect!r}")
            seen.add(e.effect)
        for m in self.methods:
            if m != "none" and m not in ALL_METHODS:
                raise ConfigError(f"unknown eval method {m!r}")
        sources = sum(x is not None for x in
                      (self.synthetic, self.manifest_path, self.embeddings_dir))
        if sources != 1:
            raise ConfigError("dataset must name exactly one source")

    # -- serialization ------------------------------------------------------

    def to_dict(self, include_execution: bool = True) -> dict:
        """Config as a plain dict. With include_execution=False the
        execution-only fields (output_dir, workers) are dropped; that form
        defines the run identity, so neither field can influence outputs."""
        dataset: dict = {}
        if self.synthetic is not None:
            dataset["synthetic"] = {
                "n_classes": self.synthetic.n_classes,
                "n_per_class": self.synthetic.n_per_class,
                "duration_s": self.synthetic.duration_s,
                "sample_rate": self.synthetic.sample_rate,
            }
        elif self.manifest_path is not None:
            dataset["manifest"] = self.manifest_path
        else:
            dataset["embeddings"] = self.embeddings_dir
        execution = (
            {"output_dir": self.output_dir, "workers": self.workers}
            if include_execution else {}
        )
        return {
            "seed": self.seed,
            **execution,
            "dataset": dataset,
            "effects": [
                {k: v for k, v in
                 (("effect", e.effect), ("steps", e.steps), ("low", e.low), ("high", e.high))
                 if v is not None}
                for e in self.effects
            ],
            "embedder": {
                "toy": {
                    "n_fft": self.embedder.n_fft,
                    "hop": self.embedder.hop,
                    "n_mels": self.embedder.n_mels,
                    "l2_normalize": self.embedder.l2_normalize,
                }
            },
            "analysis": {
                "ridge": self.analysis_ridge,
                "thresholds": self.thresholds,
                "trajectory_samples": self.trajectory_samples,
            },
            "eval": {"lambda": self.eval_lambda, "methods": self.methods},
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        _require_keys(raw, {"seed", "output_dir", "workers", "dataset", "effects",
                            "embedder", "analysis", "eval"}, "config")
        kwargs: dict = {}
        for key in ("seed", "output_dir", "workers"):
            if key in raw:
                kwargs[key] = raw[key]

        dataset = raw.get("dataset", {"synthetic": {}})
        _require_keys(dataset, {"synthetic", "manifest", "embeddings"}, "dataset")
        if len(dataset) != 1:
            raise ConfigError("dataset must name exactly one source")
        if "synthetic" in dataset:
            synth = dataset["synthetic"]
            _require_keys(synth, {"n_classes", "n_per_class", "duration_s", "sample_rate"},
                          "dataset.synthetic")
            kwargs["synthetic"] = SynthSpec(**synth)
        elif "manifest" in dataset:
            kwargs.update(synthetic=None, manifest_path=str(dataset["manifest"]))
        else:
            kwargs.update(synthetic=None, embeddings_dir=str(dataset["embeddings"]))

        if "effects" in raw:
            effects = []
            for entry in raw["effects"]:
                _require_keys(entry, {"effect", "steps", "low", "high"}, "effects[]")
                effects.append(EffectConfig(**entry))
            kwargs["effects"] = effects

        if "embedder" in raw:
            _require_keys(raw["embedder"], {"toy"}, "embedder")
            toy = raw["embedder"].get("toy", {})
            _require_keys(toy, {"n_fft", "hop", "n_mels", "l2_normalize"}, "embedder.toy")
            kwargs["embedder"] = LogMelConfig(**toy)

        analysis = raw.get("analysis", {})
        _require_keys(analysis, {"ridge", "thresholds", "trajectory_samples"}, "analysis")
        if "ridge" in analysis:
            kwargs["analysis_ridge"] = float(analysis["ridge"])
        if "thresholds" in analysis:
            kwargs["thresholds"] = [float(t) for t in analysis["thresholds"]]
        if "trajectory_samples" in analysis:
            kwargs["trajectory_samples"] = int(analysis["trajectory_samples"])

        evalsec = raw.get("eval", {})
        _require_keys(evalsec, {"lambda", "methods"}, "eval")
        if "lambda" in evalsec:
            kwargs["eval_lambda"] = float(evalsec["lambda"])
        if "methods" in evalsec:
            kwargs["methods"] = list(evalsec["methods"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(include_execution=False),
                          indent=2, sort_keys=True) + "\n"

    @property
    def run_id(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]

    def method_specs(self) -> list[MethodSpec]:
        specs = []
        for m in self.methods:
            if m == "samplewise_svd":
                specs.extend(MethodSpec(m, threshold=t) for t in self.thresholds)
            else:
                specs.append(MethodSpec(m))
        return specs


# ---------------------------------------------------------------------------
# Stage cache


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _stage_key(name: str, config_part, input_hashes: list[str]) -> str:
    blob = json.dumps({"stage": name, "config": config_part, "inputs": input_hashes},
                      sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


class StageCache:
    def __init__(self, out_dir: Path):
        self.dir = out_dir / "cache"
        self.out_dir = out_dir

    def is_fresh(self, stage: str, key: str) -> bool:
        record_path = self.dir / f"{stage}.json"
        if not record_path.exists():
            return False
        try:
            record = json.loads(record_path.read_text())
        except json.JSONDecodeError:
            return False
        if record.get("key") != key:
            return False
        for rel, digest in record.get("outputs", {}).items():
            path = self.out_dir / rel
            if not path.exists() or _sha256_file(path) != digest:
                return False
        return True

    def record(self, stage: str, key: str, outputs: list[Path]) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        record = {
            "key": key,
            "outputs": {
                str(p.relative_to(self.out_dir)): _sha256_file(p) for p in sorted(outputs)
            },
        }
        (self.dir / f"{stage}.json").write_text(
            json.dumps(record, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Stages


def _prepare_out(config: PipelineConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved.json").write_text(config.canonical_json())
    return out


def _embedder_fn(config: PipelineConfig):
    return functools.partial(embed_logmel_stats, config=config.embedder)


def _embedder_name(config: PipelineConfig) -> str:
    return f"toy-logmel-{config.embedder.dim}"


def cmd_synth(config: PipelineConfig) -> int:
    """Generate the synthetic dataset: WAV files plus manifest.json."""
    if config.synthetic is None:
        raise ConfigError("synth stage requires a synthetic dataset config")
    out = _prepare_out(config)
    cache = StageCache(out)
    key = _stage_key("synth", {"dataset": config.to_dict()["dataset"],
                               "seed": config.seed}, [])
    if cache.is_fresh("synth", key):
        log.info("synth: cached")
        return 0
    t0 = time.time()
    clips, manifest = synth_dataset(config.synthetic, config.seed)
    audio_dir = out / "audio"
    audio_dir.mkdir(exist_ok=True)
    outputs = []
    for clip, entry in zip(clips, manifest.entries):
        entry.path = f"audio/{entry.sample_id}.wav"
        path = out / entry.path
        save_wav(path, clip)
        outputs.append(path)
    manifest_path = out / "manifest.json"
    manifest.save(manifest_path)
    outputs.append(manifest_path)
    cache.record("synth", key, outputs)
    log.info("synth: wrote %d clips in %.2fs", len(clips), time.time() - t0)
    return 0


def _load_manifest(config: PipelineConfig, out: Path) -> tuple[DatasetManifest, Path]:
    if config.manifest_path is not None:
        manifest_path = Path(config.manifest_path)
        base = manifest_path.parent
    else:
        manifest_path = out / "manifest.json"
        base = out
    if not manifest_path.exists():
        raise ConfigError(f"manifest not found at {manifest_path}; run synth first")
    return DatasetManifest.load(manifest_path), base


def _audio_input_hashes(manifest: DatasetManifest, base: Path) -> list[str]:
    return [_sha256_file(base / e.path) for e in manifest.entries]


def cmd_effects(config: PipelineConfig) -> int:
    """Materialize effected audio on disk for external extractors:
    audio_effects/<effect>/p<idx>/<sample_id>.wav plus conditions.json."""
    out = _prepare_out(config)
    cache = StageCache(out)
    manifest, base = _load_manifest(config, out)
    key = _stage_key("effects", {"effects": config.to_dict()["effects"]},
                     _audio_input_hashes(manifest, base))
    if cache.is_fresh("effects", key):
        log.info("effects: cached")
        return 0
    t0 = time.time()
    root = out / "audio_effects"
    outputs = []
    conditions = []
    for effect_cfg in config.effects:
        sweep = effect_cfg.sweep()
        for j, param in enumerate(sweep.params):
            cond_dir = root / sweep.effect.value / f"p{j:03d}"
            cond_dir.mkdir(parents=True, exist_ok=True)
            conditions.append({
                "effect": sweep.effect.value,
                "param": float(param),
                "index": j,
                "dir": str(cond_dir.relative_to(out)),
            })
    for entry in manifest.entries:
        clip = load_wav(base / entry.path)
        for effect_cfg in config.effects:
            sweep = effect_cfg.sweep()
            for j, param in enumerate(sweep.params):
                cond_dir = root / sweep.effect.value / f"p{j:03d}"
                path = cond_dir / f"{entry.sample_id}.wav"
                save_wav(path, apply_effect(sweep.effect, param, clip))
                outputs.append(path)
    cond_path = root / "conditions.json"
    cond_path.write_text(json.dumps(conditions, indent=2, sort_keys=True) + "\n")
    outputs.append(cond_path)
    sweeps_path = root / "sweeps.json"
    sweeps_path.write_text(_sweeps_json(config))
    outputs.append(sweeps_path)
    cache.record("effects", key, outputs)
    log.info("effects: wrote %d conditions in %.2fs", len(conditions), time.time() - t0)
    return 0


def _sweeps_json(config: PipelineConfig) -> str:
    payload = {}
    for effect_cfg in config.effects:
        sweep = effect_cfg.sweep()
        payload[sweep.effect.value] = {
            "params": [float(p) for p in sweep.params],
            "ranks": [float(r) for r in sweep.ranks],
            "neutral_index": sweep.neutral_index,
        }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def cmd_embed(config: PipelineConfig) -> int:
    """Embed the dataset clean and under every sweep parameter, writing
    one EMB1 file per condition plus sweeps.json."""
    out = _prepare_out(config)
    cache = StageCache(out)
    manifest, base = _load_manifest(config, out)
    cfg_dict = config.to_dict()
    key = _stage_key("embed", {"effects": cfg_dict["effects"],
                               "embedder": cfg_dict["embedder"]},
                     _audio_input_hashes(manifest, base))
    if cache.is_fresh("embed", key):
        log.info("embed: cached")
        return 0
    t0 = time.time()
    sweeps = [e.sweep() for e in config.effects]
    trajs = build_trajectory_sets(manifest, sweeps, embedder=_embedder_fn(config),
                                  base_dir=base, workers=config.workers)
    emb_dir = out / "embeddings"
    emb_dir.mkdir(exist_ok=True)
    outputs = []
    producer = {"producer": _embedder_name(config), "granularity": "per_clip",
                "l2_normalize": config.embedder.l2_normalize}
    first = next(iter(trajs.values()))
    clean = first.clean
    clean.metadata.update(producer)
    clean_path = emb_dir / "clean.emb1"
    emb1.write_embeddings(clean, clean_path)
    outputs.append(clean_path)
    for effect_name, traj in trajs.items():
        effect_dir = emb_dir / effect_name
        effect_dir.mkdir(exist_ok=True)
        for j, matrix in enumerate(traj.effected):
            matrix.metadata.update(producer)
            path = effect_dir / f"p{j:03d}.emb1"
            emb1.write_embeddings(matrix, path)
            outputs.append(path)
    sweeps_path = emb_dir / "sweeps.json"
    sweeps_path.write_text(_sweeps_json(config))
    outputs.append(sweeps_path)
    cache.record("embed", key, outputs)
    log.info("embed: wrote %d condition files in %.2fs", len(outputs) - 1, time.time() - t0)
    return 0


def _embeddings_root(config: PipelineConfig, out: Path) -> Path:
    if config.embeddings_dir is not None:
        return Path(config.embeddings_dir)
    return out / "embeddings"


def load_trajectory_sets(config: PipelineConfig, out: Path) -> dict[str, TrajectorySet]:
    """Reconstruct TrajectorySets from EMB1 files and sweeps.json."""
    root = _embeddings_root(config, out)
    sweeps_path = root / "sweeps.json"
    if not sweeps_path.exists():
        raise ConfigError(f"{sweeps_path} not found; run embed first")
    sweeps_raw = json.loads(sweeps_path.read_text())
    clean = emb1.read_embeddings(root / "clean.emb1")
    trajs = {}
    for effect_name, sweep_data in sorted(sweeps_raw.items()):
        sweep = EffectSweep(
            effect=effect_name,
            params=sweep_data["params"],
            ranks=sweep_data["ranks"],
            neutral_index=sweep_data["neutral_index"],
        )
        effected = []
        for j in range(len(sweep.params)):
            effected.append(emb1.read_embeddings(root / effect_name / f"p{j:03d}.emb1"))
        trajs[effect_name] = TrajectorySet(clean=clean, effected=effected, sweep=sweep)
    return trajs


def _embedding_file_hashes(config: PipelineConfig, out: Path) -> list[str]:
    root = _embeddings_root(config, out)
    if not root.exists():
        raise ConfigError(f"embeddings directory {root} not found; run embed first")
    return [_sha256_file(p) for p in sorted(root.rglob("*")) if p.is_file()]


def cmd_analyze(config: PipelineConfig) -> int:
    """Global and sample-wise CCA per (effect, class), spectrum comparison,
    aggregate table, and SVG figures. Returns the number of failed cells."""
    out = _prepare_out(config)
    cache = StageCache(out)
    cfg_dict = config.to_dict()
    key = _stage_key("analyze", {"analysis": cfg_dict["analysis"]},
                     _embedding_file_hashes(config, out))
    if cache.is_fresh("analyze", key):
        log.info("analyze: cached")
        return 0
    t0 = time.time()
    trajs = load_trajectory_sets(config, out)
    run_id = config.run_id
    analysis_dir = out / "analysis"
    plots_dir = analysis_dir / "plots"
    plots_dir.mkdir(parents=True, exist_ok=True)
    outputs = []

    reports = []
    spectra = {}
    table_cells = {}
    failures = 0
    embedding_name = _embedder_name(config) if config.embeddings_dir is None else "external"
    for effect_name, traj in sorted(trajs.items()):
        for class_label in traj.class_labels():
            cell = f"{effect_name}/{class_label}"
            try:
                greport = global_cca(traj, class_label, ridge=config.analysis_ridge)
                reports.append(greport)
                table_cells.setdefault((embedding_name, effect_name), []).append(greport)

                sub = traj.filter_class(class_label)
                for sid in sub.clean.sample_ids:
                    reports.append(samplewise_cca(traj, sid, ridge=config.analysis_ridge))
                dim_report = samplewise_direction_spectrum(
                    traj, class_label, ridge=config.analysis_ridge)
                spectra[cell] = dim_report

                scatter_path = plots_dir / f"scatter_{effect_name}_{class_label}.svg"
                scatter_path.write_text(scatter_chart(
                    f"global CCA: {effect_name} / {class_label}",
                    "projection onto deformation direction", "effect strength rank",
                    greport.scatter,
                    [f"R2 = {greport.r2:.4f}", f"rho = {greport.rho:.4f}"]))
                outputs.append(scatter_path)

                spectrum_path = plots_dir / f"spectrum_{effect_name}_{class_label}.svg"
                spectrum_path.write_text(spectrum_chart(
                    f"direction spectrum: {effect_name} / {class_label}",
                    dim_report.cca_spectrum.normalized,
                    dim_report.baseline_spectrum.normalized,
                    [f"k90 cca = {dim_report.effective_dims[0]}",
                     f"k90 baseline = {dim_report.effective_dims[1]}"]))
                outputs.append(spectrum_path)

                n_show = min(config.trajectory_samples, sub.n)
                if n_show >= 2:
                    ids = sub.clean.sample_ids[:n_show]
                    polylines = trajectory_projection_2d(traj, ids)
                    traj_path = plots_dir / f"trajectories_{effect_name}_{class_label}.svg"
                    traj_path.write_text(polyline_chart(
                        f"deformation trajectories: {effect_name} / {class_label}",
                        polylines, ids))
                    outputs.append(traj_path)
            except Exception as exc:  # noqa: BLE001 - recorded per cell
                failures += 1
                log.error("analyze cell %s failed: %s: %s", cell, type(exc).__name__, exc)

    csv_path = analysis_dir / "reports.csv"
    csv_path.write_text(reports_to_csv(reports, run_id=run_id))
    outputs.append(csv_path)
    json_path = analysis_dir / "analysis.json"
    json_path.write_text(reports_to_json(reports, spectra, run_id=run_id))
    outputs.append(json_path)
    table_path = analysis_dir / "table1.csv"
    table_path.write_text(table_to_csv(aggregate_table(table_cells), run_id=run_id))
    outputs.append(table_path)
    cache.record("analyze", key, outputs)
    log.info("analyze: %d reports, %d failed cells, %.2fs",
             len(reports), failures, time.time() - t0)
    return failures


def cmd_evaluate(config: PipelineConfig) -> int:
    """Train/test swap experiment grid over all configured methods.
    Returns the number of failed cells."""
    out = _prepare_out(config)
    cache = StageCache(out)
    cfg_dict = config.to_dict()
    key = _stage_key("evaluate", {"eval": cfg_dict["eval"],
                                  "analysis": cfg_dict["analysis"]},
                     _embedding_file_hashes(config, out))
    if cache.is_fresh("evaluate", key):
        log.info("evaluate: cached")
        return 0
    t0 = time.time()
    trajs = load_trajectory_sets(config, out)
    report = run_experiment_grid(trajs, config.method_specs(),
                                 lam=config.eval_lambda, ridge=config.analysis_ridge)
    run_id = config.run_id
    eval_dir = out / "eval"
    plots_dir = eval_dir / "plots"
    plots_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    csv_path = eval_dir / "report.csv"
    csv_path.write_text(report.to_csv(run_id=run_id))
    outputs.append(csv_path)
    json_path = eval_dir / "report.json"
    json_path.write_text(report.to_json(run_id=run_id))
    outputs.append(json_path)

    by_panel: dict[tuple[str, str], list] = {}
    for cell in report.cells:
        by_panel.setdefault((cell.effect, cell.class_label), []).append(cell)
    for (effect_name, class_label), cells in sorted(by_panel.items()):
        series = []
        methods = sorted({c.method for c in cells})
        for m_idx, method in enumerate(methods):
            color = PALETTE[m_idx % len(PALETTE)]
            for direction in ("clean", "effected"):
                pts = [(c.parameter, c.auc) for c in cells
                       if c.method == method and c.train_condition == direction
                       and c.auc is not None]
                if not pts:
                    continue
                pts.sort()
                # solid: trained on clean; dashed: the swapped direction
                series.append(Series(
                    name=method if direction == "clean" else f"_{method}_{direction}",
                    x=[p[0] for p in pts], y=[p[1] for p in pts],
                    dash=direction == "effected",
                    color=color))
        chart = Chart(
            title=f"ROC AUC vs parameter: {effect_name} / {class_label}",
            xlabel=f"{effect_name} parameter", ylabel="ROC AUC", series=series)
        path = plots_dir / f"auc_{effect_name}_{class_label}.svg"
        path.write_text(render_chart(chart))
        outputs.append(path)
    cache.record("evaluate", key, outputs)
    log.info("evaluate: %d cells, %d failed, %.2fs",
             len(report.cells), report.n_failed, time.time() - t0)
    return report.n_failed


def cmd_full(config: PipelineConfig) -> int:
    """synth (if configured) -> embed -> analyze -> evaluate."""
    failures = 0
    if config.synthetic is not None:
        failures += cmd_synth(config)
    if config.embeddings_dir is None:
        failures += cmd_embed(config)
    failures += cmd_analyze(config)
    failures += cmd_evaluate(config)
    return failures
