"""embsense: quantify how audio embeddings deform under parameterized
effects, estimate the deformation subspace, and test projection-based
desensitization on a downstream classification task."""

from .audio import AudioClip, load_wav, save_wav
from .effects import (
    Effect,
    EffectSweep,
    apply_bitcrush,
    apply_effect,
    apply_filter,
    apply_gain,
    apply_lowpass,
    apply_reverb,
    build_parameter_grid,
    design_cheby2_lowpass,
)
from .emb1 import read_embeddings, write_embeddings
from .embedding import (
    Condition,
    DatasetManifest,
    EmbeddingMatrix,
    LogMelConfig,
    SynthSpec,
    TrajectorySet,
    build_trajectories,
    build_trajectory_sets,
    embed_logmel_stats,
    synth_dataset,
)
from .evaluation import (
    ExperimentReport,
    LogisticModel,
    MethodSpec,
    predict_scores,
    roc_auc,
    run_experiment_grid,
    train_logistic,
)
from .numstats import (
    CcaResult,
    SpectrumReport,
    cca_single_target,
    lda_two_class,
    orthonormalize,
    pca,
    project_out,
    rank_transform,
    spearman,
    svd,
)
from .pipeline import PipelineConfig
from .projection import (
    ALL_METHODS,
    Projector,
    apply_projector,
    apply_to_trajectories,
    estimate,
    estimate_avg_displacement,
    estimate_global_cca,
    estimate_lda,
    estimate_pca_displacement,
    estimate_samplewise_cca_svd,
    load_projector,
    save_projector,
)
from .sensitivity import (
    DimensionalityReport,
    SensitivityReport,
    aggregate_table,
    global_cca,
    samplewise_cca,
    samplewise_direction_spectrum,
    trajectory_projection_2d,
)

__version__ = "0.1.0"
