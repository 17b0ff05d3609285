"""Truth inference and adaptive labeling toolkit for crowd-labeled binary tasks.

The package estimates gold-standard labels from noisy worker responses
(majority voting, weighted posteriors, confusion-matrix EM, Bayesian
sensitivity/specificity EM, ability/difficulty EM, reliability message
passing, and a spectral variant), chooses which sample to label next under
a fixed budget (uniform, entropy, and uncertainty criteria), tracks worker
accuracy over time with a sequential Bayesian filter, and reproduces the
comparative benchmark grids over the bundled fixture datasets.
"""

from .aggregate import (
    AccuracyModel,
    ConfusionModel,
    EmOptions,
    GladModel,
    MulticlassLabels,
    ReliabilityMessages,
    SensSpecModel,
    SensSpecPriors,
    accuracy_em,
    bayes_sensspec_em,
    dawid_skene_em,
    dawid_skene_em_multiclass,
    filtered_vote_quality,
    glad_em,
    kos_iterate,
    majority_vote,
    mv_quality,
    spectral_estimate,
    weighted_posterior,
)
from .bench import (
    METHODS,
    CellResult,
    ExperimentConfig,
    ExperimentReport,
    cell_seed,
    emit_report,
    load_report,
    render_report,
    report_from_json_obj,
    resolve_pool,
    run_cell,
    run_experiment,
)
from .cli import cli_main
from .errors import (
    CoverageError,
    CrowdBenchError,
    DataFormatError,
    DegeneratePosteriorError,
    DomainError,
    InsufficientHistoryError,
    PoolExhaustedError,
)
from .labels import (
    FIXTURE_NAMES,
    EstimateSet,
    GoldStandards,
    LabelMatrix,
    LabelPool,
    SynthConfig,
    fixture_pool,
    load_manifest,
    load_pool,
    save_pool_csv,
    score,
    subsample,
    synth_generate,
)
from .numerics import (
    ConfidenceSpec,
    binary_entropy,
    reg_inc_beta,
    sigmoid,
    student_t_quantile,
    trunc_gauss_density,
)
from .selection import (
    INTEGRATORS,
    SELECTORS,
    ReplayTrace,
    SelectionState,
    adaptive_replay,
    integrate,
    select_entropy,
    select_uncertainty,
    select_uniform,
)
from .sequential import (
    AccuracyPosterior,
    SFilterConfig,
    TrackResult,
    WorkerHistory,
    export_trajectories,
    iethresh_select,
    iethresh_upper,
    initial_posterior,
    sfilter_observe,
    sfilter_track,
    worker_histories,
)

__version__ = "0.1.0"
