"""pairboard: pairwise human-preference evaluation and BT leaderboards.

A library for running controlled A/B preference studies (qualification,
two-phase locked annotation, blinded slot assignment) and turning the
resulting logs into statistically grounded leaderboards, perceptual-axis
attribution reports, and sample-efficiency analyses — with a synthetic
world simulator as the verification oracle.
"""

from .domain import (
    AXES,
    BENCHMARK_LANGUAGES,
    AgeBand,
    Axis,
    Choice,
    ComparisonRecord,
    Gender,
    LengthClass,
    RaterEntry,
    RaterState,
    Registry,
    SentenceEntry,
    Subset,
    SystemEntry,
    VoiceEntry,
    validate_record,
)
from .errors import PairboardError
from .interpret import (
    FeatureRow,
    PreferenceModel,
    ShapleyReport,
    build_feature_dataset,
    evaluate_cross_lingual,
    exact_shapley,
    mean_abs_shapley_report,
    train_preference_classifier,
)
from .ranking import (
    BootstrapResult,
    BtStrengths,
    LeaderboardConfig,
    LeaderboardEntry,
    SubgroupFilter,
    WinMatrix,
    axis_win_rates,
    bootstrap_cis,
    build_leaderboard,
    compute_win_matrix,
    fit_bt_mm,
    format_leaderboard_table,
    map_to_elo,
    significance_ranks,
    win_rates,
)
from .reliability import (
    ReliabilityCurve,
    ReliabilityPoint,
    ThresholdResult,
    find_threshold,
    rater_subsample_curve,
    sentence_subsample_curve,
    spearman_rho,
)
from .scheduling import (
    PairPlan,
    QualificationStage,
    Scheduler,
    Task,
    TaskState,
    advance_qualification,
)
from .simulate import SimulatedWorld, WorldSpec, generate_world, run_simulation
from .storage import (
    BenchmarkManifest,
    LogWriter,
    PreferenceLog,
    load_manifest,
    read_log,
    save_manifest,
    write_log,
)

__version__ = "0.1.0"
