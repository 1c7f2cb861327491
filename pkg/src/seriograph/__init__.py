"""Seriation, block-model estimation and structure testing for latent-order graphs."""

from .errors import (
    AllCellsFailedError,
    ConfigError,
    DegenerateSupportError,
    DomainMismatchError,
    EmptyGraphError,
    NoTriplesError,
    ScheduleDegenerateError,
    ScheduleInfeasibleError,
    SealedOracleError,
    SeriographError,
    ValidationError,
)
from .graphon import (
    AssumptionReport,
    BoundaryFamilyParams,
    Graphon,
    SampledGraph,
    check_assumptions,
    graphon_from_config,
    make_boundary_family,
    oracle_positions,
    oracle_true_ranking,
    sample_graph,
    support_bounds,
)
from .ordering import (
    ComparisonTable,
    Ranking,
    agrees_at_precision,
    extreme_sets,
    ordering_error,
    rank_from_comparisons,
    rank_from_embedding,
    restrict_rank,
    table_from_ranking,
)
from .error_rooting import (
    StageDiagnostics,
    StageSchedule,
    build_schedule,
    coarse_spectral_order,
    epsilon_for_delta,
    extension_thresholds,
    oracle_stage_diagnostics,
    refine_all,
    single_stage,
    stage_comparison_table,
)
from .estimation import (
    BlockModelEstimate,
    EstimationLossReport,
    block_average,
    block_partition,
    estimate_graphon,
    naive_local_average,
    oracle_estimation_loss,
)
from .robinson import (
    IntervalTriple,
    LambdaReport,
    interval_triples,
    lambda_components,
    lambda_statistic,
    population_lambda,
)
from .harness import (
    CellResult,
    ExperimentConfig,
    RateFit,
    fit_rate,
    median_errors,
    run_cell,
    run_experiment,
)

__version__ = "0.1.0"
