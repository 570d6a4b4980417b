"""Decoder-confidence toolkit for surface codes: confidence scores,
exact small-graph oracles, calibration into logical error
probabilities, abort protocols, and expectation-value estimation."""

from .calibration import (
    CalibrationBin,
    CalibrationCurve,
    VariationReport,
    bin_dcs,
    fit_calibration,
    lep_from_dcs,
    variation_report,
    wilson_interval,
)
from .confidence import (
    LAMBDA_CAP,
    DcsRecord,
    LogOdds,
    complementary_gap,
    build_clusters,
    exact_log_success_odds,
    exact_odds_table,
    residual_dataset,
    swim_distance,
)
from .decoder import (
    Correction,
    decode,
    defect_distances,
    is_success,
    min_weight_perfect_matching,
)
from .errors import (
    CalibrationError,
    CapabilityError,
    ConfigError,
    DecodingError,
    SwimgapError,
)
from .graphs import (
    DecodingGraph,
    build_code_capacity_graph,
    build_phenomenological_graph,
    edge_weight,
    logical_parity,
    probability_from_weight,
)
from .mle import (
    RunDataset,
    estimate_mle,
    estimate_unmitigated,
    estimator_metrics,
    synthesize_runs,
)
from .multiwindow import (
    CircuitRuns,
    WindowPool,
    abort_event_simulation,
    abort_filter,
    circuit_moments,
    compose_lep,
    retained_ler_curve,
    select_distance,
    simulate_circuits,
    spacetime_plan,
    time_overhead,
)
from .noise import (
    ErrorSample,
    perturb_weights,
    rng_stream,
    sample_error,
    sample_error_batch,
    syndrome_of,
)
from .pipeline import ScoredShots, build_pool, calibrate_scores, score_shots
from .scalemodel import (
    LatentOddsModel,
    compare_abort_channels,
    deform_to_target_mean,
    implied_dcs_distribution,
    model_from_histogram,
    sample_circuit_scores,
)

__version__ = "0.1.0"
