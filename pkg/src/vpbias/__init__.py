"""Quantify multi-dimensional bias of vantage-point sets against an AS
population, and reduce it by subsampling or extension."""

from .data_model import (
    DimensionSchema,
    FeatureTable,
    LabelAssignment,
    VantagePointSet,
    default_schema,
    load_feature_table,
    load_labels,
    load_schema,
    load_vantage_point_set,
    parse_asn_list,
)
from .distributions import BinningSpec, Distribution, build_binning, empirical_distribution
from .metrics import (
    AggregationSpec,
    BiasMetricConfig,
    BiasReport,
    KsResult,
    aggregate,
    bias_vector,
    kl_smoothed,
    ks_test,
    ks_vector,
    max_distance,
    total_variation,
)
from .sampling import RandomBaseline, SubsampleResult, greedy_subsample, random_baseline, sorting_subsample
from .extension import (
    ExtensionCandidate,
    ExtensionResult,
    greedy_extend,
    score_candidates,
    sorting_extend,
)
from .complexity import (
    CollapsePolicy,
    ComplexityScore,
    ComplexityScoreTable,
    collapse,
    complexity_vs_bias,
    default_score_table,
    score_all,
)
from .analytics import (
    CorrelationMatrix,
    LatencyDistribution,
    correlation_matrix,
    load_latency_csv,
    percentile_relative_error,
)
from .synth import SynthSpec, generate

__version__ = "0.1.0"
