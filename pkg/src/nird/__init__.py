"""Non-parametric independence tests between neighborhood-aggregated and
per-node variables on graph data, with synthetic generators and a
benchmark harness."""

from .attrgen import (
    ALTERNATE,
    NULL,
    AttributeTable,
    DiffusionConfig,
    GenConfig,
    diffuse_linear_threshold,
    gen_table,
    read_attribute_csv,
    relational_mean,
    relational_mean_all,
    write_attribute_csv,
)
from .bench import ErrorReport, ExperimentGrid, ReportRow
from .conditional import ConditionalSpec, conditional_statistic, residualize, ridge_fit
from .errors import NirdError
from .kernels import KernelMatrix, center, median_bandwidth, rbf_gram, relational_gram
from .marginal import (
    EXACT,
    RFF,
    MarginalSpec,
    VariableRef,
    hsic_exact,
    hsic_rff,
    marginal_statistic,
)
from .nullperm import TestResult, permutation_pvalue, run_test
from .relgraph import (
    Graph,
    GraphGenConfig,
    PathPredicate,
    build_graph,
    generate_ba,
    generate_er,
    generate_graph,
    induced_subgraph,
    neighbors,
    read_edge_list,
    write_edge_list,
)
from .rff import FeatureKind, FeatureMatrix, RFFConfig, relational_rff_mean, rff_map, sample_frequencies

__version__ = "0.1.0"
