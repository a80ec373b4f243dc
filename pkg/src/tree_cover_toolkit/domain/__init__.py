from .doubling import DoublingBuild, build_doubling_cover, doubling_tree_cover
from .errors import (
    ConstructionInvariantError,
    CoverMetricMismatchError,
    DegenerateMetricError,
    DisconnectedGraphError,
    InvalidHstError,
    InvalidSeparatorPathError,
    MetricInvariantError,
    NonPlanarGraphError,
    ParameterError,
    PartitionInvariantError,
    RamseyExtractionError,
    RecursionDepthError,
    ResamplingDidNotConvergeError,
    SizeCapError,
    TreeCoverError,
    UnmappedPointError,
)
from .gadgets import (
    CompositionSpec,
    beta_composition,
    composition_power,
    cycle_metric,
    embed_composition_in_cycle_graph,
    ramsey_hardness_witness,
    recursive_cycle_graph,
)
from .metric import (
    EXACT_DOUBLING_LIMIT,
    REL_TOL,
    FiniteMetric,
    WeightedGraph,
    aspect_ratio,
    doubling_constant_estimate,
    doubling_constant_exact,
    is_ultrametric,
    metric_from_graph,
)
from .nets import NetLadder, SubnetPartition, build_ladder, greedy_net, subnet_partition
from .partitions import PartitionParams, assemble_family, cover_from_family, padded_partition
from .ramsey import RamseyBuild, build_ramsey_cover, ramsey_alpha, ramsey_ultrametric
from .randomness import derive_rng, derive_seed
from .separators import SeparatorBuild, build_separator_cover, landmarks, planar_separator
from .tree import CoverKind, HstTree, TreeCover, TreeEmbedding, hst_to_tree, tree_distance
from .verification import DistortionReport, verify_cover

__all__ = [
    "EXACT_DOUBLING_LIMIT",
    "REL_TOL",
    "CompositionSpec",
    "ConstructionInvariantError",
    "CoverKind",
    "CoverMetricMismatchError",
    "DegenerateMetricError",
    "DisconnectedGraphError",
    "DistortionReport",
    "DoublingBuild",
    "FiniteMetric",
    "HstTree",
    "InvalidHstError",
    "InvalidSeparatorPathError",
    "MetricInvariantError",
    "NetLadder",
    "NonPlanarGraphError",
    "ParameterError",
    "PartitionInvariantError",
    "PartitionParams",
    "RamseyBuild",
    "RamseyExtractionError",
    "RecursionDepthError",
    "ResamplingDidNotConvergeError",
    "SeparatorBuild",
    "SizeCapError",
    "SubnetPartition",
    "TreeCover",
    "TreeCoverError",
    "TreeEmbedding",
    "UnmappedPointError",
    "WeightedGraph",
    "aspect_ratio",
    "assemble_family",
    "beta_composition",
    "build_doubling_cover",
    "build_ladder",
    "build_ramsey_cover",
    "build_separator_cover",
    "composition_power",
    "cover_from_family",
    "cycle_metric",
    "derive_rng",
    "derive_seed",
    "doubling_constant_estimate",
    "doubling_constant_exact",
    "doubling_tree_cover",
    "embed_composition_in_cycle_graph",
    "greedy_net",
    "hst_to_tree",
    "is_ultrametric",
    "landmarks",
    "metric_from_graph",
    "padded_partition",
    "planar_separator",
    "ramsey_alpha",
    "ramsey_hardness_witness",
    "ramsey_ultrametric",
    "recursive_cycle_graph",
    "subnet_partition",
    "tree_distance",
    "verify_cover",
]
