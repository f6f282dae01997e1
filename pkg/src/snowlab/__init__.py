"""Hölder embeddings of metric spaces, type/cotype diagnostics and reduction maps."""

from .spaces import (
    DistortionReport,
    EmbeddingTable,
    FiniteMetricSpace,
    PNormVector,
    StepFunction,
    holder_distortion,
    lr_distance,
    metric_space_from_points,
    p_norm,
)
from .embeddings import (
    HolderLine,
    KochParams,
    TabulatedMap,
    discretize_Lr,
    dyadic_round,
    holder_line_map,
    koch_eval,
    koch_extend,
    kuratowski_embed,
    lift_c0,
    lift_lr,
)
from .typecotype import (
    GridMap,
    HypercubeMap,
    Sampled,
    TypeCotypeProfile,
    iff_verdict,
    metric_cotype_ratio,
    metric_type_ratio,
    necessary_conditions,
    rademacher_cotype_ratio,
    rademacher_type_ratio,
    sigma_embed,
    space_profile,
)
from .reductions import (
    ReductionFamily,
    SequencePair,
    cantor_pair,
    cantor_unpair,
    ep_partial_sums,
    scaled_family,
    theta,
    theta_window,
    verify_reduction_conditions,
)
from .search import SearchConfig, brute_min_distortion, local_min_distortion

__version__ = "0.1.0"
