"""Balanced frames: construction, analysis, duals, nearest balanced frames and channel simulation."""

from .core import (
    DEFAULT_TOL,
    BalancedEquivalences,
    Frame,
    GramMatrix,
    NaimarkDilation,
    SpectralData,
    ToleranceConfig,
    analysis_apply,
    angle_frame,
    balance_sum,
    canonical_parseval,
    check_balanced_equivalences,
    frame_graph_components,
    frame_operator,
    gram,
    is_balanced,
    is_buntf,
    is_equal_norm,
    is_frame,
    is_isogonal,
    is_maximally_robust,
    is_parseval,
    is_real,
    is_simplex,
    is_spherical_2_design_r2,
    is_tight,
    is_unit_norm,
    naimark_complete,
    spectral,
    synthesis_apply,
)
from .constructions import (
    Construction,
    PartitionSpec,
    cross_frame,
    eutactic_star,
    harmonic_frame,
    hadamard_subframe,
    partition_frame,
    roots_of_unity_frame,
    simplex_frame,
    sylvester_hadamard,
)
from .duality import (
    b_complement,
    balanced_dual_representative,
    balanced_tight_dual,
    canonical_dual,
    check_b_complement_pair,
    complement,
    erasure_dual,
    is_dual_pair,
    sample_balanced_dual,
)
from .nearest import NearestBalanced, NotExists, WeightVector, nearest_balanced_l1, nearest_balanced_l2
from .channel import DetectorConfig, NoiseSpec, detect_anomaly, empirical_mse, transmit, verify_error_bounds
from .errors import FrameError

__version__ = "0.1.0"
