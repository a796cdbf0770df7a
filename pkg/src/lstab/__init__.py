"""Local stability of items in a ranking under bounded data perturbations."""

from .core import (
    AttributeSchema,
    DataTuple,
    Dataset,
    Ranking,
    RankingFunctionSpec,
    apply_refinement,
    load_dataset,
    position_change,
    rank_dataset,
    score_tuple,
)
from .dense import DenseRegionReport, StabilityCurve, detect_dense_region, jenks_two_class, stability_curve
from .engine import (
    EngineConfig,
    Probe,
    StabilityReport,
    construct_boundary,
    hoeffding_sample_count,
    is_k_stable,
    lstability,
    reduce_rc,
    verify_boundary,
)
from .geometry import Boundary, ReasonableChanges, box_volume, contains_leq, in_stable_zone, min_skyline
from .sampling import estimate_stability, rejection_sample_stable_zone, sample_uniform_rc, substream

__version__ = "0.1.0"
