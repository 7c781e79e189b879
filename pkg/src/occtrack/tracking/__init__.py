from .association import DEFAULT_GATE, AssociationResult, associate, event_weights_from_table, jpda_update, likelihood_table
from .fusion import DynamicOcclusionMap, FilterState, ci_fuse, consensus, update_occlusion_map
from .kalman import FilterError, TrackEstimate, info_update_trace, kf_predict, kf_update, position_selector

__all__ = [
    "DEFAULT_GATE",
    "AssociationResult",
    "DynamicOcclusionMap",
    "FilterError",
    "FilterState",
    "TrackEstimate",
    "associate",
    "ci_fuse",
    "consensus",
    "event_weights_from_table",
    "info_update_trace",
    "jpda_update",
    "kf_predict",
    "kf_update",
    "likelihood_table",
    "position_selector",
    "update_occlusion_map",
]
