"""Affinity-guided feature refinement and segmentation."""

from .affinity import (
    TAG_LEARNED,
    TAG_TEACHER,
    AffinityMatrix,
    PoolingWeights,
    compute_affinity,
    cosine_gram,
    threshold_affinity,
)
from .background import refine_background, refinement_mask
from .heads import (
    AffinityHead,
    ObjectnessHead,
    ObjectnessMap,
    im2col3x3,
    affinity_head_forward,
    predict_affinity,
    predict_objectness,
)
from .matching import SegmentationResult, result_from_scores, similarity_map, softmax_rows
from .palette import default_palette, load_palette, save_mask_png, save_palette
from .pipeline import Pipeline, PipelineConfig, WindowOutput, tile_windows
from .pooling import guided_pool, pool_with_affinity
from .upsample import bilinear_resample, nearest_indices, upsample_to_pixels

__all__ = [
    "AffinityHead",
    "AffinityMatrix",
    "ObjectnessHead",
    "ObjectnessMap",
    "Pipeline",
    "PipelineConfig",
    "PoolingWeights",
    "SegmentationResult",
    "TAG_LEARNED",
    "TAG_TEACHER",
    "WindowOutput",
    "affinity_head_forward",
    "bilinear_resample",
    "compute_affinity",
    "cosine_gram",
    "default_palette",
    "guided_pool",
    "im2col3x3",
    "load_palette",
    "nearest_indices",
    "pool_with_affinity",
    "predict_affinity",
    "predict_objectness",
    "refine_background",
    "refinement_mask",
    "result_from_scores",
    "save_mask_png",
    "save_palette",
    "similarity_map",
    "softmax_rows",
    "threshold_affinity",
    "tile_windows",
    "upsample_to_pixels",
]
