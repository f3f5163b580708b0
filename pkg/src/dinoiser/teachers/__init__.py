"""Teacher targets: self-supervised affinities and objectness masks."""

from .dino import EMBEDDING_KINDS, TeacherFeatureMap, teacher_features
from .targets import (
    BinaryAffinityTarget,
    MaskDirectorySource,
    binarize_target,
    load_objectness_target,
    resample_mask_to_grid,
)

__all__ = [
    "BinaryAffinityTarget",
    "EMBEDDING_KINDS",
    "MaskDirectorySource",
    "TeacherFeatureMap",
    "binarize_target",
    "load_objectness_target",
    "resample_mask_to_grid",
    "teacher_features",
]
