"""Open-vocabulary zero-shot semantic segmentation via affinity-guided pooling.

Dense vision-language patch features are refined by averaging each patch
with the patches it correlates with; the correlation and objectness
signals come from two tiny convolutional heads distilled from a
self-supervised teacher, so inference needs a single backbone pass.
"""

from . import denoiser, eval, featurizer, kernels, teachers, training
from .errors import (
    DegenerateInputError,
    DinoiserError,
    IncompatibleCheckpointError,
    InvalidArgumentError,
    NotFoundError,
    UndefinedMetricError,
    WeightLoadError,
)
from .types import PatchFeatureMap, PatchGrid, TextQuerySet, patch_grid_for

__version__ = "0.1.0"

__all__ = [
    "DegenerateInputError",
    "DinoiserError",
    "IncompatibleCheckpointError",
    "InvalidArgumentError",
    "NotFoundError",
    "PatchFeatureMap",
    "PatchGrid",
    "TextQuerySet",
    "UndefinedMetricError",
    "WeightLoadError",
    "denoiser",
    "eval",
    "featurizer",
    "kernels",
    "patch_grid_for",
    "teachers",
    "training",
    "__version__",
]
