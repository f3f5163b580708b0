"""Frozen-backbone featurization: dense patch features and text queries."""

from ..types import PatchFeatureMap, PatchGrid, TextQuerySet, patch_grid_for
from .backbone import BackboneHandle, load_backbone, resolve_weight_path
from .maskclip import DenseEncoding, encode_image_dense
from .preprocess import PreprocessInfo, prepare, to_float_rgb
from .synth import make_random_teacher, make_random_weights
from .templates import IMAGENET_TEMPLATES, SINGLE_TEMPLATE, TEMPLATE_SETS
from .text import encode_text_queries

__all__ = [
    "BackboneHandle",
    "DenseEncoding",
    "IMAGENET_TEMPLATES",
    "PatchFeatureMap",
    "PatchGrid",
    "PreprocessInfo",
    "SINGLE_TEMPLATE",
    "TEMPLATE_SETS",
    "TextQuerySet",
    "encode_image_dense",
    "encode_text_queries",
    "load_backbone",
    "make_random_teacher",
    "make_random_weights",
    "patch_grid_for",
    "prepare",
    "resolve_weight_path",
    "to_float_rgb",
]
