"""End-to-end segmentation pipeline: one backbone pass per window.

``Pipeline.segment`` runs a single pass over the whole (resized) image;
the eval module tiles windows through the same accumulation helpers so a
single-window sliding run is bit-identical to ``segment``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace

import numpy as np

from ..errors import InvalidArgumentError
from ..featurizer.backbone import BackboneHandle
from ..featurizer.maskclip import encode_image_dense
from ..featurizer.preprocess import resize_shorter_side, to_float_rgb
from ..types import SOURCE_REFINED, PatchFeatureMap, TextQuerySet
from .affinity import AffinityMatrix, compute_affinity
from .background import refine_background, refinement_mask
from .heads import AffinityHead, ObjectnessHead, predict_affinity, predict_objectness
from .matching import SegmentationResult, similarity_map
from .pooling import pool_with_affinity
from .upsample import bilinear_resample, nearest_indices


@dataclass(frozen=True)
class PipelineConfig:
    """Inference-time knobs; defaults follow the trained-head recipe."""

    gamma: float = 0.2
    delta: float = 0.98
    use_teacher: bool = False
    baseline: bool = False  # bypass heads + pooling: raw dense features
    background: bool | None = None  # None = apply when a background query and head exist
    normalize_before_pool: bool = False
    window: int = 448
    stride: int = 224


@dataclass(frozen=True)
class WindowOutput:
    """Per-window pixel-level products (cropped to the valid region)."""

    scores: np.ndarray  # (h, w, |T|)
    override: np.ndarray  # (h, w) bool, background reassignments
    result: SegmentationResult
    objectness: object  # ObjectnessMap | None


def tile_windows(height: int, width: int, window: int, stride: int):
    """Top-left corners of sliding windows, final window snapped to the border."""
    if stride <= 0 or window < stride:
        raise InvalidArgumentError(f"need window >= stride > 0, got {window}/{stride}")

    def axis_positions(size):
        if size <= window:
            return [0]
        pos = list(range(0, size - window, stride))
        pos.append(size - window)
        return sorted(set(pos))

    return [(y, x) for y in axis_positions(height) for x in axis_positions(width)]


class Pipeline:
    """Binds a backbone, the two heads, and config into a segmentation engine.

    All state is immutable after construction; concurrent ``segment``
    calls are safe.  ``backbone_passes`` counts image-tower forwards (the
    expensive part) for the cached-session service and its tests.
    """

    def __init__(
        self,
        backbone: BackboneHandle,
        affinity_head: AffinityHead | None = None,
        objectness_head: ObjectnessHead | None = None,
        teacher_backbone: BackboneHandle | None = None,
        teacher_embedding: str = "value",
        config: PipelineConfig | None = None,
        checkpoint_id: str = "none",
    ):
        self.backbone = backbone
        self.affinity_head = affinity_head
        self.objectness_head = objectness_head
        self.teacher_backbone = teacher_backbone
        self.teacher_embedding = teacher_embedding
        self.config = config or PipelineConfig()
        self.checkpoint_id = checkpoint_id
        self._pass_lock = threading.Lock()
        self.backbone_passes = 0
        if self.config.use_teacher and teacher_backbone is None and not self.config.baseline:
            raise InvalidArgumentError("teacher affinity requested but no teacher backbone")
        if not self.config.use_teacher and not self.config.baseline and affinity_head is None:
            raise InvalidArgumentError("learned affinity requested but no affinity head")

    # ---------------------------------------------------------------- encode

    def _count_pass(self):
        with self._pass_lock:
            self.backbone_passes += 1

    def encode(self, image):
        """One dense backbone pass (plus the teacher's, when enabled)."""
        encoding = encode_image_dense(image, self.backbone)
        self._count_pass()
        teacher_map = None
        if self.config.use_teacher and not self.config.baseline:
            from ..teachers.dino import teacher_features

            teacher_map = teacher_features(image, self.teacher_backbone, self.teacher_embedding)
            if teacher_map.grid != encoding.grid:
                raise InvalidArgumentError(
                    f"teacher grid {teacher_map.grid} does not match student grid "
                    f"{encoding.grid}; towers must share patch size and resize policy"
                )
        return encoding, teacher_map

    # ------------------------------------------------------- feature plumbing

    def affinity_for(self, encoding, teacher_map) -> AffinityMatrix | None:
        if self.config.baseline:
            return None
        if self.config.use_teacher:
            return compute_affinity(teacher_map)
        return predict_affinity(encoding.intermediate, self.affinity_head)

    def refine_features(
        self, last: PatchFeatureMap, affinity: AffinityMatrix | None
    ) -> PatchFeatureMap:
        """Affinity-guided pooling of the dense features (identity in baseline mode)."""
        if affinity is None:
            return PatchFeatureMap(grid=last.grid, values=last.values, source_tag=SOURCE_REFINED)
        feats = last
        if self.config.normalize_before_pool:
            norms = np.linalg.norm(last.values, axis=1, keepdims=True)
            if np.any(norms == 0.0):
                raise InvalidArgumentError("zero-norm dense feature row")
            feats = PatchFeatureMap(
                grid=last.grid, values=last.values / norms, source_tag=last.source_tag
            )
        return pool_with_affinity(feats, affinity, self.config.gamma)

    def _background_active(self, queries: TextQuerySet) -> bool:
        wanted = self.config.background
        available = (
            queries.has_background and self.objectness_head is not None and not self.config.baseline
        )
        if wanted is None:
            return available
        if wanted and not queries.has_background:
            raise InvalidArgumentError("background refinement requested without a background query")
        if wanted and self.objectness_head is None and not self.config.baseline:
            raise InvalidArgumentError("background refinement requested but no objectness head")
        return bool(wanted) and available

    def patch_inference(self, encoding, teacher_map, queries: TextQuerySet):
        """Patch-level result (+ objectness) from one encoded window."""
        affinity = self.affinity_for(encoding, teacher_map)
        pooled = self.refine_features(encoding.last, affinity)
        result = similarity_map(pooled, queries)
        objectness = None
        if self._background_active(queries):
            objectness = predict_objectness(encoding.intermediate, self.objectness_head)
            result = refine_background(
                result, objectness, self.config.delta, queries.background_index
            )
        return result, objectness

    # ------------------------------------------------------------- windowing

    def window_pass(self, window_image: np.ndarray, queries: TextQuerySet) -> WindowOutput:
        """Encode and label one window; pixel products cropped to window size."""
        encoding, teacher_map = self.encode(window_image)
        result, objectness = self.patch_inference(encoding, teacher_map, queries)
        info = encoding.preprocess
        grid = result.grid
        stack = result.scores.reshape(grid.n_rows, grid.n_cols, result.n_queries)
        scores = bilinear_resample(
            stack, info.padded_h, info.padded_w, scale_y=1.0 / grid.patch_size,
            scale_x=1.0 / grid.patch_size,
        )[: info.resized_h, : info.resized_w]
        override = np.zeros((info.resized_h, info.resized_w), dtype=bool)
        mask = refinement_mask(result)
        if mask.any():
            ry, rx = nearest_indices(
                info.padded_h, info.padded_w, grid.n_rows, grid.n_cols,
                scale_y=1.0 / grid.patch_size, scale_x=1.0 / grid.patch_size,
            )
            override = mask[(ry[:, None] * grid.n_cols + rx[None, :])][
                : info.resized_h, : info.resized_w
            ]
        return WindowOutput(scores=scores, override=override, result=result, objectness=objectness)

    def accumulate_windows(self, resized: np.ndarray, tiles, window: int, queries: TextQuerySet):
        """Sum window scores and override votes with per-pixel coverage counts."""
        h, w = resized.shape[:2]
        score_sum = np.zeros((h, w, len(queries)))
        override_sum = np.zeros((h, w))
        cover = np.zeros((h, w))
        first = None
        for y, x in tiles:
            y1, x1 = min(y + window, h), min(x + window, w)
            out = self.window_pass(resized[y:y1, x:x1], queries)
            first = first or out
            score_sum[y:y1, x:x1] += out.scores
            override_sum[y:y1, x:x1] += out.override
            cover[y:y1, x:x1] += 1.0
        scores = score_sum / cover[:, :, None]
        override = (override_sum / cover) > 0.5
        return scores, override, first

    @staticmethod
    def labels_at(scores, override, out_h, out_w, background_index):
        """Final labeling at target resolution: argmax + background override."""
        h, w = scores.shape[:2]
        up = bilinear_resample(scores, out_h, out_w, scale_y=h / out_h, scale_x=w / out_w)
        labels = np.argmax(up, axis=2)
        if override.any():
            ry, rx = nearest_indices(out_h, out_w, h, w, scale_y=h / out_h, scale_x=w / out_w)
            labels[override[ry[:, None], rx[None, :]]] = background_index
        return labels

    # ---------------------------------------------------------------- public

    def segment(self, image, queries: TextQuerySet):
        """Full single-pass segmentation at original image resolution.

        Returns ``(pixel label map, patch-level SegmentationResult)``;
        exactly one image-tower forward happens (teacher mode adds the
        teacher tower's own pass).
        """
        if queries is None or len(queries) < 1:
            raise InvalidArgumentError("need at least one text query")
        arr = to_float_rgb(image)
        out_h, out_w = arr.shape[:2]
        if self.backbone.resize_shorter is not None:
            arr = resize_shorter_side(arr, self.backbone.resize_shorter)
        h, w = arr.shape[:2]
        window = max(h, w)  # single window covering everything
        scores, override, first = self.accumulate_windows(arr, [(0, 0)], window, queries)
        bg = queries.background_index if queries.background_index is not None else 0
        labels = self.labels_at(scores, override, out_h, out_w, bg)
        return labels, first.result

    def with_config(self, **updates) -> "Pipeline":
        """Same weights, different knobs (cheap: arrays are shared)."""
        return Pipeline(
            backbone=self.backbone,
            affinity_head=self.affinity_head,
            objectness_head=self.objectness_head,
            teacher_backbone=self.teacher_backbone,
            teacher_embedding=self.teacher_embedding,
            config=replace(self.config, **updates),
            checkpoint_id=self.checkpoint_id,
        )
