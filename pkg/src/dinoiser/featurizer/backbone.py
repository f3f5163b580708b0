"""Backbone handles: load a weight container, validate it, expose the towers."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from ..container import ContainerError, load_container
from ..errors import InvalidArgumentError, WeightLoadError
from .tokenizer import BpeTokenizer, HashTokenizer
from .vit import TextTransformer, VisionTransformer

FAMILY_VISION_LANGUAGE = "clip_vit"
FAMILY_SELF_SUPERVISED = "ssl_vit"


@dataclass
class BackboneHandle:
    """Immutable-after-load handle over one frozen backbone.

    Safe for concurrent read-only inference: weight arrays are marked
    non-writeable at load time and never mutated.
    """

    weight_source: str
    family: str
    backbone_id: str
    patch_size: int
    embed_dim: int
    n_blocks: int
    tap_layer: int
    proj_dim: int
    resize_shorter: int | None
    image_mean: tuple
    image_std: tuple
    meta: dict = field(repr=False)
    vision: VisionTransformer = field(repr=False)
    text: TextTransformer | None = field(repr=False, default=None)
    tokenizer: object = field(repr=False, default=None)

    def __post_init__(self):
        if not 1 <= self.tap_layer <= self.n_blocks:
            raise InvalidArgumentError(
                f"tap_layer {self.tap_layer} outside 1..{self.n_blocks}"
            )


def resolve_weight_path(path: str) -> str:
    """Resolve a weight path, falling back to ``DINOISER_CACHE_DIR``."""
    if os.path.exists(path):
        return path
    cache = os.environ.get("DINOISER_CACHE_DIR")
    if cache:
        candidate = os.path.join(cache, path)
        if os.path.exists(candidate):
            return candidate
    raise WeightLoadError(f"weight container not found: {path}")


def load_backbone(
    path: str,
    tap_layer: int | None = None,
    resize_shorter: int | None = None,
) -> BackboneHandle:
    """Load and validate a backbone weight container.

    ``tap_layer``/``resize_shorter`` default to the values recorded in the
    container metadata so checkpoints stay reproducible across machines.
    """
    resolved = resolve_weight_path(path)
    try:
        arrays, meta = load_container(resolved)
    except ContainerError as exc:
        raise WeightLoadError(str(exc)) from exc
    for arr in arrays.values():
        arr.flags.writeable = False  # frozen-backbone contract

    visual_meta = meta.get("visual")
    if not isinstance(visual_meta, dict):
        raise WeightLoadError(f"{path}: container metadata has no 'visual' section")
    vision = VisionTransformer(arrays, visual_meta)

    text = None
    tokenizer = None
    text_meta = meta.get("text")
    if isinstance(text_meta, dict):
        text = TextTransformer(arrays, text_meta)
        if text_meta.get("tokenizer") == "bpe":
            if "text.bpe_merges" not in arrays:
                raise WeightLoadError(f"{path}: bpe tokenizer declared but no merges embedded")
            merges = bytes(arrays["text.bpe_merges"]).decode("utf-8")
            tokenizer = BpeTokenizer(merges)
            if tokenizer.vocab_size != text.vocab_size:
                raise WeightLoadError(
                    f"{path}: BPE vocab size {tokenizer.vocab_size} != "
                    f"embedding table {text.vocab_size}"
                )
        else:
            tokenizer = HashTokenizer(
                vocab_size=text.vocab_size,
                bos_id=int(text_meta["bos_id"]),
                eos_id=int(text_meta["eos_id"]),
            )

    tap = tap_layer if tap_layer is not None else int(visual_meta.get("default_tap", vision.n_blocks))
    resize = resize_shorter if resize_shorter is not None else visual_meta.get("resize_shorter", 448)
    return BackboneHandle(
        weight_source=resolved,
        family=meta.get("family", FAMILY_VISION_LANGUAGE),
        backbone_id=str(meta.get("backbone_id", "unknown")),
        patch_size=vision.patch_size,
        embed_dim=vision.width,
        n_blocks=vision.n_blocks,
        tap_layer=tap,
        proj_dim=vision.proj_dim,
        resize_shorter=resize,
        image_mean=tuple(visual_meta.get("image_mean", (0.5, 0.5, 0.5))),
        image_std=tuple(visual_meta.get("image_std", (0.5, 0.5, 0.5))),
        meta=meta,
        vision=vision,
        text=text,
        tokenizer=tokenizer,
    )
