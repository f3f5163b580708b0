"""Synthetic weight containers for tests and weight-free demos."""

from __future__ import annotations

import numpy as np

from ..container import save_container
from .backbone import FAMILY_SELF_SUPERVISED, FAMILY_VISION_LANGUAGE


def _tower_arrays(rng, prefix, width, n_blocks, mlp_ratio=4, scale=0.05):
    arrays = {}
    hidden = width * mlp_ratio
    for b in range(n_blocks):
        k = f"{prefix}.blocks.{b}"
        arrays[f"{k}.norm1.weight"] = np.ones(width)
        arrays[f"{k}.norm1.bias"] = np.zeros(width)
        arrays[f"{k}.attn.qkv.weight"] = rng.normal(0, scale, (3 * width, width))
        arrays[f"{k}.attn.qkv.bias"] = rng.normal(0, scale, 3 * width)
        arrays[f"{k}.attn.proj.weight"] = rng.normal(0, scale, (width, width))
        arrays[f"{k}.attn.proj.bias"] = rng.normal(0, scale, width)
        arrays[f"{k}.norm2.weight"] = np.ones(width)
        arrays[f"{k}.norm2.bias"] = np.zeros(width)
        arrays[f"{k}.mlp.fc1.weight"] = rng.normal(0, scale, (hidden, width))
        arrays[f"{k}.mlp.fc1.bias"] = rng.normal(0, scale, hidden)
        arrays[f"{k}.mlp.fc2.weight"] = rng.normal(0, scale, (width, hidden))
        arrays[f"{k}.mlp.fc2.bias"] = rng.normal(0, scale, width)
    arrays[f"{prefix}.norm.weight"] = np.ones(width)
    arrays[f"{prefix}.norm.bias"] = np.zeros(width)
    return arrays


def make_random_weights(
    path,
    patch_size: int = 8,
    width: int = 32,
    n_blocks: int = 3,
    n_heads: int = 4,
    proj_dim: int = 16,
    pos_grid: int = 7,
    with_text: bool = True,
    text_width: int = 32,
    text_blocks: int = 2,
    vocab_size: int = 512,
    context_length: int = 16,
    default_tap: int | None = None,
    resize_shorter: int | None = None,
    family: str = FAMILY_VISION_LANGUAGE,
    backbone_id: str = "synthetic-vit",
    seed: int = 0,
) -> str:
    """Write a randomly initialized but structurally valid weight container.

    The defaults give a tiny tower that encodes a 56x56 image in
    milliseconds; shapes and key layout are identical to full-size
    containers, so everything downstream exercises the real code paths.
    """
    rng = np.random.default_rng(seed)
    arrays = {
        "visual.patch_embed.weight": rng.normal(0, 0.05, (width, 3, patch_size, patch_size)),
        "visual.patch_embed.bias": rng.normal(0, 0.05, width),
        "visual.cls_token": rng.normal(0, 0.05, width),
        "visual.pos_embed": rng.normal(0, 0.05, (1 + pos_grid**2, width)),
    }
    arrays.update(_tower_arrays(rng, "visual", width, n_blocks))
    visual_meta = {
        "patch_size": patch_size,
        "width": width,
        "n_blocks": n_blocks,
        "n_heads": n_heads,
        "pos_grid": pos_grid,
        "pre_norm": family == FAMILY_VISION_LANGUAGE,
        "activation": "gelu",
        "default_tap": default_tap if default_tap is not None else max(1, n_blocks - 2),
        "resize_shorter": resize_shorter,
        "image_mean": (0.5, 0.5, 0.5),
        "image_std": (0.5, 0.5, 0.5),
    }
    if visual_meta["pre_norm"]:
        arrays["visual.ln_pre.weight"] = np.ones(width)
        arrays["visual.ln_pre.bias"] = np.zeros(width)
    if family == FAMILY_VISION_LANGUAGE:
        arrays["visual.proj"] = rng.normal(0, 0.05, (width, proj_dim))

    meta = {"family": family, "backbone_id": backbone_id, "visual": visual_meta}
    if with_text and family == FAMILY_VISION_LANGUAGE:
        arrays["text.token_embed"] = rng.normal(0, 0.05, (vocab_size, text_width))
        arrays["text.pos_embed"] = rng.normal(0, 0.05, (context_length, text_width))
        arrays.update(_tower_arrays(rng, "text", text_width, text_blocks))
        arrays["text.proj"] = rng.normal(0, 0.05, (text_width, proj_dim))
        meta["text"] = {
            "width": text_width,
            "n_blocks": text_blocks,
            "n_heads": n_heads,
            "vocab_size": vocab_size,
            "context_length": context_length,
            "tokenizer": "hash",
            "bos_id": 0,
            "eos_id": 1,
            "activation": "gelu",
        }
    save_container(path, arrays, meta)
    return str(path)


def make_random_teacher(path, seed: int = 1, **kwargs) -> str:
    """Self-supervised-style tower (no text, no projection)."""
    kwargs.setdefault("backbone_id", "synthetic-ssl-vit")
    return make_random_weights(
        path, family=FAMILY_SELF_SUPERVISED, with_text=False, seed=seed, **kwargs
    )
