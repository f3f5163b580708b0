"""Head checkpoints: a flat array container with training provenance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..container import ContainerError, load_container, save_container
from ..denoiser.heads import AffinityHead, ObjectnessHead
from ..errors import IncompatibleCheckpointError
from ..featurizer.backbone import BackboneHandle

CHECKPOINT_KIND = "head-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class Checkpoint:
    affinity_head: AffinityHead
    objectness_head: ObjectnessHead
    backbone_id: str
    gamma_default: float
    delta_default: float
    train_config: dict = field(default_factory=dict)
    metrics: tuple = ()

    @property
    def input_tap(self) -> int:
        return self.affinity_head.input_tap


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    arrays = {
        "affinity_head.kernel": ckpt.affinity_head.kernel,
        "affinity_head.bias": ckpt.affinity_head.bias,
        "objectness_head.kernel": ckpt.objectness_head.kernel,
        "objectness_head.bias": np.float64(ckpt.objectness_head.bias),
    }
    meta = {
        "kind": CHECKPOINT_KIND,
        "version": CHECKPOINT_VERSION,
        "input_tap": ckpt.input_tap,
        "d_g": ckpt.affinity_head.d_g,
        "gamma_default": ckpt.gamma_default,
        "delta_default": ckpt.delta_default,
        "backbone_id": ckpt.backbone_id,
        "train_config": ckpt.train_config,
        "metrics": list(ckpt.metrics),
    }
    save_container(path, arrays, meta)


def load_checkpoint(path) -> Checkpoint:
    try:
        arrays, meta = load_container(path)
    except ContainerError as exc:
        raise IncompatibleCheckpointError(str(exc)) from exc
    if meta.get("kind") != CHECKPOINT_KIND:
        raise IncompatibleCheckpointError(f"{path}: not a {CHECKPOINT_KIND} container")
    if meta.get("version") != CHECKPOINT_VERSION:
        raise IncompatibleCheckpointError(
            f"{path}: checkpoint version {meta.get('version')!r} unsupported "
            f"(expected {CHECKPOINT_VERSION})"
        )
    try:
        affinity = AffinityHead(
            kernel=arrays["affinity_head.kernel"],
            bias=arrays["affinity_head.bias"],
            input_tap=int(meta["input_tap"]),
        )
        objectness = ObjectnessHead(
            kernel=arrays["objectness_head.kernel"],
            bias=float(np.asarray(arrays["objectness_head.bias"]).reshape(())),
        )
    except KeyError as exc:
        raise IncompatibleCheckpointError(f"{path}: missing checkpoint entry {exc}") from exc
    return Checkpoint(
        affinity_head=affinity,
        objectness_head=objectness,
        backbone_id=str(meta.get("backbone_id", "unknown")),
        gamma_default=float(meta.get("gamma_default", 0.2)),
        delta_default=float(meta.get("delta_default", 0.98)),
        train_config=meta.get("train_config", {}),
        metrics=tuple(meta.get("metrics", ())),
    )


def validate_checkpoint(
    ckpt: Checkpoint,
    backbone: BackboneHandle,
    allow_tap_mismatch: bool = False,
    allow_backbone_mismatch: bool = False,
) -> None:
    """Refuse head/backbone combinations the heads were not trained for."""
    if ckpt.affinity_head.d_in != backbone.proj_dim:
        raise IncompatibleCheckpointError(
            f"head input dim {ckpt.affinity_head.d_in} != backbone feature dim "
            f"{backbone.proj_dim}"
        )
    if ckpt.input_tap != backbone.tap_layer and not allow_tap_mismatch:
        raise IncompatibleCheckpointError(
            f"checkpoint trained at tap layer {ckpt.input_tap} but backbone is "
            f"configured with tap layer {backbone.tap_layer}; override explicitly "
            f"to proceed"
        )
    if ckpt.backbone_id != backbone.backbone_id and not allow_backbone_mismatch:
        raise IncompatibleCheckpointError(
            f"checkpoint trained on backbone {ckpt.backbone_id!r} but handle is "
            f"{backbone.backbone_id!r}; override explicitly to proceed"
        )
