"""Dataset adapters for the zero-shot segmentation benchmarks.

Every adapter reads one on-disk layout::

    <root>/images/<id>.jpg|png        RGB images
    <root>/annotations/<id>.png       index maps (palette or L mode)
    <root>/splits/<split>.txt         one image id per line (optional;
                                      defaults to every annotated id)

plus the classic VOCdevkit layout for the VOC datasets.  Class prompts
come verbatim from per-dataset prompt files shipped with the package
(class names are never expanded or rephrased); pass ``prompt_file`` to
override.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from PIL import Image

from ..errors import InvalidArgumentError, NotFoundError


@dataclass(frozen=True)
class DatasetAdapter:
    name: str
    class_names: tuple
    has_background: bool
    samples: tuple  # of (image_path, ground_truth_path)
    ignore_index: int = 255
    reduce_zero_label: bool = False
    background_index: int | None = None

    def __post_init__(self):
        if self.has_background and self.background_index is None:
            object.__setattr__(self, "background_index", 0)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def load_ground_truth(self, path) -> np.ndarray:
        gt = np.asarray(Image.open(path)).astype(np.int64)
        if gt.ndim == 3:
            gt = gt[:, :, 0]
        if self.reduce_zero_label:
            gt = gt.copy()
            gt[gt == 0] = self.ignore_index + 1
            gt = gt - 1
            gt[gt == self.ignore_index] = self.ignore_index
        bad = (gt != self.ignore_index) & ((gt < 0) | (gt >= self.n_classes))
        if bad.any():
            raise InvalidArgumentError(
                f"{path}: ground-truth label {int(gt[bad][0])} outside "
                f"0..{self.n_classes - 1} + ignore({self.ignore_index})"
            )
        return gt


def load_prompt_file(path) -> tuple:
    with open(path) as fh:
        names = [line.strip() for line in fh if line.strip() and not line.startswith("#")]
    if not names:
        raise InvalidArgumentError(f"prompt file {path} has no class names")
    return tuple(names)


def builtin_prompts(name: str) -> tuple:
    ref = resources.files("dinoiser.eval").joinpath(f"prompts/{name}.txt")
    if not ref.is_file():
        raise NotFoundError(f"no built-in prompt file for dataset {name!r}")
    names = [
        line.strip()
        for line in ref.read_text().splitlines()
        if line.strip() and not line.startswith("#")
    ]
    return tuple(names)


def _read_split(split_file) -> list:
    with open(split_file) as fh:
        return [line.strip() for line in fh if line.strip()]


def _collect_samples(images_dir, annotations_dir, ids):
    samples = []
    missing = []
    for image_id in ids:
        gt = os.path.join(annotations_dir, f"{image_id}.png")
        img = None
        for ext in (".jpg", ".png", ".jpeg"):
            candidate = os.path.join(images_dir, f"{image_id}{ext}")
            if os.path.exists(candidate):
                img = candidate
                break
        if img is None or not os.path.exists(gt):
            missing.append(image_id)
        else:
            samples.append((img, gt))
    if missing:
        raise NotFoundError(
            f"{len(missing)} sample(s) missing on disk: {', '.join(missing[:10])}"
            + ("..." if len(missing) > 10 else "")
        )
    if not samples:
        raise NotFoundError(f"no samples found under {images_dir}")
    return tuple(samples)


def generic_dataset(
    root,
    name: str = "generic",
    split: str = "val",
    has_background: bool = False,
    reduce_zero_label: bool = False,
    prompt_file=None,
    class_names=None,
) -> DatasetAdapter:
    """Adapter over the package's plain directory layout."""
    root = str(root)
    images_dir = os.path.join(root, "images")
    annotations_dir = os.path.join(root, "annotations")
    split_file = os.path.join(root, "splits", f"{split}.txt")
    if os.path.exists(split_file):
        ids = _read_split(split_file)
    else:
        if not os.path.isdir(annotations_dir):
            raise NotFoundError(f"no annotations directory at {annotations_dir}")
        ids = sorted(
            os.path.splitext(f)[0] for f in os.listdir(annotations_dir) if f.endswith(".png")
        )
    if class_names is None:
        if prompt_file is None:
            prompt_file = os.path.join(root, "classes.txt")
        class_names = load_prompt_file(prompt_file)
    return DatasetAdapter(
        name=name,
        class_names=tuple(class_names),
        has_background=has_background,
        samples=_collect_samples(images_dir, annotations_dir, ids),
        reduce_zero_label=reduce_zero_label,
    )


def voc_layout_dataset(
    root, name: str, split: str, has_background: bool, reduce_zero_label: bool, prompts: tuple
) -> DatasetAdapter:
    """Adapter over the classic VOCdevkit directory layout."""
    root = str(root)
    split_file = os.path.join(root, "ImageSets", "Segmentation", f"{split}.txt")
    if not os.path.exists(split_file):
        raise NotFoundError(f"split file not found: {split_file}")
    return DatasetAdapter(
        name=name,
        class_names=prompts,
        has_background=has_background,
        samples=_collect_samples(
            os.path.join(root, "JPEGImages"),
            os.path.join(root, "SegmentationClass"),
            _read_split(split_file),
        ),
        reduce_zero_label=reduce_zero_label,
    )


@dataclass(frozen=True)
class _AdapterSpec:
    prompt_name: str
    has_background: bool = False
    reduce_zero_label: bool = False
    voc_layout: bool = False
    extra: dict = field(default_factory=dict)


# Benchmark registry: the with-background group (voc / context60 / coco_object)
# gets the background query + refinement; the rest label every pixel.
ADAPTER_SPECS = {
    "voc": _AdapterSpec("voc", has_background=True, voc_layout=True),
    "voc20": _AdapterSpec("voc20", reduce_zero_label=True, voc_layout=True),
    "context60": _AdapterSpec("context60", has_background=True),
    "context59": _AdapterSpec("context59", reduce_zero_label=True),
    "coco_object": _AdapterSpec("coco_object", has_background=True),
    "coco_stuff": _AdapterSpec("coco_stuff"),
    "cityscapes": _AdapterSpec("cityscapes"),
    "ade20k": _AdapterSpec("ade20k", reduce_zero_label=True),
}


def make_adapter(name: str, root, split: str = "val", prompt_file=None) -> DatasetAdapter:
    """Build a benchmark adapter by name (see ``ADAPTER_SPECS``)."""
    if name not in ADAPTER_SPECS:
        raise InvalidArgumentError(
            f"unknown dataset {name!r}; choose from {sorted(ADAPTER_SPECS)} or use "
            f"generic_dataset()"
        )
    spec = ADAPTER_SPECS[name]
    prompts = load_prompt_file(prompt_file) if prompt_file else builtin_prompts(spec.prompt_name)
    if spec.voc_layout:
        return voc_layout_dataset(
            root,
            name=name,
            split=split,
            has_background=spec.has_background,
            reduce_zero_label=spec.reduce_zero_label,
            prompts=prompts,
        )
    return generic_dataset(
        root,
        name=name,
        split=split,
        has_background=spec.has_background,
        reduce_zero_label=spec.reduce_zero_label,
        class_names=prompts,
    )
