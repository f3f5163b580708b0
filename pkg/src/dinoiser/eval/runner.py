"""Dataset evaluation: sliding-window inference + confusion-matrix mIoU."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor

from PIL import Image

from ..denoiser.pipeline import Pipeline
from ..featurizer.text import encode_text_queries
from ..runconfig import config_hash
from .confusion import ConfusionMatrix, accumulate_confusion, miou
from .datasets import DatasetAdapter
from .window import sliding_window_segment


def queries_for_adapter(adapter: DatasetAdapter, backbone, template_set: str = "imagenet80"):
    """Embed the adapter's class names verbatim (no text expansion)."""
    return encode_text_queries(
        list(adapter.class_names),
        template_set=template_set,
        backbone=backbone,
        background=adapter.has_background,
    )


def _evaluate_one(args):
    adapter, pipeline, queries, window, stride, image_path, gt_path = args
    gt = adapter.load_ground_truth(gt_path)
    windowed = sliding_window_segment(
        Image.open(image_path), pipeline, queries, window=window, stride=stride
    )
    bg = queries.background_index if queries.background_index is not None else 0
    pred = windowed.labels(pipeline, gt.shape[0], gt.shape[1], bg)
    return accumulate_confusion(pred, gt, adapter.n_classes, adapter.ignore_index)


def evaluate_dataset(
    adapter: DatasetAdapter,
    pipeline: Pipeline,
    window: int | None = None,
    stride: int | None = None,
    template_set: str = "imagenet80",
    n_workers: int = 1,
    progress=None,
) -> dict:
    """Evaluate a pipeline over a dataset; returns the report dict.

    Background refinement runs iff the adapter declares a background
    class (the pipeline skips it when no background query is present).
    Workers share the read-only pipeline; confusion matrices merge by
    summation, so worker order does not matter.
    """
    window = window if window is not None else pipeline.config.window
    stride = stride if stride is not None else pipeline.config.stride
    queries = queries_for_adapter(adapter, pipeline.backbone, template_set)

    tasks = [
        (adapter, pipeline, queries, window, stride, image_path, gt_path)
        for image_path, gt_path in adapter.samples
    ]
    total = ConfusionMatrix.zeros(adapter.n_classes)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for i, confusion in enumerate(pool.map(_evaluate_one, tasks)):
                total = total + confusion
                if progress:
                    progress(i + 1, len(tasks))
    else:
        for i, task in enumerate(tasks):
            total = total + _evaluate_one(task)
            if progress:
                progress(i + 1, len(tasks))

    scores = miou(total)
    resolved = {
        "dataset": adapter.name,
        "window": window,
        "stride": stride,
        "template_set": template_set,
        "gamma": pipeline.config.gamma,
        "delta": pipeline.config.delta,
        "use_teacher": pipeline.config.use_teacher,
        "baseline": pipeline.config.baseline,
        "backbone_id": pipeline.backbone.backbone_id,
        "checkpoint_id": pipeline.checkpoint_id,
    }
    return {
        "dataset": adapter.name,
        "config_hash": config_hash(resolved),
        "config": resolved,
        "per_class_iou": scores["per_class_iou"],
        "miou": scores["mean"],
        "n_images": len(adapter.samples),
    }


def format_report(report: dict, class_names) -> str:
    """Fixed-width text table of per-class IoU plus the mean."""
    lines = [
        f"dataset: {report['dataset']}   images: {report['n_images']}   "
        f"config: {report['config_hash']}",
        f"{'class':<24} {'IoU':>8}",
        "-" * 33,
    ]
    for name, iou in zip(class_names, report["per_class_iou"]):
        shown = "   n/a" if iou is None or (isinstance(iou, float) and math.isnan(iou)) else f"{iou:8.4f}"
        lines.append(f"{name:<24} {shown:>8}")
    lines.append("-" * 33)
    lines.append(f"{'mIoU':<24} {report['miou']:8.4f}")
    return "\n".join(lines)


def save_report(report: dict, path) -> None:
    clean = dict(report)
    clean["per_class_iou"] = [
        None if isinstance(v, float) and math.isnan(v) else v for v in report["per_class_iou"]
    ]
    with open(path, "w") as fh:
        json.dump(clean, fh, indent=2, sort_keys=True)
        fh.write("\n")
