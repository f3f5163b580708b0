"""Command-line entry points: segment, train, eval, export, serve."""

from __future__ import annotations

import functools
import json
import os
import sys

import click
import numpy as np
from PIL import Image

from .denoiser import Pipeline, PipelineConfig, default_palette, load_palette, save_mask_png
from .errors import DinoiserError
from .eval import evaluate_dataset, format_report, generic_dataset, make_adapter, save_report
from .featurizer import encode_text_queries, load_backbone
from .runconfig import DETERMINISTIC_ENV, config_hash, dump_resolved_config, load_config_file
from .teachers import MaskDirectorySource
from .training import TrainConfig, load_checkpoint, save_checkpoint, train, validate_checkpoint

SIDECAR_SCHEMA_VERSION = 1


def _fail_on_library_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DinoiserError as exc:
            raise click.ClickException(str(exc))

    return wrapper


def _emit_resolved_config(resolved: dict, output_dir=None) -> None:
    resolved = dict(resolved)
    resolved["config_hash"] = config_hash(resolved)
    path = None
    if output_dir is not None:
        os.makedirs(output_dir, exist_ok=True)
        path = os.path.join(output_dir, "resolved_config.json")
    click.echo(dump_resolved_config(resolved, path))


def _build_pipeline(
    backbone_path,
    checkpoint_path=None,
    teacher=False,
    teacher_backbone_path=None,
    baseline=False,
    gamma=None,
    delta=None,
    background=None,
    tap_layer=None,
    allow_tap_mismatch=False,
):
    backbone = load_backbone(backbone_path, tap_layer=tap_layer)
    affinity_head = objectness_head = None
    checkpoint_id = "none"
    ckpt = None
    if checkpoint_path is not None:
        ckpt = load_checkpoint(checkpoint_path)
        validate_checkpoint(
            ckpt, backbone, allow_tap_mismatch=allow_tap_mismatch,
            allow_backbone_mismatch=allow_tap_mismatch,
        )
        affinity_head, objectness_head = ckpt.affinity_head, ckpt.objectness_head
        checkpoint_id = os.path.basename(str(checkpoint_path))
    teacher_backbone = None
    if teacher:
        if teacher_backbone_path is None:
            raise click.UsageError("--teacher requires --teacher-backbone")
        teacher_backbone = load_backbone(teacher_backbone_path)
    if not baseline and not teacher and ckpt is None:
        raise click.UsageError(
            "choose a pipeline: --checkpoint, --teacher, or --baseline-maskclip"
        )
    config = PipelineConfig(
        gamma=gamma if gamma is not None else (ckpt.gamma_default if ckpt else 0.2),
        delta=delta if delta is not None else (ckpt.delta_default if ckpt else 0.98),
        use_teacher=teacher,
        baseline=baseline,
        background=background,
    )
    pipeline = Pipeline(
        backbone=backbone,
        affinity_head=affinity_head,
        objectness_head=objectness_head,
        teacher_backbone=teacher_backbone,
        config=config,
        checkpoint_id=checkpoint_id,
    )
    resolved = {
        "backbone": str(backbone_path),
        "backbone_id": backbone.backbone_id,
        "tap_layer": backbone.tap_layer,
        "checkpoint": str(checkpoint_path) if checkpoint_path else None,
        "baseline_maskclip": baseline,
        "use_teacher": teacher,
        "gamma": config.gamma,
        "delta": config.delta,
        "background": background,
    }
    return pipeline, resolved


@click.group()
@click.option("--deterministic", is_flag=True, help="Force deterministic mode.")
def main(deterministic):
    """Open-vocabulary segmentation via affinity-guided feature pooling."""
    if deterministic:
        os.environ[DETERMINISTIC_ENV] = "1"


def _read_prompts(prompts, prompt_file):
    if bool(prompts) == bool(prompt_file):
        raise click.UsageError("give exactly one of --prompts or --prompt-file")
    if prompt_file:
        with open(prompt_file) as fh:
            names = [line.strip() for line in fh if line.strip() and not line.startswith("#")]
    else:
        names = [p.strip() for p in prompts.split(",") if p.strip()]
    if not names:
        raise click.UsageError("prompt list is empty")
    return names


@main.command()
@click.argument("images", nargs=-1, required=True, type=click.Path())
@click.option("--prompts", help="Comma-separated prompt list.")
@click.option("--prompt-file", type=click.Path(exists=True), help="One prompt per line.")
@click.option("--backbone", "backbone_path", required=True, type=click.Path())
@click.option("--checkpoint", "checkpoint_path", type=click.Path())
@click.option("--teacher", is_flag=True, help="Teacher-affinity pooling (ablation).")
@click.option("--teacher-backbone", "teacher_backbone_path", type=click.Path())
@click.option("--baseline-maskclip", "baseline", is_flag=True,
              help="Raw dense features, no pooling (baseline).")
@click.option("--gamma", type=float, help="Pooling threshold.")
@click.option("--delta", type=float, help="Background confidence gate.")
@click.option("--background/--no-background", "background", default=None)
@click.option("--template-set", default="imagenet80", show_default=True)
@click.option("--output-dir", default=".", show_default=True, type=click.Path())
@click.option("--palette", "palette_path", type=click.Path(exists=True))
@click.option("--allow-tap-mismatch", is_flag=True)
@_fail_on_library_errors
def segment(images, prompts, prompt_file, backbone_path, checkpoint_path, teacher,
            teacher_backbone_path, baseline, gamma, delta, background, template_set,
            output_dir, palette_path, allow_tap_mismatch):
    """Segment images with open-vocabulary prompts; writes mask + legend + JSON."""
    names = _read_prompts(prompts, prompt_file)
    pipeline, resolved = _build_pipeline(
        backbone_path, checkpoint_path, teacher, teacher_backbone_path, baseline,
        gamma, delta, background, allow_tap_mismatch=allow_tap_mismatch,
    )
    resolved.update({"command": "segment", "prompts": names, "template_set": template_set})
    _emit_resolved_config(resolved, output_dir)

    queries = encode_text_queries(names, template_set, pipeline.backbone,
                                  background=background)
    palette = load_palette(palette_path) if palette_path else default_palette(len(names))
    failures = 0
    for image_path in images:
        try:
            image = Image.open(image_path)
            image.load()
        except Exception as exc:
            click.echo(f"error: {image_path}: {exc}", err=True)
            failures += 1
            continue
        labels, result = pipeline.segment(image, queries)
        stem = os.path.splitext(os.path.basename(image_path))[0]
        mask_path = os.path.join(output_dir, f"{stem}_mask.png")
        save_mask_png(mask_path, labels, palette)
        with open(os.path.join(output_dir, f"{stem}_legend.txt"), "w") as fh:
            for idx, name in enumerate(names):
                r, g, b = palette[idx]
                fh.write(f"{idx}\t{name}\t{r} {g} {b}\n")
        counts = np.bincount(labels.reshape(-1), minlength=len(names))
        sidecar = {
            "schema_version": SIDECAR_SCHEMA_VERSION,
            "image": os.path.basename(image_path),
            "prompts": names,
            "coverage_percent": {
                name: round(100.0 * counts[i] / labels.size, 4)
                for i, name in enumerate(names)
            },
            "config": {
                "gamma": pipeline.config.gamma,
                "delta": pipeline.config.delta,
                "background": queries.has_background,
                "template_set": template_set,
                "baseline_maskclip": baseline,
                "use_teacher": teacher,
            },
        }
        with open(os.path.join(output_dir, f"{stem}.json"), "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")
        click.echo(f"wrote {mask_path}")
    if failures == len(images):
        sys.exit(1)


@main.command(name="train")
@click.option("--images", "images_dir", required=True, type=click.Path(exists=True))
@click.option("--masks", "masks_dir", required=True, type=click.Path(exists=True))
@click.option("--backbone", "backbone_path", required=True, type=click.Path())
@click.option("--teacher-backbone", "teacher_backbone_path", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--epochs", type=int)
@click.option("--batch-size", type=int)
@click.option("--lr", type=float)
@click.option("--gamma", type=float)
@click.option("--seed", type=int)
@click.option("--crop-size", type=int)
@click.option("--proj-channels", type=int)
@click.option("--affinity-head-stop-epoch", type=int)
@click.option("--lr-decay-epoch", type=int)
@click.option("--lr-decay-factor", type=float)
@click.option("--delta-default", type=float)
@click.option("--teacher-embedding", type=click.Choice(["value", "key", "query"]))
@click.option("--scale-crop/--no-scale-crop", "random_scale_crop", default=None)
@click.option("--flip/--no-flip", "flip", default=None)
@click.option("--photometric/--no-photometric", "photometric", default=None)
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--metrics", "metrics_path", type=click.Path())
@click.option("--output-dir", default=".", show_default=True, type=click.Path())
@_fail_on_library_errors
def train_cmd(images_dir, masks_dir, backbone_path, teacher_backbone_path, config_path,
              epochs, batch_size, lr, gamma, seed, crop_size, proj_channels,
              affinity_head_stop_epoch, lr_decay_epoch, lr_decay_factor, delta_default,
              teacher_embedding, random_scale_crop, flip, photometric, output_path,
              metrics_path, output_dir):
    """Train the two heads against teacher targets; writes a checkpoint."""
    fields = dict(
        epochs=epochs, batch_size=batch_size, lr=lr, gamma=gamma, seed=seed,
        crop_size=crop_size, proj_channels=proj_channels,
        affinity_head_stop_epoch=affinity_head_stop_epoch, lr_decay_epoch=lr_decay_epoch,
        lr_decay_factor=lr_decay_factor, delta_default=delta_default,
        teacher_embedding=teacher_embedding,
    )
    base = load_config_file(config_path) if config_path else {}
    base.update({k: v for k, v in fields.items() if v is not None})
    aug = dict(base.get("augmentations", {}))
    for key, value in (("random_scale_crop", random_scale_crop), ("flip", flip),
                       ("photometric", photometric)):
        if value is not None:
            aug[key] = value
    if aug:
        base["augmentations"] = aug
    config = TrainConfig.from_dict(base)

    backbone = load_backbone(backbone_path)
    teacher_backbone = load_backbone(teacher_backbone_path)
    samples = sorted(
        (os.path.splitext(f)[0], os.path.join(images_dir, f))
        for f in os.listdir(images_dir)
        if f.lower().endswith((".jpg", ".jpeg", ".png"))
    )
    resolved = {
        "command": "train",
        "images": str(images_dir),
        "masks": str(masks_dir),
        "backbone": str(backbone_path),
        "teacher_backbone": str(teacher_backbone_path),
        "n_images": len(samples),
        "train_config": config.to_dict(),
    }
    _emit_resolved_config(resolved, output_dir)
    checkpoint = train(
        samples, backbone, teacher_backbone, MaskDirectorySource(masks_dir), config,
        metrics_path=metrics_path, log=click.echo,
    )
    save_checkpoint(checkpoint, output_path)
    click.echo(f"wrote {output_path}")


@main.command(name="eval")
@click.option("--dataset", "dataset_name", required=True)
@click.option("--root", required=True, type=click.Path(exists=True))
@click.option("--split", default="val", show_default=True)
@click.option("--backbone", "backbone_path", required=True, type=click.Path())
@click.option("--checkpoint", "checkpoint_path", type=click.Path())
@click.option("--teacher", is_flag=True)
@click.option("--teacher-backbone", "teacher_backbone_path", type=click.Path())
@click.option("--baseline-maskclip", "baseline", is_flag=True)
@click.option("--gamma", type=float)
@click.option("--delta", type=float)
@click.option("--window", type=int, default=448, show_default=True)
@click.option("--stride", type=int, default=224, show_default=True)
@click.option("--template-set", default="imagenet80", show_default=True)
@click.option("--prompt-file", type=click.Path(exists=True))
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--output-dir", default=".", show_default=True, type=click.Path())
@click.option("--allow-tap-mismatch", is_flag=True)
@_fail_on_library_errors
def eval_cmd(dataset_name, root, split, backbone_path, checkpoint_path, teacher,
             teacher_backbone_path, baseline, gamma, delta, window, stride, template_set,
             prompt_file, workers, output_dir, allow_tap_mismatch):
    """Evaluate mIoU on a dataset; writes report.json and report.txt."""
    pipeline, resolved = _build_pipeline(
        backbone_path, checkpoint_path, teacher, teacher_backbone_path, baseline,
        gamma, delta, allow_tap_mismatch=allow_tap_mismatch,
    )
    if dataset_name == "generic":
        adapter = generic_dataset(root, split=split, prompt_file=prompt_file)
    else:
        adapter = make_adapter(dataset_name, root, split=split, prompt_file=prompt_file)
    resolved.update({
        "command": "eval", "dataset": dataset_name, "root": str(root), "split": split,
        "window": window, "stride": stride, "template_set": template_set,
        "n_images": len(adapter.samples), "workers": workers,
    })
    _emit_resolved_config(resolved, output_dir)

    def progress(done, total):
        click.echo(f"\r[{done}/{total}] images", nl=(done == total))

    report = evaluate_dataset(
        adapter, pipeline, window=window, stride=stride, template_set=template_set,
        n_workers=workers, progress=progress,
    )
    save_report(report, os.path.join(output_dir, "report.json"))
    table = format_report(report, adapter.class_names)
    with open(os.path.join(output_dir, "report.txt"), "w") as fh:
        fh.write(table + "\n")
    click.echo(table)


@main.command()
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--keep-history", is_flag=True, help="Keep metrics/train config in the export.")
@_fail_on_library_errors
def export(checkpoint_path, output_path, keep_history):
    """Re-save a checkpoint as a portable weight container."""
    from dataclasses import replace

    ckpt = load_checkpoint(checkpoint_path)
    if not keep_history:
        ckpt = replace(ckpt, metrics=(), train_config={})
    save_checkpoint(ckpt, output_path)
    _emit_resolved_config({
        "command": "export", "checkpoint": str(checkpoint_path),
        "output": str(output_path), "keep_history": keep_history,
        "backbone_id": ckpt.backbone_id, "input_tap": ckpt.input_tap,
    })
    click.echo(f"wrote {output_path}")


@main.command()
@click.option("--backbone", "backbone_path", required=True, type=click.Path())
@click.option("--checkpoint", "checkpoint_path", type=click.Path())
@click.option("--baseline-maskclip", "baseline", is_flag=True)
@click.option("--gamma", type=float)
@click.option("--delta", type=float)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--template-set", default="imagenet80", show_default=True)
@click.option("--session-ttl", type=float, default=900.0, show_default=True)
@click.option("--max-sessions", type=int, default=64, show_default=True)
@click.option("--cors-origin", "cors_origins", multiple=True, default=("*",))
@click.option("--allow-tap-mismatch", is_flag=True)
@_fail_on_library_errors
def serve(backbone_path, checkpoint_path, baseline, gamma, delta, host, port,
          template_set, session_ttl, max_sessions, cors_origins, allow_tap_mismatch):
    """Run the session-based HTTP service."""
    import uvicorn

    from .service import ServiceSettings, create_app

    pipeline, resolved = _build_pipeline(
        backbone_path, checkpoint_path, baseline=baseline, gamma=gamma, delta=delta,
        allow_tap_mismatch=allow_tap_mismatch,
    )
    resolved.update({
        "command": "serve", "host": host, "port": port, "template_set": template_set,
        "session_ttl": session_ttl, "max_sessions": max_sessions,
    })
    _emit_resolved_config(resolved)
    app = create_app(pipeline, ServiceSettings(
        session_ttl=session_ttl, max_sessions=max_sessions, template_set=template_set,
        cors_origins=tuple(cors_origins),
    ))
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
