import json
import time

import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

from dinoiser.cli import main
from dinoiser.training import load_checkpoint

from conftest import make_blob_image, make_synthetic_dataset


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, backbone_path, teacher_path):
    root = tmp_path_factory.mktemp("cli")
    images_dir = root / "train_images"
    images_dir.mkdir()
    samples, mask_dir = make_synthetic_dataset(root, n_images=4, size=24)
    for image_id, image in samples:
        Image.fromarray((image * 255).astype(np.uint8)).save(images_dir / f"{image_id}.png")
    test_image, _ = make_blob_image(np.random.default_rng(77), size=32)
    test_path = root / "photo.png"
    Image.fromarray((test_image * 255).astype(np.uint8)).save(test_path)
    return {
        "root": root,
        "images_dir": images_dir,
        "mask_dir": mask_dir,
        "test_image": test_path,
        "backbone": str(backbone_path),
        "teacher": str(teacher_path),
    }


@pytest.fixture(scope="module")
def checkpoint_path(workdir):
    runner = CliRunner()
    out = workdir["root"] / "heads.ckpt"
    result = runner.invoke(main, [
        "train",
        "--images", str(workdir["images_dir"]),
        "--masks", str(workdir["mask_dir"]),
        "--backbone", workdir["backbone"],
        "--teacher-backbone", workdir["teacher"],
        "--epochs", "1", "--batch-size", "4", "--lr", "0.05",
        "--crop-size", "24", "--proj-channels", "8",
        "--affinity-head-stop-epoch", "1",
        "--output", str(out),
        "--metrics", str(workdir["root"] / "metrics.ndjson"),
        "--output-dir", str(workdir["root"]),
    ])
    assert result.exit_code == 0, result.output
    return out


class TestTrainCommand:
    def test_checkpoint_loadable(self, checkpoint_path):
        ckpt = load_checkpoint(checkpoint_path)
        assert ckpt.backbone_id == "synthetic-vit"
        assert len(ckpt.metrics) == 1

    def test_resolved_config_persisted(self, workdir, checkpoint_path):
        resolved = json.loads((workdir["root"] / "resolved_config.json").read_text())
        assert resolved["command"] == "train"
        assert resolved["train_config"]["epochs"] == 1
        assert "config_hash" in resolved

    def test_metrics_file_written(self, workdir, checkpoint_path):
        lines = (workdir["root"] / "metrics.ndjson").read_text().strip().split("\n")
        assert len(lines) == 1
        assert set(json.loads(lines[0])) == {"epoch", "loss_c", "loss_m", "lr"}

    def test_config_file_with_cli_overrides(self, workdir, tmp_path):
        config = tmp_path / "train.yaml"
        config.write_text(
            "epochs: 1\nbatch_size: 2\nlr: 0.05\ncrop_size: 24\nproj_channels: 8\n"
            "affinity_head_stop_epoch: 1\ngamma: 0.3\n"
            "augmentations:\n  photometric: false\n"
        )
        runner = CliRunner()
        out = tmp_path / "c.ckpt"
        result = runner.invoke(main, [
            "train",
            "--images", str(workdir["images_dir"]),
            "--masks", str(workdir["mask_dir"]),
            "--backbone", workdir["backbone"],
            "--teacher-backbone", workdir["teacher"],
            "--config", str(config),
            "--gamma", "0.25",  # flag overrides the file
            "--no-flip",
            "--output", str(out),
            "--output-dir", str(tmp_path),
        ])
        assert result.exit_code == 0, result.output
        ckpt = load_checkpoint(out)
        assert ckpt.gamma_default == 0.25
        assert ckpt.train_config["augmentations"] == {
            "random_scale_crop": True, "flip": False, "photometric": False,
        }


class TestSegmentCommand:
    def test_writes_mask_legend_sidecar(self, workdir, checkpoint_path, tmp_path):
        runner = CliRunner()
        result = runner.invoke(main, [
            "segment", str(workdir["test_image"]),
            "--prompts", "cat,background",
            "--backbone", workdir["backbone"],
            "--checkpoint", str(checkpoint_path),
            "--output-dir", str(tmp_path),
            "--template-set", "single",
        ])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "photo_mask.png").exists()
        assert (tmp_path / "photo_legend.txt").exists()
        sidecar = json.loads((tmp_path / "photo.json").read_text())
        assert sidecar["prompts"] == ["cat", "background"]
        assert sidecar["schema_version"] == 1
        total = sum(sidecar["coverage_percent"].values())
        assert total == pytest.approx(100.0, abs=0.01)
        mask = Image.open(tmp_path / "photo_mask.png")
        assert mask.mode == "P" and mask.size == (32, 32)

    def test_gamma_one_equals_baseline_byte_for_byte(self, workdir, checkpoint_path,
                                                     tmp_path):
        runner = CliRunner()
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out, extra in ((out_a, ["--checkpoint", str(checkpoint_path), "--gamma", "1.0"]),
                           (out_b, ["--baseline-maskclip"])):
            result = runner.invoke(main, [
                "segment", str(workdir["test_image"]),
                "--prompts", "cat,dog",
                "--backbone", workdir["backbone"],
                "--output-dir", str(out),
                "--template-set", "single",
                "--no-background",
                *extra,
            ])
            assert result.exit_code == 0, result.output
        assert (out_a / "photo_mask.png").read_bytes() == (out_b / "photo_mask.png").read_bytes()
        cov_a = json.loads((out_a / "photo.json").read_text())["coverage_percent"]
        cov_b = json.loads((out_b / "photo.json").read_text())["coverage_percent"]
        assert cov_a == cov_b

    def test_rerun_is_byte_identical(self, workdir, checkpoint_path, tmp_path):
        runner = CliRunner()
        outputs = []
        for out in (tmp_path / "r1", tmp_path / "r2"):
            result = runner.invoke(main, [
                "--deterministic",
                "segment", str(workdir["test_image"]),
                "--prompts", "cat,dog",
                "--backbone", workdir["backbone"],
                "--checkpoint", str(checkpoint_path),
                "--output-dir", str(out),
                "--template-set", "single",
            ])
            assert result.exit_code == 0, result.output
            outputs.append((out / "photo_mask.png").read_bytes()
                           + (out / "photo.json").read_bytes()
                           + (out / "photo_legend.txt").read_bytes())
        assert outputs[0] == outputs[1]

    def test_unreadable_image_all_fail_exits_nonzero(self, workdir, checkpoint_path,
                                                     tmp_path):
        bad = tmp_path / "broken.png"
        bad.write_bytes(b"nope")
        runner = CliRunner()
        result = runner.invoke(main, [
            "segment", str(bad),
            "--prompts", "cat",
            "--backbone", workdir["backbone"],
            "--checkpoint", str(checkpoint_path),
            "--output-dir", str(tmp_path),
            "--template-set", "single",
        ])
        assert result.exit_code == 1

    def test_unknown_flag_is_usage_error(self, workdir):
        runner = CliRunner()
        result = runner.invoke(main, ["segment", "x.png", "--frobnicate"])
        assert result.exit_code == 2

    def test_missing_pipeline_choice_is_usage_error(self, workdir):
        runner = CliRunner()
        result = runner.invoke(main, [
            "segment", str(workdir["test_image"]),
            "--prompts", "cat",
            "--backbone", workdir["backbone"],
        ])
        assert result.exit_code == 2

    def test_tap_mismatch_fails_without_override(self, workdir, checkpoint_path, tmp_path,
                                                 backbone_path):
        from dinoiser.featurizer import load_backbone

        tap = load_backbone(backbone_path).tap_layer
        runner = CliRunner()
        args = [
            "segment", str(workdir["test_image"]),
            "--prompts", "cat",
            "--backbone", workdir["backbone"],
            "--checkpoint", str(checkpoint_path),
            "--output-dir", str(tmp_path),
            "--template-set", "single",
        ]
        # nothing to mismatch here (same tap), so force one via a second backbone
        from dinoiser.featurizer import make_random_weights

        other = tmp_path / "other_tap.weights"
        make_random_weights(other, seed=7, default_tap=tap + 1)
        args[args.index(workdir["backbone"])] = str(other)
        result = runner.invoke(main, args)
        assert result.exit_code == 1
        result = runner.invoke(main, args + ["--allow-tap-mismatch"])
        assert result.exit_code == 0, result.output


class TestEvalCommand:
    def test_eval_synthetic_dataset_under_budget(self, workdir, checkpoint_path, tmp_path):
        root = tmp_path / "dataset"
        (root / "images").mkdir(parents=True)
        (root / "annotations").mkdir()
        rng = np.random.default_rng(31)
        for i in range(5):
            image, mask = make_blob_image(rng, size=32)
            Image.fromarray((image * 255).astype(np.uint8)).save(root / "images" / f"e{i}.png")
            Image.fromarray(np.where(mask, 1, 0).astype(np.uint8)).save(
                root / "annotations" / f"e{i}.png"
            )
        (root / "classes.txt").write_text("backdrop\nblob\n")
        runner = CliRunner()
        started = time.perf_counter()
        result = runner.invoke(main, [
            "eval", "--dataset", "generic", "--root", str(root),
            "--backbone", workdir["backbone"],
            "--checkpoint", str(checkpoint_path),
            "--window", "32", "--stride", "16",
            "--template-set", "single",
            "--output-dir", str(tmp_path),
        ])
        elapsed = time.perf_counter() - started
        assert result.exit_code == 0, result.output
        assert elapsed < 60.0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["n_images"] == 5
        assert 0.0 <= report["miou"] <= 1.0
        assert "mIoU" in (tmp_path / "report.txt").read_text()


class TestExportCommand:
    def test_export_strips_history_and_stays_loadable(self, checkpoint_path, tmp_path):
        runner = CliRunner()
        out = tmp_path / "portable.weights"
        result = runner.invoke(main, [
            "export", "--checkpoint", str(checkpoint_path), "--output", str(out),
        ])
        assert result.exit_code == 0, result.output
        exported = load_checkpoint(out)
        original = load_checkpoint(checkpoint_path)
        np.testing.assert_array_equal(
            exported.affinity_head.kernel, original.affinity_head.kernel
        )
        assert exported.metrics == ()
        assert exported.input_tap == original.input_tap
