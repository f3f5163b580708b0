import numpy as np
import pytest

from dinoiser.errors import InvalidArgumentError, WeightLoadError
from dinoiser.featurizer import (
    encode_image_dense,
    encode_text_queries,
    load_backbone,
    make_random_weights,
)
from dinoiser.featurizer.templates import IMAGENET_TEMPLATES, SINGLE_TEMPLATE
from dinoiser.featurizer.text import _embed_sentence
from dinoiser.featurizer.tokenizer import BpeTokenizer, HashTokenizer


@pytest.fixture(scope="module")
def image(rng=np.random.default_rng(2)):
    return (rng.random((56, 56, 3)) * 255).astype(np.uint8)


class TestEncodeImageDense:
    def test_shapes_and_shared_grid(self, backbone, image):
        enc = encode_image_dense(image, backbone)
        assert enc.last.grid == enc.intermediate.grid
        assert enc.last.grid.n == (56 // 8) ** 2
        assert enc.last.values.shape == (49, backbone.proj_dim)
        assert enc.intermediate.values.shape == (49, backbone.proj_dim)
        assert enc.last.source_tag == "maskclip_last"
        assert enc.intermediate.source_tag == "intermediate"

    def test_feature_dim_comes_from_weights(self, backbone):
        # the projection width is read off the loaded container, not assumed
        assert backbone.proj_dim == backbone.vision.proj_dim

    def test_deterministic_reencoding(self, backbone, image):
        a = encode_image_dense(image, backbone)
        b = encode_image_dense(image, backbone)
        assert np.array_equal(a.last.values, b.last.values)
        assert np.array_equal(a.intermediate.values, b.intermediate.values)

    def test_different_images_differ(self, backbone):
        zeros = np.zeros((56, 56, 3), dtype=np.uint8)
        ones = np.full((56, 56, 3), 255, dtype=np.uint8)
        a = encode_image_dense(zeros, backbone)
        b = encode_image_dense(ones, backbone)
        assert np.linalg.norm(a.last.values - b.last.values) > 0

    def test_non_square_and_padding(self, backbone):
        rng = np.random.default_rng(3)
        enc = encode_image_dense(rng.random((50, 70, 3)), backbone)
        # 50x70 at patch 8 -> ceil to 7x9 grid
        assert (enc.last.grid.n_rows, enc.last.grid.n_cols) == (7, 9)
        assert enc.preprocess.padded_h == 56 and enc.preprocess.padded_w == 72

    def test_resize_shorter_side(self, tmp_path):
        path = tmp_path / "resize.weights"
        make_random_weights(path, seed=5, resize_shorter=40)
        handle = load_backbone(path)
        enc = encode_image_dense(np.random.default_rng(0).random((80, 120, 3)), handle)
        assert enc.preprocess.resized_h == 40
        assert enc.preprocess.resized_w == 60

    def test_standard_eval_resolution_grid(self, tmp_path):
        # 448x448 at patch 16 -> the canonical 28x28 = 784-patch grid
        path = tmp_path / "p16.weights"
        make_random_weights(path, seed=3, patch_size=16, pos_grid=14, with_text=False)
        handle = load_backbone(path)
        enc = encode_image_dense(np.zeros((448, 448, 3)), handle)
        assert enc.last.values.shape == (784, handle.proj_dim)
        assert enc.intermediate.values.shape == (784, handle.proj_dim)

    def test_concurrent_encodes_match_serial(self, backbone):
        from concurrent.futures import ThreadPoolExecutor

        rng = np.random.default_rng(8)
        images = [rng.random((40, 40, 3)) for _ in range(6)]
        serial = [encode_image_dense(img, backbone).last.values for img in images]
        with ThreadPoolExecutor(max_workers=6) as pool:
            parallel = list(pool.map(lambda im: encode_image_dense(im, backbone).last.values,
                                     images))
        for a, b in zip(serial, parallel):
            assert np.array_equal(a, b)


class TestBackboneLoading:
    def test_missing_file(self, tmp_path):
        with pytest.raises(WeightLoadError):
            load_backbone(tmp_path / "nope.weights")

    def test_corrupt_file(self, tmp_path):
        bad = tmp_path / "bad.weights"
        bad.write_bytes(b"garbage" * 10)
        with pytest.raises(WeightLoadError):
            load_backbone(bad)

    def test_truncated_container(self, tmp_path, backbone_path):
        data = backbone_path.read_bytes()
        trunc = tmp_path / "trunc.weights"
        trunc.write_bytes(data[: len(data) // 2])
        with pytest.raises(WeightLoadError):
            load_backbone(trunc)

    def test_tap_layer_validation(self, backbone_path):
        with pytest.raises(InvalidArgumentError):
            load_backbone(backbone_path, tap_layer=99)

    def test_weights_are_frozen(self, backbone):
        arr = backbone.vision.p("patch_embed.weight")
        with pytest.raises(ValueError):
            arr[0, 0, 0, 0] = 1.0

    def test_cache_dir_fallback(self, tmp_path, monkeypatch):
        make_random_weights(tmp_path / "cached.weights", seed=2)
        monkeypatch.setenv("DINOISER_CACHE_DIR", str(tmp_path))
        handle = load_backbone("cached.weights")
        assert handle.backbone_id == "synthetic-vit"


class TestTextQueries:
    def test_unit_norm_single_prompt(self, backbone):
        qs = encode_text_queries(["cat"], "imagenet80", backbone)
        assert qs.embeddings.shape == (1, backbone.proj_dim)
        assert np.linalg.norm(qs.embeddings[0]) == pytest.approx(1.0, abs=1e-5)

    def test_prompt_order_permutes_rows(self, backbone):
        a = encode_text_queries(["cat", "dog"], "imagenet80", backbone)
        b = encode_text_queries(["dog", "cat"], "imagenet80", backbone)
        assert np.array_equal(a.embeddings[0], b.embeddings[1])
        assert np.array_equal(a.embeddings[1], b.embeddings[0])

    def test_template_sets_differ(self, backbone):
        single = encode_text_queries(["cat"], "single", backbone)
        ensemble = encode_text_queries(["cat"], "imagenet80", backbone)
        assert np.linalg.norm(single.embeddings - ensemble.embeddings) > 0

    def test_template_order_invariance_is_exact(self, backbone, monkeypatch):
        shuffled = list(IMAGENET_TEMPLATES)
        np.random.default_rng(0).shuffle(shuffled)
        base = encode_text_queries(["horse"], "imagenet80", backbone)
        monkeypatch.setitem(
            __import__("dinoiser.featurizer.text", fromlist=["TEMPLATE_SETS"]).TEMPLATE_SETS,
            "imagenet80",
            tuple(shuffled),
        )
        again = encode_text_queries(["horse"], "imagenet80", backbone)
        assert np.array_equal(base.embeddings, again.embeddings)

    def test_background_flagging(self, backbone):
        qs = encode_text_queries(["cat", "background"], "single", backbone)
        assert qs.has_background and qs.background_index == 1
        qs = encode_text_queries(["cat"], "single", backbone)
        assert not qs.has_background

    def test_empty_prompt_rejected(self, backbone):
        with pytest.raises(InvalidArgumentError):
            encode_text_queries(["cat", "  "], "single", backbone)
        with pytest.raises(InvalidArgumentError):
            encode_text_queries([], "single", backbone)

    def test_template_set_membership(self, backbone):
        with pytest.raises(InvalidArgumentError):
            encode_text_queries(["cat"], "fancy", backbone)

    def test_template_counts(self):
        assert len(IMAGENET_TEMPLATES) == 80
        assert len(SINGLE_TEMPLATE) == 1

    def test_long_prompt_truncates_to_context(self, backbone):
        words = " ".join(f"word{i}" for i in range(50))
        qs = encode_text_queries([words], "single", backbone)
        assert np.isfinite(qs.embeddings).all()

    def test_embedding_depends_on_tokens(self, backbone):
        a = _embed_sentence(backbone, "a photo of a cat.")
        b = _embed_sentence(backbone, "a photo of a dog.")
        assert np.linalg.norm(a - b) > 0


class TestTokenizers:
    def test_hash_tokenizer_stable_and_in_range(self):
        tok = HashTokenizer(vocab_size=512, bos_id=0, eos_id=1)
        ids = tok.encode("A photo of a CAT!")
        assert ids == tok.encode("a photo of a cat")
        assert all(2 <= i < 512 for i in ids)

    def test_bpe_tokenizer_applies_merges(self):
        merges = "t h\nth e\n"
        tok = BpeTokenizer(merges)
        # "the" -> th + e</w> after merges ("the</w>" is not in the vocab)
        ids = tok.encode("the")
        assert len(ids) == 2
        again = BpeTokenizer(merges).encode("the")
        assert ids == again

    def test_bpe_special_tokens_last(self):
        tok = BpeTokenizer("a b\n")
        assert tok.eos_id == tok.vocab_size - 1
        assert tok.bos_id == tok.vocab_size - 2
