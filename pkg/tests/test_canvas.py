import io
import json

import numpy as np
import pytest

from diffpaint.canvas import (
    CompositionSpec,
    Placement,
    encode_png,
    image_to_data_url,
    load_image,
    load_mask,
    rasterize,
    save_image,
    spec_from_json,
    spec_to_json,
)


def brute_force_rasterize(spec):
    """Per-pixel reference: walk every canvas pixel and every placement in
    z-order, no vectorization."""
    c = 3 if any(p.patch.shape[2] in (3, 4) for p in spec.placements) else 1
    canvas = np.full((spec.canvas_height, spec.canvas_width, c), spec.background)
    mask = np.zeros((spec.canvas_height, spec.canvas_width))
    for pl in sorted(spec.placements, key=lambda p: p.z_order):
        color, alpha = pl.color_and_alpha()
        for py in range(color.shape[0]):
            for px in range(color.shape[1]):
                cy, cx = pl.y + py, pl.x + px
                if not (0 <= cy < spec.canvas_height and 0 <= cx < spec.canvas_width):
                    continue
                if alpha[py, px] < 0.5:
                    continue
                pix = color[py, px]
                if len(pix) == 1 and c == 3:
                    pix = np.repeat(pix, 3)
                elif len(pix) == 3 and c == 1:
                    pix = np.array([pix.mean()])
                canvas[cy, cx] = pix
                mask[cy, cx] = 1.0
    return canvas, mask


class TestRasterize:
    def test_empty_placements(self):
        spec = CompositionSpec(canvas_width=5, canvas_height=4, background=0.25)
        comp = rasterize(spec)
        assert comp.known.shape == (4, 5, 1)
        assert np.all(comp.known == 0.25)
        assert np.all(comp.mask == 0.0)

    def test_full_cover_patch(self):
        patch = np.linspace(-1, 1, 12).reshape(3, 4)
        spec = CompositionSpec(4, 3, [Placement(patch, 0, 0)])
        comp = rasterize(spec)
        assert np.all(comp.mask == 1.0)
        assert np.array_equal(comp.known[:, :, 0], patch)

    def test_overlap_higher_z_wins_and_mask_is_union(self):
        a = Placement(np.full((4, 4), 0.5), 0, 0, z_order=1)
        b = Placement(np.full((4, 4), -0.5), 2, 2, z_order=2)
        spec = CompositionSpec(8, 8, [a, b])
        comp = rasterize(spec)
        assert comp.known[3, 3, 0] == -0.5  # overlap from higher z
        assert comp.known[1, 1, 0] == 0.5
        expected_mask = np.zeros((8, 8))
        expected_mask[0:4, 0:4] = 1.0
        expected_mask[2:6, 2:6] = 1.0
        assert np.array_equal(comp.mask[:, :, 0], expected_mask)

    def test_matches_brute_force_on_8x8(self):
        rng = np.random.default_rng(0)
        placements = [
            Placement(rng.uniform(-1, 1, (3, 5)), 1, 2, z_order=2),
            Placement(rng.uniform(-1, 1, (4, 3)), 4, -1, z_order=1),
            Placement(rng.uniform(-1, 1, (2, 2)), 6, 6, z_order=3),
        ]
        alpha_patch = rng.uniform(-1, 1, (3, 3, 2))
        alpha_patch[:, :, 1] = rng.random((3, 3))  # mixed alpha
        placements.append(Placement(alpha_patch, 0, 5, z_order=4))
        spec = CompositionSpec(8, 8, placements, background=-0.1)
        comp = rasterize(spec)
        ref_canvas, ref_mask = brute_force_rasterize(spec)
        assert np.array_equal(comp.known, ref_canvas)
        assert np.array_equal(comp.mask[:, :, 0], ref_mask)

    def test_out_of_bounds_clips(self):
        patch = np.full((4, 4), 0.9)
        spec = CompositionSpec(6, 6, [Placement(patch, -2, -2)])
        comp = rasterize(spec)
        assert np.all(comp.mask[0:2, 0:2, 0] == 1.0)
        assert comp.mask[:, :, 0].sum() == 4
        assert not comp.warnings

    def test_fully_outside_warns_not_fatal(self):
        spec = CompositionSpec(6, 6, [Placement(np.ones((2, 2)), 10, 10)])
        comp = rasterize(spec)
        assert np.all(comp.mask == 0.0)
        assert len(comp.warnings) == 1
        assert "outside" in comp.warnings[0]

    def test_zero_size_patch_rejected(self):
        with pytest.raises(ValueError):
            Placement(np.zeros((0, 3)), 0, 0)

    def test_alpha_threshold_membership(self):
        patch = np.zeros((1, 2, 2))
        patch[0, 0, 1] = 0.49
        patch[0, 1, 1] = 0.50
        spec = CompositionSpec(2, 1, [Placement(patch, 0, 0)])
        comp = rasterize(spec)
        assert comp.mask[0, 0, 0] == 0.0
        assert comp.mask[0, 1, 0] == 1.0

    def test_color_patch_forces_rgb_canvas(self):
        spec = CompositionSpec(4, 4, [Placement(np.zeros((2, 2, 3)), 0, 0)])
        assert rasterize(spec).known.shape == (4, 4, 3)

    def test_explicit_channels_respected(self):
        spec = CompositionSpec(4, 4, [Placement(np.zeros((2, 2, 3)), 0, 0)], channels=1)
        assert rasterize(spec).known.shape == (4, 4, 1)


class TestImageIO:
    def test_range_endpoints(self, tmp_path):
        from PIL import Image

        arr = np.array([[0, 255]], dtype=np.uint8)
        path = tmp_path / "endpoints.png"
        Image.fromarray(arr, mode="L").save(path)
        img = load_image(path)
        assert img[0, 0, 0] == -1.0
        assert img[0, 1, 0] == 1.0

    def test_mid_value(self, tmp_path):
        from PIL import Image

        path = tmp_path / "mid.png"
        Image.fromarray(np.array([[128]], dtype=np.uint8), mode="L").save(path)
        img = load_image(path)
        assert img[0, 0, 0] == pytest.approx(2 * 128 / 255 - 1)

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        raw = rng.integers(0, 256, (9, 7, 3), dtype=np.uint8)
        from PIL import Image

        first = tmp_path / "first.png"
        Image.fromarray(raw, mode="RGB").save(first)
        loaded = load_image(first)
        second = tmp_path / "second.png"
        save_image(loaded, second)
        assert np.array_equal(load_image(second), loaded)
        assert first.read_bytes() == second.read_bytes()

    def test_unreadable_file_raises_oserror(self, tmp_path):
        bad = tmp_path / "not_a_png.png"
        bad.write_bytes(b"definitely not a png")
        with pytest.raises(OSError) as err:
            load_image(bad)
        assert "not_a_png" in str(err.value)

    def test_save_quantization_round_half_up(self, tmp_path):
        # value mapping to exactly 127.5 bytes rounds up to 128
        img = np.array([[[2 * 127.5 / 255 - 1]]])
        path = tmp_path / "half.png"
        save_image(img, path)
        from PIL import Image

        assert np.asarray(Image.open(path))[0, 0] == 128

    def test_save_clamps_out_of_range(self, tmp_path):
        path = tmp_path / "clamp.png"
        save_image(np.array([[[2.0, -3.0, 0.0]]]), path)
        from PIL import Image

        assert tuple(np.asarray(Image.open(path))[0, 0]) == (255, 0, 128)


class TestLoadMask:
    def write_gray(self, tmp_path, values):
        from PIL import Image

        path = tmp_path / "mask.png"
        Image.fromarray(np.asarray(values, dtype=np.uint8), mode="L").save(path)
        return path

    def test_all_white_is_ones(self, tmp_path):
        mask = load_mask(self.write_gray(tmp_path, np.full((3, 3), 255)))
        assert np.all(mask == 1.0)

    def test_all_black_is_zeros(self, tmp_path):
        mask = load_mask(self.write_gray(tmp_path, np.zeros((3, 3))))
        assert np.all(mask == 0.0)

    def test_threshold_boundary(self, tmp_path):
        mask = load_mask(self.write_gray(tmp_path, np.array([[127, 128]])))
        assert mask[0, 0] == 0.0
        assert mask[0, 1] == 1.0

    def test_size_mismatch_rejected(self, tmp_path):
        path = self.write_gray(tmp_path, np.zeros((3, 3)))
        with pytest.raises(ValueError):
            load_mask(path, expected_shape=(4, 4))


class TestSpecJson:
    def test_round_trip_preserves_geometry_and_pixels(self):
        rng = np.random.default_rng(2)
        raw = rng.integers(0, 256, (3, 4, 3), dtype=np.uint8)
        patch = 2.0 * raw / 255.0 - 1.0
        spec = CompositionSpec(10, 8, [Placement(patch, 3, 2, z_order=5)], background=0.5)
        doc = spec_to_json(spec)
        back = spec_from_json(doc)
        assert back.canvas_width == 10 and back.canvas_height == 8
        assert back.background == 0.5
        pl = back.placements[0]
        assert (pl.x, pl.y, pl.z_order) == (3, 2, 5)
        # alpha-free patches stay alpha-free (treated as fully opaque)
        assert np.array_equal(pl.patch, patch)

    def test_rasterize_equivalence_after_round_trip(self):
        rng = np.random.default_rng(3)
        raw = rng.integers(0, 256, (2, 2), dtype=np.uint8)
        patch = 2.0 * raw / 255.0 - 1.0
        spec = CompositionSpec(4, 4, [Placement(patch, 1, 1)])
        back = spec_from_json(spec_to_json(spec))
        a, b = rasterize(spec), rasterize(back)
        assert np.array_equal(a.mask, b.mask)
        assert np.array_equal(a.known, b.known)

    def test_path_references_resolved_against_base_dir(self, tmp_path):
        patch = np.full((2, 2), 0.2)
        save_image(patch, tmp_path / "patch.png")
        doc = json.dumps(
            {"canvas": {"w": 4, "h": 4}, "placements": [{"image": "patch.png", "x": 0, "y": 0, "z": 0}]}
        )
        spec = spec_from_json(doc, base_dir=tmp_path)
        assert spec.placements[0].patch.shape[:2] == (2, 2)

    def test_malformed_document_raises_value_error(self):
        with pytest.raises(ValueError):
            spec_from_json(json.dumps({"placements": []}))

    def test_data_url_helpers(self):
        img = np.zeros((4, 4, 3))
        url = image_to_data_url(img)
        assert url.startswith("data:image/png;base64,")
        png = encode_png(img)
        assert png[:8] == b"\x89PNG\r\n\x1a\n"
