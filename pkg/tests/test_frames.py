"""Frame containers, PGM/PNG decoding, grayscale conversion, resizing."""

import numpy as np
import pytest
from PIL import Image

from accelstream.errors import (
    BadDimensions,
    DecodeError,
    DimensionMismatch,
    MissingInput,
    NonGrayInput,
)
from accelstream.frames import (
    Frame,
    FrameSequence,
    load_frame,
    load_sequence,
    resize_bilinear,
    save_pgm,
    to_grayscale,
)


class TestFrameContainer:
    def test_accepts_gray_and_rgb(self):
        Frame(np.zeros((4, 5), dtype=np.uint8))
        Frame(np.zeros((4, 5, 3), dtype=np.uint8))

    def test_rejects_tiny_frames(self):
        with pytest.raises(BadDimensions):
            Frame(np.zeros((1, 5), dtype=np.uint8))
        with pytest.raises(BadDimensions):
            Frame(np.zeros((5, 1), dtype=np.uint8))

    def test_rejects_odd_channel_counts(self):
        with pytest.raises(BadDimensions):
            Frame(np.zeros((4, 4, 2), dtype=np.uint8))
        with pytest.raises(BadDimensions):
            Frame(np.zeros((4,), dtype=np.uint8))

    def test_pixels_are_read_only(self):
        f = Frame(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            f.pixels[0, 0] = 1

    def test_properties(self):
        f = Frame(np.zeros((3, 7), dtype=np.uint8))
        assert (f.height, f.width, f.channels) == (3, 7, 1)
        g = Frame(np.zeros((3, 7, 3), dtype=np.uint8))
        assert g.channels == 3


class TestFrameSequence:
    def test_needs_two_frames(self):
        one = Frame(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(MissingInput):
            FrameSequence((one,))

    def test_uniform_dimensions_enforced(self):
        a = Frame(np.zeros((4, 4), dtype=np.uint8))
        b = Frame(np.zeros((4, 5), dtype=np.uint8))
        with pytest.raises(DimensionMismatch):
            FrameSequence((a, b))

    def test_len_and_indexing(self):
        frames = tuple(
            Frame(np.full((4, 4), i, dtype=np.uint8)) for i in range(3)
        )
        seq = FrameSequence(frames)
        assert len(seq) == 3
        assert seq[1].pixels[0, 0] == 1


class TestPgmIo:
    def test_round_trip_preserves_bytes(self, tmp_path):
        rng = np.random.default_rng(7)
        px = rng.integers(0, 256, size=(13, 9), dtype=np.uint8)
        p = tmp_path / "a.pgm"
        save_pgm(Frame(px), p)
        back = load_frame(p)
        np.testing.assert_array_equal(back.pixels, px)

    def test_header_comments_and_whitespace(self, tmp_path):
        px = np.arange(12, dtype=np.uint8).reshape(3, 4)
        raw = b"P5 # binary gray\n# size next\n 4\t3 \n255\n" + px.tobytes()
        p = tmp_path / "c.pgm"
        p.write_bytes(raw)
        np.testing.assert_array_equal(load_frame(p).pixels, px)

    def test_rejects_wrong_magic(self, tmp_path):
        p = tmp_path / "p2.pgm"
        p.write_text("P2\n2 2\n255\n0 0 0 0\n")
        with pytest.raises(DecodeError):
            load_frame(p)

    def test_rejects_wide_maxval(self, tmp_path):
        p = tmp_path / "wide.pgm"
        p.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
        with pytest.raises(DecodeError):
            load_frame(p)

    def test_rejects_truncated_raster(self, tmp_path):
        p = tmp_path / "short.pgm"
        p.write_bytes(b"P5\n4 4\n255\n" + bytes(15))
        with pytest.raises(DecodeError):
            load_frame(p)

    def test_save_rejects_rgb(self, tmp_path):
        f = Frame(np.zeros((4, 4, 3), dtype=np.uint8))
        with pytest.raises(NonGrayInput):
            save_pgm(f, tmp_path / "x.pgm")

    def test_unknown_extension(self, tmp_path):
        p = tmp_path / "frame.bmp"
        p.write_bytes(b"")
        with pytest.raises(DecodeError):
            load_frame(p)


class TestPngIo:
    def test_gray_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        px = rng.integers(0, 256, size=(10, 12), dtype=np.uint8)
        p = tmp_path / "g.png"
        Image.fromarray(px, mode="L").save(p)
        np.testing.assert_array_equal(load_frame(p).pixels, px)

    def test_rgb_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        px = rng.integers(0, 256, size=(6, 5, 3), dtype=np.uint8)
        p = tmp_path / "c.png"
        Image.fromarray(px, mode="RGB").save(p)
        back = load_frame(p)
        assert back.channels == 3
        np.testing.assert_array_equal(back.pixels, px)

    def test_alpha_rejected(self, tmp_path):
        px = np.zeros((4, 4, 4), dtype=np.uint8)
        p = tmp_path / "a.png"
        Image.fromarray(px, mode="RGBA").save(p)
        with pytest.raises(DecodeError):
            load_frame(p)

    def test_palette_rejected(self, tmp_path):
        im = Image.new("P", (4, 4))
        p = tmp_path / "pal.png"
        im.save(p)
        with pytest.raises(DecodeError):
            load_frame(p)


class TestLoadSequence:
    def _write_frames(self, d, names):
        for i, name in enumerate(names):
            save_pgm(Frame(np.full((4, 4), i, dtype=np.uint8)), d / name)

    def test_lexicographic_order(self, tmp_path):
        # written out of order on purpose; load order must follow names
        self._write_frames(tmp_path, ["f02.pgm", "f00.pgm", "f01.pgm"])
        seq = load_sequence(tmp_path, "*.pgm")
        values = [f.pixels[0, 0] for f in seq.frames]
        assert values == [1, 2, 0]

    def test_deterministic_across_loads(self, tmp_path):
        self._write_frames(tmp_path, [f"f{i:02d}.pgm" for i in range(5)])
        a = load_sequence(tmp_path, "*.pgm")
        b = load_sequence(tmp_path, "*.pgm")
        for fa, fb in zip(a.frames, b.frames):
            np.testing.assert_array_equal(fa.pixels, fb.pixels)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(MissingInput):
            load_sequence(tmp_path / "nope")

    def test_single_frame_rejected(self, tmp_path):
        self._write_frames(tmp_path, ["only.pgm"])
        with pytest.raises(MissingInput):
            load_sequence(tmp_path, "*.pgm")

    def test_mixed_sizes_rejected(self, tmp_path):
        save_pgm(Frame(np.zeros((4, 4), dtype=np.uint8)), tmp_path / "a.pgm")
        save_pgm(Frame(np.zeros((4, 5), dtype=np.uint8)), tmp_path / "b.pgm")
        with pytest.raises(DimensionMismatch):
            load_sequence(tmp_path, "*.pgm")


class TestGrayscale:
    def test_primary_colors(self):
        px = np.zeros((2, 4, 3), dtype=np.uint8)
        px[:, 0] = (255, 0, 0)
        px[:, 1] = (0, 255, 0)
        px[:, 2] = (0, 0, 255)
        px[:, 3] = (255, 255, 255)
        g = to_grayscale(Frame(px))
        # 0.299/0.587/0.114 weights, round half up
        assert list(g.pixels[0]) == [76, 150, 29, 255]

    def test_gray_input_is_identity(self):
        f = Frame(np.arange(16, dtype=np.uint8).reshape(4, 4))
        assert to_grayscale(f) is f

    def test_idempotent(self):
        rng = np.random.default_rng(11)
        px = rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8)
        once = to_grayscale(Frame(px))
        twice = to_grayscale(once)
        np.testing.assert_array_equal(once.pixels, twice.pixels)

    def test_equal_channels_map_to_same_value(self):
        for v in (0, 1, 17, 128, 254, 255):
            px = np.full((2, 2, 3), v, dtype=np.uint8)
            g = to_grayscale(Frame(px))
            assert int(g.pixels[0, 0]) == v


class TestResize:
    def test_identity_returns_same_frame(self):
        f = Frame(np.arange(16, dtype=np.uint8).reshape(4, 4))
        assert resize_bilinear(f, 4, 4) is f

    def test_constant_stays_constant(self):
        f = Frame(np.full((5, 7), 93, dtype=np.uint8))
        for w, h in [(2, 2), (16, 16), (7, 5), (31, 9)]:
            out = resize_bilinear(f, w, h)
            assert out.pixels.shape == (h, w)
            assert np.all(out.pixels == 93)

    def test_checkerboard_upsample_matches_hand_values(self):
        # 2x2 checker to 4x4 under half-pixel mapping with edge clamping:
        # sample positions are -0.25, 0.25, 0.75, 1.25 along each axis
        f = Frame(np.array([[0, 255], [255, 0]], dtype=np.uint8))
        out = resize_bilinear(f, 4, 4)
        expected = np.array(
            [
                [0, 64, 191, 255],
                [64, 96, 159, 191],
                [191, 159, 96, 64],
                [255, 191, 64, 0],
            ],
            dtype=np.uint8,
        )
        np.testing.assert_array_equal(out.pixels, expected)

    def test_output_within_input_range(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            h, w = rng.integers(2, 24, size=2)
            px = rng.integers(0, 256, size=(h, w), dtype=np.uint8)
            f = Frame(px)
            tw, th = rng.integers(2, 40, size=2)
            out = resize_bilinear(f, int(tw), int(th))
            assert out.pixels.min() >= px.min()
            assert out.pixels.max() <= px.max()

    def test_rgb_resizes_each_channel(self):
        px = np.zeros((2, 2, 3), dtype=np.uint8)
        px[:, :, 0] = [[0, 255], [255, 0]]
        px[:, :, 1] = 7
        out = resize_bilinear(Frame(px), 4, 4)
        assert out.pixels.shape == (4, 4, 3)
        assert np.all(out.pixels[:, :, 1] == 7)
        assert out.pixels[0, 0, 0] == 0 and out.pixels[0, 3, 0] == 255

    def test_rejects_tiny_target(self):
        f = Frame(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(BadDimensions):
            resize_bilinear(f, 1, 4)
