"""Dense flow estimation, block matching, error metrics, .flo files."""

import numpy as np
import pytest

from accelstream.errors import (
    BadConfig,
    BadMagic,
    DimensionMismatch,
    NonGrayInput,
    OutOfRange,
    TruncatedFile,
)
from accelstream.flow import (
    FlowField,
    HsParams,
    endpoint_error,
    estimate_block_matching,
    estimate_horn_schunck,
    interior_slice,
    read_flo,
    write_flo,
)
from accelstream.frames import Frame

from conftest import texture_frame, translating_pair

INTERIOR = 6  # border excluded when judging accuracy: max(block, 2 * radius)


def constant_flow(w, h, vx, vy):
    return FlowField(np.full((h, w), vx, np.float32), np.full((h, w), vy, np.float32))


def interior_epe(est: FlowField, vx: float, vy: float, border: int = INTERIOR):
    ys, xs = interior_slice(est.width, est.height, border)
    ex = est.dx[ys, xs].astype(np.float64) - vx
    ey = est.dy[ys, xs].astype(np.float64) - vy
    return float(np.mean(np.sqrt(ex * ex + ey * ey)))


class TestParams:
    def test_defaults(self):
        p = HsParams()
        assert p.smoothness == 15.0
        assert p.iterations == 100
        assert p.pyramid_levels == 3
        assert p.warp_per_level == 1

    def test_validation(self):
        with pytest.raises(BadConfig):
            HsParams(smoothness=0.0)
        with pytest.raises(BadConfig):
            HsParams(iterations=0)
        with pytest.raises(BadConfig):
            HsParams(pyramid_levels=0)
        with pytest.raises(BadConfig):
            HsParams(warp_per_level=0)


class TestFlowField:
    def test_coerces_to_float32(self):
        f = FlowField(np.ones((3, 3)), np.zeros((3, 3)))
        assert f.dx.dtype == np.float32
        assert (f.width, f.height) == (3, 3)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            FlowField(np.ones((3, 3), np.float32), np.ones((3, 4), np.float32))

    def test_rejects_non_finite(self):
        bad = np.ones((3, 3), np.float32)
        bad[1, 1] = np.nan
        with pytest.raises(OutOfRange):
            FlowField(bad, np.ones((3, 3), np.float32))


class TestHornSchunck:
    def test_identical_frames_give_zero_flow(self):
        f = texture_frame(0)
        flow = estimate_horn_schunck(f, f)
        assert float(np.abs(flow.dx).max()) <= 1e-6
        assert float(np.abs(flow.dy).max()) <= 1e-6

    def test_featureless_pair_gives_zero_flow(self):
        a = Frame(np.full((32, 32), 120, np.uint8))
        b = Frame(np.full((32, 32), 120, np.uint8))
        flow = estimate_horn_schunck(a, b)
        assert float(np.abs(flow.dx).max()) <= 1e-6

    def test_unit_translation_recovered(self):
        seq = translating_pair(1.0, 0.0, seed=1)
        flow = estimate_horn_schunck(seq[0], seq[1])
        assert interior_epe(flow, 1.0, 0.0) <= 0.25

    def test_vertical_translation_recovered(self):
        seq = translating_pair(0.0, 1.0, seed=2)
        flow = estimate_horn_schunck(seq[0], seq[1])
        assert interior_epe(flow, 0.0, 1.0) <= 0.25

    def test_subpixel_translation_recovered(self):
        seq = translating_pair(0.5, -0.5, seed=3)
        flow = estimate_horn_schunck(seq[0], seq[1])
        assert interior_epe(flow, 0.5, -0.5) <= 0.25

    def test_sign_convention_matches_motion_direction(self):
        # content moving right by 2 px must give positive dx of about +2
        seq = translating_pair(2.0, 0.0, seed=4)
        flow = estimate_horn_schunck(seq[0], seq[1])
        ys, xs = interior_slice(flow.width, flow.height, INTERIOR)
        assert 1.5 <= float(flow.dx[ys, xs].mean()) <= 2.5
        assert abs(float(flow.dy[ys, xs].mean())) <= 0.25

    def test_bit_identical_reruns(self):
        seq = translating_pair(1.3, -0.7, seed=5)
        a = estimate_horn_schunck(seq[0], seq[1])
        b = estimate_horn_schunck(seq[0], seq[1])
        np.testing.assert_array_equal(a.dx, b.dx)
        np.testing.assert_array_equal(a.dy, b.dy)

    def test_dimension_mismatch(self):
        a = Frame(np.zeros((16, 16), np.uint8))
        b = Frame(np.zeros((16, 18), np.uint8))
        with pytest.raises(DimensionMismatch):
            estimate_horn_schunck(a, b)

    def test_rgb_rejected(self):
        a = Frame(np.zeros((16, 16, 3), np.uint8))
        b = Frame(np.zeros((16, 16, 3), np.uint8))
        with pytest.raises(NonGrayInput):
            estimate_horn_schunck(a, b)

    def test_single_level_small_image(self):
        # small enough that the pyramid bottoms out early; must not crash
        f = texture_frame(6, height=8, width=8)
        flow = estimate_horn_schunck(f, f, HsParams(pyramid_levels=5))
        assert flow.dx.shape == (8, 8)


class TestBlockMatching:
    def test_identical_frames_give_zero(self):
        f = texture_frame(10)
        flow = estimate_block_matching(f, f)
        assert np.all(flow.dx == 0)
        assert np.all(flow.dy == 0)

    def test_integer_shift_exact_in_interior(self):
        for vx, vy, seed in [(2, 0, 11), (0, 2, 12), (-1, 1, 13), (3, -2, 14)]:
            seq = translating_pair(float(vx), float(vy), seed=seed)
            flow = estimate_block_matching(seq[0], seq[1], radius=3, block=5)
            ys, xs = interior_slice(flow.width, flow.height, INTERIOR)
            np.testing.assert_array_equal(flow.dx[ys, xs], float(vx))
            np.testing.assert_array_equal(flow.dy[ys, xs], float(vy))

    def test_search_radius_caps_displacement(self):
        seq = translating_pair(3.0, 0.0, seed=15)
        flow = estimate_block_matching(seq[0], seq[1], radius=1, block=5)
        assert float(np.abs(flow.dx).max()) <= 1.0
        assert float(np.abs(flow.dy).max()) <= 1.0
        ys, xs = interior_slice(flow.width, flow.height, INTERIOR)
        # saturates at the search boundary in the motion direction
        assert float(flow.dx[ys, xs].mean()) > 0.9

    def test_flat_patches_resolve_to_zero(self):
        # every candidate has equal cost on a constant image; the
        # nearest-displacement-first tie-break must select (0, 0)
        a = Frame(np.full((20, 20), 55, np.uint8))
        flow = estimate_block_matching(a, a, radius=2, block=3)
        assert np.all(flow.dx == 0)
        assert np.all(flow.dy == 0)

    def test_parameter_validation(self):
        f = texture_frame(16, height=16, width=16)
        with pytest.raises(BadConfig):
            estimate_block_matching(f, f, radius=0)
        with pytest.raises(BadConfig):
            estimate_block_matching(f, f, block=4)
        with pytest.raises(BadConfig):
            estimate_block_matching(f, f, block=1)

    def test_output_is_integer_valued(self):
        seq = translating_pair(1.4, 0.6, seed=17)
        flow = estimate_block_matching(seq[0], seq[1])
        np.testing.assert_array_equal(flow.dx, np.round(flow.dx))
        np.testing.assert_array_equal(flow.dy, np.round(flow.dy))


class TestEndpointError:
    def test_identical_fields_give_zero(self):
        f = constant_flow(8, 6, 1.5, -2.0)
        assert endpoint_error(f, f) == 0.0

    def test_three_four_five(self):
        a = constant_flow(8, 8, 3.0, 4.0)
        b = constant_flow(8, 8, 0.0, 0.0)
        assert endpoint_error(a, b) == pytest.approx(5.0, abs=1e-6)

    def test_symmetry(self):
        rng = np.random.default_rng(20)
        a = FlowField(rng.normal(size=(6, 7)), rng.normal(size=(6, 7)))
        b = FlowField(rng.normal(size=(6, 7)), rng.normal(size=(6, 7)))
        assert endpoint_error(a, b) == pytest.approx(endpoint_error(b, a))

    def test_matches_direct_recomputation(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            a = FlowField(rng.normal(size=(5, 5)), rng.normal(size=(5, 5)))
            b = FlowField(rng.normal(size=(5, 5)), rng.normal(size=(5, 5)))
            acc = 0.0
            for y in range(5):
                for x in range(5):
                    ex = float(a.dx[y, x]) - float(b.dx[y, x])
                    ey = float(a.dy[y, x]) - float(b.dy[y, x])
                    acc += (ex * ex + ey * ey) ** 0.5
            assert endpoint_error(a, b) == pytest.approx(acc / 25.0, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            endpoint_error(constant_flow(4, 4, 0, 0), constant_flow(5, 4, 0, 0))


class TestInteriorSlice:
    def test_basic(self):
        ys, xs = interior_slice(10, 8, 2)
        assert (ys, xs) == (slice(2, 6), slice(2, 8))

    def test_degenerate_border_rejected(self):
        with pytest.raises(BadConfig):
            interior_slice(8, 8, 4)


class TestFloFiles:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(30)
        f = FlowField(
            rng.normal(scale=4, size=(11, 7)).astype(np.float32),
            rng.normal(scale=4, size=(11, 7)).astype(np.float32),
        )
        p = tmp_path / "field.flo"
        write_flo(f, p)
        back = read_flo(p)
        np.testing.assert_array_equal(back.dx, f.dx)
        np.testing.assert_array_equal(back.dy, f.dy)
        assert back.dx.dtype == np.float32

    def test_file_size(self, tmp_path):
        f = constant_flow(7, 11, 0.0, 0.0)
        p = tmp_path / "f.flo"
        write_flo(f, p)
        assert p.stat().st_size == 12 + 8 * 7 * 11

    def test_wrong_magic_rejected(self, tmp_path):
        f = constant_flow(4, 4, 1.0, 2.0)
        p = tmp_path / "f.flo"
        write_flo(f, p)
        raw = bytearray(p.read_bytes())
        raw[0] ^= 0xFF
        p.write_bytes(bytes(raw))
        with pytest.raises(BadMagic):
            read_flo(p)

    def test_truncated_payload_rejected(self, tmp_path):
        f = constant_flow(6, 6, 1.0, 2.0)
        p = tmp_path / "f.flo"
        write_flo(f, p)
        p.write_bytes(p.read_bytes()[:-5])
        with pytest.raises(TruncatedFile):
            read_flo(p)

    def test_truncated_header_rejected(self, tmp_path):
        p = tmp_path / "f.flo"
        p.write_bytes(b"\x00" * 8)
        with pytest.raises(TruncatedFile):
            read_flo(p)

    def test_rejects_nonpositive_dims(self, tmp_path):
        import struct

        p = tmp_path / "f.flo"
        p.write_bytes(struct.pack("<fii", 202021.25, 0, 4))
        with pytest.raises(TruncatedFile):
            read_flo(p)
