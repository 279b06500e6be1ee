"""Image pipeline: enhancement, thinning, crossing numbers, minutiae I/O."""

import math

import numpy as np
import pytest

from zkfinger.minutiae import (
    BinaryImage,
    GrayImage,
    InsufficientDataError,
    Minutia,
    MinutiaKind,
    MinutiaeParseError,
    binarize,
    crossing_number,
    enhance,
    extract_minutiae,
    image_to_minutiae,
    load_minutiae,
    remove_spurious,
    resize_nearest,
    save_minutiae,
    thin,
)


def naive_thin(grid):
    """Loop-based two-subiteration thinning used as the oracle."""
    grid = [list(row) for row in np.asarray(grid, dtype=int)]
    h, w = len(grid), len(grid[0])

    def neighbors(y, x):
        offsets = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)]
        return [
            grid[y + dy][x + dx] if 0 <= y + dy < h and 0 <= x + dx < w else 0
            for dy, dx in offsets
        ]

    changed = True
    while changed:
        changed = False
        for step in (0, 1):
            kill = []
            for y in range(h):
                for x in range(w):
                    if not grid[y][x]:
                        continue
                    n = neighbors(y, x)
                    if not 2 <= sum(n) <= 6:
                        continue
                    transitions = sum(
                        1 for i in range(8) if n[i] == 0 and n[(i + 1) % 8] == 1
                    )
                    if transitions != 1:
                        continue
                    if step == 0:
                        if n[0] * n[2] * n[4] == 0 and n[2] * n[4] * n[6] == 0:
                            kill.append((y, x))
                    elif n[0] * n[2] * n[6] == 0 and n[0] * n[4] * n[6] == 0:
                        kill.append((y, x))
            for y, x in kill:
                grid[y][x] = 0
                changed = True
    return np.array(grid, dtype=bool)


class TestEnhance:
    def test_contrast_stretch_and_equalize(self):
        pixels = np.tile(np.array([[60, 80, 100]], dtype=np.uint8), (8, 1))
        out = enhance(GrayImage(np.repeat(pixels, 3, axis=1)))
        assert out.pixels.min() == 0
        assert out.pixels.max() == 255

    def test_flat_image_survives(self):
        flat = GrayImage(np.full((8, 8), 77, dtype=np.uint8))
        out = enhance(flat)
        assert out.pixels.shape == (8, 8)

    def test_resize_nearest(self):
        img = GrayImage(np.arange(16, dtype=np.uint8).reshape(4, 4))
        out = resize_nearest(img, 8, 8)
        assert out.width == 8 and out.height == 8
        assert out.pixels[0, 0] == img.pixels[0, 0]
        assert out.pixels[-1, -1] == img.pixels[-1, -1]


class TestBinarize:
    def test_threshold_against_local_mean(self):
        pixels = np.zeros((20, 20), dtype=np.uint8)
        pixels[:, 10:] = 200
        out = binarize(GrayImage(pixels), window=5)
        assert out.bits[5, 15]
        assert not out.bits[5, 2]  # zero pixels never count as ridge

    def test_shape_preserved(self):
        rng = np.random.default_rng(1)
        img = GrayImage(rng.integers(0, 256, (33, 17), dtype=np.uint8).astype(np.uint8))
        assert binarize(img).bits.shape == (33, 17)


class TestThin:
    def test_bar_becomes_line(self):
        bar = np.zeros((5, 9), dtype=bool)
        bar[1:4, :] = True
        skeleton = thin(BinaryImage(bar))
        expected = {(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (2, 6)}
        assert set(map(tuple, np.argwhere(skeleton.bits))) == expected

    def test_matches_naive_reference(self):
        rng = np.random.default_rng(5)
        for _ in range(8):
            blob = rng.random((16, 16)) < 0.55
            assert (thin(BinaryImage(blob)).bits == naive_thin(blob)).all()

    def test_idempotent(self):
        rng = np.random.default_rng(9)
        blob = rng.random((24, 24)) < 0.5
        once = thin(BinaryImage(blob))
        assert (thin(once).bits == once.bits).all()

    def test_subset_of_input(self):
        rng = np.random.default_rng(3)
        blob = rng.random((20, 20)) < 0.6
        skeleton = thin(BinaryImage(blob))
        assert not (skeleton.bits & ~blob).any()


class TestCrossingNumber:
    def make(self, coords, shape=(9, 9)):
        bits = np.zeros(shape, dtype=bool)
        for y, x in coords:
            bits[y, x] = True
        return BinaryImage(bits)

    def test_line_interior_and_endpoints(self):
        skel = self.make([(4, x) for x in range(2, 7)])
        cn = crossing_number(skel)
        assert cn[4, 2] == 1 and cn[4, 6] == 1  # endings
        assert cn[4, 4] == 2  # ridge continuation

    def test_bifurcation(self):
        coords = [(4, 2), (4, 3), (4, 4), (3, 5), (5, 5), (2, 6), (6, 6)]
        cn = crossing_number(self.make(coords))
        assert cn[4, 4] == 3

    def test_isolated_pixel(self):
        cn = crossing_number(self.make([(4, 4)]))
        assert cn[4, 4] == 0

    def test_off_skeleton_zero(self):
        cn = crossing_number(self.make([(4, 4), (4, 5)]))
        assert cn[0, 0] == 0


class TestExtract:
    def test_tee_yields_endings_and_bifurcation(self):
        bits = np.zeros((21, 21), dtype=bool)
        bits[10, 3:18] = True
        bits[10:18, 10] = True  # stem hanging off the bar
        found = extract_minutiae(BinaryImage(bits))
        by_pos = {(int(m.y), int(m.x)): m.kind for m in found}
        assert by_pos[(10, 3)] is MinutiaKind.RIDGE_ENDING
        assert by_pos[(10, 17)] is MinutiaKind.RIDGE_ENDING
        assert by_pos[(17, 10)] is MinutiaKind.RIDGE_ENDING
        assert by_pos[(10, 10)] is MinutiaKind.BIFURCATION

    def test_angles_in_range(self):
        bits = np.zeros((21, 21), dtype=bool)
        bits[10, 3:18] = True
        for m in extract_minutiae(BinaryImage(bits)):
            assert 0 <= m.theta < 2 * math.pi


class TestRemoveSpurious:
    def make_skel(self):
        bits = np.zeros((40, 40), dtype=bool)
        bits[20, 5:35] = True
        return BinaryImage(bits)

    def minutia(self, x, y):
        return Minutia(float(x), float(y), 0.0, MinutiaKind.RIDGE_ENDING)

    def test_border_filtered(self):
        kept = remove_spurious([self.minutia(3, 20), self.minutia(20, 20)],
                               self.make_skel(), border=10)
        assert [m.x for m in kept] == [20.0]

    def test_close_pair_both_removed(self):
        pair = [self.minutia(20, 20), self.minutia(23, 20), self.minutia(32, 20)]
        kept = remove_spurious(pair, self.make_skel(), min_dist=8.0, border=2)
        assert [m.x for m in kept] == [32.0]

    def test_survivors_untouched(self):
        lone = [self.minutia(20, 20)]
        assert remove_spurious(lone, self.make_skel(), border=2) == lone


class TestMinutiaeIO:
    def test_roundtrip(self, tmp_path, small_minutiae):
        path = tmp_path / "points.txt"
        save_minutiae(small_minutiae, path)
        loaded = load_minutiae(path)
        assert len(loaded) == len(small_minutiae)
        for a, b in zip(loaded, small_minutiae):
            assert a.kind == b.kind
            assert math.isclose(a.x, b.x) and math.isclose(a.y, b.y)
            assert math.isclose(a.theta, b.theta)

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "points.txt"
        path.write_text("# header\n\n10.0 20.0 1.0 E\n")
        assert len(load_minutiae(path)) == 1

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "points.txt"
        path.write_text("10.0 20.0 1.0 E\n10.0 oops 1.0 B\n")
        with pytest.raises(MinutiaeParseError, match="line 2"):
            load_minutiae(path)

    def test_bad_kind_rejected(self, tmp_path):
        path = tmp_path / "points.txt"
        path.write_text("10.0 20.0 1.0 Q\n")
        with pytest.raises(MinutiaeParseError):
            load_minutiae(path)

    def test_theta_normalized(self, tmp_path):
        path = tmp_path / "points.txt"
        path.write_text(f"10.0 20.0 {2 * math.pi + 0.5} E\n")
        assert math.isclose(load_minutiae(path)[0].theta, 0.5)

    def test_minutia_validates_theta(self):
        with pytest.raises(ValueError):
            Minutia(0.0, 0.0, -0.1, MinutiaKind.RIDGE_ENDING)


class TestPipeline:
    def test_synthetic_ridge_pattern(self):
        # parallel ridges with a gap produce a usable minutiae set
        pixels = np.zeros((120, 120), dtype=np.uint8)
        for row in range(10, 110, 8):
            pixels[row : row + 3, 10:110] = 220
        pixels[40:60, 55:110] = 0  # interrupt a few ridges mid-way
        found = image_to_minutiae(GrayImage(pixels))
        assert len(found) >= 2
        for m in found:
            assert 0 <= m.x < 120 and 0 <= m.y < 120
