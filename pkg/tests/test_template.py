"""Rotation-invariant structures, quantization, DFT, keyed projection."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zkfinger.minutiae import InsufficientDataError, Minutia, MinutiaKind
from zkfinger.template import (
    CancelableTemplate,
    GridConfig,
    TemplateError,
    TemplateParams,
    compute_knns,
    derive_projection,
    dft,
    make_template,
    neighbor_descriptor,
    project,
    quantize,
    rotated_offset,
    to_bitstring,
)
from conftest import random_minutiae


def minutia(x, y, theta=0.0, kind=MinutiaKind.RIDGE_ENDING):
    return Minutia(float(x), float(y), float(theta) % (2 * math.pi), kind)


def rotate_set(minutiae, phi, cx=200.0, cy=200.0):
    out = []
    for m in minutiae:
        dx, dy = m.x - cx, m.y - cy
        out.append(
            Minutia(
                cx + dx * math.cos(phi) - dy * math.sin(phi),
                cy + dx * math.sin(phi) + dy * math.cos(phi),
                (m.theta + phi) % (2 * math.pi),
                m.kind,
            )
        )
    return out


def naive_dft(bits):
    t = len(bits)
    return np.array(
        [
            sum(bits[s] * np.exp(-2j * math.pi * i * s / t) for s in range(t))
            for i in range(t)
        ]
    )


class TestRotatedOffset:
    def test_reference_frame(self):
        ref = minutia(0, 0, 0.0)
        off = rotated_offset(ref, minutia(3, 4))
        assert math.isclose(off.chi, 3.0)
        assert math.isclose(off.gamma, -4.0)

    @given(st.floats(0, 2 * math.pi - 1e-9), st.floats(-50, 50), st.floats(-50, 50))
    @settings(max_examples=100)
    def test_invariant_under_joint_rotation(self, phi, dx, dy):
        ref = minutia(200, 200, 1.0)
        other = minutia(200 + dx, 200 + dy, 2.5)
        ref_r, other_r = rotate_set([ref, other], phi)
        before = rotated_offset(ref, other)
        after = rotated_offset(ref_r, other_r)
        assert math.isclose(before.chi, after.chi, abs_tol=1e-6)
        assert math.isclose(before.gamma, after.gamma, abs_tol=1e-6)


class TestNeighborDescriptor:
    def test_distance_is_euclidean(self):
        desc = neighbor_descriptor(minutia(0, 0), minutia(3, 4))
        assert math.isclose(desc.d, 5.0)

    def test_angle_average(self):
        desc = neighbor_descriptor(minutia(0, 0, 0.0), minutia(1, 0, math.pi / 2))
        assert math.isclose(desc.theta_avg, math.pi / 4)

    def test_angle_average_wraps(self):
        desc = neighbor_descriptor(minutia(0, 0, 0.1), minutia(1, 0, 2 * math.pi - 0.1))
        assert math.isclose(desc.theta_avg, 0.0, abs_tol=1e-12)

    @given(st.floats(0, 2 * math.pi - 1e-9))
    @settings(max_examples=50)
    def test_distance_rotation_invariant(self, phi):
        a, b = minutia(150, 180, 0.3), minutia(240, 130, 2.0)
        a_r, b_r = rotate_set([a, b], phi)
        assert math.isclose(
            neighbor_descriptor(a, b).d, neighbor_descriptor(a_r, b_r).d, abs_tol=1e-6
        )


class TestKnns:
    def test_needs_two_minutiae(self):
        with pytest.raises(InsufficientDataError):
            compute_knns([minutia(0, 0)], k=5)

    def test_orders_by_distance(self):
        points = [minutia(0, 0), minutia(10, 0), minutia(3, 0), minutia(0, 40)]
        structures = compute_knns(points, k=2)
        first = structures[0]
        assert first.reference_index == 0
        assert [round(n.d) for n in first.neighbors] == [3, 10]

    def test_tie_broken_by_index(self):
        points = [minutia(0, 0), minutia(5, 0), minutia(0, 5), minutia(100, 100)]
        structures = compute_knns(points, k=1)
        assert math.isclose(structures[0].neighbors[0].d, 5.0)
        # equal distances keep input order: neighbor 1 beats neighbor 2
        assert structures[0].neighbors[0].theta_avg == neighbor_descriptor(
            points[0], points[1]
        ).theta_avg

    def test_k_clamped_to_available(self):
        structures = compute_knns([minutia(0, 0), minutia(1, 1)], k=5)
        assert len(structures[0].neighbors) == 1

    def test_one_structure_per_minutia(self):
        rng = np.random.default_rng(2)
        points = random_minutiae(rng, 9)
        assert len(compute_knns(points, k=5)) == 9


class TestQuantize:
    def setup_method(self):
        self.grid = GridConfig()  # cx=4, cy=pi/8, d_max=100

    def structure_with(self, d, theta):
        ref = minutia(0, 0, theta)
        other = minutia(d, 0, theta)
        return compute_knns([ref, other], k=1)[0]

    def test_grid_dimensions(self):
        assert self.grid.wx == 25
        assert self.grid.wy == 16
        assert self.grid.t == 400

    def test_cell_indexing(self):
        cells = quantize(self.structure_with(5.0, 0.0), self.grid).cells
        assert cells[1, 0]
        assert cells.sum() == 1

    def test_distance_clamped_to_last_row(self):
        cells = quantize(self.structure_with(250.0, 0.0), self.grid).cells
        assert cells[24, 0]

    def test_angle_last_column(self):
        theta = 2 * math.pi - 1e-6
        cells = quantize(self.structure_with(5.0, theta), self.grid).cells
        assert cells[1, 15]

    def test_bitstring_layout_row_major(self):
        grid = quantize(self.structure_with(5.0, 0.0), self.grid)
        bits = to_bitstring(grid)
        assert bits.shape == (400,)
        assert bits[1 * 16 + 0] == 1
        assert bits.sum() == 1


class TestDft:
    @given(st.integers(4, 64))
    @settings(max_examples=30, deadline=None)
    def test_matches_naive(self, t):
        rng = np.random.default_rng(t)
        bits = (rng.random(t) < 0.3).astype(np.float64)
        fast = dft(bits)
        slow = naive_dft(bits)
        assert np.max(np.abs(fast - slow)) < 1e-9

    def test_parseval(self):
        rng = np.random.default_rng(77)
        bits = (rng.random(400) < 0.05).astype(np.float64)
        spectrum = dft(bits)
        assert math.isclose(
            np.sum(bits**2), np.sum(np.abs(spectrum) ** 2) / len(bits), rel_tol=1e-12
        )

    def test_zero_frequency_is_popcount(self):
        bits = np.zeros(16)
        bits[[1, 5, 11]] = 1.0
        assert math.isclose(dft(bits)[0].real, 3.0)

    def test_empty_rejected(self):
        with pytest.raises(TemplateError):
            dft(np.array([]))


class TestProjection:
    def test_deterministic(self):
        a = derive_projection(b"key-material", 6, 40)
        b = derive_projection(b"key-material", 6, 40)
        assert (a.matrix == b.matrix).all()

    def test_key_separation(self):
        a = derive_projection(b"key-material", 6, 40).matrix
        b = derive_projection(b"key-materiam", 6, 40).matrix  # one bit apart
        assert (a != b).mean() > 0.99

    def test_shape_separation(self):
        a = derive_projection(b"key", 6, 40).matrix
        b = derive_projection(b"key", 5, 48).matrix
        assert a.shape != b.shape

    def test_roughly_standard_normal(self):
        m = derive_projection(b"stats", 60, 400).matrix
        assert abs(m.mean()) < 0.02
        assert abs(m.std() - 1.0) < 0.02

    def test_must_shrink(self):
        with pytest.raises(TemplateError):
            derive_projection(b"key", 40, 40)

    def test_empty_key_rejected(self):
        with pytest.raises(TemplateError):
            derive_projection(b"", 6, 40)

    def test_project_checks_length(self):
        proj = derive_projection(b"key", 6, 40)
        with pytest.raises(TemplateError):
            project(proj, np.ones(39))


class TestMakeTemplate:
    def test_shape_and_digest(self, rng, small_minutiae):
        params = TemplateParams()
        template = make_template(small_minutiae, b"secret", params)
        assert template.count == len(small_minutiae)
        assert template.entries.shape == (4, params.p)
        assert template.params_digest == params.digest()

    def test_same_key_reproducible(self, small_minutiae):
        a = make_template(small_minutiae, b"secret")
        b = make_template(small_minutiae, b"secret")
        assert (a.entries == b.entries).all()

    def test_different_key_different_entries(self, small_minutiae):
        a = make_template(small_minutiae, b"secret")
        b = make_template(small_minutiae, b"other")
        assert not np.allclose(a.entries, b.entries)

    def test_p_must_stay_below_bitstring(self, small_minutiae):
        params = TemplateParams(p=400)
        with pytest.raises(TemplateError):
            make_template(small_minutiae, b"secret", params)

    def test_bytes_roundtrip(self, small_minutiae):
        template = make_template(small_minutiae, b"secret")
        clone = CancelableTemplate.from_bytes(template.to_bytes())
        assert clone.params_digest == template.params_digest
        assert clone.t == template.t
        assert (clone.entries == template.entries).all()

    def test_truncated_bytes_rejected(self, small_minutiae):
        raw = make_template(small_minutiae, b"secret").to_bytes()
        with pytest.raises(TemplateError):
            CancelableTemplate.from_bytes(raw[:-5])

    def test_debug_json_mentions_shape(self, small_minutiae):
        import json

        template = make_template(small_minutiae, b"secret")
        doc = json.loads(template.to_debug_json())
        assert doc["count"] == 4
