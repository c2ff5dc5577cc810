import numpy as np
import pytest

from cedir.fields import DirectionField, PointSet, ScoreMap, encode_direction_field
from cedir.filters import correlate_axis
from cedir.localizer import (LocalizerConfig, LocalizerError, edge_kernel,
                             find_peaks, handcrafted_response)


class TestEdgeKernel:
    def test_size_3(self):
        np.testing.assert_array_equal(edge_kernel(3), np.array([-1, 0, 1]) / 2.0)

    def test_size_5(self):
        np.testing.assert_array_equal(edge_kernel(5),
                                      np.array([-1, -1, 0, 1, 1]) / 4.0)

    def test_constant_signal_zero_response(self):
        sig = np.full((1, 32), 0.7)
        assert np.max(np.abs(correlate_axis(sig, edge_kernel(3), axis=1))) == 0.0

    @pytest.mark.parametrize("k", [2, 4, 1, -3])
    def test_invalid_sizes(self, k):
        with pytest.raises(LocalizerError):
            edge_kernel(k)


class TestHandcraftedResponse:
    def test_single_center_argmax(self):
        f = encode_direction_field(PointSet(64, 64, [(32, 32)]))
        resp = handcrafted_response(f).values
        assert np.unravel_index(np.argmax(resp), resp.shape) == (32, 32)
        assert resp[32, 32] == pytest.approx(1.0, abs=1e-12)

    def test_constant_field_zero(self):
        f = DirectionField(np.full((32, 32), 0.5), np.full((32, 32), 0.5))
        assert np.max(np.abs(handcrafted_response(f).values)) == 0.0

    def test_two_separated_centers_two_peaks(self):
        pts = PointSet(128, 128, [(44.0, 40.0), (84.0, 80.0)])
        resp = handcrafted_response(encode_direction_field(pts))
        dets = find_peaks(resp, 0.5, 2)
        assert len(dets) == 2
        assert {(d.row, d.col) for d in dets} == {(44.0, 40.0), (84.0, 80.0)}

    def test_documented_axes_beat_swapped(self):
        f = encode_direction_field(PointSet(64, 64, [(32, 32)]))
        documented = handcrafted_response(f).values[32, 32]
        swapped = np.zeros((64, 64))
        for k in LocalizerConfig().kernel_sizes:
            taps = edge_kernel(k)
            swapped -= correlate_axis(f.cos_plane, taps, axis=1)
            swapped -= correlate_axis(f.sin_plane, taps, axis=0)
        swapped /= 2.0 * len(LocalizerConfig().kernel_sizes)
        assert documented > swapped[32, 32]

    def test_translation_equivariance(self):
        base = np.array([(100.0, 90.0), (150.0, 160.0)])
        shift = np.array([8.0, 5.0])
        pts_a = PointSet(256, 256, base)
        pts_b = PointSet(256, 256, base + shift)
        dets_a = find_peaks(handcrafted_response(encode_direction_field(pts_a)), 0.5, 2)
        dets_b = find_peaks(handcrafted_response(encode_direction_field(pts_b)), 0.5, 2)
        moved = sorted(((d.row + shift[0], d.col + shift[1]) for d in dets_a))
        assert moved == sorted((d.row, d.col) for d in dets_b)

    def test_non_finite_field_rejected(self):
        bad = DirectionField(np.full((8, 8), np.nan), np.zeros((8, 8)))
        with pytest.raises(LocalizerError):
            handcrafted_response(bad)


class TestFindPeaks:
    def test_single_spike(self):
        m = np.zeros((16, 16))
        m[5, 9] = 1.0
        dets = find_peaks(ScoreMap(m), 0.5, 2)
        assert len(dets) == 1
        assert (dets[0].row, dets[0].col, dets[0].score) == (5.0, 9.0, 1.0)

    def test_plateau_keeps_top_left(self):
        m = np.zeros((16, 16))
        m[4:6, 7:9] = 0.8
        dets = find_peaks(ScoreMap(m), 0.5, 2)
        assert [(d.row, d.col) for d in dets] == [(4.0, 7.0)]

    def test_threshold_filters_spikes(self):
        m = np.zeros((16, 16))
        m[3, 3] = 0.9
        m[12, 12] = 0.3
        dets = find_peaks(ScoreMap(m), 0.5, 2)
        assert [(d.row, d.col) for d in dets] == [(3.0, 3.0)]

    def test_equal_peaks_outside_window_both_kept(self):
        m = np.zeros((16, 16))
        m[2, 2] = 0.7
        m[2, 9] = 0.7
        dets = find_peaks(ScoreMap(m), 0.5, 2)
        assert len(dets) == 2

    def test_sorted_by_score_then_position(self):
        m = np.zeros((16, 16))
        m[2, 2] = 0.7
        m[9, 9] = 0.9
        m[2, 12] = 0.7
        dets = find_peaks(ScoreMap(m), 0.5, 2)
        assert [(d.row, d.col) for d in dets] == [(9.0, 9.0), (2.0, 2.0), (2.0, 12.0)]

    def test_constant_map_single_detection(self):
        m = np.full((12, 12), 0.9)
        dets = find_peaks(ScoreMap(m), 0.5, 2)
        assert [(d.row, d.col) for d in dets] == [(0.0, 0.0)]

    def test_bad_radius(self):
        with pytest.raises(LocalizerError):
            find_peaks(ScoreMap(np.zeros((4, 4))), 0.5, 0)


class TestPipelineSelfConsistency:
    def test_recovers_separated_points(self, rng):
        for trial in range(3):
            pts = []
            while len(pts) < 6:
                cand = rng.uniform(40, 472, size=2)
                if all(np.hypot(*(cand - p)) >= 40 for p in pts):
                    pts.append(cand)
            pset = PointSet(512, 512, np.array(pts))
            dets = find_peaks(handcrafted_response(encode_direction_field(pset)), 0.5, 2)
            assert len(dets) == 6
            for p in pts:
                best = min(np.hypot(d.row - p[0], d.col - p[1]) for d in dets)
                assert best <= 2.0
