import numpy as np
import pytest
from scipy import ndimage

from cedir.fields import DirectionField, PointSet, encode_direction_field
from cedir.filters import gaussian_blur
from cedir.losses import localization_target
from cedir.rng import Stream, derive
from cedir.synth import (SynthConfig, SynthError, add_gaussian_noise,
                         add_occlusions, apply_occlusion_mask, generate_scene,
                         occlusion_noise_mask)

SMALL = SynthConfig(height=96, width=96, n_points_range=(4, 10))


def test_same_seed_bit_identical():
    a = generate_scene(SMALL, 7)
    b = generate_scene(SMALL, 7)
    np.testing.assert_array_equal(a.points.points, b.points.points)
    np.testing.assert_array_equal(a.clean_field.sin_plane, b.clean_field.sin_plane)
    np.testing.assert_array_equal(a.corrupted_field.sin_plane, b.corrupted_field.sin_plane)
    np.testing.assert_array_equal(a.corrupted_field.cos_plane, b.corrupted_field.cos_plane)
    np.testing.assert_array_equal(a.target.values, b.target.values)


def test_different_seeds_differ():
    a = generate_scene(SMALL, 1)
    b = generate_scene(SMALL, 2)
    assert not np.array_equal(a.points.points, b.points.points)


def test_golden_scene_pins_prng():
    # frozen digests: the point layout and clean field derive from the seed
    # through integer mixing, uniform conversion, sqrt and division only,
    # so these bytes are reproducible across platforms
    import hashlib
    from cedir.fileio import field_to_bytes

    scene = generate_scene(SynthConfig(height=64, width=64, n_points_range=(4, 9)),
                           20260808)
    field_digest = hashlib.sha256(field_to_bytes(scene.clean_field)).hexdigest()
    rows = ";".join(f"{r!r},{c!r}" for r, c in scene.points.points)
    points_digest = hashlib.sha256(rows.encode()).hexdigest()
    assert field_digest == \
        "90944acc035058a43c94f3fa1694cb2de3714e8c73d221d558ab238a8915ba64"
    assert points_digest == \
        "4eef62310a5a75906b90856be2807df6b840dfbaf391de16cd03d43ac603e001"


def test_point_count_bounds_default_config():
    scene = generate_scene(SynthConfig(), 42)
    n = len(scene.points)
    assert scene.primary_count >= 5
    assert n >= 5
    assert n <= 50 * (1 + 5)   # primaries plus maximal clusters


def test_min_separation_between_primaries():
    for seed in range(5):
        scene = generate_scene(SynthConfig(height=256, width=256), seed)
        prim = scene.points.points[:scene.primary_count]
        diff = prim[:, None, :] - prim[None, :, :]
        d = np.sqrt((diff ** 2).sum(-1))
        np.fill_diagonal(d, np.inf)
        assert d.min() >= 10.0


def test_scene_consistency_with_encoders():
    scene = generate_scene(SMALL, 11)
    ref = encode_direction_field(scene.points)
    np.testing.assert_array_equal(scene.clean_field.sin_plane, ref.sin_plane)
    np.testing.assert_array_equal(scene.clean_field.cos_plane, ref.cos_plane)
    tgt = localization_target(scene.points)
    np.testing.assert_array_equal(scene.target.values, tgt.values)
    norm = scene.clean_field.sin_plane ** 2 + scene.clean_field.cos_plane ** 2
    off = norm > 0
    assert np.max(np.abs(norm[off] - 1.0)) < 1e-12


def test_rejection_failure_raises():
    # 60 points at >= 200 px separation cannot fit on a 64x64 grid
    cfg = SynthConfig(height=64, width=64, n_points_range=(60, 60),
                      min_separation=200.0)
    with pytest.raises(SynthError, match="cannot place points"):
        generate_scene(cfg, 0)


class TestGaussianNoise:
    def _field(self, h=64, w=64):
        return encode_direction_field(PointSet(h, w, [(h / 2, w / 2)]))

    def test_no_noise_coin_is_identity(self):
        f = self._field()
        # find a seed whose first uniform is >= 0.25 (no-noise branch)
        seed = next(s for s in range(100) if Stream(s).uniform() >= 0.25)
        out = add_gaussian_noise(f, seed)
        np.testing.assert_array_equal(out.sin_plane, f.sin_plane)
        np.testing.assert_array_equal(out.cos_plane, f.cos_plane)

    def test_zero_sigma_is_identity(self):
        f = self._field()
        seed = next(s for s in range(100) if Stream(s).uniform() < 0.25)
        out = add_gaussian_noise(f, seed, sigma_range=(0.0, 0.0))
        assert np.max(np.abs(out.sin_plane - f.sin_plane)) < 1e-12

    def test_blur_reduces_variance(self):
        noise = Stream(3).normals(512 * 512).reshape(512, 512)
        blurred = gaussian_blur(noise, 3.0)
        assert blurred.var() < 0.5 * noise.var()

    def test_output_not_clamped(self):
        f = self._field()
        seed = next(s for s in range(100) if Stream(s).uniform() < 0.25)
        out = add_gaussian_noise(f, seed, sigma_range=(30.0, 30.0))
        assert out.sin_plane.max() > 1.0 or out.sin_plane.min() < -1.0


class TestOcclusions:
    def test_no_occlusion_coins_identity(self):
        cfg = SynthConfig(height=64, width=64, occl_prob=0.0)
        pts = PointSet(64, 64, [(20, 20), (40, 40)])
        f = encode_direction_field(pts)
        out = add_occlusions(f, pts, 5, cfg)
        np.testing.assert_array_equal(out.sin_plane, f.sin_plane)

    def test_disk_membership_exact(self):
        # replay the point's stream to recover the drawn radius, then
        # enumerate every pixel against the disk inequality
        cfg = SynthConfig(height=64, width=64, occl_prob=1.0, occl_perturb_prob=0.0)
        pts = PointSet(64, 64, [(31.3, 29.8)])
        f = DirectionField(np.ones((64, 64)), np.ones((64, 64)))
        seed = 123
        out = add_occlusions(f, pts, seed, cfg)
        s = Stream(derive(seed, 0))
        assert s.uniform() < 1.0
        r_max = max(cfg.occl_radius_min, 0.025 * np.hypot(64, 64))
        radius = cfg.occl_radius_min + (r_max - cfg.occl_radius_min) * np.sqrt(s.uniform())
        zeroed = out.sin_plane == 0.0
        for i in range(64):
            for j in range(64):
                inside = (i - 31.3) ** 2 + (j - 29.8) ** 2 <= radius * radius
                assert zeroed[i, j] == inside, (i, j)

    def test_radius_range_at_512(self):
        cfg = SynthConfig(occl_prob=1.0)
        r_max = 0.025 * np.hypot(512, 512)
        assert r_max == pytest.approx(18.1, abs=0.02)
        for seed in range(30):
            s = Stream(derive(seed, 0))
            s.uniform()  # occlusion coin
            radius = 5.0 + (r_max - 5.0) * np.sqrt(s.uniform())
            assert 5.0 <= radius <= r_max

    def test_points_and_target_untouched(self):
        scene = generate_scene(SMALL, 9)
        tgt = localization_target(scene.points)
        np.testing.assert_array_equal(scene.target.values, tgt.values)


class TestOcclusionNoiseMask:
    def test_fraction_zero_empty(self):
        assert not occlusion_noise_mask(32, 32, 0.0, 1).any()

    def test_fraction_one_full(self):
        assert occlusion_noise_mask(32, 32, 1.0, 1).all()

    def test_fraction_accuracy(self):
        mask = occlusion_noise_mask(512, 512, 0.3, 17)
        frac = mask.mean()
        assert 0.29 <= frac <= 0.31

    def test_masks_are_blobs_and_merge(self):
        counts = []
        for frac in (0.1, 0.9):
            mask = occlusion_noise_mask(256, 256, frac, 3)
            _, n_blobs = ndimage.label(mask)
            counts.append(n_blobs)
        assert counts[1] < counts[0]

    def test_apply_zeroes_both_channels(self):
        f = DirectionField(np.ones((16, 16)), np.ones((16, 16)))
        mask = np.zeros((16, 16), dtype=bool)
        mask[2:5, 3:7] = True
        out = apply_occlusion_mask(f, mask)
        assert np.all(out.sin_plane[mask] == 0.0)
        assert np.all(out.cos_plane[mask] == 0.0)
        assert np.all(out.sin_plane[~mask] == 1.0)

    def test_deterministic(self):
        a = occlusion_noise_mask(64, 64, 0.25, 5)
        b = occlusion_noise_mask(64, 64, 0.25, 5)
        np.testing.assert_array_equal(a, b)
