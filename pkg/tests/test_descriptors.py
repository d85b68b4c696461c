import math

import numpy as np
import pytest

from spdprivacy.descriptors import (
    KERNEL_DX,
    KERNEL_DXX,
    KERNEL_DY,
    KERNEL_DYY,
    DescriptorParams,
    RasterImage,
    covariance_descriptor,
    descriptor_radius_bound,
    extract_features,
    load_pnm,
    save_pnm,
)
from spdprivacy.errors import DomainError
from spdprivacy.geometry import identity, le_distance, logm_stack


def gray_image(rng, h=12, w=12):
    return RasterImage(rng.integers(0, 256, size=(h, w, 1)) / 255.0)


def rgb_image(rng, h=12, w=12):
    return RasterImage(rng.integers(0, 256, size=(h, w, 3)) / 255.0)


def conv_replicate_reference(img, kernel):
    """Naive direct convolution with replicate padding, the hand oracle."""
    h, w = img.shape
    kh, kw = kernel.shape
    rh, rw = kh // 2, kw // 2
    out = np.zeros_like(img)
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for a in range(kh):
                for b in range(kw):
                    # true convolution flips the kernel
                    ii = min(max(i + rh - a, 0), h - 1)
                    jj = min(max(j + rw - b, 0), w - 1)
                    acc += kernel[a, b] * img[ii, jj]
            out[i, j] = acc
    return out


class TestRasterImage:
    def test_channel_and_range_validation(self):
        with pytest.raises(DomainError):
            RasterImage(np.zeros((3, 3, 2)))
        with pytest.raises(DomainError):
            RasterImage(np.full((2, 2, 1), 1.5))
        with pytest.raises(DomainError):
            RasterImage(np.full((2, 2, 1), -0.1))

    def test_zero_size_rejected(self):
        with pytest.raises(DomainError):
            RasterImage(np.zeros((0, 3, 1)))

    def test_two_dim_input_promoted_to_gray(self):
        img = RasterImage(np.zeros((4, 5)))
        assert img.channels == 1
        assert img.height == 4 and img.width == 5


class TestExtractFeatures:
    def test_constant_image_has_zero_derivatives(self):
        img = RasterImage(np.full((8, 8, 1), 0.5))
        field = extract_features(img)
        # [x, y, I, |Ix|, |Iy|, |Ixx|, |Iyy|, mag, orient]
        assert np.all(field.values[:, :, 3:] == 0.0)
        assert np.all(field.values[:, :, 2] == 0.5)

    def test_feature_dims(self):
        rng = np.random.default_rng(0)
        assert extract_features(gray_image(rng)).feat_dim == 9
        assert extract_features(rgb_image(rng)).feat_dim == 11

    def test_grid_coordinates_normalised(self):
        img = RasterImage(np.zeros((3, 5, 1)))
        field = extract_features(img)
        assert field.values[0, 0, 0] == 0.0 and field.values[0, 0, 1] == 0.0
        assert field.values[2, 4, 0] == 1.0 and field.values[2, 4, 1] == 1.0
        single = extract_features(RasterImage(np.zeros((1, 1, 1))))
        assert single.values[0, 0, 0] == 0.0 and single.values[0, 0, 1] == 0.0

    def test_horizontal_step_edge(self):
        # step in the vertical direction: rows 0-3 dark, rows 4-7 bright
        img_arr = np.zeros((8, 6, 1))
        img_arr[4:, :, :] = 1.0
        field = extract_features(RasterImage(img_arr))
        d_y = field.values[:, :, 4]
        assert np.all(d_y[:2, :] == 0.0)
        assert np.all(d_y[6:, :] == 0.0)
        assert np.all(d_y[3:5, :] > 0.0)
        assert np.all(field.values[:, :, 3] <= 1.0)

    def test_against_naive_convolution(self):
        rng = np.random.default_rng(7)
        img = gray_image(rng, 7, 9)
        lum = img.intensities[:, :, 0]
        field = extract_features(img)
        for col, kernel in ((3, KERNEL_DX), (4, KERNEL_DY), (5, KERNEL_DXX), (6, KERNEL_DYY)):
            expected = np.abs(conv_replicate_reference(lum, kernel))
            assert np.max(np.abs(field.values[:, :, col] - expected)) <= 1e-14

    def test_rgb_uses_luminance_for_derivatives(self):
        rng = np.random.default_rng(8)
        img = rgb_image(rng, 6, 6)
        lum = img.intensities @ np.array([0.299, 0.587, 0.114])
        field = extract_features(img)
        expected = np.abs(conv_replicate_reference(lum, KERNEL_DX))
        assert np.max(np.abs(field.values[:, :, 5] - expected)) <= 1e-14

    def test_orientation_conventions(self):
        # vertical edge: |Iy| = 0 and |Ix| > 0 at the jump, orientation pi/2
        img_arr = np.zeros((6, 8, 1))
        img_arr[:, 4:, :] = 1.0
        field = extract_features(RasterImage(img_arr))
        orient = field.values[:, :, 8]
        assert np.all(orient[:, 3:5] == math.pi / 2)
        assert np.all(orient[:, 0] == 0.0)

    def test_component_bounds(self):
        rng = np.random.default_rng(9)
        for img in (gray_image(rng), rgb_image(rng)):
            field = extract_features(img)
            c = img.channels
            flat = field.values.reshape(-1, field.feat_dim)
            assert flat.min() >= 0.0
            assert np.all(flat[:, : 2 + c + 4] <= 1.0 + 1e-12)
            assert np.all(flat[:, 2 + c + 4] <= math.sqrt(2.0) + 1e-12)
            assert np.all(flat[:, 2 + c + 5] <= math.pi / 2 + 1e-12)


class TestCovarianceDescriptor:
    def test_single_constant_pixel_gives_eta_identity(self):
        img = RasterImage(np.full((1, 1, 1), 0.3))
        eta = 1e-6
        desc = covariance_descriptor(img, DescriptorParams(eta=eta))
        assert np.allclose(desc.entries, eta * np.eye(9), atol=1e-18)

    def test_spectral_cap_gray(self):
        rng = np.random.default_rng(10)
        eta = 1e-6
        for _ in range(25):
            desc = covariance_descriptor(gray_image(rng), DescriptorParams(eta=eta))
            assert np.linalg.eigvalsh(desc.entries)[-1] <= 12.0 + eta + 1e-9

    def test_spectral_cap_rgb(self):
        rng = np.random.default_rng(11)
        eta = 1e-6
        for _ in range(25):
            desc = covariance_descriptor(rgb_image(rng), DescriptorParams(eta=eta))
            assert np.linalg.eigvalsh(desc.entries)[-1] <= 14.0 + eta + 1e-9

    def test_eigenvalue_floor(self):
        rng = np.random.default_rng(12)
        eta = 1e-6
        for make in (gray_image, rgb_image):
            desc = covariance_descriptor(make(rng), DescriptorParams(eta=eta))
            assert np.linalg.eigvalsh(desc.entries)[0] >= eta - 1e-12

    def test_within_radius_bound(self):
        rng = np.random.default_rng(13)
        eta = 1e-6
        for make, c in ((gray_image, 1), (rgb_image, 3)):
            bound = descriptor_radius_bound(c, eta)
            for _ in range(10):
                desc = covariance_descriptor(
                    make(rng, 28, 28), DescriptorParams(eta=eta)
                )
                assert le_distance(desc, identity(desc.dim)) <= bound

    def test_intensity_shift_leaves_descriptor_unchanged(self):
        rng = np.random.default_rng(14)
        base = rng.integers(0, 128, size=(10, 10, 1)) / 255.0  # <= 0.498
        img_lo = RasterImage(base)
        img_hi = RasterImage(base + 0.4)
        d_lo = covariance_descriptor(img_lo).entries
        d_hi = covariance_descriptor(img_hi).entries
        assert np.linalg.norm(d_lo - d_hi) <= 1e-10


class TestRadiusBound:
    def test_gray_small_eta(self):
        got = descriptor_radius_bound(1, 1e-6)
        assert got == pytest.approx(3.0 * abs(math.log(1e-6)), rel=1e-15)
        assert got == pytest.approx(41.44653167389282, rel=1e-12)

    def test_eta_one_uses_upper_branch(self):
        assert descriptor_radius_bound(1, 1.0) == pytest.approx(
            3.0 * math.log(13.0), rel=1e-15
        )
        assert descriptor_radius_bound(3, 1.0) == pytest.approx(
            math.sqrt(11.0) * math.log(15.0), rel=1e-15
        )

    def test_validation(self):
        with pytest.raises(DomainError):
            descriptor_radius_bound(2, 1e-6)
        with pytest.raises(DomainError):
            descriptor_radius_bound(1, 0.0)


class TestPnmIO:
    def test_gray_roundtrip(self, tmp_path):
        rng = np.random.default_rng(15)
        img = gray_image(rng, 9, 7)
        path = tmp_path / "img.pgm"
        save_pnm(img, path)
        back = load_pnm(path)
        assert back.channels == 1
        assert np.array_equal(back.intensities, img.intensities)

    def test_rgb_roundtrip(self, tmp_path):
        rng = np.random.default_rng(16)
        img = rgb_image(rng, 5, 11)
        path = tmp_path / "img.ppm"
        save_pnm(img, path)
        back = load_pnm(path)
        assert back.channels == 3
        assert np.array_equal(back.intensities, img.intensities)

    def test_header_comments_skipped(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# a comment\n2 2\n# another\n255\n" + bytes([0, 64, 128, 255]))
        img = load_pnm(path)
        assert img.width == 2 and img.height == 2
        assert img.intensities[1, 1, 0] == 1.0

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "a.pbm"
        path.write_bytes(b"P4\n2 2\n\x00\x00")
        with pytest.raises(DomainError, match="magic"):
            load_pnm(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n4 4\n255\n\x00\x01")
        with pytest.raises(DomainError, match="truncated"):
            load_pnm(path)

    def test_wide_maxval_rejected(self, tmp_path):
        path = tmp_path / "w.pgm"
        path.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
        with pytest.raises(DomainError, match="8-bit"):
            load_pnm(path)

    def test_descriptor_from_file(self, tmp_path):
        rng = np.random.default_rng(17)
        img = gray_image(rng, 8, 8)
        path = tmp_path / "d.pgm"
        save_pnm(img, path)
        desc = covariance_descriptor(load_pnm(path))
        assert desc.dim == 9
        assert np.linalg.norm(logm_stack(desc.entries)) <= descriptor_radius_bound(1, 1e-6)
