import gzip
import struct

import numpy as np
import pytest

from gnconvert import gaussian_blobs, load_csv, load_idx_images, load_idx_labels, save_csv


class TestBlobs:
    def test_shapes_and_balance(self):
        X, y = gaussian_blobs(n_samples=512, seed=0)
        assert X.shape == (512, 2)
        assert y.shape == (512,)
        assert np.bincount(y).tolist() == [256, 256]

    def test_seeded_determinism(self):
        a = gaussian_blobs(n_samples=64, seed=3)
        b = gaussian_blobs(n_samples=64, seed=3)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        c = gaussian_blobs(n_samples=64, seed=4)
        assert not np.array_equal(a[0], c[0])

    def test_clusters_sit_near_centers(self):
        X, y = gaussian_blobs(n_samples=2000, std=0.5, seed=1)
        for label, center in enumerate([(-2.0, -1.0), (2.0, 1.0)]):
            np.testing.assert_allclose(X[y == label].mean(axis=0), center, atol=0.1)

    def test_needs_enough_samples(self):
        with pytest.raises(ValueError):
            gaussian_blobs(n_samples=1)


class TestCsv:
    def test_round_trip(self, tmp_path):
        X = np.random.default_rng(2).normal(size=(16, 3))
        y = np.random.default_rng(3).integers(0, 4, size=16)
        path = tmp_path / "d.csv"
        save_csv(path, X, y)
        X2, y2 = load_csv(path)
        assert np.array_equal(X, X2)
        assert np.array_equal(y, y2)

    def test_label_only_rows_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("0\n1\n")
        with pytest.raises(ValueError):
            load_csv(path)

    def test_fractional_labels_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("0.5,1.0,2.0\n")
        with pytest.raises(ValueError, match="label"):
            load_csv(path)


def write_idx_images(path, images: np.ndarray, compress=False):
    n, rows, cols = images.shape
    payload = struct.pack(">IIII", 0x00000803, n, rows, cols) + images.astype(np.uint8).tobytes()
    opener = gzip.open if compress else open
    with opener(path, "wb") as fh:
        fh.write(payload)


def write_idx_labels(path, labels: np.ndarray, magic=0x00000801):
    payload = struct.pack(">II", magic, len(labels)) + labels.astype(np.uint8).tobytes()
    with open(path, "wb") as fh:
        fh.write(payload)


class TestIdx:
    def test_image_round_trip(self, tmp_path):
        images = np.arange(2 * 3 * 3, dtype=np.uint8).reshape(2, 3, 3) * 10
        path = tmp_path / "img.idx"
        write_idx_images(path, images)
        flat = load_idx_images(path)
        assert flat.shape == (2, 9)
        np.testing.assert_allclose(flat, images.reshape(2, 9) / 255.0)
        raw = load_idx_images(path, flatten=False, normalize=False)
        assert np.array_equal(raw, images.astype(np.float64))

    def test_gzip_transparent(self, tmp_path):
        images = np.full((1, 2, 2), 255, dtype=np.uint8)
        path = tmp_path / "img.idx.gz"
        write_idx_images(path, images, compress=True)
        assert load_idx_images(path).max() == 1.0

    def test_label_round_trip(self, tmp_path):
        labels = np.array([0, 3, 9, 1], dtype=np.uint8)
        path = tmp_path / "lab.idx"
        write_idx_labels(path, labels)
        assert np.array_equal(load_idx_labels(path), labels)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "lab.idx"
        write_idx_labels(path, np.array([1], dtype=np.uint8), magic=0x00000805)
        with pytest.raises(ValueError, match="magic"):
            load_idx_labels(path)

    def test_truncated_file_rejected(self, tmp_path):
        path = tmp_path / "img.idx"
        with open(path, "wb") as fh:
            fh.write(struct.pack(">IIII", 0x00000803, 5, 28, 28) + b"\x00" * 10)
        with pytest.raises(ValueError, match="truncated"):
            load_idx_images(path)
