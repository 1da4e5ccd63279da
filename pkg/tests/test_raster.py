import numpy as np
import pytest
from PIL import Image

from copula_cd.raster import (
    BiTemporalPair,
    ChangeMap,
    RasterImage,
    RasterError,
    load_change_map,
    load_raster,
    save_change_map,
    save_raster,
    to_intensity,
)


def test_load_png_all_zero(tmp_path):
    path = tmp_path / "z.png"
    Image.fromarray(np.zeros((2, 2), dtype=np.uint8)).save(path)
    img = load_raster(path)
    assert (img.width, img.height, img.bands) == (2, 2, 1)
    assert np.all(img.data == 0)


def test_missing_file():
    with pytest.raises(RasterError, match="no such file"):
        load_raster("/nonexistent/thing.png")


def test_16bit_rejected(tmp_path):
    path = tmp_path / "deep.png"
    Image.fromarray(np.zeros((4, 4), dtype=np.uint16)).save(path)
    with pytest.raises(RasterError, match="bit depth"):
        load_raster(path)


def test_text_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    img = RasterImage.from_array(rng.integers(0, 256, (7, 5, 3), dtype=np.uint8))
    path = tmp_path / "m.txt"
    save_raster(img, path)
    back = load_raster(path)
    assert back.bands == 3
    np.testing.assert_array_equal(back.data, img.data)


def test_text_matrix_rejects_out_of_range(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 1 1\n12 999\n")
    with pytest.raises(RasterError, match="bit depth"):
        load_raster(path)


def test_png_round_trip_single_band(tmp_path):
    rng = np.random.default_rng(1)
    img = RasterImage.from_array(rng.integers(0, 256, (13, 9), dtype=np.uint8))
    path = tmp_path / "g.png"
    save_raster(img, path)
    np.testing.assert_array_equal(load_raster(path).data, img.data)


def test_to_intensity_single_band_identity():
    img = RasterImage.from_array(np.arange(12, dtype=np.uint8).reshape(3, 4))
    assert to_intensity(img) is img


def test_to_intensity_floor_of_band_mean():
    px = np.array([[[10, 20, 31]]], dtype=np.uint8)
    out = to_intensity(RasterImage.from_array(px))
    assert out.data[0, 0, 0] == 20  # floor(61/3)


def test_to_intensity_constant_255():
    img = RasterImage.from_array(np.full((4, 4, 3), 255, dtype=np.uint8))
    assert np.all(to_intensity(img).data == 255)


def test_to_intensity_range_property():
    rng = np.random.default_rng(2)
    img = RasterImage.from_array(rng.integers(0, 256, (20, 20, 4), dtype=np.uint8))
    out = to_intensity(img)
    assert out.data.min() >= 0 and out.data.max() <= 255
    # floor(mean) stays within the per-pixel band range
    assert np.all(out.data[:, :, 0].astype(int) <= img.data.max(axis=2).astype(int))
    assert np.all(out.data[:, :, 0].astype(int) >= img.data.min(axis=2).astype(int))


@pytest.mark.parametrize("fill", [0, 1])
def test_change_map_constant_save(tmp_path, fill):
    cmap = ChangeMap(width=3, height=2, labels=np.full((2, 3), fill, dtype=np.uint8))
    path = tmp_path / "c.png"
    save_change_map(cmap, path)
    raw = np.asarray(Image.open(path))
    assert np.all(raw == fill * 255)


def test_change_map_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    labels = (rng.uniform(size=(11, 17)) < 0.4).astype(np.uint8)
    cmap = ChangeMap(width=17, height=11, labels=labels)
    path = tmp_path / "c.png"
    save_change_map(cmap, path)
    np.testing.assert_array_equal(load_change_map(path).labels, labels)


def test_change_map_rejects_nonbinary():
    with pytest.raises(RasterError, match="0/1"):
        ChangeMap(width=2, height=1, labels=np.array([[0, 7]], dtype=np.uint8))


def test_pair_dimension_check():
    a = RasterImage.from_array(np.zeros((4, 4), dtype=np.uint8))
    b = RasterImage.from_array(np.zeros((4, 5), dtype=np.uint8))
    with pytest.raises(RasterError, match="differ"):
        BiTemporalPair(pre=a, post=b)


def test_pair_allows_band_mismatch():
    a = RasterImage.from_array(np.zeros((4, 4), dtype=np.uint8))
    b = RasterImage.from_array(np.zeros((4, 4, 3), dtype=np.uint8))
    pair = BiTemporalPair(pre=a, post=b)
    assert pair.width == 4 and pair.height == 4
