import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image as PILImage

from scatface.errors import (EmptyImageError, ImageError, UnreadableImageError,
                             UnsupportedFormatError)
from scatface.imageio import Image, _resample_matrix, load_image, preprocess


def test_pgm_maxval_scaling(tmp_path):
    p = tmp_path / "tiny.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 255, 0]))
    img = load_image(p)
    np.testing.assert_array_equal(img.pixels, [[0.0, 1.0], [1.0, 0.0]])


def test_pgm_small_maxval(tmp_path):
    p = tmp_path / "m15.pgm"
    p.write_bytes(b"P5\n2 1\n15\n" + bytes([0, 15]))
    np.testing.assert_allclose(load_image(p).pixels, [[0.0, 1.0]])


def test_white_png(tmp_path):
    p = tmp_path / "white.png"
    PILImage.new("L", (5, 3), 255).save(p)
    img = load_image(p)
    assert (img.height, img.width) == (3, 5)
    assert np.all(img.pixels == 1.0)


def test_sixteen_bit_png(tmp_path):
    p = tmp_path / "deep.png"
    PILImage.fromarray(np.array([[0, 65535]], dtype=np.uint16)).save(p)
    np.testing.assert_allclose(load_image(p).pixels, [[0.0, 1.0]])


def test_color_uses_luminance_weights(tmp_path):
    p = tmp_path / "rgb.png"
    px = np.zeros((1, 3, 3), dtype=np.uint8)
    px[0, 0, 0] = px[0, 1, 1] = px[0, 2, 2] = 255
    PILImage.fromarray(px).save(p)
    np.testing.assert_allclose(load_image(p).pixels, [[0.299, 0.587, 0.114]], atol=1e-12)


def test_truncated_file(tmp_path):
    full = tmp_path / "full.png"
    PILImage.fromarray(np.random.default_rng(0).integers(0, 255, (40, 40), dtype=np.uint8)).save(full)
    cut = tmp_path / "cut.png"
    cut.write_bytes(full.read_bytes()[:60])
    with pytest.raises(UnreadableImageError) as err:
        load_image(cut)
    assert err.value.kind == "unreadable-file"


def test_missing_file(tmp_path):
    with pytest.raises(UnreadableImageError):
        load_image(tmp_path / "nope.png")


def test_unsupported_format(tmp_path):
    p = tmp_path / "notes.txt"
    p.write_text("hello, not an image")
    with pytest.raises(UnsupportedFormatError):
        load_image(p)
    bmp = tmp_path / "x.bmp"
    PILImage.new("L", (2, 2)).save(bmp)
    with pytest.raises(UnsupportedFormatError):
        load_image(bmp)


def test_error_kinds_distinct():
    kinds = {UnreadableImageError("").kind, UnsupportedFormatError("").kind,
             EmptyImageError("").kind}
    assert len(kinds) == 3
    assert all(issubclass(c, ImageError) for c in
               (UnreadableImageError, UnsupportedFormatError, EmptyImageError))


def test_identity_at_target_size():
    img = Image(np.random.default_rng(1).random((64, 64)))
    assert preprocess(img, 64) is img


def test_crop_then_resample():
    rng = np.random.default_rng(2)
    px = rng.random((96, 128))
    out = preprocess(Image(px), 64)
    assert (out.height, out.width) == (64, 64)
    # the 96x96 center crop starts at column 16; compare against resampling it directly
    m = _resample_matrix(96, 64)
    np.testing.assert_allclose(out.pixels, np.clip(m @ px[:, 16:112] @ m.T, 0, 1), atol=1e-15)


def test_upsampling_shape():
    out = preprocess(Image(np.random.default_rng(3).random((10, 12))), 32)
    assert out.pixels.shape == (32, 32)
    assert out.pixels.min() >= 0 and out.pixels.max() <= 1


@pytest.mark.parametrize("side", [0, -4, 48])
def test_bad_side(side):
    with pytest.raises(ValueError):
        preprocess(Image(np.zeros((8, 8))), side)


def test_resample_rows_are_stochastic():
    for n_in, n_out in [(96, 64), (10, 32), (7, 4), (64, 64)]:
        m = _resample_matrix(n_in, n_out)
        assert np.all(m >= 0)
        np.testing.assert_allclose(m.sum(axis=1), 1.0, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(h=st.integers(1, 80), w=st.integers(1, 80), c=st.floats(0, 1),
       side=st.sampled_from([1, 2, 8, 16, 64]))
def test_constant_preserved(h, w, c, side):
    out = preprocess(Image(np.full((h, w), c)), side)
    assert np.max(np.abs(out.pixels - c)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(px=arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(1, 40)),
                 elements=st.floats(0, 1)),
       side=st.sampled_from([4, 16, 32]))
def test_idempotent_and_in_range(px, side):
    once = preprocess(Image(px), side)
    twice = preprocess(once, side)
    np.testing.assert_array_equal(once.pixels, twice.pixels)
    assert once.pixels.min() >= 0 and once.pixels.max() <= 1


def test_image_is_read_only():
    img = Image(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1.0
