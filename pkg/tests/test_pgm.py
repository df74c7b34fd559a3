import json

import numpy as np
import pytest

from tatrec.media import make_phantom
from tatrec.pgm import emit_pgm, field_to_image, image_to_field, load_emitted, read_pgm, write_pgm
from tatrec.wave import GridSpec


def test_pgm_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, size=(5, 7)).astype(np.uint8)
    write_pgm(tmp_path / "a.pgm", img)
    back = read_pgm(tmp_path / "a.pgm")
    assert back.shape == (5, 7)
    np.testing.assert_array_equal(np.rint(back * 255), img)


def test_pgm_header_with_comment(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P5\n# made by hand\n2 1\n255\n\x00\xff")
    np.testing.assert_array_equal(read_pgm(tmp_path / "c.pgm"), [[0.0, 1.0]])


def test_rejects_other_formats(tmp_path):
    (tmp_path / "x.pgm").write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(ValueError):
        read_pgm(tmp_path / "x.pgm")


def test_orientation(rng):
    f = rng.standard_normal((3, 4))
    img = field_to_image(f)
    assert img.shape == (4, 3)
    assert img[0, 0] == f[0, -1]  # top-left pixel is (min x, max y)
    np.testing.assert_array_equal(image_to_field(img), f)


def test_emit_round_trip_within_quantization(tmp_path, rng):
    f = rng.standard_normal((16, 9)) * 3
    emit_pgm(f, tmp_path / "f.pgm")
    back = load_emitted(tmp_path / "f.pgm")
    assert np.abs(back - f).max() <= (f.max() - f.min()) / 255


def test_emit_constant_field(tmp_path):
    emit_pgm(np.full((4, 4), 2.0), tmp_path / "k.pgm")
    assert not read_pgm(tmp_path / "k.pgm").any()
    np.testing.assert_array_equal(load_emitted(tmp_path / "k.pgm"), 2.0)
    assert json.loads((tmp_path / "k.pgm.json").read_text())["constant"] is True


def test_emit_rejects_nan(tmp_path):
    with pytest.raises(ValueError):
        emit_pgm(np.array([[np.nan, 1.0]]), tmp_path / "n.pgm")


def test_shepp_logan_window_image_is_256(tmp_path):
    g = GridSpec.for_object_window(256)
    f = make_phantom("shepp_logan", g)
    win = g.window()
    emit_pgm(f[win], tmp_path / "s.pgm")
    assert read_pgm(tmp_path / "s.pgm").shape == (256, 256)
    assert f[win].sum() == pytest.approx(f.sum())
