import math

import numpy as np
import pytest

from tatrec.errors import AssetNotFoundError
from tatrec.media import SHEPP_LOGAN_ELLIPSES, SQUARES, make_phantom, make_speed, speed_formula
from tatrec.pgm import write_pgm
from tatrec.wave import GridSpec


def _outside_window(grid):
    X, Y = grid.mesh()
    return (np.abs(X) >= 0.5) | (np.abs(Y) >= 0.5)


@pytest.mark.parametrize("kind", ["squares", "shepp_logan", "skull"])
def test_phantom_support_and_range(kind):
    g = GridSpec.for_object_window(64)
    f = make_phantom(kind, g)
    assert np.all(f[_outside_window(g)] == 0)
    assert f.min() >= 0 and f.max() <= 1
    assert f.max() > 0


def _inside_ellipse(px, py, a, b, cx, cy, rot):
    # independent membership test, written in the unrotated frame
    t = math.radians(rot)
    dx, dy = px - cx, py - cy
    u = dx * math.cos(t) + dy * math.sin(t)
    v = -dx * math.sin(t) + dy * math.cos(t)
    return (u / a) ** 2 + (v / b) ** 2 <= 1


def test_shepp_logan_centre_value_matches_ellipse_oracle():
    g = GridSpec.for_object_window(256)
    f = make_phantom("shepp_logan", g)
    i, j = g.nearest_index(0.0, 0.0)
    x, y = g.x[i] / 0.5, g.y[j] / 0.5
    total = sum(v for v, a, b, cx, cy, rot in SHEPP_LOGAN_ELLIPSES if _inside_ellipse(x, y, a, b, cx, cy, rot))
    # the brightest region (outer rim) sums to 1 in the canonical table
    assert f[i, j] == pytest.approx(total / 1.0)
    assert f[i, j] == pytest.approx(0.2)


def test_point_sampling_is_available():
    g = GridSpec.for_object_window(64)
    f = make_phantom("shepp_logan", g, supersample=1)
    assert set(np.round(np.unique(f), 6)) <= {0.0, 0.1, 0.2, 0.3, 0.4, 1.0}


def test_squares_mass_matches_area_oracle():
    g = GridSpec.for_object_window(128)
    f = make_phantom("squares", g)
    mass = f.sum()
    expected = sum((x1 - x0) * (y1 - y0) * v for x0, x1, y0, y1, v in SQUARES) / g.dx**2
    perimeter_cells = sum(2 * ((x1 - x0) + (y1 - y0)) / g.dx for x0, x1, y0, y1, _ in SQUARES)
    assert abs(mass - expected) <= perimeter_cells


def test_phantoms_deterministic():
    g = GridSpec.for_object_window(32)
    for kind in ("squares", "shepp_logan", "skull"):
        np.testing.assert_array_equal(make_phantom(kind, g), make_phantom(kind, g))


def test_missing_skull_asset(tmp_path, monkeypatch):
    monkeypatch.setenv("TATREC_ASSETS", str(tmp_path))
    with pytest.raises(AssetNotFoundError):
        make_phantom("skull", GridSpec.for_object_window(16))


def test_skull_asset_override(tmp_path, monkeypatch):
    img = np.zeros((4, 4))
    img[0, 0] = 1.0  # top-left pixel
    write_pgm(tmp_path / "skull.pgm", img)
    monkeypatch.setenv("TATREC_ASSETS", str(tmp_path))
    g = GridSpec.for_object_window(8)
    f = make_phantom("skull", g)
    X, Y = g.mesh()
    lit = f > 0
    # top-left of the image is the (-x, +y) corner of the window
    assert np.all(X[lit] < -0.25) and np.all(Y[lit] > 0.25)
    assert lit.sum() == 4


def test_speed_examples():
    assert speed_formula("nts", 0.0, 0.0) == pytest.approx(1.1)
    assert speed_formula("nts", 0.25, 0.0) == pytest.approx(1.3)
    assert speed_formula("ts2", 0.0, 0.0) == pytest.approx(1.25)
    assert speed_formula("ts2", 0.25, 0.25) == pytest.approx(1.25)
    assert speed_formula("ts1", 0.0, 0.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["constant", "nts", "ts1", "ts2"])
def test_speed_maps_bounded_and_one_outside(kind):
    g = GridSpec.for_object_window(64)
    c = make_speed(kind, g)
    assert c.min() >= 0.2 and c.max() <= 2.5
    outside = g.radius() >= math.sqrt(2) / 2
    assert np.all(c[outside] == 1.0)


def test_constant_speed_value():
    g = GridSpec.for_object_window(16)
    assert np.all(make_speed("constant", g) == 1.0)
    assert np.all(make_speed("constant", g, 1.5) == 1.5)


def test_unknown_kinds():
    g = GridSpec.for_object_window(16)
    with pytest.raises(ValueError):
        make_phantom("cat", g)
    with pytest.raises(ValueError):
        make_speed("fast", g)
