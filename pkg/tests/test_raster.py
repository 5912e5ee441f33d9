"""Unit tests for escape-depth rendering, counting, and image output."""

import os

import numpy as np
import pytest

from mobpow.model import ModelParams
from mobpow.raster import (
    DepthGrid,
    RasterError,
    Window,
    count_components,
    expected_component_count,
    grayscale_image,
    level_arrays,
    render_depth_grid,
    select_backend,
    write_image,
    write_pgm,
)
from mobpow import _kernels
from mobpow.sequences import GeneratorRule, RotationSequence


def small_params():
    return ModelParams(1.5, RotationSequence.from_fractions(["1/3", "1/2"]))


def test_window_validation_and_axes():
    with pytest.raises(RasterError):
        Window(1, 0, 0, 1, 4, 4)
    with pytest.raises(RasterError):
        Window(0, 1, 0, 1, 0, 4)
    w = Window(0, 1, -1, 1, 4, 2)
    xs, ys = w.pixel_axes()
    assert np.allclose(xs, [0.125, 0.375, 0.625, 0.875])
    assert np.allclose(ys, [0.5, -0.5])  # top row first
    sq = Window.square(half_side=2, resolution=8)
    assert sq.x_min == -2 and sq.y_max == 2 and sq.width == 8


def test_window_outside_disk_all_zero():
    grid = render_depth_grid(small_params(), Window(2, 3, 2, 3, 16, 16), 2)
    assert (grid.depths == 0).all()
    assert count_components(grid, 0) == 0


def test_counts_small_instance():
    w = Window(-0.2, 1.05, -0.65, 0.65, 512, 512)
    grid = render_depth_grid(small_params(), w, 2)
    assert [count_components(grid, n) for n in range(3)] == [1, 3, 6]
    assert [expected_component_count(small_params(), n)
            for n in range(3)] == [1, 3, 6]


def test_real_axis_mirror_symmetry():
    w = Window(-1.05, 1.05, -1.05, 1.05, 257, 256)  # symmetric y range
    grid = render_depth_grid(small_params(), w, 2)
    assert np.array_equal(grid.depths, grid.depths[::-1, :])


def test_nesting_masks():
    w = Window(-0.2, 1.05, -0.65, 0.65, 256, 256)
    grid = render_depth_grid(small_params(), w, 2)
    m0, m1, m2 = (grid.level_mask(n) for n in range(3))
    assert (m1 <= m0).all() and (m2 <= m1).all()
    assert grid.survived_value == 3
    with pytest.raises(RasterError):
        grid.level_mask(3)


def test_backend_parity_bit_exact():
    if not _kernels.numba_available():
        pytest.skip("numba not installed")
    w = Window(-0.2, 1.05, -0.65, 0.65, 128, 128)
    a = render_depth_grid(small_params(), w, 2, backend="numba")
    b = render_depth_grid(small_params(), w, 2, backend="numpy")
    assert np.array_equal(a.depths, b.depths)
    assert a.backend == "numba" and b.backend == "numpy"


def test_force_numpy_env_flag(monkeypatch):
    monkeypatch.setenv("MOBPOW_FORCE_NUMPY", "1")
    assert select_backend() == "numpy"
    with pytest.raises(RasterError):
        select_backend("numba")
    monkeypatch.setenv("MOBPOW_FORCE_NUMPY", "0")
    # "0" means not forced; numba availability decides
    assert select_backend() in ("numba", "numpy")


def test_level_arrays_phantom_final_stage():
    p = small_params()
    tv, qv, cpv = level_arrays(p, 2)
    # final stage only tests the disk condition; it reuses the last t and
    # a trivial power
    assert tv[2] == tv[1] and qv[2] == 1.0
    assert qv[0] == 3.0 and qv[1] == 2.0
    with pytest.raises(RasterError):
        level_arrays(p, 5)


def test_level_arrays_underflow_limit_form():
    rule = GeneratorRule(kind="tower", q0=3)
    p = ModelParams(2, RotationSequence(rule=rule))
    tv, qv, cpv = level_arrays(p, 8)
    assert tv[0] > 0
    assert (tv[6:] == 0).all()  # below float64 resolution: limit form
    assert np.all(cpv[:7] == 2.0)  # C*p stays exactly C for p = 1


def test_render_rejects_negative_depth():
    with pytest.raises(RasterError):
        render_depth_grid(small_params(), Window.square(resolution=4), -1)


def test_grayscale_palette_bands():
    depths = np.array([[0, 1], [2, 3]], dtype=np.uint16)
    grid = DepthGrid(depths=depths, window=Window(0, 1, 0, 1, 2, 2),
                     max_depth=2, backend="numpy")
    img = grayscale_image(grid)
    assert img[0, 0] == 0          # outside everything: black
    assert img[1, 1] == 60         # survived: dark interior
    assert 90 <= img[0, 1] < img[1, 0] <= 230  # escape bands lighten


def test_pgm_format(tmp_path):
    img = np.arange(6, dtype=np.uint8).reshape(2, 3)
    path = tmp_path / "out.pgm"
    write_pgm(img, path)
    data = path.read_bytes()
    assert data == b"P5 3 2 255\n\x00\x01\x02\x03\x04\x05"
    with pytest.raises(RasterError):
        write_pgm(img.astype(np.uint16), path)


def test_write_image_end_to_end(tmp_path):
    w = Window(-0.2, 1.05, -0.65, 0.65, 32, 32)
    grid = render_depth_grid(small_params(), w, 2)
    path = tmp_path / "k.pgm"
    write_image(grid, path)
    assert path.read_bytes().startswith(b"P5 32 32 255\n")
    assert os.path.getsize(path) == len(b"P5 32 32 255\n") + 32 * 32


def test_determinism_same_inputs():
    w = Window(-0.2, 1.05, -0.65, 0.65, 64, 64)
    a = render_depth_grid(small_params(), w, 2)
    b = render_depth_grid(small_params(), w, 2)
    assert np.array_equal(a.depths, b.depths)
