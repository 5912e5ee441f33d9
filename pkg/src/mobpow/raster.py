"""Escape-depth rasters of the nested compact sets, plus component counts.

Rendering happens in float64: each pixel center is pushed through the level
maps in log-polar form until the composition leaves the closed unit disk or
the depth budget runs out.  Depth d means "escaped after level d was
applied"; pixels that survive all levels get max_depth + 1, so the level-n
set is the mask {depth > n}.  Depth 0 covers both points outside the closed
disk and points whose level-0 image already escapes.

Two backends run the same recurrence: a numba row-parallel kernel and a
vectorized numpy fallback.  Selection: explicit ``backend=`` argument, else
the MOBPOW_FORCE_NUMPY environment flag, else numba when importable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import ModelParams

# closed-disk slack on log|z| for float64 escape tests
DEFAULT_EPS = 1e-12


class RasterError(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    """Axis-aligned view rectangle with a pixel resolution."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise RasterError("window must have positive extent")
        if self.width < 1 or self.height < 1:
            raise RasterError("resolution must be positive")

    @classmethod
    def square(cls, half_side=1.05, resolution=512, center=(0.0, 0.0)):
        cx, cy = center
        return cls(cx - half_side, cx + half_side, cy - half_side,
                   cy + half_side, resolution, resolution)

    def pixel_axes(self):
        """Pixel-center coordinates: xs left-to-right, ys top-to-bottom."""
        dx = (self.x_max - self.x_min) / self.width
        dy = (self.y_max - self.y_min) / self.height
        xs = self.x_min + dx * (np.arange(self.width) + 0.5)
        ys = self.y_max - dy * (np.arange(self.height) + 0.5)
        return xs, ys


@dataclass
class DepthGrid:
    """uint16 escape depths, row 0 at the top of the window.

    Depth k means the stage-k disk test failed (k = 0 also covers points
    outside the closed unit disk); max_depth + 1 means every rendered
    stage passed.  The level-n compact set, whose components are counted
    by the product of the first n denominators, is the mask {depth > n}.
    """

    depths: np.ndarray
    window: Window
    max_depth: int
    backend: str

    @property
    def survived_value(self):
        return self.max_depth + 1

    def level_mask(self, n):
        """Boolean mask of the level-n compact set (depth > n)."""
        if not 0 <= n <= self.max_depth:
            raise RasterError("level %d outside rendered range" % n)
        return self.depths > n


def select_backend(backend=None):
    if backend is None:
        return "numba" if _kernels.numba_available() else "numpy"
    if backend not in ("numba", "numpy"):
        raise RasterError("backend must be 'numba' or 'numpy'")
    if backend == "numba" and not _kernels.numba_available():
        raise RasterError("numba backend requested but not available")
    return backend


def level_arrays(params: ModelParams, max_depth):
    """Per-stage float64 (t, q, C*p) arrays for the kernels.

    Stage k needs t_k for the disk test and q_k for the power; the deepest
    stage only tests, so when max_depth equals the sequence length the
    missing final t falls back to the last available one (any value in
    (0, 1) yields the same component combinatorics, since every such
    Moebius preimage is a disk strictly right of 0 containing 1).

    Stages whose t is below float64 resolution get t = 0, which switches
    the kernels to the limit form driven by cp = C*p (exactly q*t).
    """
    n_stages = max_depth + 1
    tv = np.empty(n_stages)
    qv = np.ones(n_stages)
    cpv = np.empty(n_stages)
    C = float(params.C)
    for k in range(n_stages):
        if params.rotations.available(k):
            rot = params.rotation(k)
            tv[k] = float(params.t(k))
            qv[k] = float(rot.q.as_mpf())
            cpv[k] = C * rot.p
            if not np.isfinite(qv[k]):
                tv[k] = 0.0  # limit form; qv unused there
                qv[k] = 0.0
        elif k == max_depth and k > 0:
            tv[k] = tv[k - 1]
            qv[k] = 1.0
            cpv[k] = cpv[k - 1]
        else:
            raise RasterError("max_depth %d beyond available sequence"
                              % max_depth)
    return tv, qv, cpv


def render_depth_grid(params: ModelParams, window: Window, max_depth,
                      backend=None, eps=DEFAULT_EPS) -> DepthGrid:
    """Escape depths for every pixel center of the window."""
    if max_depth < 0:
        raise RasterError("max_depth must be >= 0")
    backend = select_backend(backend)
    tv, qv, cpv = level_arrays(params, max_depth)
    xs, ys = window.pixel_axes()
    if backend == "numba":
        depths = _kernels.depth_grid_rows(xs, ys, tv, qv, cpv, max_depth,
                                          eps, backend)
    else:
        X, Y = np.meshgrid(xs, ys)
        depths = _kernels.depth_grid_numpy(X, Y, tv, qv, cpv, max_depth, eps)
    return DepthGrid(depths=depths, window=window, max_depth=max_depth,
                     backend=backend)


_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def count_components(grid: DepthGrid, n):
    """Connected components (4-connectivity) of the level-n mask."""
    from scipy import ndimage

    _, count = ndimage.label(grid.level_mask(n), structure=_FOUR_CONNECTED)
    return count


def expected_component_count(params: ModelParams, n):
    """Product of the denominators through level n-1 (1 at level 0)."""
    out = 1
    for k in range(n):
        out *= params.rotation(k).q.as_int()
    return out


def grayscale_image(grid: DepthGrid) -> np.ndarray:
    """uint8 rendering: black outside, lighter bands per escape depth,
    dark-gray survivors."""
    img = np.zeros(grid.depths.shape, dtype=np.uint8)
    md = grid.max_depth
    for d in range(1, md + 1):
        shade = 90 + int(round(140 * (d - 1) / max(md - 1, 1)))
        img[grid.depths == d] = np.uint8(shade)
    img[grid.depths == grid.survived_value] = np.uint8(60)
    return img


def write_pgm(img: np.ndarray, path):
    """Binary (P5) portable graymap."""
    if img.dtype != np.uint8 or img.ndim != 2:
        raise RasterError("expected a 2-D uint8 image")
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(b"P5 %d %d 255\n" % (w, h))
        f.write(img.tobytes())


def write_image(grid: DepthGrid, path):
    write_pgm(grayscale_image(grid), path)
