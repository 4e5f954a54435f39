"""Pixel grids over complex rectangles and the raster primitives built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

FOUR = ndimage.generate_binary_structure(2, 1)
EIGHT = ndimage.generate_binary_structure(2, 2)


@dataclass
class RasterGrid:
    top_left: complex
    bottom_right: complex
    width: int
    height: int
    labels: np.ndarray = None
    legend: dict = field(default_factory=dict)

    def __post_init__(self):
        self.top_left = complex(self.top_left)
        self.bottom_right = complex(self.bottom_right)
        if not (self.top_left.real < self.bottom_right.real and self.top_left.imag > self.bottom_right.imag):
            raise ValueError("top_left must be up and to the left of bottom_right")
        if self.width < 1 or self.height < 1:
            raise ValueError("grid needs at least one pixel")
        if self.labels is None:
            self.labels = np.zeros((self.height, self.width), dtype=np.int16)

    @property
    def dx(self) -> float:
        return (self.bottom_right.real - self.top_left.real) / self.width

    @property
    def dy(self) -> float:
        return (self.top_left.imag - self.bottom_right.imag) / self.height

    @property
    def shape(self):
        return (self.height, self.width)

    def xs(self):
        return self.top_left.real + (np.arange(self.width) + 0.5) * self.dx

    def ys(self):
        return self.top_left.imag - (np.arange(self.height) + 0.5) * self.dy

    def centers(self, rows=slice(None), cols=slice(None)):
        return self.xs()[cols][None, :] + 1j * self.ys()[rows][:, None]

    def center(self, i, j) -> complex:
        return complex(self.top_left.real + (j + 0.5) * self.dx, self.top_left.imag - (i + 0.5) * self.dy)

    def pixel_of(self, z):
        z = np.asarray(z, dtype=complex)
        j = np.floor((z.real - self.top_left.real) / self.dx).astype(int)
        i = np.floor((self.top_left.imag - z.imag) / self.dy).astype(int)
        return i, j

    def contains(self, z):
        i, j = self.pixel_of(z)
        return (i >= 0) & (i < self.height) & (j >= 0) & (j < self.width)

    def blank(self, **kw):
        return replace(self, labels=np.zeros(self.shape, dtype=np.int16), legend=dict(kw.get("legend", {})))

    def window_token(self) -> str:
        return format_window(self.top_left, self.bottom_right)


def parse_window(token: str):
    """``re,im:re,im`` (top-left : bottom-right) -> (complex, complex)."""
    a, _, b = token.partition(":")
    if not b:
        raise ValueError(f"bad window {token!r}")
    corners = []
    for part in (a, b):
        re_, im_ = part.split(",")
        corners.append(complex(float(re_), float(im_)))
    return corners[0], corners[1]


def format_window(tl: complex, br: complex) -> str:
    return f"{tl.real!r},{tl.imag!r}:{br.real!r},{br.imag!r}"


def parse_resolution(token: str):
    w, _, h = token.lower().partition("x")
    return int(w), int(h)


# ---------------------------------------------------------------------------
# hulls and components


def hull_mask(mask: np.ndarray) -> np.ndarray:
    """Foreground plus every background pixel not 4-connected to the frame."""
    mask = np.asarray(mask, bool)
    bg = ~mask
    lab, _ = ndimage.label(bg, structure=FOUR)
    border = np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]))
    border = border[border > 0]
    outside = np.isin(lab, border)
    return ~outside


def topological_hull(grid: RasterGrid, foreground_code: int) -> RasterGrid:
    """T(V): the foreground together with the bounded components of its complement."""
    h = hull_mask(grid.labels == foreground_code)
    labels = grid.labels.copy()
    labels[h] = foreground_code
    return replace(grid, labels=labels, legend=dict(grid.legend))


def touches_frame(mask: np.ndarray) -> bool:
    return bool(mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any())


def boundary_pixels(mask: np.ndarray) -> np.ndarray:
    """Foreground pixels with a 4-neighbour outside the foreground (frame excluded)."""
    m = np.asarray(mask, bool)
    inner = ndimage.binary_erosion(m, structure=FOUR, border_value=1)
    return m & ~inner


def component_at(mask: np.ndarray, ij, structure=EIGHT) -> np.ndarray:
    lab, _ = ndimage.label(mask, structure=structure)
    v = lab[ij]
    if v == 0:
        return np.zeros_like(mask, bool)
    return lab == v


# ---------------------------------------------------------------------------
# polylines


def winding_grid(poly, grid: RasterGrid) -> np.ndarray:
    """Winding number of the closed polyline about every pixel centre.

    Counts signed crossings of the horizontal ray to the right of each centre;
    exact for the polygon, including parts far outside the window.
    """
    p = np.asarray(poly, dtype=complex)
    if not np.all(np.isfinite(p)):
        raise ValueError("polyline has non-finite vertices")
    q = np.roll(p, -1)
    x0, y0, x1, y1 = p.real, p.imag, q.real, q.imag
    ytop, dy = grid.top_left.imag, grid.dy
    # row r has centre y_r = ytop - (r + 0.5) dy; count rows with lo <= y_r < hi
    lo = np.minimum(y0, y1)
    hi = np.maximum(y0, y1)
    # y_r >= lo  <=>  r <= (ytop - lo)/dy - 0.5 ; y_r < hi <=> r > (ytop - hi)/dy - 0.5
    r_max = np.floor((ytop - lo) / dy - 0.5)
    r_min = np.floor((ytop - hi) / dy - 0.5) + 1
    r_min = np.clip(r_min, 0, grid.height)
    r_max = np.clip(r_max, -1, grid.height - 1)
    counts = np.maximum(r_max - r_min + 1, 0).astype(np.int64)
    counts[y0 == y1] = 0
    total = int(counts.sum())
    diff = np.zeros((grid.height, grid.width + 1), dtype=np.int64)
    if total == 0:
        return diff[:, :-1]
    seg = np.repeat(np.arange(p.size), counts)
    offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    rows = (r_min[seg] + offs).astype(np.int64)
    yr = ytop - (rows + 0.5) * dy
    t = (yr - y0[seg]) / (y1[seg] - y0[seg])
    xi = x0[seg] + t * (x1[seg] - x0[seg])
    sign = np.where(y1[seg] > y0[seg], 1, -1)
    # pixels whose centre lies strictly left of the crossing
    xfirst = grid.top_left.real + 0.5 * grid.dx
    c = np.ceil((xi - xfirst) / grid.dx)
    c = np.clip(c, 0, grid.width).astype(np.int64)
    np.add.at(diff, (rows, np.zeros_like(rows)), sign)
    np.add.at(diff, (rows, c), -sign)
    return np.cumsum(diff, axis=1)[:, :-1]


def _clip_segments(p, q, xmin, xmax, ymin, ymax):
    """Liang-Barsky clip of segments p->q to a box; returns (t0, t1, keep)."""
    d = q - p
    t0 = np.zeros(p.size)
    t1 = np.ones(p.size)
    keep = np.ones(p.size, bool)
    for delta, start, lo, hi in ((d.real, p.real, xmin, xmax), (d.imag, p.imag, ymin, ymax)):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ta = (lo - start) / delta
            tb = (hi - start) / delta
        zero = delta == 0
        keep &= ~(zero & ((start < lo) | (start > hi)))
        tmin = np.where(zero, -np.inf, np.minimum(ta, tb))
        tmax = np.where(zero, np.inf, np.maximum(ta, tb))
        t0 = np.maximum(t0, tmin)
        t1 = np.minimum(t1, tmax)
    keep &= t0 <= t1
    return t0, t1, keep


def rasterize_polyline(poly, grid: RasterGrid, closed: bool = True) -> np.ndarray:
    """Pixels touched by the polyline (segments clipped to the window)."""
    p = np.asarray(poly, dtype=complex)
    q = np.roll(p, -1) if closed else p[1:]
    if not closed:
        p = p[:-1]
    mask = np.zeros(grid.shape, bool)
    if p.size == 0:
        return mask
    tl, br = grid.top_left, grid.bottom_right
    t0, t1, keep = _clip_segments(p, q, tl.real, br.real, br.imag, tl.imag)
    p, q, t0, t1 = p[keep], q[keep], t0[keep], t1[keep]
    a = p + t0 * (q - p)
    b = p + t1 * (q - p)
    step = 0.5 * min(grid.dx, grid.dy)
    n = np.maximum(np.ceil(np.abs(b - a) / step).astype(np.int64), 1)
    seg = np.repeat(np.arange(a.size), n + 1)
    offs = np.arange(seg.size) - np.repeat(np.cumsum(n + 1) - (n + 1), n + 1)
    pts = a[seg] + (b[seg] - a[seg]) * (offs / n[seg])
    i, j = grid.pixel_of(pts)
    i = np.clip(i, 0, grid.height - 1)
    j = np.clip(j, 0, grid.width - 1)
    mask[i, j] = True
    return mask


def winding_at(poly, z) -> np.ndarray:
    """Winding number of a closed polyline about arbitrary points (O(len(poly)) each)."""
    p = np.asarray(poly, dtype=complex)
    q = np.roll(p, -1)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros(z.size, dtype=np.int64)
    for k, w in enumerate(z):
        y0 = p.imag - w.imag
        y1 = q.imag - w.imag
        up = (y0 <= 0) & (y1 > 0)
        dn = (y0 > 0) & (y1 <= 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = p.real + (q.real - p.real) * (-y0) / (y1 - y0) - w.real
        out[k] = int(np.sum(up & (xi > 0)) - np.sum(dn & (xi > 0)))
    return out


def write_ppm(path, rgb: np.ndarray):
    """Binary P6 pixmap, rows from the top-left."""
    rgb = np.asarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary P6 pixmap")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)
