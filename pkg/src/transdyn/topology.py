"""Raster topology: basin renders, forward images of discs, hulls, the hull A(f) oracle and webs."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import ndimage

from .catalog import LogValue, f_array
from .dynamics import (
    DEFAULT_ELL_MAX,
    EscapeClass,
    Label,
    Termination,
    iterate_orbits,
)
from .errors import NotFound, WindowOverflow
from .grid import (
    EIGHT,
    RasterGrid,
    boundary_pixels,
    component_at,
    hull_mask,
    rasterize_polyline,
    topological_hull,
    winding_at,
    winding_grid,
)

TILE = 64
JULIA, ESCAPING = 0, 1
RENDER_LOG_HORIZON = math.log(1e100)

PALETTE = np.array(
    [
        (0, 0, 0),  # julia / undecided
        (90, 90, 90),  # escaping (part of the Julia set for these families)
        (70, 130, 200),
        (240, 170, 50),
        (90, 180, 100),
        (200, 80, 80),
        (150, 110, 190),
        (120, 200, 210),
        (210, 140, 180),
        (160, 160, 60),
    ],
    dtype=np.uint8,
)


def to_rgb(labels: np.ndarray) -> np.ndarray:
    codes = np.clip(labels.astype(int), 0, len(PALETTE) - 1)
    return PALETTE[codes]


def _tiles(grid: RasterGrid, tile: int = TILE):
    for i0 in range(0, grid.height, tile):
        for j0 in range(0, grid.width, tile):
            yield slice(i0, min(i0 + tile, grid.height)), slice(j0, min(j0 + tile, grid.width))


def _map_tiles(fn, grid: RasterGrid, workers: int, dtype=np.int16):
    """Apply fn(rows, cols) -> block on every tile; blocks are placed by position."""
    out = np.zeros(grid.shape, dtype=dtype)
    tiles = list(_tiles(grid))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            blocks = list(ex.map(lambda t: fn(*t), tiles))
    else:
        blocks = [fn(*t) for t in tiles]
    for (rs, cs), blk in zip(tiles, blocks):
        out[rs, cs] = blk
    return out


# ---------------------------------------------------------------------------
# basin and escape classification


def _basin_kernel(spec, zs, centres, radii, codes, budget, log_horizon):
    """Per-pixel codes for a flat array of starting points."""
    n = zs.size
    out = np.full(n, JULIA, dtype=np.int16)
    idx = np.arange(n)
    z = zs.copy()
    big = math.exp(log_horizon)
    for _ in range(budget + 1):
        if centres.size:
            d = np.abs(z[:, None] - centres[None, :]) < radii[None, :]
            hit = d.any(axis=1)
            if hit.any():
                out[idx[hit]] = codes[np.argmax(d[hit], axis=1)]
        else:
            hit = np.zeros(z.size, bool)
        with np.errstate(all="ignore"):
            esc = ~hit & ((np.abs(z) > big) | np.isinf(z.real) | np.isinf(z.imag))
        out[idx[esc]] = ESCAPING
        keep = ~(hit | esc) & np.isfinite(z)
        if not keep.any():
            break
        idx, z = idx[keep], z[keep]
        with np.errstate(all="ignore"):
            z = f_array(spec, z)
    return out


def render_classification(spec, grid: RasterGrid, attractors, budget: int = 200, workers: int = 1, log_horizon: float = RENDER_LOG_HORIZON) -> RasterGrid:
    """Label each pixel centre: 2 + k for the basin of the k-th attracting cycle, 1 escaping, 0 otherwise.

    A pixel is in a basin once its orbit enters the certified ball of a cycle
    point; escaping means |z| passed e^log_horizon within the budget.
    """
    att = [a for a in attractors if a.is_attracting]
    centres, radii, codes = [], [], []
    for k, a in enumerate(att):
        for c in a.cycle:
            centres.append(c)
            radii.append(a.radius if a.radius > 0 else 1e-9)
            codes.append(2 + k)
    centres = np.array(centres, dtype=complex)
    radii = np.array(radii)
    codes = np.array(codes, dtype=np.int16)
    xs, ys = grid.xs(), grid.ys()

    def tile(rs, cs):
        zs = (xs[cs][None, :] + 1j * ys[rs][:, None]).ravel()
        blk = _basin_kernel(spec, zs, centres, radii, codes, budget, log_horizon)
        return blk.reshape(len(ys[rs]), len(xs[cs]))

    labels = _map_tiles(tile, grid, workers)
    legend = {JULIA: "julia/undecided", ESCAPING: "escaping"}
    for k, a in enumerate(att):
        legend[2 + k] = f"basin of {a.kind} cycle through {a.cycle[0]:.10g}"
    return replace(grid, labels=labels, legend=legend)


def immediate_basin(grid: RasterGrid, code: int, point: complex) -> np.ndarray:
    """The 8-connected component of the pixels labelled ``code`` containing ``point``."""
    i, j = grid.pixel_of(point)
    return component_at(grid.labels == code, (int(i), int(j)))


def escaping_fraction(grid: RasterGrid) -> float:
    return float(np.mean(grid.labels == ESCAPING))


# ---------------------------------------------------------------------------
# forward images of circles


def _seg_dist(c, a, b):
    """Distance from c to the segments a->b."""
    ab = b - a
    L2 = np.abs(ab) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.clip(np.real((c - a) * np.conj(ab)) / L2, 0.0, 1.0)
    t = np.where(L2 > 0, t, 0.0)
    return np.abs(a + t * ab - c)


def _needs_split(pts, views, max_turn=0.5):
    """Segments to subdivide: long ones near any view, or ones turning fast about the first."""
    a = pts
    b = np.roll(pts, -1)
    seg = np.abs(b - a)
    bad = np.zeros(pts.size, bool)
    for vc, vr, pixel in views:
        bad |= (seg > pixel) & (_seg_dist(vc, a, b) < vr)
    vc = views[0][0]
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        turn = np.abs(np.angle((b - vc) / (a - vc)))
    return bad | (turn > max_turn)


def _iterate(spec, z, n):
    with np.errstate(all="ignore"):
        for _ in range(n):
            z = f_array(spec, z)
    return z


@dataclass
class ImageCurves:
    """Closed polylines f^n(boundary of the seed disc) for n = 0..len-1."""

    theta: list
    curves: list
    under_resolved: list = field(default_factory=list)
    overflow_at: Optional[int] = None


def forward_boundary(
    spec,
    centre: complex,
    radius: float,
    n_max: int,
    view=None,
    res: int = 512,
    n0: int = 1024,
    max_samples: int = 1 << 21,
    rounds: int = 40,
    extra_views=(),
    partial: bool = False,
) -> ImageCurves:
    """Adaptively sampled images of the circle |z - centre| = radius.

    ``view`` is (centre, radius) of the region whose pixels must be resolved;
    None means the bounding box of each image (resolved at ``res`` pixels).
    ``extra_views`` adds (centre, radius, pixel) regions resolved as well.
    With ``partial`` an overflow ends the sequence early (``overflow_at``)
    instead of raising WindowOverflow.
    Segments are split while longer than a pixel near the view or while
    they turn more than half a radian as seen from the view centre.
    """
    theta = np.linspace(0.0, 2 * math.pi, n0, endpoint=False)
    pts = centre + radius * np.exp(1j * theta)
    out = ImageCurves([], [], [])
    for n in range(n_max + 1):
        if n:
            pts = _iterate(spec, pts, 1)
        flagged = False
        for _ in range(rounds):
            if not np.all(np.isfinite(pts)):
                if partial:
                    out.overflow_at = n
                    return out
                raise WindowOverflow(f"f^{n} of the seed boundary leaves double range", achieved=n - 1)
            views = list(extra_views)
            if view is None:
                span = max(np.ptp(pts.real), np.ptp(pts.imag), 1e-300)
                vc = complex(np.mean([pts.real.min(), pts.real.max()]), np.mean([pts.imag.min(), pts.imag.max()]))
                views.insert(0, (vc, span, span / res))
            else:
                views.insert(0, (view[0], view[1], 2 * view[1] / res))
            bad = _needs_split(pts, views)
            if not bad.any():
                break
            if theta.size + bad.sum() > max_samples:
                flagged = True
                break
            k = np.flatnonzero(bad)
            nxt = np.where(k + 1 < theta.size, theta[(k + 1) % theta.size], 2 * math.pi)
            tmid = 0.5 * (theta[k] + nxt)
            zmid = _iterate(spec, centre + radius * np.exp(1j * tmid), n)
            theta = np.insert(theta, k + 1, tmid)
            pts = np.insert(pts, k + 1, zmid)
        else:
            flagged = True
        out.theta.append(theta.copy())
        out.curves.append(pts.copy())
        out.under_resolved.append(flagged)
    return out


def image_region(poly, grid: RasterGrid):
    """Pixels of f^n(D): nonzero winding of f^n(boundary D), plus the curve itself."""
    curve = rasterize_polyline(poly, grid)
    return (winding_grid(poly, grid) != 0) | curve, curve


# ---------------------------------------------------------------------------
# hull oracle for A(f)


@dataclass
class HullLevel:
    """T(f^n(D)) on a coarse grid over the bounding box and a fine core grid."""

    n: int
    grid: RasterGrid
    hull: np.ndarray
    curve: np.ndarray
    core: Optional[RasterGrid] = None
    core_hull: Optional[np.ndarray] = None

    def contains(self, z) -> bool:
        if isinstance(z, LogValue) or z is None:
            return False
        z = complex(z)
        if not np.isfinite(z):
            return False
        for g, h in ((self.core, self.core_hull), (self.grid, self.hull)):
            if g is None:
                continue
            tl, br = g.top_left, g.bottom_right
            if tl.real <= z.real < br.real and br.imag < z.imag <= tl.imag:
                i, j = g.pixel_of(z)
                if h[int(i), int(j)]:
                    return True
        x0, x1 = self.grid.top_left.real, self.grid.bottom_right.real
        y0, y1 = self.grid.bottom_right.imag, self.grid.top_left.imag
        if x0 <= z.real < x1 and y0 < z.imag <= y1:
            return False
        return bool(winding_at(self.curve, z)[0] != 0)


def _square(c: complex, half: float, res: int) -> RasterGrid:
    return RasterGrid(c + complex(-half, half), c + complex(half, -half), res, res)


def hull_sequence(spec, D_seed, n_max: int, res: int = 512, core: float = 64.0) -> list:
    """T(f^n(D)) for n = 0..n_max.

    Each level is rasterized over the bounding box of f^n(D) and, when that box
    is much larger, also over the square of half-width ``core`` about 0, so
    holes near the origin survive huge images.
    """
    centre, radius = D_seed
    core_view = (0j, core * math.sqrt(2), 2 * core / res)
    ims = forward_boundary(spec, centre, radius, n_max, view=None, res=res, extra_views=[core_view])
    levels = []
    for n, poly in enumerate(ims.curves):
        x0, x1 = poly.real.min(), poly.real.max()
        y0, y1 = poly.imag.min(), poly.imag.max()
        span = max(x1 - x0, y1 - y0)
        g = _square(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), 0.5 * span * 1.04 + 1e-12, res)
        region, _ = image_region(poly, g)
        lv = HullLevel(n, g, hull_mask(region), poly)
        if span > 4 * core:
            cg = _square(0j, core, res)
            creg, _ = image_region(poly, cg)
            lv.core, lv.core_hull = cg, hull_mask(creg)
        levels.append(lv)
    return levels


def _orbits_for_oracle(spec, ws, steps):
    b = iterate_orbits(spec, ws, budget=steps, record=True)
    return b


def classify_hull_batch(spec, ws, D_seed, n_max: int, ell_max: int = DEFAULT_ELL_MAX, levels=None, res: int = 512, workers: int = 1) -> list:
    """Hull-based fast-escape labels: FAST(ell) if f^{n+ell}(w) lies outside T(f^n(D)) for all n <= n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if levels is None:
        levels = hull_sequence(spec, D_seed, n_max, res)
    ws = np.atleast_1d(np.asarray(ws, dtype=complex))
    b = _orbits_for_oracle(spec, ws, n_max + ell_max)

    def one(i):
        t = Termination(int(b.termination[i]))
        pts = b.points[i]
        w = complex(ws[i])
        if t is Termination.PRECISION_LOST:
            return EscapeClass(Label.UNDECIDED, z=w, evidence=["precision lost"])
        for ell in range(ell_max + 1):
            ok = True
            for n in range(n_max + 1):
                k = n + ell
                if k >= len(pts):
                    if t is Termination.ESCAPED:
                        continue  # beyond the horizon: outside every bounded hull
                    k = len(pts) - 1  # converged orbit: it stays at its limit
                if levels[n].contains(pts[k]):
                    ok = False
                    break
            if ok:
                return EscapeClass(Label.FAST, ell=ell, steps=n_max + ell, z=w)
        return EscapeClass(Label.NOT_FAST, steps=n_max + ell_max, z=w)

    idx = range(ws.size)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(one, idx))
    return [one(i) for i in idx]


def classify_A_hull_oracle(spec, w: complex, D_seed, n_max: int, ell_max: int = DEFAULT_ELL_MAX, window: Optional[RasterGrid] = None, levels=None) -> EscapeClass:
    """Single-point hull oracle; the window only fixes the raster resolution."""
    res = window.width if window is not None else 512
    return classify_hull_batch(spec, [w], D_seed, n_max, ell_max, levels=levels, res=res)[0]


# ---------------------------------------------------------------------------
# spider's webs


@dataclass
class WebReport:
    levels: list  # (n_k, radius)
    nesting_ok: bool
    boundary_in_image: bool
    under_resolved: bool = False
    lower_bound_from: Optional[int] = None  # first n computed from an enclosed disc

    def to_records(self):
        return [{"n": n, "radius": r} for n, r in self.levels]


def enclosed_radius(mask: np.ndarray, grid: RasterGrid) -> float:
    """Largest r such that every pixel centre in the closed disc |z| <= r is in the mask (capped by the window)."""
    c = grid.centers()
    tl, br = grid.top_left, grid.bottom_right
    cap = min(-tl.real, br.real, tl.imag, -br.imag)
    if cap <= 0:
        return 0.0
    out = np.abs(c[~mask])
    r = float(out.min()) if out.size else math.inf
    return min(r * (1 - 1e-12), cap)


def spiderweb_nesting(spec, G_seed, radii, n_max: int, window: RasterGrid, keep_masks: bool = False):
    """Nested hulls G_n = T(f^n(G)) enclosing the discs of the given radii.

    ``G_seed`` is a disc (centre, radius).  G_n is computed from the image of
    the seed boundary while that stays in double range.  Beyond that, levels
    are continued from an enclosed disc B of G_n via T(f(B)), a subset of
    G_{n+1}, which is exact inside the window once it covers it.
    """
    radii = sorted(float(r) for r in radii)
    if not radii:
        rep = WebReport([], True, True)
        return (rep, []) if keep_masks else rep
    centre, radius = G_seed
    view = (0.5 * (window.top_left + window.bottom_right), 0.5 * abs(window.bottom_right - window.top_left))
    res = max(window.width, window.height)
    ims = forward_boundary(spec, centre, radius, n_max, view=view, res=res, partial=True)
    masks, curves = [], []
    for poly in ims.curves:
        region, curve = image_region(poly, window)
        masks.append(hull_mask(region))
        curves.append(curve)
    under = any(ims.under_resolved)
    direct = len(masks)
    lower_from = None
    levels, k = [], 0

    def take(n):
        nonlocal k
        rho = enclosed_radius(masks[n], window)
        while k < len(radii) and (not levels or n > levels[-1][0]) and radii[k] <= rho:
            levels.append((n, radii[k]))
            k += 1

    for n in range(direct):
        take(n)
        if k == len(radii):
            break
    n = direct - 1
    while k < len(radii) and n < n_max and direct > 0:
        rho = enclosed_radius(masks[n], window)
        if rho <= 0 or not levels:
            break
        nxt = forward_boundary(spec, 0j, rho, 1, view=view, res=res, partial=True)
        if nxt.overflow_at is not None:
            raise WindowOverflow(f"image of the enclosed disc of radius {rho:.6g} leaves double range", achieved=n)
        region, curve = image_region(nxt.curves[1], window)
        masks.append(hull_mask(region))
        curves.append(curve)
        n += 1
        lower_from = n if lower_from is None else lower_from
        take(n)
    if k < len(radii):
        if ims.overflow_at is not None and not levels:
            raise WindowOverflow(
                f"f^{ims.overflow_at} of the seed boundary leaves double range before enclosing radius {radii[k]}",
                achieved=ims.overflow_at - 1,
            )
        raise NotFound(f"disc of radius {radii[k]} not enclosed by G_n for n <= {n_max}")
    nest = all(not np.any(masks[a] & ~masks[b]) for (a, _), (b, _) in zip(levels, levels[1:]))
    inside = True
    for m in range(direct):
        bd = boundary_pixels(masks[m])
        near = ndimage.binary_dilation(curves[m], structure=EIGHT)
        inside &= not np.any(bd & ~near)
    rep = WebReport(levels, bool(nest), bool(inside), under, lower_from)
    return (rep, masks) if keep_masks else rep
