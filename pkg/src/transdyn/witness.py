"""Level-set separation witness for a normalised logarithmic transform.

With G(w) = log f(e^w) - level, the tracts are T = {Re G > 0} and G maps T
to the right half-plane.  For parameters eps, R' the set

    B = { w : for every k, Re G^k(w) >= tau^k(R') or G^k(w) is not in T }

(tau(r) = exp(eps r), G^k only defined while the orbit stays in T) is
rasterised to a fixed depth, and the complement component through a query
point is extracted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, optimize

from .errors import QueryInB
from .grid import FOUR, RasterGrid, touches_frame
from .logtransform import TransformSetup, phi_raw
from .topology import _map_tiles

TWO_PI = 2 * math.pi
K_DEPTH = 12
# beyond this real part, exp(w) carries an absolute phase error above ~1e-3
PHASE_LIMIT = 30.0
OVERFLOW = 700.0

B_CODE, VIOLATION, ISLAND = 0, 1, 2
LEGEND = {B_CODE: "B", VIOLATION: "outside B", ISLAND: "query component"}


def tau_ladder(eps: float, r_prime: float, depth: int) -> np.ndarray:
    """tau^k(R') for k = 0..depth."""
    out = [float(r_prime)]
    for _ in range(depth):
        out.append(math.exp(min(eps * out[-1], OVERFLOW)) if eps * out[-1] < OVERFLOW else math.inf)
    return np.array(out)


def _step(setup: TransformSetup, w):
    """Re G(w) (always reliable) and G(w) with Im reduced mod 2 pi (reliable when Re w <= PHASE_LIMIT)."""
    g = np.full(w.shape, np.nan + 0j)
    small = w.real <= OVERFLOW
    if small.any():
        with np.errstate(all="ignore"):
            g[small] = phi_raw(setup.spec, w[small]) - setup.level
    if (~small).any():
        # Re G ~ |e^w| cos(Im w): only its sign is representable
        c = np.cos(w[~small].imag)
        g[~small] = np.where(np.abs(c) > 1e-9, np.sign(c) * np.inf, np.nan)
    im = np.where(np.isfinite(g.imag), np.mod(g.imag + math.pi, TWO_PI) - math.pi, g.imag)
    return g.real + 1j * im


def violation_depth(setup: TransformSetup, w, taus):
    """Least k with G^k(w) in T and Re G^k(w) < tau^k (-1 if none) and the depth decided.

    A pixel whose phase is lost at step k has depths <= k decided; the rest
    are counted as satisfied, and ``decided < K`` flags it.
    """
    w = np.asarray(w, dtype=complex).ravel()
    K = len(taus) - 1
    first = np.full(w.size, -1, dtype=np.int16)
    decided = np.full(w.size, K, dtype=np.int16)
    idx = np.arange(w.size)
    cur = w.copy()
    for k in range(K + 1):
        if idx.size == 0:
            break
        g = _step(setup, cur)
        ambiguous = np.isnan(g.real)
        inT = g.real > 0
        bad = inT & (cur.real < taus[k]) & ~ambiguous
        first[idx[bad]] = k
        decided[idx[ambiguous]] = k - 1
        keep = inT & ~bad & ~ambiguous & (k < K)
        lost = keep & (cur.real > PHASE_LIMIT)
        if lost.any():
            # G^{k+1} has a reliable real part but no phase: depth k+1 is decided
            # only when Re G^{k+1} already clears tau^{k+1}
            ok = g.real[lost] >= taus[k + 1]
            decided[idx[lost]] = np.where(ok, k + 1, k)
            keep &= ~lost
        idx, cur = idx[keep], g[keep]
    return first, decided


@dataclass
class WitnessReport:
    grid: RasterGrid
    first_violation: np.ndarray
    decided: np.ndarray
    island: np.ndarray
    bounded: bool
    query: complex
    query_pixel: tuple
    boundary_ok: bool
    taus: np.ndarray
    flags: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "query": [self.query.real, self.query.imag],
            "query_pixel": list(self.query_pixel),
            "bounded": self.bounded,
            "boundary_ok": self.boundary_ok,
            "island_pixels": int(self.island.sum()),
            "taus": [float(t) for t in self.taus],
            "flags": self.flags,
        }


def lifted_fixed_point(setup: TransformSetup) -> complex:
    """log of the real repelling fixed point of f / L for ExpAffine, L = rho e^shift."""
    if setup.spec.family != "expaffine":
        raise ValueError("default query is only defined for ExpAffine")
    L = math.exp(setup.level)
    a = float(np.real(setup.spec.a))
    h = lambda x: math.exp(x) + a - L * x
    x = optimize.brentq(h, math.log(L), math.log(L) + 10)
    return complex(math.log(x), 0.0)


def separation_witness(
    setup: TransformSetup,
    eps: float,
    r_prime: float,
    window: RasterGrid,
    K_depth: int = K_DEPTH,
    query: complex | None = None,
    workers: int = 1,
) -> WitnessReport:
    """Rasterise B to depth K_depth and return the complement component through ``query``.

    The component is taken 4-connected; it is bounded when it does not touch
    the window frame.  Its outer boundary (4-neighbours in B) is re-evaluated.
    """
    if not (eps > 0 and r_prime > 0):
        raise ValueError("eps and R' must be positive")
    taus = tau_ladder(eps, r_prime, K_depth)
    if query is None:
        query = lifted_fixed_point(setup)
    query = complex(query)
    if not window.contains(query):
        raise ValueError("query point lies outside the window")

    def block(rs, cs):
        c = window.centers(rs, cs)
        f, d = violation_depth(setup, c, taus)
        return ((f.astype(np.int32) + 1) * 64 + d + 1).reshape(c.shape)

    packed = _map_tiles(block, window, workers, dtype=np.int32)
    first = (packed // 64 - 1).astype(np.int16)
    decided = (packed % 64 - 1).astype(np.int16)
    outside = first >= 0
    i, j = (int(v) for v in window.pixel_of(query))
    if not outside[i, j]:
        raise QueryInB(f"query pixel ({i}, {j}) at {query} satisfies the B-condition to depth {K_depth}")
    lab, _ = ndimage.label(outside, structure=FOUR)
    island = lab == lab[i, j]
    bounded = not touches_frame(island)
    rim = ndimage.binary_dilation(island, structure=FOUR) & ~island
    ri, rj = np.nonzero(rim)
    z = window.centers()[ri, rj]
    f2, d2 = violation_depth(setup, z, taus)
    boundary_ok = bool(np.all(f2 < 0))
    labels = np.where(island, ISLAND, np.where(outside, VIOLATION, B_CODE)).astype(np.int16)
    grid = RasterGrid(window.top_left, window.bottom_right, window.width, window.height, labels, dict(LEGEND))
    flags = {
        "rim_pixels": int(rim.sum()),
        "rim_fully_decided": int(np.sum(d2 >= K_depth)),
        "rim_min_decided_depth": int(d2.min()) if d2.size else K_depth,
        "vacuous_pixels": int(np.sum(decided < K_depth)),
    }
    return WitnessReport(grid, first, decided, island, bounded, query, (i, j), boundary_ok, taus, flags)
