"""Logarithmic change of variable F with exp(F(w)) = f(exp(w)), tracts and their geometry.

Everything here is numerical and empirical: tract boundaries are traced level
curves, geometric constants are fitted upper bounds on sampled points.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import ndimage, optimize

from .catalog import FunctionSpec, f_array, log_df_array, log_f_array, singular_values, _wrap
from .dynamics import find_attractors, iterate_orbits, Termination
from .errors import CurveLost, Inconclusive, PathLeftTract, SeedNotOnLevelSet, WindowTooSmall
from .grid import FOUR, RasterGrid, winding_at, winding_grid

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class TransformSetup:
    spec: FunctionSpec
    rho: float
    normalization_shift: float = 0.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")

    @property
    def level(self) -> float:
        """log of the radius whose level curve bounds the tracts."""
        return math.log(self.rho) + self.normalization_shift

    def with_shift(self, s: float) -> "TransformSetup":
        return replace(self, normalization_shift=float(s))


def _protected_points(spec: FunctionSpec):
    sv = singular_values(spec)
    pts = list(sv.asymptotic_values) + list(sv.critical_values)
    pts += [0j, complex(np.atleast_1d(f_array(spec, 0.0))[0])]
    return np.array(pts, dtype=complex), sv


def make_setup(spec: FunctionSpec, rho: Optional[float] = None, margin: float = 1.0) -> TransformSetup:
    """Setup whose disc {|z| < rho} holds S(f), 0 and f(0); the default pads the largest by 25%."""
    pts, sv = _protected_points(spec)
    need = float(np.max(np.abs(pts)))
    if rho is None:
        rho = 1.25 * need + margin
    elif rho <= need:
        raise ValueError(f"rho={rho} does not enclose the singular values, 0 and f(0) (need > {need:.6g})")
    return TransformSetup(spec, float(rho))


# ---------------------------------------------------------------------------
# Phi(w) = log f(e^w) on any branch, and its derivative


def phi_raw(spec: FunctionSpec, w):
    """log f(e^w), imaginary part only defined mod 2 pi."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    if spec.family == "quadexp":
        with np.errstate(all="ignore"):
            z = np.exp(w)
            x, y = z.real, z.imag
            return math.log(spec.lam) + 2 * w + (x - (x - y) * (x + y)) + 1j * (y - 2 * x * y)
    with np.errstate(over="ignore"):
        return log_f_array(spec, np.exp(w))


def transform_derivative(spec: FunctionSpec, w):
    """F'(w) = e^w f'(e^w) / f(e^w); independent of the branch of F."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    with np.errstate(all="ignore"):
        z = np.exp(w)
        return np.exp(w + log_df_array(spec, z) - log_f_array(spec, z))


def _level_fn(setup, w):
    return phi_raw(setup.spec, w).real - setup.level


# ---------------------------------------------------------------------------
# tracts


@dataclass
class Tract:
    boundary: np.ndarray
    anchor: complex
    anchor_value: Optional[complex] = None
    p: Optional[complex] = None
    slope_fit: Optional[tuple] = None
    wiggling_fit: Optional[tuple] = None
    gulfs: Optional[tuple] = None
    disjoint_type: Optional[bool] = None
    flags: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        pair = lambda z: None if z is None else [float(np.real(z)), float(np.imag(z))]
        out = {
            "boundary": [[float(z.real), float(z.imag)] for z in self.boundary],
            "anchor": pair(self.anchor),
            "anchor_value": pair(self.anchor_value),
            "p": pair(self.p),
            "slope_fit": None if self.slope_fit is None else {"alpha": self.slope_fit[0], "beta": self.slope_fit[1], "empirical": True},
            "wiggling_fit": None if self.wiggling_fit is None else {"K": self.wiggling_fit[0], "mu": self.wiggling_fit[1], "empirical": True},
            "gulfs": None if self.gulfs is None else {"C": self.gulfs[0], "ok": self.gulfs[1]},
            "disjoint_type": self.disjoint_type,
            "flags": self.flags,
        }
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _correct(setup, w, tol=1e-13, iters=12):
    """Newton projection onto the level curve along the gradient."""
    for _ in range(iters):
        phi = _level_fn(setup, w)[0]
        d = transform_derivative(setup.spec, w)[0]
        g = abs(d) ** 2
        if not np.isfinite(phi) or g == 0 or not np.isfinite(g):
            return w, False
        w = w - phi * np.conj(d) / g
        if abs(phi) < tol:
            return w, True
    return w, abs(_level_fn(setup, w)[0]) < 1e-10


def _tangent(setup, w):
    d = transform_derivative(setup.spec, w)[0]
    return -1j * np.conj(d) / abs(d)


def _march(setup, w, sign, max_arclength, re_cutoff, h0, h_max, h_min):
    pts = []
    s = 0.0
    h = h0
    t_prev = sign * _tangent(setup, w)
    while s < max_arclength and w.real <= re_cutoff:
        wp = w + h * t_prev
        wc, ok = _correct(setup, wp)
        if ok:
            t_new = sign * _tangent(setup, wc)
            turn = abs(np.angle(t_new / t_prev))
            if abs(wc - wp) < 0.5 * h and turn < 0.3:
                s += abs(wc - w)
                w, t_prev = wc, t_new
                pts.append(w)
                if turn < 0.05:
                    h = min(1.5 * h, h_max)
                continue
        h *= 0.5
        if h < h_min:
            raise CurveLost(f"corrector failed near {w}", partial=np.array(pts))
    return pts


def trace_tract_boundary(
    setup: TransformSetup,
    seed: complex,
    max_arclength: float = 30.0,
    re_cutoff: Optional[float] = None,
    h0: float = 0.01,
    h_max: float = 0.05,
) -> Tract:
    """Trace the level curve |f(e^w)| = rho * e^shift through ``seed`` both ways.

    The polyline is ordered with the tract on its left.  ``max_arclength``
    bounds each direction separately.
    """
    seed = complex(seed)
    if not abs(_level_fn(setup, seed)[0]) <= 0.25:
        raise SeedNotOnLevelSet(f"|log|f(e^w)| - log rho| > 0.25 at {seed}")
    w0, ok = _correct(setup, seed)
    if not ok:
        raise SeedNotOnLevelSet(f"Newton did not reach the level curve from {seed}")
    if re_cutoff is None:
        re_cutoff = w0.real + 5.0
    flags = {}
    halves = []
    for sign in (1, -1):
        try:
            halves.append(_march(setup, w0, sign, max_arclength, re_cutoff, h0, h_max, 1e-9))
        except CurveLost as exc:
            halves.append(list(exc.partial))
            flags["curve_lost"] = True
    boundary = np.array(halves[1][::-1] + [w0] + halves[0], dtype=complex)
    tract = Tract(boundary=boundary, anchor=_inner_point(boundary, setup), flags=flags)
    if flags.get("curve_lost"):
        exc = CurveLost("continuation lost the level curve", partial=tract)
        raise exc
    _attach_branch(setup, tract)
    return tract


def _inner_point(boundary, setup=None):
    k = _tip(boundary)
    lo, hi = max(k - 1, 0), min(k + 1, boundary.size - 1)
    t = boundary[hi] - boundary[lo]
    if t == 0:
        return complex(boundary[k] + 0.1)
    n = 1j * t / abs(t)
    d = 0.2
    closed = boundary
    for _ in range(30):
        cand = complex(boundary[k] + d * n)
        inside = winding_at(closed, cand)[0] != 0
        if setup is not None:
            inside = inside and _level_fn(setup, cand)[0] > 0
        if inside:
            return cand
        d *= 0.5
    return complex(boundary[k] + d * n)


def _attach_branch(setup, tract: Tract):
    """Fix F by arg f(e^w) principal at the tip; locate p with F(p) = level (real)."""
    b = tract.boundary
    k = _tip(b)
    im = np.unwrap(phi_raw(setup.spec, b).imag)
    im = im - TWO_PI * np.round((im[k] - _wrap(im[k])) / TWO_PI)
    sgn = np.sign(im)
    cross = np.nonzero(sgn[:-1] * sgn[1:] <= 0)[0]
    if cross.size:
        j = int(cross[np.argmin(np.abs(cross - k))])
        w = b[j]
        for _ in range(40):
            v = phi_raw(setup.spec, w)[0]
            v = v.real + 1j * _wrap(v.imag)
            step = (v - setup.level) / transform_derivative(setup.spec, w)[0]
            w = w - step
            if abs(step) < 1e-15:
                break
        tract.p = complex(w)
    a = tract.anchor
    va = phi_raw(setup.spec, a)[0]
    ref = im[k]
    tract.anchor_value = complex(va.real, va.imag + TWO_PI * np.round((ref - va.imag) / TWO_PI))


def find_tract_seeds(setup: TransformSetup, re_range=(-5.0, 12.0), im_range=(-math.pi, math.pi), n_rows=64, n_cols=1200):
    """Crossings of the level curve found on horizontal scan lines, entering the tract rightwards."""
    xs = np.linspace(re_range[0], re_range[1], n_cols)
    seeds = []
    for y in np.linspace(im_range[0], im_range[1], n_rows, endpoint=False):
        v = _level_fn(setup, xs + 1j * y)
        idx = np.nonzero((v[:-1] < 0) & (v[1:] > 0) & np.isfinite(v[:-1]) & np.isfinite(v[1:]))[0]
        for i in idx:
            x = optimize.brentq(lambda t: _level_fn(setup, t + 1j * y)[0], xs[i], xs[i + 1], xtol=1e-14)
            seeds.append(complex(x, y))
    return seeds


# ---------------------------------------------------------------------------
# analytic continuation


def _densify(path, max_step, factor):
    path = np.asarray(path, dtype=complex)
    seg = np.abs(np.diff(path))
    n = np.maximum(np.ceil(seg / max_step).astype(int), 1) * factor
    parts = [path[:1]]
    for a, b, m in zip(path[:-1], path[1:], n):
        parts.append(a + (b - a) * (np.arange(1, m + 1) / m))
    idx = np.concatenate([[0], np.cumsum(n)])
    return np.concatenate(parts), idx


def continue_transform(setup: TransformSetup, path, basevalue: complex, max_step: float = 0.02) -> np.ndarray:
    """F along the vertices of ``path``, continued from F(path[0]) = basevalue."""
    path = np.atleast_1d(np.asarray(path, dtype=complex))
    v0 = phi_raw(setup.spec, path[0])[0]
    if abs(np.exp(complex(basevalue) - v0) - 1) > 1e-9:
        raise ValueError("basevalue is not a logarithm of f(exp(basepoint))")
    if path.size == 1:
        return np.array([complex(basevalue)])
    for factor in (1, 2, 4, 8, 16, 32, 64, 128):
        dense, idx = _densify(path, max_step, factor)
        raw = phi_raw(setup.spec, dense)
        out = raw.real <= setup.level
        if out.any() or not np.all(np.isfinite(raw)):
            bad = dense[np.argmax(out | ~np.isfinite(raw))]
            raise PathLeftTract(f"continuation path leaves the tract near {bad}")
        jumps = _wrap(np.diff(raw.imag))
        if np.max(np.abs(jumps)) < math.pi / 2:
            im = basevalue.imag + np.concatenate([[0.0], np.cumsum(jumps)])
            return raw.real[idx] + 1j * im[idx]
    raise PathLeftTract("argument of f(e^w) varies too fast to track the branch")


def eval_transform(
    setup: TransformSetup,
    w: complex,
    basepoint: complex,
    basevalue: complex,
    via=(),
    periodic: bool = False,
    max_step: float = 0.02,
) -> complex:
    """F(w) by continuation from ``basepoint`` along the polyline basepoint, *via, w.

    With ``periodic`` the target is first translated by a multiple of 2 pi i
    into the tract of the basepoint, which selects the 2 pi i-periodic branch.
    """
    w = complex(w)
    if periodic:
        w -= TWO_PI * 1j * round((w.imag - complex(basepoint).imag) / TWO_PI)
    path = [complex(basepoint), *map(complex, via), w]
    return complex(continue_transform(setup, path, complex(basevalue), max_step)[-1])


def find_normalization_shift(setup: TransformSetup, shifts=None, n_samples: int = 400, seed: Optional[complex] = None):
    """Smallest shift s such that sampled |F'| >= 2 on the tract {Re F > log rho + s}.

    Samples the traced boundary and its midline; returns (s, ok, min |F'|).
    """
    if shifts is None:
        shifts = np.arange(0.0, 20.01, 0.25)
    best = None
    for s in shifts:
        st = setup.with_shift(s)
        seeds = [seed] if seed is not None else find_tract_seeds(st, n_rows=8)
        if not seeds:
            continue
        try:
            tr = trace_tract_boundary(st, seeds[0], max_arclength=20.0)
        except (CurveLost, SeedNotOnLevelSet):
            continue
        b = _resample(tr.boundary, n_samples)
        mid = _midline(tr.boundary)
        pts = np.concatenate([b, mid])
        m = float(np.min(np.abs(transform_derivative(setup.spec, pts))))
        best = (float(s), m >= 2.0, m)
        if m >= 2.0:
            return best
        seed = None
    return best if best is not None else (float(shifts[-1]), False, float("nan"))


# ---------------------------------------------------------------------------
# geometry fits


def _resample(poly, n):
    poly = np.asarray(poly, dtype=complex)
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(poly)))])
    t = np.linspace(0.0, s[-1], n)
    return np.interp(t, s, poly.real) + 1j * np.interp(t, s, poly.imag)


def _tip(boundary):
    """Leftmost vertex; the middle one when a vertical edge ties."""
    re = boundary.real
    ties = np.nonzero(re <= re.min() + 1e-9 * (1 + abs(re.min())))[0]
    return int(ties[ties.size // 2])


def _arcs(boundary):
    k = _tip(boundary)
    return boundary[: k + 1][::-1], boundary[k:]


def _midline(boundary, n=600):
    """Midpoints of the two arcs (split at the leftmost point) at equal arclength from the tip."""
    a, b = _arcs(np.asarray(boundary, dtype=complex))
    if a.size < 2 or b.size < 2:
        return np.asarray(boundary[:1])
    la = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(a)))])
    lb = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(b)))])
    s = np.linspace(0.0, min(la[-1], lb[-1]), n)
    pa = np.interp(s, la, a.real) + 1j * np.interp(s, la, a.imag)
    pb = np.interp(s, lb, b.real) + 1j * np.interp(s, lb, b.imag)
    return 0.5 * (pa + pb)


def _slope_beta(pts, alpha):
    im = pts.imag
    rp = np.maximum(pts.real, 0.0)
    d = np.abs(im[:, None] - im[None, :])
    m = np.maximum(rp[:, None], rp[None, :])
    return float(np.max(d - alpha * m))


def fit_slope(boundary, samples: int = 300, alphas=None):
    """(alpha, beta) with |Im w1 - Im w2| <= alpha max(Re w1, Re w2, 0) + beta on the boundary."""
    pts = np.asarray(boundary, dtype=complex)
    sub = pts[np.linspace(0, pts.size - 1, min(samples, pts.size)).astype(int)]
    if alphas is None:
        alphas = np.concatenate([[0.0], np.geomspace(1e-3, 10.0, 60)])
    reach = max(float(np.max(sub.real)), 0.0)
    costs = [(_slope_beta(sub, a) + a * reach, a) for a in alphas]
    alpha = min(costs)[1]
    # beta over every vertex, padded so linear interpolation between vertices stays valid
    beta = _slope_beta(pts, alpha) if pts.size <= 4000 else _slope_beta(_resample(pts, 4000), alpha)
    seg_re = float(np.max(np.abs(np.diff(pts.real)))) if pts.size > 1 else 0.0
    return float(alpha), float(max(beta, 0.0) + alpha * seg_re + 1e-12)


def fit_wiggling(boundary, samples: int = 300, ks=None):
    """(K', mu) with (Re w)^+ > Re(w0)/K' - mu for w beyond w0 on the midline."""
    boundary = np.asarray(boundary, dtype=complex)
    mid = _midline(boundary, n=max(samples, 50))
    rp = np.maximum(mid.real, 0.0)
    tail_min = np.minimum.accumulate(rp[::-1])[::-1]
    w0_re = mid.real
    floor = tail_min
    if ks is None:
        ks = 1.0 + np.geomspace(1e-3, 100.0, 80)
    reach = max(float(np.max(mid.real)), 0.0)
    best = None
    for K in ks:
        mu = max(float(np.max(w0_re / K - floor)), 0.0) + 1e-9
        cost = mu + (1.0 - 1.0 / K) * reach
        if best is None or cost < best[0]:
            best = (cost, float(K), mu)
    return best[1], best[2]


def estimate_geometry(tract: Tract, samples: int = 300) -> Tract:
    """Populate slope and wiggling fits (empirical upper bounds)."""
    b = np.asarray(tract.boundary, dtype=complex)
    if b.size < 4 * 16:
        b = _resample(b, max(4 * samples, 400))
    return replace(tract, slope_fit=fit_slope(b, samples), wiggling_fit=fit_wiggling(b, samples))


# ---------------------------------------------------------------------------
# gulfs


def _runs(col):
    idx = np.nonzero(col)[0]
    if idx.size == 0:
        return []
    cuts = np.nonzero(np.diff(idx) > 1)[0]
    starts = np.concatenate([[idx[0]], idx[cuts + 1]])
    ends = np.concatenate([idx[cuts], [idx[-1]]])
    return list(zip(starts, ends))


def _separating_run(lab, col_a, runs, src_label, inf_labels):
    """Index of the run in column ``col_a`` whose removal cuts src from infinity."""
    h, w = lab.shape
    adj = []
    for s, e in runs:
        nb = set()
        for c in (col_a - 1, col_a + 1):
            if 0 <= c < w:
                v = lab[s : e + 1, c]
                nb.update(int(x) for x in v[v > 0])
        adj.append(nb)

    def reaches(skip):
        seen = {src_label}
        stack = [src_label]
        used = set()
        while stack:
            u = stack.pop()
            if u in inf_labels:
                return True
            for r, nb in enumerate(adj):
                if r == skip or r in used or u not in nb:
                    continue
                used.add(r)
                for v in nb - seen:
                    seen.add(v)
                    stack.append(v)
        return False

    if not reaches(None):
        return None
    for r in range(len(runs)):
        if not reaches(r):
            return r
    return None


def tract_mask(tract: Tract, grid: RasterGrid) -> np.ndarray:
    return winding_grid(tract.boundary, grid) != 0


def check_gulfs(
    tract: Tract,
    C_candidates,
    probes: int,
    A_max: Optional[float] = None,
    pixel: float = 0.05,
    rng_seed: int = 0,
    p: Optional[complex] = None,
    max_columns: int = 200,
):
    """Smallest C such that for sampled w and columns a >= C Re w, the cross-cut of the
    tract at Re = a separating w from infinity also separates p.  Returns (C, ok)."""
    cands = sorted(float(c) for c in C_candidates)
    if not cands:
        raise ValueError("no candidate constants")
    if probes <= 0:
        return cands[0], True
    b = np.asarray(tract.boundary, dtype=complex)
    p = tract.p if p is None else p
    if p is None:
        raise ValueError("tract has no base point p")
    a_top, b_top = (arc.real.max() for arc in _arcs(b))
    if A_max is None:
        A_max = min(a_top, b_top) - 0.5
    lo_re = min(b.real.min(), p.real) - 0.5
    near = b[b.real <= A_max + 1]
    im_lo, im_hi = near.imag.min() - 0.5, near.imag.max() + 0.5
    W = max(int(math.ceil((A_max - lo_re) / pixel)), 8)
    H = max(int(math.ceil((im_hi - im_lo) / pixel)), 8)
    grid = RasterGrid(complex(lo_re, im_hi), complex(A_max, im_lo), W, H)
    mask = tract_mask(tract, grid)
    xs = grid.xs()

    pi, pj = (int(v) for v in grid.pixel_of(p))
    pi, pj = _nearest_true(mask, pi, pj)

    re_min = max(1.0, p.real)
    limit = A_max / cands[0]
    ii, jj = np.nonzero(mask & (xs[None, :] >= re_min) & (xs[None, :] < limit))
    if ii.size == 0:
        raise WindowTooSmall(f"A_max={A_max} below C*Re w for every admissible probe")
    rng = np.random.default_rng(rng_seed)
    pick = rng.choice(ii.size, size=min(probes, ii.size), replace=False)
    probe_px = list(zip(ii[pick], jj[pick]))

    # failing (probe, column) pairs, tested on every column to the right
    fail_at = {k: [] for k in range(len(probe_px))}
    col_lo = min(jw for _, jw in probe_px) + 1
    cols = set(range(col_lo, W - 1, max(1, (W - 1 - col_lo) // max_columns)))
    for C in cands:
        for _, jw in probe_px:
            c = int(math.ceil((C * xs[jw] - xs[0]) / grid.dx))
            if col_lo <= c < W - 1:
                cols.add(c)
    for col in sorted(cols):
        runs = _runs(mask[:, col])
        if not runs:
            continue
        cut = mask.copy()
        cut[:, col] = False
        lab, _ = ndimage.label(cut, structure=FOUR)
        inf = set(int(x) for x in np.unique(lab[:, -1]) if x > 0)
        for k, (iw, jw) in enumerate(probe_px):
            if jw >= col or xs[col] < cands[0] * xs[jw]:
                continue
            r = _separating_run(lab, col, runs, int(lab[iw, jw]), inf)
            if r is None:
                continue
            if pj >= col:
                fail_at[k].append(xs[col])
                continue
            rp = _separating_run(lab, col, [runs[r]], int(lab[pi, pj]), inf)
            if rp is None:
                fail_at[k].append(xs[col])
    for C in cands:
        ok = all(all(a < C * xs[probe_px[k][1]] for a in fails) for k, fails in fail_at.items())
        if ok:
            return C, True
    return cands[-1], False


def _nearest_true(mask, i, j):
    i = min(max(i, 0), mask.shape[0] - 1)
    j = min(max(j, 0), mask.shape[1] - 1)
    if mask[i, j]:
        return i, j
    ii, jj = np.nonzero(mask)
    k = int(np.argmin((ii - i) ** 2 + (jj - j) ** 2))
    return int(ii[k]), int(jj[k])


# ---------------------------------------------------------------------------
# disjoint type


@dataclass
class DisjointTypeReport:
    value: bool
    witness: Optional[object]
    certificate: Optional[tuple]
    closure_ok: Optional[bool]
    attractors: list

    def __bool__(self):
        return self.value


def _certificate_disc(spec, points, centers, n_theta=2048):
    th = np.linspace(0, TWO_PI, n_theta, endpoint=False)
    worst = None
    for c in centers:
        need = float(np.max(np.abs(points - c)))
        for r in np.geomspace(max(need * 1.02, 1e-3), max(need, 1.0) * 50, 60):
            img = f_array(spec, c + r * np.exp(1j * th))
            gap = np.abs(img - c)
            if np.all(np.isfinite(gap)) and gap.max() < r * (1 - 1e-6):
                return (complex(c), float(r)), None
            k = int(np.nanargmax(np.where(np.isfinite(gap), gap / r, np.inf)))
            cand = (float(gap[k] / r) if np.isfinite(gap[k]) else math.inf, complex(c + r * np.exp(1j * th[k])))
            if worst is None or cand[0] < worst[0]:
                worst = cand
    return None, worst[1] if worst else None


def check_disjoint_type(setup: TransformSetup, tracts=None, box=(-4.0, 4.0, -4.0, 4.0), budget: int = 400) -> DisjointTypeReport:
    """Disjoint type: one attracting cycle absorbing S(f), with an absorbing disc around S(f)."""
    spec = setup.spec
    sv = singular_values(spec)
    pts = np.array(list(sv.asymptotic_values) + list(sv.critical_values), dtype=complex)
    atts = [a for a in find_attractors(spec, box=box) if a.is_attracting]
    if not atts:
        raise Inconclusive("no attracting cycle found in the search box")
    b = iterate_orbits(spec, pts, budget=budget, attractors=atts)
    conv = b.termination == Termination.CONVERGED.value
    ids = set(int(x) for x in b.attractor[conv] if x >= 0)
    closure = None
    if tracts:
        closure = bool(min(np.min(np.abs(np.exp(t.boundary))) for t in tracts) > setup.rho)
    if len(atts) > 1:
        owner = int(b.attractor[0]) if conv[0] else 0
        extra = next(a for k, a in enumerate(atts) if k != owner)
        return DisjointTypeReport(False, extra, None, closure, atts)
    if not conv.all() or ids != {0}:
        bad = complex(pts[np.argmin(conv)])
        if b.termination[np.argmin(conv)] == Termination.BUDGET_EXHAUSTED.value:
            raise Inconclusive(f"orbit of singular value {bad} undecided within budget")
        return DisjointTypeReport(False, bad, None, closure, atts)
    centers = [atts[0].cycle[0], complex(np.mean(pts)), 0j]
    cert, witness = _certificate_disc(spec, pts, centers)
    if cert is None:
        return DisjointTypeReport(False, witness, None, closure, atts)
    return DisjointTypeReport(True, None, cert, closure, atts)
