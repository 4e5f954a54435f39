"""Orbits, the maximum-modulus ladder and escape-speed classification."""
from __future__ import annotations

import cmath
import enum
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .catalog import (
    LOG_BIG,
    LOG_TINY,
    FunctionSpec,
    LogValue,
    Value,
    _wrap,
    df_array,
    evaluate,
    f_array,
    log_f_array,
    log_modulus,
    max_modulus,
    scale_factor,
    spec_core,
)
from .errors import LadderBaseInvalid

DEFAULT_BUDGET = 200
DEFAULT_ELL_MAX = 8
DEFAULT_BOX = 1e6
DEFAULT_HORIZON = 1e12
CONVERGE_TOL = 1e-12
DECAY_RATIO = 0.99
SELF_PERIOD = 4

# ---------------------------------------------------------------------------
# orbits


class Termination(enum.Enum):
    BUDGET_EXHAUSTED = 0
    CONVERGED = 1
    ESCAPED = 2
    PRECISION_LOST = 3


@dataclass
class Orbit:
    points: list
    termination: Termination
    length: int
    attractor: Optional[int] = None
    escape_step: Optional[int] = None

    @property
    def log_moduli(self):
        return [log_modulus(p) for p in self.points]


@dataclass
class Attractor:
    cycle: list
    multiplier: complex
    kind: str  # attracting | superattracting | parabolic | repelling
    radius: float = 0.0  # certified ball radius (attracting kinds only)

    @property
    def period(self) -> int:
        return len(self.cycle)

    @property
    def is_attracting(self) -> bool:
        return self.kind in ("attracting", "superattracting")


@dataclass
class OrbitBatch:
    logm: np.ndarray  # (N, budget + 1), nan after termination
    termination: np.ndarray  # Termination values
    last_step: np.ndarray
    attractor: np.ndarray  # -1 self-detected, -2 none
    exact_cycle: np.ndarray
    final: np.ndarray
    points: Optional[list] = None


def _attracting_balls(attractors):
    centres, radii, ids = [], [], []
    for i, a in enumerate(attractors or []):
        if not a.is_attracting or a.radius <= 0:
            continue
        for c in a.cycle:
            centres.append(c)
            radii.append(a.radius)
            ids.append(i)
    return np.array(centres, dtype=complex), np.array(radii), np.array(ids, dtype=int)


def iterate_orbits(
    spec: FunctionSpec,
    z0,
    budget: int = DEFAULT_BUDGET,
    horizon: float = DEFAULT_HORIZON,
    attractors=None,
    record: bool = False,
) -> OrbitBatch:
    """Iterate many starting points at once in log-safe arithmetic."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    z = np.atleast_1d(np.asarray(z0, dtype=complex)).copy()
    n = z.size
    logm = np.full((n, budget + 1), np.nan)
    with np.errstate(all="ignore"):
        logm[:, 0] = np.log(np.abs(z))
    big = np.zeros(n, bool)
    bl = np.zeros(n)
    ba = np.zeros(n)
    active = np.ones(n, bool)
    term = np.full(n, Termination.BUDGET_EXHAUSTED.value)
    last = np.full(n, budget)
    att = np.full(n, -2)
    hist = np.full((n, 2 * SELF_PERIOD + 1), np.nan + 0j)
    hist[:, -1] = z
    centres, radii, ids = _attracting_balls(attractors)
    pts = None
    if record:
        pts = [[complex(v)] for v in z]

    for k in range(1, budget + 1):
        small = active & ~big
        bigs = np.flatnonzero(active & big)
        if small.any():
            zs = z[small]
            with np.errstate(all="ignore"):
                lv = log_f_array(spec, zs)
                direct = f_array(spec, zs)
            re = lv.real
            out = direct.copy()
            nb = re > LOG_BIG
            out[re < LOG_TINY] = 0
            idx = np.flatnonzero(small)
            z[idx] = out
            lm = np.where(nb, re, np.nan)
            with np.errstate(all="ignore"):
                lm = np.where(nb, re, np.log(np.abs(out)))
            bad = ~nb & ~np.isfinite(out)
            lm[bad] = np.nan
            if nb.any():
                big[idx[nb]] = True
                bl[idx[nb]] = re[nb]
                ba[idx[nb]] = _wrap(np.nan_to_num(lv.imag[nb]))
            logm[idx, k] = lm
        for i in bigs:
            v = evaluate(spec, LogValue(bl[i], ba[i]))
            if isinstance(v, LogValue):
                bl[i], ba[i] = v.logmod, v.arg
                logm[i, k] = v.logmod
            else:
                big[i] = False
                z[i] = v
                logm[i, k] = math.log(abs(v)) if v != 0 else -math.inf
        if record:
            for i in np.flatnonzero(active):
                pts[i].append(LogValue(bl[i], ba[i]) if big[i] else complex(z[i]))

        lk = logm[:, k]
        esc = active & (lk > horizon)
        lost = active & np.isnan(lk)
        term[esc] = Termination.ESCAPED.value
        term[lost] = Termination.PRECISION_LOST.value
        last[esc | lost] = k
        active &= ~(esc | lost)

        hist = np.roll(hist, -1, axis=1)
        hist[:, -1] = np.where(big, np.nan, z)
        cand = active & ~big
        if len(centres) and cand.any():
            ci = np.flatnonzero(cand)
            d = np.abs(z[ci, None] - centres[None, :]) < radii[None, :]
            hit = d.any(axis=1)
            if hit.any():
                hi = ci[hit]
                att[hi] = ids[np.argmax(d[hit], axis=1)]
                term[hi] = Termination.CONVERGED.value
                last[hi] = k
                active[hi] = False
                cand = active & ~big
        if k > 2 * SELF_PERIOD and cand.any():
            ci = np.flatnonzero(cand)
            h = hist[ci]
            done = np.zeros(ci.size, bool)
            for p in range(1, SELF_PERIOD + 1):
                d_now = np.abs(h[:, -1] - h[:, -1 - p])
                d_prev = np.abs(h[:, -1 - p] - h[:, -1 - 2 * p])
                with np.errstate(all="ignore"):
                    ok = (d_now < CONVERGE_TOL) & (d_prev > 0) & (d_now / d_prev < DECAY_RATIO)
                done |= ok
            if done.any():
                hi = ci[done]
                att[hi] = -1
                term[hi] = Termination.CONVERGED.value
                last[hi] = k
                active[hi] = False
        if not active.any():
            break

    exact = np.zeros(n, bool)
    for p in range(1, SELF_PERIOD + 1):
        exact |= hist[:, -1] == hist[:, -1 - p]
    exact &= np.isfinite(hist[:, -1])
    return OrbitBatch(logm, term, last, att, exact, z, pts)


def iterate_orbit(spec, z0: complex, budget=DEFAULT_BUDGET, horizon=DEFAULT_HORIZON, attractors=None) -> Orbit:
    b = iterate_orbits(spec, [z0], budget, horizon, attractors, record=True)
    t = Termination(int(b.termination[0]))
    last = int(b.last_step[0])
    return Orbit(
        points=b.points[0][: last + 1],
        termination=t,
        length=last,
        attractor=int(b.attractor[0]) if t is Termination.CONVERGED else None,
        escape_step=last if t is Termination.ESCAPED else None,
    )


# ---------------------------------------------------------------------------
# level-index numbers for the ladder

TIER_CAP = 1e300


class Level(NamedTuple):
    """A positive number x stored as log^tier(x) = value (tuple order = size order)."""

    tier: int
    value: float

    def tier1(self) -> float:
        return self.value if self.tier == 1 else math.inf


def _normalise(tier, v):
    while v > TIER_CAP:
        tier, v = tier + 1, math.log(v)
    return Level(tier, v)


# log M(r) ~ c * r**d for large r
_GROWTH = {"expaffine": (1.0, 1), "fatou": (1.0, 1), "cosine": (1.0, 1), "quadexp": (1.0, 2)}


def _log_max_modulus_large(spec: FunctionSpec, r: float) -> float:
    core = spec_core(spec)
    shift = -math.log(scale_factor(spec))
    fam = core.family
    if fam == "quadexp":
        v = math.log(core.lam) + 2 * math.log(r) + r * r + 0.125
    elif fam == "cosine":
        v = math.log(4 * math.pi / 3) + r - math.log(2) + 2 * math.log1p(math.exp(-r))
    elif fam == "fatou":
        v = r + math.log1p((1 - r) * math.exp(-r))
    else:
        v = r + math.log1p(abs(core.a) * math.exp(-r))
    return v + shift


def log_max_modulus(spec, r):
    if r > 50:
        return _log_max_modulus_large(spec, r)
    return max_modulus(spec, r)


def _next_level(spec: FunctionSpec, lv: Level) -> Level:
    c, d = _GROWTH[spec_core(spec).family]
    if lv.tier == 1 and lv.value < 700:
        return _normalise(1, log_max_modulus(spec, math.exp(lv.value)))
    if lv.tier == 1:
        return _normalise(2, math.log(c) + d * lv.value)
    if lv.tier == 2:
        return _normalise(3, lv.value + math.log(d))
    return Level(lv.tier + 1, lv.value)


def _next_exp(lv: Level) -> Level:
    if lv.tier == 1 and lv.value < 700:
        return _normalise(1, math.exp(lv.value))
    return Level(lv.tier + 1, lv.value)


@dataclass(frozen=True)
class ModulusLadder:
    R: float
    levels: tuple  # Level(tier, value); levels[n] ~ log M^{n+1}(R, f)
    validity_floor: float
    exp_levels: tuple = ()  # exp-tower; exp_levels[n] ~ log exp^{n+1}(R)

    def tier1(self, which="ladder"):
        seq = self.levels if which == "ladder" else self.exp_levels
        return np.array([lv.tier1() for lv in seq])


def validity_floor(spec: FunctionSpec, r_min=1e-3, r_max=1e3, n=241) -> float:
    """Smallest grid radius above which M(r) > r held at every grid radius."""
    rs = np.geomspace(r_min, r_max, n)
    theta = np.linspace(0, 2 * np.pi, 1024, endpoint=False)
    ok = np.empty(n, bool)
    for i, r in enumerate(rs):
        vals = log_f_array(spec, r * np.exp(1j * theta)).real
        ok[i] = np.nanmax(vals) > math.log(r)
    if not ok[-1]:
        return math.inf
    bad = np.flatnonzero(~ok)
    return float(rs[bad[-1] + 1]) if bad.size else float(rs[0])


def default_radius(spec: FunctionSpec) -> float:
    floor = validity_floor(spec)
    k = max(0, math.ceil(math.log(floor)))
    return math.exp(k)


def modulus_ladder(spec: FunctionSpec, R: Optional[float] = None, depth: int = DEFAULT_BUDGET + 1) -> ModulusLadder:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    floor = validity_floor(spec)
    if R is None:
        R = math.exp(max(0, math.ceil(math.log(floor))))
    l0 = log_max_modulus(spec, R)
    if not l0 > math.log(R):
        raise LadderBaseInvalid(f"M(R,f) <= R at R={R}")
    levels = [_normalise(1, l0)] if l0 > 0 else [Level(1, l0)]
    for _ in range(depth - 1):
        levels.append(_next_level(spec, levels[-1]))
    exp_levels = [Level(1, R)]
    for _ in range(depth - 1):
        exp_levels.append(_next_exp(exp_levels[-1]))
    return ModulusLadder(R=R, levels=tuple(levels), validity_floor=floor, exp_levels=tuple(exp_levels))


# ---------------------------------------------------------------------------
# classification


class Label(enum.Enum):
    BOUNDED = "bounded"
    ESCAPING_NOT_FAST = "escaping"
    FAST = "fast"
    EXP_FAST = "expfast"
    UNDECIDED = "undecided"
    NOT_FAST = "notfast"  # hull oracle only: some test failed for every offset


@dataclass
class EscapeClass:
    label: Label
    ell: Optional[int] = None
    exp_ell: Optional[int] = None
    steps: int = 0
    evidence: list = field(default_factory=list)
    z: Optional[complex] = None

    @property
    def fast(self) -> bool:
        return self.ell is not None

    @property
    def exp_fast(self) -> bool:
        return self.exp_ell is not None

    def to_json(self) -> str:
        z = self.z if self.z is not None else complex("nan")
        rec = {"z": [z.real, z.imag], "label": self.label.value, "ell": self.ell, "steps": int(self.steps)}
        return json.dumps(rec)


def dominates(logm_row, last, levels1, ell, horizon=DEFAULT_HORIZON) -> tuple:
    """Does the orbit dominate the ladder at offset ell?  Returns (ok, tested n)."""
    tested = []
    for n in range(0, last - ell + 1):
        L = logm_row[n + ell]
        lvl = levels1[n] if n < len(levels1) else math.inf
        if L > horizon:
            if lvl <= horizon:
                tested.append(n)
            continue
        if not L >= lvl:
            return False, tested
        tested.append(n)
    return bool(tested), tested


def _domination_matrix(logm, last, levels1, ell_max, horizon):
    """Vectorised dominates() for every point and offset; returns (N,) first passing ell or -1."""
    n_pts, width = logm.shape
    first = np.full(n_pts, -1)
    nlev = min(len(levels1), width)
    lv = np.full(width, np.inf)
    lv[:nlev] = levels1[:nlev]
    for ell in range(ell_max, -1, -1):
        cols = width - ell
        L = logm[:, ell:]
        lvl = lv[:cols][None, :]
        nidx = np.arange(cols)[None, :]
        valid = nidx <= (last[:, None] - ell)
        with np.errstate(invalid="ignore"):
            beyond = L > horizon
            tested = valid & (~beyond | (lvl <= horizon))
            passed = np.where(beyond, True, L >= lvl)
        ok = (tested.any(axis=1)) & ~(tested & ~passed).any(axis=1)
        first[ok] = ell
    return first


def classify_batch(
    spec: FunctionSpec,
    zs,
    ladder: ModulusLadder,
    budget: int = DEFAULT_BUDGET,
    attractors=None,
    ell_max: int = DEFAULT_ELL_MAX,
    horizon: float = DEFAULT_HORIZON,
    box: float = DEFAULT_BOX,
) -> list:
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    b = iterate_orbits(spec, zs, budget, horizon, attractors)
    return classify_orbit_arrays(zs, b, ladder, ell_max, horizon, box)


def classify_orbit_arrays(zs, b: OrbitBatch, ladder, ell_max=DEFAULT_ELL_MAX, horizon=DEFAULT_HORIZON, box=DEFAULT_BOX):
    logm = b.logm
    last = b.last_step
    fast = _domination_matrix(logm, last, ladder.tier1("ladder"), ell_max, horizon)
    expf = _domination_matrix(logm, last, ladder.tier1("exp"), ell_max, horizon)
    budget = logm.shape[1] - 1
    out = []
    for i in range(len(zs)):
        t = Termination(int(b.termination[i]))
        steps = int(last[i])
        row = logm[i, : steps + 1]
        label = Label.UNDECIDED
        ell = exp_ell = None
        if t is Termination.CONVERGED:
            label = Label.BOUNDED
        elif t is Termination.BUDGET_EXHAUSTED and b.exact_cycle[i] and np.nanmax(row) <= math.log(box):
            label = Label.BOUNDED
        else:
            escaping = t is Termination.ESCAPED
            if t is Termination.BUDGET_EXHAUSTED:
                tail = row[budget // 2:]
                escaping = bool(
                    np.all(np.diff(tail) > 0) and tail[-1] - tail[0] >= 0.1 and tail[-1] > math.log(10)
                )
            if escaping:
                ell = int(fast[i]) if fast[i] >= 0 else None
                exp_ell = int(expf[i]) if expf[i] >= 0 else None
                if ell is not None:
                    label = Label.FAST
                elif exp_ell is not None:
                    label = Label.EXP_FAST
                else:
                    label = Label.ESCAPING_NOT_FAST
        out.append(EscapeClass(label, ell, exp_ell, steps, [steps], complex(zs[i])))
    return out


def classify_escape(spec, z, ladder, budget=DEFAULT_BUDGET, attractors=None, ell_max=DEFAULT_ELL_MAX) -> EscapeClass:
    return classify_batch(spec, [z], ladder, budget, attractors, ell_max)[0]


# ---------------------------------------------------------------------------
# attractors


def _iterate_with_derivative(spec, z, p):
    w = z.copy()
    d = np.ones_like(z)
    with np.errstate(all="ignore"):
        for _ in range(p):
            d = d * df_array(spec, w)
            w = f_array(spec, w)
    return w, d


def _polish(spec, z, p):
    z = complex(z)
    for _ in range(30):
        w, d = _iterate_with_derivative(spec, np.array([z]), p)
        g, dg = complex(w[0]) - z, complex(d[0]) - 1
        if not (cmath.isfinite(g) and cmath.isfinite(dg)) or dg == 0:
            break
        step = g / dg
        z -= step
        if abs(step) < 1e-15 * max(1, abs(z)):
            break
    # multiple root (multiplier near 1): the root is a simple zero of (f^p)' - 1
    w, d = _iterate_with_derivative(spec, np.array([z]), p)
    if abs(complex(d[0]) - 1) < 1e-3:
        h = 1e-6
        for _ in range(30):
            _, d0 = _iterate_with_derivative(spec, np.array([z, z + h, z - h]), p)
            g = complex(d0[0]) - 1
            dg = (complex(d0[1]) - complex(d0[2])) / (2 * h)
            if dg == 0 or not cmath.isfinite(g / dg):
                break
            step = g / dg
            z -= step
            if abs(step) < 1e-16:
                break
    return z


def _certify_radius(spec, cycle, p, n_theta=64):
    c = cycle[0]
    theta = np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
    for r in (0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6):
        w, _ = _iterate_with_derivative(spec, c + r * theta, p)
        if np.all(np.abs(w - c) < r):
            return r
    return 0.0


def find_attractors(spec: FunctionSpec, box=(-3.0, 3.0, -3.0, 3.0), max_period: int = 2, n_seed: int = 40) -> list:
    """Periodic cycles of period <= max_period found by Newton on f^p(z) - z."""
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    x0, x1, y0, y1 = box
    xs = np.linspace(x0, x1, n_seed)
    ys = np.linspace(y0, y1, n_seed)
    seeds = (xs[None, :] + 1j * ys[:, None]).ravel()
    found: list = []
    for p in range(1, max_period + 1):
        z = seeds.copy()
        with np.errstate(all="ignore"):
            for _ in range(80):
                w, d = _iterate_with_derivative(spec, z, p)
                step = (w - z) / (d - 1)
                z = z - np.where(np.isfinite(step), step, 0)
            w, _ = _iterate_with_derivative(spec, z, p)
            res = np.abs(w - z)
        cand = z[np.isfinite(res) & (res < 1e-6 * np.maximum(1, np.abs(z)))]
        cand = cand[(cand.real >= x0) & (cand.real <= x1) & (cand.imag >= y0) & (cand.imag <= y1)]
        for z0 in cand:
            if any(min(abs(z0 - q) for q in a.cycle) < 1e-6 for a in found):
                continue
            zc = _polish(spec, z0, p)
            w, _ = _iterate_with_derivative(spec, np.array([zc]), p)
            if not abs(complex(w[0]) - zc) < 1e-10 * max(1, abs(zc)):
                continue
            cycle = [zc]
            for _ in range(p - 1):
                cycle.append(complex(f_array(spec, cycle[-1])))
            # minimal period
            if any(abs(cycle[q] - zc) < 1e-8 for q in range(1, p)):
                continue
            if any(min(abs(c - q) for q in a.cycle) < 1e-8 for a in found for c in cycle):
                continue
            mult = complex(np.prod([complex(df_array(spec, c)) for c in cycle]))
            am = abs(mult)
            if am < 1e-10:
                kind = "superattracting"
            elif abs(am - 1) <= 1e-8:
                kind = "parabolic"
            elif am < 1:
                kind = "attracting"
            else:
                kind = "repelling"
            att = Attractor(cycle, mult, kind)
            if att.is_attracting:
                att.radius = _certify_radius(spec, cycle, p)
            found.append(att)
    found.sort(key=lambda a: (a.period, round(a.cycle[0].real, 9), round(a.cycle[0].imag, 9)))
    return found
