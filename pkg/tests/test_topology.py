import math

import numpy as np
import pytest
from scipy.optimize import brentq

from transdyn.catalog import expaffine, f_array, quadexp
from transdyn.dynamics import Label, classify_escape, find_attractors, modulus_ladder
from transdyn.errors import NotFound
from transdyn.grid import RasterGrid
from transdyn.topology import (
    ESCAPING,
    JULIA,
    classify_A_hull_oracle,
    classify_hull_batch,
    enclosed_radius,
    hull_sequence,
    render_classification,
    spiderweb_nesting,
    to_rgb,
)

FIX_POS = brentq(lambda x: math.exp(x) - 2 - x, 0.5, 2)
FIX_NEG = brentq(lambda x: math.exp(x) - 2 - x, -3, 0)


def pixel_at(z, h=1e-3):
    """1 x 1 grid whose only pixel centre is z."""
    return RasterGrid(z + complex(-h, h), z + complex(h, -h), 1, 1)


def _code_of(grid, atts, point):
    for k, a in enumerate([a for a in atts if a.is_attracting]):
        if any(abs(c - point) < 1e-9 for c in a.cycle):
            return 2 + k
    raise AssertionError("no such attractor")


def test_render_basin_of_origin():
    spec = quadexp(0.995)
    atts = find_attractors(spec)
    z = 0.1
    # independent iteration: the orbit falls to 0
    w = z
    for _ in range(5):
        w = 0.995 * w * w * math.exp(w - w * w)
    assert abs(w) < 1e-8
    g = render_classification(spec, pixel_at(z), atts)
    assert g.labels[0, 0] == _code_of(g, atts, 0)


def test_render_parabolic_point_is_julia():
    spec = quadexp(1.0)
    g = render_classification(spec, pixel_at(1.0), find_attractors(spec))
    assert g.labels[0, 0] == JULIA


def test_render_fixed_point_in_one_step():
    spec = expaffine(-2)
    atts = find_attractors(spec)
    g = render_classification(spec, pixel_at(FIX_NEG), atts, budget=1)
    assert g.labels[0, 0] == _code_of(g, atts, FIX_NEG)
    g = render_classification(spec, pixel_at(10.0), atts, budget=5)
    assert g.labels[0, 0] == ESCAPING


def test_render_determinism_across_workers():
    spec = quadexp(1.1)
    atts = find_attractors(spec)
    grid = RasterGrid(-0.35 + 1.2j, 2.23 - 1.2j, 150, 140)
    a = render_classification(spec, grid, atts, budget=80, workers=1)
    b = render_classification(spec, grid, atts, budget=80, workers=4)
    assert np.array_equal(a.labels, b.labels)
    assert to_rgb(a.labels).shape == (140, 150, 3)


def test_render_matches_pointwise_iteration():
    spec = quadexp(1.1)
    atts = [a for a in find_attractors(spec) if a.is_attracting]
    grid = RasterGrid(-0.35 + 1.2j, 2.23 - 1.2j, 24, 20)
    g = render_classification(spec, grid, atts, budget=200)
    for (i, j), code in np.ndenumerate(g.labels):
        if code < 2:
            continue
        z = grid.center(i, j)
        a = atts[code - 2]
        for _ in range(2000):
            z = complex(f_array(spec, z))
        assert min(abs(z - c) for c in a.cycle) < 1e-6


@pytest.fixture(scope="module")
def hull_levels():
    return hull_sequence(expaffine(-2), (FIX_POS, 0.05), 5, res=256)


def test_hull_oracle_fast_point(hull_levels):
    spec = expaffine(-2)
    c = classify_A_hull_oracle(spec, 10 + 0j, (FIX_POS, 0.05), 5, levels=hull_levels)
    assert c.label is Label.FAST and c.ell == 0
    assert classify_escape(spec, 10 + 0j, modulus_ladder(spec)).label is Label.FAST


def test_hull_oracle_attracting_point(hull_levels):
    c = classify_A_hull_oracle(expaffine(-2), complex(FIX_NEG), (FIX_POS, 0.05), 5, levels=hull_levels)
    assert c.label is Label.NOT_FAST


def test_hull_levels_grow(hull_levels):
    # the seed sits on the julia set, so its images cover more and more of the plane
    assert all(lv.contains(FIX_POS) for lv in hull_levels)
    assert hull_levels[0].contains(FIX_POS + 0.04) and not hull_levels[0].contains(FIX_POS + 0.06)
    # the attracting fixed point is first swallowed at n = 5
    assert [lv.contains(FIX_NEG) for lv in hull_levels] == [False] * 5 + [True]


def test_hull_oracle_rejects_nmax_zero():
    with pytest.raises(ValueError):
        classify_hull_batch(expaffine(-2), [10 + 0j], (FIX_POS, 0.05), 0)


def test_hull_batch_workers_agree(hull_levels):
    rng = np.random.default_rng(0)
    ws = rng.uniform(-2, 6, 40) + 1j * rng.uniform(-3, 3, 40)
    a = classify_hull_batch(expaffine(-2), ws, (FIX_POS, 0.05), 5, levels=hull_levels, workers=1)
    b = classify_hull_batch(expaffine(-2), ws, (FIX_POS, 0.05), 5, levels=hull_levels, workers=3)
    assert [(x.label, x.ell) for x in a] == [(x.label, x.ell) for x in b]


WINDOW = RasterGrid(-6 + 6j, 6 - 6j, 256, 256)


def test_spiderweb_empty():
    rep = spiderweb_nesting(quadexp(0.5), (0.95 + 0.7j, 0.05), [], 10, WINDOW)
    assert rep.levels == [] and rep.nesting_ok


def test_spiderweb_seed_in_basin():
    with pytest.raises(NotFound):
        spiderweb_nesting(quadexp(0.5), (0.01 + 0j, 0.005), [1.0], 10, WINDOW)


def test_spiderweb_levels():
    spec = quadexp(0.5)
    rep = [a for a in find_attractors(spec, max_period=1) if a.kind == "repelling"]
    centre = min(rep, key=lambda a: (abs(a.cycle[0]), a.cycle[0].real)).cycle[0]
    web, masks = spiderweb_nesting(spec, (centre, 0.05), [1, 2, 4], 20, WINDOW, keep_masks=True)
    ns = [n for n, _ in web.levels]
    assert len(ns) == 3 and all(b > a for a, b in zip(ns, ns[1:]))
    assert web.nesting_ok and web.boundary_in_image
    c = WINDOW.centers()
    for n, r in web.levels:
        assert np.all(masks[n][np.abs(c) <= r])
    for (a, _), (b, _) in zip(web.levels, web.levels[1:]):
        assert not np.any(masks[a] & ~masks[b])


def test_enclosed_radius():
    c = WINDOW.centers()
    assert abs(enclosed_radius(np.abs(c) < 2.5, WINDOW) - 2.5) < 2 * WINDOW.dx
    assert enclosed_radius(np.ones(WINDOW.shape, bool), WINDOW) == 6.0
    off = RasterGrid(1 + 1j, 2 - 1j, 8, 8)
    assert enclosed_radius(np.ones(off.shape, bool), off) == 0.0
