import math

import numpy as np
import pytest
from scipy.optimize import brentq

from transdyn.catalog import evaluate, expaffine, f_array, quadexp
from transdyn.errors import PathLeftTract, SeedNotOnLevelSet
from transdyn.logtransform import (
    Tract,
    TransformSetup,
    check_disjoint_type,
    check_gulfs,
    estimate_geometry,
    eval_transform,
    find_normalization_shift,
    fit_slope,
    make_setup,
    trace_tract_boundary,
    transform_derivative,
)

# real crossing of |e^{e^w} - 2| = 10, solved independently
SEED = brentq(lambda w: math.exp(math.exp(w)) - 12.0, 0.5, 1.5)
# regression baselines frozen from the fit for ExpAffine(-2), rho = 10
SLOPE_E2 = (0.0, 3.130210018622181)


@pytest.fixture(scope="module")
def setup10():
    return TransformSetup(expaffine(-2), 10.0)


@pytest.fixture(scope="module")
def tract10(setup10):
    return trace_tract_boundary(setup10, complex(SEED))


def test_seed_value():
    assert abs(SEED - math.log(math.log(12))) < 1e-14
    assert abs(evaluate(expaffine(-2), math.exp(SEED)) - 10) < 1e-12


def test_boundary_on_level_set(tract10):
    b = tract10.boundary
    assert b.size > 100
    assert np.max(np.abs(np.abs(f_array(expaffine(-2), np.exp(b))) / 10 - 1)) < 1e-6
    assert np.min(np.abs(b - SEED)) < 1e-12
    # tract on the left of the polyline: the tip's inner point has |f| > rho
    assert abs(evaluate(expaffine(-2), np.exp(tract10.anchor))) > 10


def test_periodic_copy(setup10, tract10):
    other = trace_tract_boundary(setup10, complex(SEED) + 2j * math.pi)
    assert other.boundary.size == tract10.boundary.size
    assert np.max(np.abs(other.boundary - 2j * math.pi - tract10.boundary)) < 1e-9


def test_seed_not_on_level_set(setup10):
    half = math.log(math.log(7.0))  # |f(e^w)| = 5 = rho / 2
    with pytest.raises(SeedNotOnLevelSet):
        trace_tract_boundary(setup10, complex(half))


def test_rho_must_enclose_singular_values():
    with pytest.raises(ValueError):
        make_setup(expaffine(-2), rho=1.5)
    assert make_setup(expaffine(-2)).rho > 2


def test_identity_at_basepoint(setup10, tract10):
    a, v = tract10.anchor, tract10.anchor_value
    assert eval_transform(setup10, a, a, v) == v


def test_exp_zero_transform_is_exp():
    st = make_setup(expaffine(0))
    for w in (1.0, 1.3 + 0.4j, 2.0 - 1.0j):
        got = eval_transform(st, w, 0.9, math.exp(0.9), via=[complex(w.real if isinstance(w, complex) else w, 0)])
        assert abs(got - np.exp(w)) < 1e-12 * abs(np.exp(w))
    assert abs(eval_transform(st, 1.0, 0.9, math.exp(0.9)) - math.e) < 1e-13


def _targets(n=60, seed=1):
    rng = np.random.default_rng(seed)
    return rng.uniform(2, 4, n) + 1j * rng.uniform(-1, 1, n)


def test_functional_equation(setup10, tract10):
    for w in _targets():
        F = eval_transform(setup10, w, tract10.anchor, tract10.anchor_value, via=[complex(w.real, 0)])
        fz = evaluate(expaffine(-2), np.exp(w))
        assert abs(np.exp(F) - fz) / abs(fz) < 1e-9


def test_periodic_branch(setup10, tract10):
    a, v = tract10.anchor, tract10.anchor_value
    for w in _targets(20, 2):
        base = eval_transform(setup10, w, a, v, via=[complex(w.real, 0)], periodic=True)
        for k in (1, -1, 3):
            s = w + 2j * math.pi * k
            shifted = eval_transform(setup10, s, a, v, via=[complex(w.real, 0)], periodic=True)
            assert abs(shifted - base) < 1e-9


def test_path_left_tract(setup10, tract10):
    with pytest.raises(PathLeftTract):
        eval_transform(setup10, 3 + 3j, tract10.anchor, tract10.anchor_value)
    with pytest.raises(ValueError):
        eval_transform(setup10, 3.0, tract10.anchor, tract10.anchor_value + 0.1)


def test_derivative_vs_central_differences(setup10, tract10):
    h = 1e-6
    for w in _targets(20, 3):
        F = lambda z: eval_transform(setup10, z, tract10.anchor, tract10.anchor_value, via=[complex(w.real, 0)])
        fd = (F(w + h) - F(w - h)) / (2 * h)
        d = transform_derivative(setup10.spec, w)[0]
        assert abs(fd - d) < 1e-6 * abs(d)


def test_base_point_p(setup10, tract10):
    # F(p) = log rho on the boundary, real on the real axis by symmetry
    assert abs(tract10.p - SEED) < 1e-12


def test_normalization_shift():
    st = make_setup(expaffine(-2))
    s, ok, m = find_normalization_shift(st)
    assert ok and m >= 2 and s == 0.75
    s2, ok2, _ = find_normalization_shift(st, shifts=[s - 0.25])
    assert not ok2


def _strip(length=30.0):
    b = np.concatenate([
        np.linspace(length, 0, 301) + 1j,
        [0.5j, 0j, -0.5j],
        np.linspace(0, length, 301) - 1j,
    ])
    return Tract(boundary=b.astype(complex), anchor=0.5 + 0j, p=0j)


def _comb():
    # main channel |Im| < 1 plus a pocket 3 < Im < 5 that reaches back to Re = 1
    v = [40 + 1j, 12 + 1j, 12 + 5j, 1 + 5j, 1 + 3j, 10 + 3j, 10 + 1j, 0 + 1j, 0 - 1j, 40 - 1j]
    return Tract(boundary=np.array(v, dtype=complex), anchor=0.5 + 0j, p=0j)


def test_slope_fit_strip():
    tr = estimate_geometry(_strip())
    alpha, beta = tr.slope_fit
    assert alpha == 0.0 and abs(beta - 2.0) < 1e-9
    K, mu = tr.wiggling_fit
    assert 1 < K < 1.01 and mu < 1e-6


def test_slope_fit_regression(tract10):
    alpha, beta = estimate_geometry(tract10).slope_fit
    assert abs(alpha - SLOPE_E2[0]) < 1e-9 and abs(beta - SLOPE_E2[1]) < 1e-6
    assert beta < math.pi + 0.1  # the tract lies in |Im w| < pi / 2


def test_slope_fit_holds_on_held_out_samples(tract10):
    b = tract10.boundary
    alpha, beta = fit_slope(b[::2])
    test = b[1::2]
    d = np.abs(test.imag[:, None] - test.imag[None, :])
    m = np.maximum(np.maximum(test.real[:, None], test.real[None, :]), 0)
    assert np.all(d <= alpha * m + beta)


def test_gulfs_strip():
    assert check_gulfs(_strip(), [1.0, 2.0], probes=50) == (1.0, True)


def test_gulfs_comb():
    C, ok = check_gulfs(_comb(), [1.0, 1.5, 2.0], probes=300)
    assert not ok
    # past the pocket every cut separates p as well
    assert check_gulfs(_comb(), [1.0, 15.0], probes=300, rng_seed=4) == (15.0, True)


def test_gulfs_no_probes():
    assert check_gulfs(_comb(), [3.0, 1.0], probes=0) == (1.0, True)


@pytest.mark.parametrize("spec,want", [(quadexp(0.5), True), (expaffine(-2), True), (quadexp(1.1), False)], ids=str)
def test_disjoint_type(spec, want):
    rep = check_disjoint_type(make_setup(spec))
    assert bool(rep) is want
    if want:
        c, r = rep.certificate
        th = np.exp(2j * np.pi * np.arange(4096) / 4096)
        assert np.all(np.abs(f_array(spec, c + r * th) - c) < r)
    else:
        fix = brentq(lambda x: 1.1 * x * math.exp(x - x * x) - 1, 1.0, 1.5)
        assert abs(rep.witness.cycle[0] - fix) < 1e-9
