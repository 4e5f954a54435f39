import cmath
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from transdyn.catalog import expaffine
from transdyn.dynamics import Label, classify_escape, modulus_ladder
from transdyn.errors import AtSingularValue, NoConvergence
from transdyn.hairs import (
    ExternalAddress,
    Hair,
    classify_endpoint,
    inverse_branch,
    parse_address,
    shift_residual,
    trace_endpoint,
    trace_hair,
)

A = -2.0
FIX = brentq(lambda x: math.exp(x) - 2 - x, 0.5, 3.0)


def fa(z):
    return np.exp(z) + A


def _period2_newton():
    """Period-2 point with itinerary (0, 1): Newton on f^2(z) = z from a grid of starts."""
    xs, ys = np.meshgrid(np.linspace(-3, 6, 60), np.linspace(-3.1, 3.1, 60))
    z = (xs + 1j * ys).ravel()
    with np.errstate(all="ignore"):
        for _ in range(100):
            w = fa(z)
            z = z - (fa(w) - z) / (np.exp(w) * np.exp(z) - 1)
        w = fa(z)
        good = np.isfinite(z) & (np.abs(fa(w) - z) < 1e-12) & (np.abs(w - z) > 1e-6)
    z, w = z[good], w[good]
    strips = (z.imag > -math.pi) & (z.imag <= math.pi) & (w.imag > math.pi) & (w.imag <= 3 * math.pi)
    roots = np.unique(np.round(z[strips], 9))
    assert roots.size == 1
    return complex(roots[0])


def test_inverse_branch_examples():
    assert abs(inverse_branch(A, 0, 0) - math.log(2)) < 1e-15
    w = 3 + 1j
    assert abs(cmath.exp(inverse_branch(A, 5, w)) + A - w) < 1e-12
    z = inverse_branch(A, 5, w)
    assert 9 * math.pi < z.imag <= 11 * math.pi
    with pytest.raises(AtSingularValue):
        inverse_branch(A, 0, -2)


def test_address_normal_form():
    assert parse_address("|0,0") == parse_address("0")
    assert parse_address("1|0,1") == parse_address("|1,0")
    assert parse_address("2,-1|3").bound == 3
    s = parse_address("2|0,1")
    assert s.word(5) == [2, 0, 1, 0, 1]
    assert s.shift() == parse_address("0,1")
    assert str(parse_address("|1,0")) == "|1,0"
    with pytest.raises(ValueError):
        ExternalAddress((), ())


def test_endpoint_constant_zero():
    e, gap, gaps = trace_endpoint(A, parse_address("0"))
    assert abs(e - FIX) < 1e-8 and gap < 1e-8
    # contraction: gaps shrink monotonically after a short burn-in
    assert all(b < a for a, b in zip(gaps[3:], gaps[4:]))


def test_endpoint_period_two():
    e, _, _ = trace_endpoint(A, parse_address("0,1"))
    assert abs(e - _period2_newton()) < 1e-8


def test_depth_zero():
    with pytest.raises(NoConvergence):
        trace_endpoint(A, parse_address("0"), depth=0)


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        trace_endpoint(-0.5, parse_address("0"))
    with pytest.raises(ValueError):
        trace_endpoint(A, parse_address("65"))


def test_base_independence():
    for text in ("0", "0,1", "2|-1", "3,-3,1"):
        s = parse_address(text)
        e10 = trace_endpoint(A, s, z_base=10.0)[0]
        e20 = trace_endpoint(A, s, z_base=20.0)[0]
        assert abs(e10 - e20) < 1e-8


def test_endpoint_shift_identity():
    rng = np.random.default_rng(11)
    for _ in range(20):
        per = tuple(int(x) for x in rng.integers(-3, 4, rng.integers(1, 4)))
        s = ExternalAddress((), per)
        e = trace_endpoint(A, s)[0]
        es = trace_endpoint(A, s.shift())[0]
        assert abs(fa(e) - es) < 1e-6


def test_constant_zero_hair_real_and_extremal():
    h = trace_hair(A, parse_address("0"), depth=3, t_samples=64)
    assert np.all(h.samples.imag == 0)
    assert np.all(h.samples.real >= h.endpoint.real - 1e-3)
    assert np.all(np.diff(h.samples.real) > 0)


def test_hair_shift_property():
    for text in ("0", "1,-1", "2|0,3"):
        assert shift_residual(A, parse_address(text)) < 1e-6


def test_single_sample_hair():
    h = trace_hair(A, parse_address("0,1"), depth=2, t_samples=1)
    assert h.samples.shape == (1,) and abs(h.endpoint - _period2_newton()) < 1e-8
    assert h.to_json()["address"] == "|0,1"


def test_hair_samples_stay_in_strips():
    s = parse_address("1,-2")
    h = trace_hair(A, s, depth=4, t_samples=32)
    z = h.samples
    for k in range(4):
        j = s[k]
        assert np.all((z.imag > (2 * j - 1) * math.pi) & (z.imag <= (2 * j + 1) * math.pi))
        z = fa(z)


def test_classify_endpoint():
    lad = modulus_ladder(expaffine(A))
    h = trace_hair(A, parse_address("0"))
    c = classify_endpoint(A, h, lad)
    assert c.label is Label.BOUNDED and h.flags["meandering"]
    # an interior point of the hair: T = 10 at pullback depth 0
    assert classify_escape(expaffine(A), 10 + 0j, lad).label is Label.FAST
    broken = Hair(parse_address("0"), 0j, np.zeros(1, complex), 1.0, 0, np.ones(1))
    assert classify_endpoint(A, broken, lad).label is Label.UNDECIDED
    assert classify_endpoint(A, None, lad).label is Label.UNDECIDED
