import math

import numpy as np
import pytest
from scipy.optimize import brentq

from transdyn.catalog import LogValue, cosine, evaluate, expaffine, f_array, fatou, quadexp, scaled
from transdyn.dynamics import (
    Label,
    Termination,
    classify_batch,
    classify_escape,
    dominates,
    iterate_orbits,
    find_attractors,
    iterate_orbit,
    modulus_ladder,
)
from transdyn.errors import LadderBaseInvalid

FIX_NEG = brentq(lambda x: math.exp(x) - 2 - x, -3, 0)  # attracting fixed point of e^z - 2
FIX_POS = brentq(lambda x: math.exp(x) - 2 - x, 0.5, 2)


def test_fatou_orbit_five_steps():
    orb = iterate_orbit(fatou(), 10 + 0j, budget=5)
    z = 10.0
    for _ in range(5):
        z = z + 1 + math.exp(-z)
    assert abs(orb.points[5] - z) < 1e-12 and abs(orb.points[5] - 15) < 1e-3


def test_orbit_points_replay():
    orb = iterate_orbit(quadexp(0.5), 1.3 + 0.4j, budget=30)
    for a, b in zip(orb.points, orb.points[1:]):
        if isinstance(a, LogValue) or isinstance(b, LogValue):
            break
        assert abs(evaluate(quadexp(0.5), a) - b) <= 1e-15 * max(1, abs(b))


def test_expaffine_orbit_to_attractor():
    atts = [a for a in find_attractors(expaffine(-2)) if a.is_attracting]
    orb = iterate_orbit(expaffine(-2), 0j, budget=200, attractors=atts)
    assert abs(orb.points[1] + 1) < 1e-15
    assert abs(orb.points[2] - (math.exp(-1) - 2)) < 1e-15
    assert orb.termination is Termination.CONVERGED
    assert abs(orb.points[-1] - FIX_NEG) < atts[0].radius


def test_escape_terminates_beyond_horizon():
    orb = iterate_orbit(expaffine(-2), 10 + 0j, budget=50, horizon=1e12)
    assert orb.termination is Termination.ESCAPED
    assert orb.log_moduli[-1] > 1e12


def test_parabolic_constant_orbit():
    orb = iterate_orbit(quadexp(1.0), 1 + 0j, budget=50)
    assert orb.termination is Termination.BUDGET_EXHAUSTED
    assert all(p == 1 for p in orb.points)


def test_ladder_pure_exponential():
    lad = modulus_ladder(expaffine(0), R=2.0, depth=3)
    assert lad.levels[0].tier == 1 and abs(lad.levels[0].value - 2.0) < 1e-12
    assert abs(lad.levels[1].value - math.exp(2.0)) < 1e-9
    assert abs(lad.levels[2].value - math.exp(math.exp(2.0))) < 1e-9 * math.exp(math.exp(2.0))


def test_ladder_base_invalid():
    with pytest.raises(LadderBaseInvalid):
        modulus_ladder(quadexp(0.5), R=0.1)


def test_scaled_ladder_shift():
    a = modulus_ladder(fatou(), R=3.0, depth=2)
    b = modulus_ladder(scaled(fatou(), 2.0), R=3.0, depth=2)
    assert abs(b.levels[0].value - (a.levels[0].value - math.log(2.0))) < 1e-12


@pytest.mark.parametrize("spec", [expaffine(-2), fatou(), quadexp(0.5), quadexp(1.1), cosine()], ids=str)
def test_ladder_strictly_increasing(spec):
    lad = modulus_ladder(spec, depth=22)
    assert lad.levels[0].value >= math.log(lad.R) or lad.levels[0].tier > 1
    assert all(b > a for a, b in zip(lad.levels, lad.levels[1:]))
    assert lad.R >= 1 and lad.R >= lad.validity_floor


def test_classify_examples():
    assert classify_escape(quadexp(1.0), 1 + 0j, modulus_ladder(quadexp(1.0))).label is Label.BOUNDED
    assert classify_escape(fatou(), 100 + 0j, modulus_ladder(fatou())).label is Label.ESCAPING_NOT_FAST
    c = classify_escape(expaffine(-2), 10 + 0j, modulus_ladder(expaffine(-2)))
    assert c.label is Label.FAST and c.ell == 0


def test_fast_label_brute_force():
    """FastEscaping(l) must mean log|f^{n+l}(z)| >= levels[n] at every tested n."""
    spec = expaffine(-2)
    lad = modulus_ladder(spec)
    z = 10 + 0j
    c = classify_escape(spec, z, lad)
    logs = [math.log(abs(z))]
    v = z
    for _ in range(6):
        v = evaluate(spec, v)
        logs.append(v.logmod if isinstance(v, LogValue) else math.log(abs(v)))
        if logs[-1] > 1e12:
            break
    for n in range(len(logs) - c.ell):
        lv = lad.levels[n]
        if lv.tier == 1 and logs[n + c.ell] <= 1e12:
            assert logs[n + c.ell] >= lv.value


def test_offset_robustness():
    # FastEscaping(l) implies domination at l + 1 as well
    rng = np.random.default_rng(5)
    zs = rng.uniform(-2, 12, 300) + 1j * rng.uniform(-3, 3, 300)
    spec = expaffine(-2)
    lad = modulus_ladder(spec)
    b = iterate_orbits(spec, zs, 200, 1e12)
    levels1 = lad.tier1("ladder")
    labels = classify_batch(spec, zs, lad, ell_max=8)
    n_fast = 0
    for i, c in enumerate(labels):
        if c.label is Label.FAST and c.ell < 8:
            n_fast += 1
            ok, _ = dominates(b.logm[i], int(b.last_step[i]), levels1, c.ell + 1)
            assert ok
    assert n_fast > 10


def test_json_shape():
    c = classify_escape(expaffine(-2), 10 + 0j, modulus_ladder(expaffine(-2)))
    import json

    rec = json.loads(c.to_json())
    assert set(rec) == {"z", "label", "ell", "steps"} and rec["label"] == "fast"


def test_attractors_quadexp_1():
    atts = find_attractors(quadexp(1.0))
    fixed = {a.kind: a for a in atts if a.period == 1 and abs(a.cycle[0].imag) < 1e-12 and -0.5 < a.cycle[0].real < 1.5}
    assert abs(fixed["superattracting"].cycle[0]) < 1e-12 and abs(fixed["superattracting"].multiplier) < 1e-12
    assert abs(fixed["parabolic"].cycle[0] - 1) < 1e-10 and abs(fixed["parabolic"].multiplier - 1) < 1e-10


def test_attractors_quadexp_11():
    atts = [a for a in find_attractors(quadexp(1.1)) if a.kind == "attracting"]
    want = brentq(lambda x: 1.1 * x * math.exp(x - x * x) - 1, 1.0, 1.5)
    assert len(atts) == 1 and abs(atts[0].cycle[0] - want) < 1e-10 and 1 < want < 1.3


def test_attractors_expaffine():
    atts = find_attractors(expaffine(-2))
    att = [a for a in atts if a.is_attracting]
    assert len(att) == 1 and abs(att[0].cycle[0] - FIX_NEG) < 1e-12
    assert abs(att[0].multiplier - math.exp(FIX_NEG)) < 1e-12
    assert any(a.kind == "repelling" and abs(a.cycle[0] - FIX_POS) < 1e-12 for a in atts)


@pytest.mark.parametrize("spec", [expaffine(-2), quadexp(1.1), quadexp(0.5)], ids=str)
def test_attractor_certificates(spec):
    th = np.exp(2j * np.pi * np.arange(256) / 256)
    for a in find_attractors(spec, max_period=2):
        z = a.cycle[0]
        w = z
        for _ in range(a.period):
            w = complex(f_array(spec, w))
        assert abs(w - z) < 1e-9
        if a.kind == "attracting":
            assert abs(a.multiplier) < 1 - 1e-10
            # a 1e-6 ball maps into itself under f^p
            ring = z + 1e-6 * th
            img = ring
            for _ in range(a.period):
                img = f_array(spec, img)
            assert np.all(np.abs(img - z) < 1e-6)
