"""Hairs and endpoints of f_a(z) = e^z + a, a < -1, by pulling back along external addresses.

Strip j is {(2j-1) pi < Im z <= (2j+1) pi}; the inverse branch into strip j is
L_j(w) = Log(w - a) + 2 pi i j with the principal Log.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .catalog import expaffine
from .dynamics import EscapeClass, Label, classify_escape
from .errors import AtSingularValue, NoConvergence

J_MAX = 64
Z_BASE = 10.0
STOP_GAP = 1e-12
TOL_ENDPOINT = 1e-8


def _primitive(word):
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word[:p] * (n // p) == word:
            return word[:p]
    return word


@dataclass(frozen=True)
class ExternalAddress:
    preperiod: tuple
    period: tuple

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")
        per = tuple(int(x) for x in self.period)
        pre = [int(x) for x in self.preperiod]
        per = tuple(_primitive(list(per)))
        # absorb a preperiod tail that already matches the cycle
        while pre and pre[-1] == per[-1]:
            pre.pop()
            per = (per[-1],) + per[:-1]
        object.__setattr__(self, "preperiod", tuple(pre))
        object.__setattr__(self, "period", per)

    @property
    def bound(self) -> int:
        return max(abs(x) for x in self.preperiod + self.period)

    def __getitem__(self, n: int) -> int:
        k = len(self.preperiod)
        if n < k:
            return self.preperiod[n]
        return self.period[(n - k) % len(self.period)]

    def word(self, n: int):
        return [self[i] for i in range(n)]

    def shift(self) -> "ExternalAddress":
        if self.preperiod:
            return ExternalAddress(self.preperiod[1:], self.period)
        return ExternalAddress((), self.period[1:] + self.period[:1])

    def shifts(self, n: int) -> "ExternalAddress":
        s = self
        for _ in range(n):
            s = s.shift()
        return s

    def __str__(self):
        return ",".join(map(str, self.preperiod)) + "|" + ",".join(map(str, self.period))


def parse_address(text: str) -> ExternalAddress:
    """``pre|per`` with comma-separated integers, e.g. ``0,1|2,-1``; a bare word is purely periodic."""
    text = text.strip().strip("[]").replace("−", "-")
    pre, bar, per = text.partition("|")
    if not bar:
        pre, per = "", pre
    ints = lambda s: tuple(int(x) for x in s.split(",") if x.strip())
    return ExternalAddress(ints(pre), ints(per))


def inverse_branch(a: complex, j: int, w: complex) -> complex:
    """L_j(w) = Log(w - a) + 2 pi i j, so that e^{L_j(w)} + a = w."""
    d = complex(w) - complex(a)
    if d == 0:
        raise AtSingularValue(f"w = a = {a} has no preimage")
    return cmath.log(d) + 2j * math.pi * j


def _pull(a, word, z):
    """L_{word[0]} o ... o L_{word[-1]} (z), vectorised over z."""
    z = np.asarray(z, dtype=complex)
    for j in reversed(word):
        d = z - a
        if np.any(d == 0):
            raise AtSingularValue("pullback hit the singular value")
        z = np.log(d) + 2j * math.pi * j
    return z


def _check(a, s: ExternalAddress, j_max):
    if not (np.isreal(a) and np.real(a) < -1):
        raise ValueError("hairs are traced for real a < -1")
    if s.bound > j_max:
        raise ValueError(f"address bound {s.bound} exceeds j_max={j_max}")


def trace_endpoint(a, s: ExternalAddress, depth: int = 200, z_base: complex = Z_BASE, j_max: int = J_MAX):
    """Nested pullback limit of z_base along s; returns (endpoint, convergence_gap, gaps)."""
    a = float(np.real(a))
    _check(a, s, j_max)
    if depth < 1:
        raise NoConvergence("depth 0: no pullback performed")
    word = s.word(depth)
    prev = complex(z_base)
    gaps = []
    z = prev
    for n in range(1, depth + 1):
        z = complex(_pull(a, word[:n], z_base))
        gaps.append(abs(z - prev))
        prev = z
        if gaps[-1] < STOP_GAP:
            break
    gap = gaps[-1]
    if not gap < TOL_ENDPOINT:
        raise NoConvergence(f"pullback gap {gap:.3g} after {depth} steps")
    return z, gap, gaps


@dataclass
class Hair:
    address: ExternalAddress
    endpoint: complex
    samples: np.ndarray
    convergence_gap: float
    depth: int
    T: np.ndarray
    endpoint_class: Optional[EscapeClass] = None
    flags: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        c = self.endpoint_class
        return {
            "address": str(self.address),
            "endpoint": [self.endpoint.real, self.endpoint.imag],
            "convergence_gap": self.convergence_gap,
            "class": None if c is None else json.loads(c.to_json()),
            "meandering": self.flags.get("meandering"),
            "samples": [[float(z.real), float(z.imag)] for z in self.samples],
        }


def hair_samples(a, s: ExternalAddress, depth: int, T) -> np.ndarray:
    """``depth``-fold pullbacks of the real points T along s."""
    return _pull(float(np.real(a)), s.word(depth), np.asarray(T, dtype=complex))


def trace_hair(a, s: ExternalAddress, depth: int = 3, t_samples: int = 64, endpoint_depth: int = 200, j_max: int = J_MAX) -> Hair:
    """Endpoint plus the pullback of the ray [10, 1e300] (geometric grid), ordered outward."""
    e, gap, _ = trace_endpoint(a, s, endpoint_depth, j_max=j_max)
    T = np.geomspace(Z_BASE, 1e300, t_samples) if t_samples > 1 else np.array([Z_BASE])
    return Hair(s, e, hair_samples(a, s, depth, T), gap, depth, T)


def shift_residual(a, s: ExternalAddress, depth: int = 3, t_samples: int = 64) -> float:
    """max |f_a(hair_d(s)(T)) - hair_{d-1}(sigma s)(T)| over the sample grid."""
    T = np.geomspace(Z_BASE, 1e300, t_samples)
    h = hair_samples(a, s, depth, T)
    g = hair_samples(a, s.shift(), depth - 1, T)
    img = np.exp(h) + float(np.real(a))
    return float(np.max(np.abs(img - g) / np.maximum(1.0, np.abs(g))))


def classify_endpoint(a, hair: Hair, ladder, budget: int = 200) -> EscapeClass:
    """Speed class of a hair endpoint; not fast means meandering.

    A repelling orbit cannot be followed in floating point, so the endpoint
    orbit is shadowed by the endpoints of the shifted addresses, which is
    eventually periodic for the addresses handled here.
    """
    if hair is None or not (hair.convergence_gap < TOL_ENDPOINT):
        return EscapeClass(Label.UNDECIDED, z=None if hair is None else hair.endpoint, evidence=["no convergence"])
    s = hair.address
    n_orbit = len(s.preperiod) + len(s.period)
    orbit = [hair.endpoint]
    t = s
    for _ in range(n_orbit):
        t = t.shift()
        orbit.append(trace_endpoint(a, t)[0])
    spec = expaffine(float(np.real(a)))
    # the shadow orbit closes up: e(sigma^{pre+per} s) = e(sigma^{pre} s)
    closes = abs(orbit[-1] - orbit[len(s.preperiod)]) < 1e-8
    if closes:
        res = EscapeClass(Label.BOUNDED, steps=n_orbit, evidence=["shadow orbit periodic", max(abs(z) for z in orbit)], z=hair.endpoint)
    else:
        res = classify_escape(spec, hair.endpoint, ladder, budget)
    hair.endpoint_class = res
    hair.flags["meandering"] = not res.fast
    return res
