"""Closed-form entire function families and their basic analytic data.

Families:

    expaffine   f(z) = e^z + a
    fatou       f(z) = z + 1 + e^{-z}
    quadexp     f(z) = lam * z^2 * exp(z - z^2),  lam > 0
    cosine      f(z) = (4 pi / 3) (1 - cos z)
    scaled      f(z) = base(z) / L,  L > 0

Values that would exceed 1e300 in modulus are returned as a ``LogValue``
(log-modulus, argument) instead of a complex number.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar

LOG_BIG = math.log(1e300)
LOG_TINY = -745.0
# past this log-modulus a LogValue can no longer be turned back into a complex
LOG_REPR = 700.0


class LogValue(NamedTuple):
    """A complex number too large for a double, stored as exp(logmod + i*arg)."""

    logmod: float
    arg: float

    def to_complex(self) -> complex:
        if self.logmod > 709.0:
            return complex(math.inf, math.inf)
        return cmath.rect(math.exp(self.logmod), self.arg)


Value = Union[complex, LogValue]


def log_modulus(v: Value) -> float:
    if isinstance(v, LogValue):
        return v.logmod
    a = abs(v)
    return math.log(a) if a > 0 else -math.inf


def _wrap(theta):
    return np.angle(np.exp(1j * np.asarray(theta, dtype=float)))


@dataclass(frozen=True)
class FunctionSpec:
    family: str
    a: complex = 0j
    lam: float = 1.0
    L: float = 1.0
    base: Optional["FunctionSpec"] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "quadexp" and not self.lam > 0:
            raise ValueError("lambda must be > 0")
        if self.family == "scaled":
            if not self.L > 0:
                raise ValueError("L must be > 0")
            if self.base is None:
                raise ValueError("scaled needs a base spec")

    def __str__(self):
        return format_spec(self)


FAMILIES = ("expaffine", "fatou", "quadexp", "cosine", "scaled")


def expaffine(a) -> FunctionSpec:
    return FunctionSpec("expaffine", a=complex(a))


def fatou() -> FunctionSpec:
    return FunctionSpec("fatou")


def quadexp(lam: float) -> FunctionSpec:
    return FunctionSpec("quadexp", lam=float(lam))


def cosine() -> FunctionSpec:
    return FunctionSpec("cosine")


def scaled(base: FunctionSpec, L: float) -> FunctionSpec:
    return FunctionSpec("scaled", base=base, L=float(L))


# ---------------------------------------------------------------------------
# text tokens: family[:key=value{,key=value}]


def _parse_number(s: str) -> complex:
    s = s.strip().replace("−", "-")
    if s.endswith("i"):
        return complex(s[:-1] + "j")
    return complex(float(s))


def _format_number(x: complex) -> str:
    x = complex(x)
    if x.imag == 0:
        return repr(float(x.real))
    return f"{x.real!r}{x.imag:+}i"


def parse_spec(token: str) -> FunctionSpec:
    """Parse ``quadexp:lambda=1.1``, ``scaled:base=fatou,L=4`` and so on."""
    token = token.strip()
    family, _, rest = token.partition(":")
    family = family.lower()
    if family == "scaled":
        if not rest.startswith("base="):
            raise ValueError(f"bad scaled token {token!r}")
        body = rest[len("base="):]
        cut = body.rfind(",L=")
        if cut < 0:
            raise ValueError(f"scaled token needs L: {token!r}")
        L = _parse_number(body[cut + 3:]).real
        return scaled(parse_spec(body[:cut]), L)
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"bad parameter {item!r} in {token!r}")
            params[key.strip().lower()] = _parse_number(val)
    if family == "expaffine":
        return expaffine(params.get("a", 0j))
    if family == "quadexp":
        lam = params.get("lambda", params.get("lam"))
        if lam is None:
            raise ValueError("quadexp needs lambda")
        return quadexp(lam.real)
    if family == "fatou":
        return fatou()
    if family == "cosine":
        return cosine()
    raise ValueError(f"unknown family {family!r}")


def format_spec(spec: FunctionSpec) -> str:
    if spec.family == "expaffine":
        return f"expaffine:a={_format_number(spec.a)}"
    if spec.family == "quadexp":
        return f"quadexp:lambda={spec.lam!r}"
    if spec.family == "scaled":
        return f"scaled:base={format_spec(spec.base)},L={spec.L!r}"
    return spec.family


# ---------------------------------------------------------------------------
# vectorised kernels (complex arrays in, complex arrays out)


def f_array(spec: FunctionSpec, z):
    z = np.asarray(z, dtype=complex)
    fam = spec.family
    with np.errstate(all="ignore"):
        if fam == "expaffine":
            return np.exp(z) + spec.a
        if fam == "fatou":
            return z + 1 + np.exp(-z)
        if fam == "quadexp":
            return spec.lam * z * z * np.exp(z - z * z)
        if fam == "cosine":
            return (4 * np.pi / 3) * (1 - np.cos(z))
        return f_array(spec.base, z) / spec.L


def df_array(spec: FunctionSpec, z):
    z = np.asarray(z, dtype=complex)
    fam = spec.family
    with np.errstate(all="ignore"):
        if fam == "expaffine":
            return np.exp(z)
        if fam == "fatou":
            return 1 - np.exp(-z)
        if fam == "quadexp":
            return spec.lam * np.exp(z - z * z) * z * (2 + z - 2 * z * z)
        if fam == "cosine":
            return (4 * np.pi / 3) * np.sin(z)
        return df_array(spec.base, z) / spec.L


def _log_one_minus_cos(z):
    # log(1 - cos z) without overflow for large |Im z|
    y = z.imag
    out = np.log(1 - np.cos(np.where(np.abs(y) > 40, 0, z)))
    up = y > 40
    dn = y < -40
    if up.any():
        w = z[up]
        out[up] = -np.log(2) + 1j * np.pi - 1j * w + np.log1p(np.exp(2j * w) - 2 * np.exp(1j * w))
    if dn.any():
        w = z[dn]
        out[dn] = -np.log(2) + 1j * np.pi + 1j * w + np.log1p(np.exp(-2j * w) - 2 * np.exp(-1j * w))
    return out


def _log_sin(z):
    y = z.imag
    out = np.log(np.sin(np.where(np.abs(y) > 40, 0.5, z)))
    up = y > 40
    dn = y < -40
    if up.any():
        w = z[up]
        # sin w = (e^{iw} - e^{-iw}) / 2i, e^{-iw} dominant
        out[up] = -1j * w + np.log(-1 / 2j) + np.log1p(-np.exp(2j * w))
    if dn.any():
        w = z[dn]
        out[dn] = 1j * w + np.log(1 / 2j) + np.log1p(-np.exp(-2j * w))
    return out


def log_f_array(spec: FunctionSpec, z):
    """A logarithm of f(z), computed without forming f(z) when it is huge.

    The imaginary part is some argument of f(z), not necessarily principal.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    fam = spec.family
    with np.errstate(all="ignore"):
        if fam == "expaffine":
            big = z.real > 40
            out = np.log(np.exp(np.where(big, 0, z)) + spec.a)
            if big.any():
                w = z[big]
                out[big] = w + np.log1p(spec.a * np.exp(-w))
            return out
        if fam == "fatou":
            big = z.real < -40
            out = np.log(np.where(big, 1, z + 1 + np.exp(-z)))
            if big.any():
                w = z[big]
                out[big] = -w + np.log1p((w + 1) * np.exp(w))
            return out
        if fam == "quadexp":
            x, y = z.real, z.imag
            re = x - (x - y) * (x + y)
            im = y - 2 * x * y
            return math.log(spec.lam) + 2 * np.log(z) + re + 1j * im
        if fam == "cosine":
            return math.log(4 * math.pi / 3) + _log_one_minus_cos(z)
        return log_f_array(spec.base, z) - math.log(spec.L)


def log_df_array(spec: FunctionSpec, z):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    fam = spec.family
    with np.errstate(all="ignore"):
        if fam == "expaffine":
            return z.copy()
        if fam == "fatou":
            big = z.real < -40
            out = np.log(np.where(big, 1, 1 - np.exp(-z)))
            if big.any():
                w = z[big]
                out[big] = -w + 1j * np.pi + np.log1p(-np.exp(w))
            return out
        if fam == "quadexp":
            x, y = z.real, z.imag
            re = x - (x - y) * (x + y)
            im = y - 2 * x * y
            return math.log(spec.lam) + re + 1j * im + np.log(z) + np.log(2 + z - 2 * z * z)
        if fam == "cosine":
            return math.log(4 * math.pi / 3) + _log_sin(z)
        return log_df_array(spec.base, z) - math.log(spec.L)


# ---------------------------------------------------------------------------
# scalar, log-safe evaluation


def _asymptotic(spec: FunctionSpec, logmod: float, arg: float) -> Value:
    """f at a point whose modulus exceeds the double range.

    Only the sign pattern of the dominating exponential is resolvable here;
    everything else is below the rounding level of the inputs.
    """
    c, s = math.cos(arg), math.sin(arg)
    fam = spec.family
    if fam == "scaled":
        v = _asymptotic(spec.base, logmod, arg)
        if isinstance(v, LogValue):
            return LogValue(v.logmod - math.log(spec.L), v.arg)
        return v / spec.L
    if fam == "expaffine":
        if c > 0:
            return LogValue(math.inf, 0.0)
        if c < 0:
            return complex(spec.a)
    elif fam == "fatou":
        if c > 0:
            return LogValue(logmod, arg)
        if c < 0:
            return LogValue(math.inf, 0.0)
    elif fam == "quadexp":
        c2 = math.cos(2 * arg)
        if c2 < 0:
            return LogValue(math.inf, 0.0)
        if c2 > 0:
            return 0j
    elif fam == "cosine":
        if s != 0:
            return LogValue(math.inf, 0.0)
    return LogValue(math.nan, math.nan)


def _pack(spec, z, direct, logform) -> Value:
    lv = complex(logform(spec, z)[0])
    if math.isnan(lv.real):
        v = complex(direct(spec, z))
        if cmath.isfinite(v):
            return v
        return LogValue(math.nan, math.nan)
    if lv.real > LOG_BIG:
        return LogValue(lv.real, float(_wrap(lv.imag)) if math.isfinite(lv.imag) else 0.0)
    if lv.real < LOG_TINY:
        return 0j
    return complex(direct(spec, z))


def evaluate(spec: FunctionSpec, z: Value) -> Value:
    """f(z), or a LogValue when |f(z)| > 1e300."""
    if isinstance(z, LogValue):
        if math.isnan(z.logmod):
            return z
        if z.logmod > LOG_REPR or (spec_core(spec).family == "quadexp" and z.logmod > 300):
            return _asymptotic(spec, z.logmod, z.arg)
        z = z.to_complex()
    return _pack(spec, complex(z), f_array, log_f_array)


def derivative(spec: FunctionSpec, z: Value) -> Value:
    """f'(z) from the closed form, with the same overflow contract as evaluate."""
    if isinstance(z, LogValue):
        if z.logmod > LOG_REPR:
            return LogValue(math.nan, math.nan)
        z = z.to_complex()
    return _pack(spec, complex(z), df_array, log_df_array)


def spec_core(spec: FunctionSpec) -> FunctionSpec:
    while spec.family == "scaled":
        spec = spec.base
    return spec


def scale_factor(spec: FunctionSpec) -> float:
    L = 1.0
    while spec.family == "scaled":
        L *= spec.L
        spec = spec.base
    return L


# ---------------------------------------------------------------------------
# singular values


@dataclass
class SingularSet:
    asymptotic_values: list
    critical_values: list
    critical_points: list
    possibly_incomplete: bool = False
    truncated: bool = False


def _crit_factor(spec: FunctionSpec):
    """A function with the same zeros as f' and its derivative."""
    fam = spec.family
    if fam == "quadexp":
        return (lambda z: z * (2 + z - 2 * z * z), lambda z: 2 + 2 * z - 6 * z * z)
    if fam == "fatou":
        return (lambda z: 1 - np.exp(-z), lambda z: np.exp(-z))
    if fam == "cosine":
        return (np.sin, np.cos)
    return None


def default_box(spec: FunctionSpec, k_box: int = 2):
    core = spec_core(spec)
    if core.family == "fatou":
        h = 2 * math.pi * k_box + 1.0
        return (-1.0, 1.0, -h, h)
    if core.family == "cosine":
        return (-math.pi * k_box - 1.0, math.pi * k_box + 1.0, -1.0, 1.0)
    return (-3.0, 3.0, -3.0, 3.0)


def newton_roots(h, dh, box, n_seed=40, iters=60, dedupe=1e-8, tol=1e-12):
    """Roots of h in box by Newton from an n_seed x n_seed grid."""
    x0, x1, y0, y1 = box
    xs = np.linspace(x0, x1, n_seed)
    ys = np.linspace(y0, y1, n_seed)
    z = (xs[None, :] + 1j * ys[:, None]).ravel()
    with np.errstate(all="ignore"):
        for _ in range(iters):
            step = h(z) / dh(z)
            z = z - np.where(np.isfinite(step), step, 0)
        ok = np.isfinite(z) & (np.abs(h(z)) < tol)
    z = z[ok]
    z = z[(z.real >= x0 - 1e-9) & (z.real <= x1 + 1e-9) & (z.imag >= y0 - 1e-9) & (z.imag <= y1 + 1e-9)]
    roots = []
    for r in sorted(z, key=lambda w: (round(w.real, 6), round(w.imag, 6))):
        if all(abs(r - q) >= dedupe for q in roots):
            roots.append(complex(r))
    return roots, not ok.any()


def singular_values(spec: FunctionSpec, box=None, k_box: int = 2) -> SingularSet:
    core = spec_core(spec)
    L = scale_factor(spec)
    if box is None:
        box = default_box(spec, k_box)
    if core.family == "expaffine":
        return SingularSet([complex(core.a) / L], [], [])
    asym = [0j] if core.family == "quadexp" else []
    h, dh = _crit_factor(core)
    pts, failed = newton_roots(h, dh, box)
    # polish against f' itself
    polished = []
    for c in pts:
        for _ in range(3):
            d = complex(df_array(core, c))
            dd = (complex(df_array(core, c + 1e-6)) - complex(df_array(core, c - 1e-6))) / 2e-6
            if dd == 0 or not cmath.isfinite(d / dd):
                break
            c = c - d / dd
        polished.append(c)
    crit_vals = []
    for c in polished:
        v = complex(f_array(spec, c))
        if all(abs(v - u) > 1e-8 for u in crit_vals):
            crit_vals.append(v)
    return SingularSet(
        asymptotic_values=asym,
        critical_values=crit_vals,
        critical_points=polished,
        possibly_incomplete=failed,
        truncated=core.family in ("fatou", "cosine"),
    )


# ---------------------------------------------------------------------------
# maximum modulus


def _log_abs_on_circle(spec, r, theta):
    return log_f_array(spec, r * np.exp(1j * np.asarray(theta))).real


def max_modulus(spec: FunctionSpec, r: float, n_samples: int = 4096) -> float:
    """log M(r, f): the log of the maximum of |f| on |z| = r."""
    if not r > 0:
        raise ValueError("r must be > 0")
    if spec.family == "scaled":
        return max_modulus(spec.base, r, n_samples) - math.log(spec.L)
    if spec.family == "expaffine" and spec.a.imag == 0 and spec.a.real >= 0:
        return r + math.log1p(spec.a.real * math.exp(-r)) if r < 700 else r

    theta = np.linspace(0, 2 * np.pi, n_samples, endpoint=False)
    vals = _log_abs_on_circle(spec, r, theta)
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    h = 2 * np.pi / n_samples
    best = float(vals.max())
    # refine the strongest few peaks; symmetric families have several
    order = np.argsort(vals)[::-1]
    seen = []
    for i in order[:64]:
        t0 = theta[i]
        if any(abs(_wrap(t0 - s)) < 3 * h for s in seen):
            continue
        seen.append(t0)
        if len(seen) > 6:
            break
        res = minimize_scalar(
            lambda t: -float(_log_abs_on_circle(spec, r, [t])[0]),
            bracket=None,
            bounds=(t0 - h, t0 + h),
            method="bounded",
            options={"xatol": 1e-13},
        )
        best = max(best, -float(res.fun))
    return best
